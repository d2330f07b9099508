"""Closed-form acceptance/rejection probabilities for a policy.

The total accepted weight is a sum of independent weighted Bernoulli
variables, so its exact distribution follows from a dynamic-programming
convolution over organizations: O(n * total_weight) instead of a 2^n
outcome enumeration. This is the ground truth the statistical engine is
validated against, and what the sweep commands report as the exact column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .policy import Policy, total_weight

__all__ = [
    "OutcomeDistribution",
    "weight_distribution",
    "exact_acceptance_probability",
    "exact_rejection_probability",
    "verdict_exact",
]

Verdict = Literal["holds", "fails"]


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact probability mass of each achievable total accepted weight."""

    entries: dict[int, float]

    def mass(self, weight: int) -> float:
        return self.entries.get(weight, 0.0)

    def tail(self, threshold: int) -> float:
        """P(total weight >= threshold), summed in ascending weight order."""
        # Deterministic summation order keeps results reproducible bit-for-bit.
        result = 0.0
        for weight in sorted(self.entries):
            if weight >= threshold:
                result += self.entries[weight]
        return result


def weight_distribution(policy: Policy) -> OutcomeDistribution:
    """Exact distribution of the total weight of accepting organizations."""
    dist = {0: 1.0}
    for org in policy.organizations:
        refuse = org.refusal_prob
        accept = org.acceptance_prob
        new: dict[int, float] = {}
        for weight, mass in dist.items():
            new[weight] = new.get(weight, 0.0) + mass * refuse
            shifted = weight + org.weight
            new[shifted] = new.get(shifted, 0.0) + mass * accept
        dist = new
    # deterministic orgs leave exact-zero entries behind; drop them
    return OutcomeDistribution(entries={w: m for w, m in sorted(dist.items()) if m != 0.0})


def _refused_weight_distribution(policy: Policy) -> OutcomeDistribution:
    # Reflection of the accepted-weight distribution: refused = total - accepted.
    total = total_weight(policy)
    accepted = weight_distribution(policy)
    return OutcomeDistribution(
        entries={total - w: m for w, m in sorted(accepted.entries.items(), reverse=True)}
    )


def exact_acceptance_probability(policy: Policy) -> float:
    """P(total accepted weight >= weight_threshold)."""
    return weight_distribution(policy).tail(policy.weight_threshold)


def exact_rejection_probability(policy: Policy) -> float:
    """P(total refused weight >= weight_threshold)."""
    return _refused_weight_distribution(policy).tail(policy.weight_threshold)


def verdict_exact(policy: Policy) -> Verdict:
    """Whether the exact acceptance probability strictly exceeds the bound."""
    if exact_acceptance_probability(policy) > policy.probability_threshold:
        return "holds"
    return "fails"
