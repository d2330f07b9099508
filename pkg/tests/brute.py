"""Independent brute-force oracles used only by the test suite.

Everything here enumerates all 2^n joint outcomes with itertools, on
purpose: it shares no code with the production dynamic-programming path,
the tree builder, or the simulator, so agreement between the two routes is
meaningful.
"""

from __future__ import annotations

import math
from itertools import product

from endorse_verify.policy import Organization, Policy


def enumerate_outcomes(policy: Policy):
    """Yield (accept_pattern, probability, accepted_weight) for all outcomes.

    ``accept_pattern`` is a tuple of booleans in organization order,
    True meaning that organization accepted.
    """
    orgs = policy.organizations
    for pattern in product((True, False), repeat=len(orgs)):
        probability = 1.0
        weight = 0
        for accepted, org in zip(pattern, orgs):
            if accepted:
                probability *= 1.0 - org.refusal_prob
                weight += org.weight
            else:
                probability *= org.refusal_prob
        yield pattern, probability, weight


def brute_distribution(policy: Policy) -> dict[int, float]:
    dist: dict[int, float] = {}
    for _, probability, weight in enumerate_outcomes(policy):
        dist[weight] = dist.get(weight, 0.0) + probability
    return {w: m for w, m in sorted(dist.items()) if m != 0.0}


def brute_acceptance(policy: Policy) -> float:
    return math.fsum(
        probability
        for _, probability, weight in enumerate_outcomes(policy)
        if weight >= policy.weight_threshold
    )


def brute_rejection(policy: Policy) -> float:
    total = sum(org.weight for org in policy.organizations)
    return math.fsum(
        probability
        for _, probability, weight in enumerate_outcomes(policy)
        if total - weight >= policy.weight_threshold
    )


def leaf_index(pattern) -> int:
    """Left-to-right leaf index for an accept pattern (acceptance = left)."""
    index = 0
    for accepted in pattern:
        index = 2 * index + (0 if accepted else 1)
    return index


def random_policy(rng, max_orgs: int = 8, max_weight: int = 5) -> Policy:
    """Seeded random policy for property-style loops."""
    n = int(rng.integers(1, max_orgs + 1))
    orgs = tuple(
        Organization(
            id=f"G{i}",
            weight=int(rng.integers(1, max_weight + 1)),
            refusal_prob=float(rng.random()),
        )
        for i in range(n)
    )
    total = sum(org.weight for org in orgs)
    return Policy(
        organizations=orgs,
        weight_threshold=int(rng.integers(0, total + 2)),
        probability_threshold=float(rng.random()),
    )
