"""Domain types for weighted endorsement policies and their document format.

A policy names the organizations on a channel, each with an integer voting
weight and a refusal probability, plus two thresholds: the total accepted
weight needed for the system to accept a transaction, and the acceptance
probability above which the policy is considered valid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

__all__ = [
    "PolicyError",
    "Organization",
    "Policy",
    "parse_policy",
    "serialize_policy",
    "load_policy",
    "total_weight",
    "drop_org",
    "with_refusal_prob",
    "with_weight_threshold",
]

_POLICY_KEYS = ("organizations", "weight_threshold", "probability_threshold")
_ORG_KEYS = ("id", "weight", "refusal_prob")


class PolicyError(ValueError):
    """Raised for malformed policy documents or invariant violations."""


def _require_int(value, path: str, minimum: int) -> int:
    # bool is a subclass of int; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise PolicyError(f"{path}: expected an integer, got {value!r}")
    if value < minimum:
        raise PolicyError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _require_prob(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PolicyError(f"{path}: expected a number in [0, 1], got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise PolicyError(f"{path}: must be in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class Organization:
    """One channel member: identifier, voting weight, refusal probability.

    ``refusal_prob`` is the probability the organization rejects a proposed
    transaction; it accepts with probability ``1 - refusal_prob``.
    """

    id: str
    weight: int
    refusal_prob: float

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise PolicyError(f"organization id must be a non-empty string, got {self.id!r}")
        _require_int(self.weight, f"organization {self.id!r}: weight", minimum=1)
        _require_prob(self.refusal_prob, f"organization {self.id!r}: refusal_prob")

    @property
    def acceptance_prob(self) -> float:
        return 1.0 - self.refusal_prob


@dataclass(frozen=True)
class Policy:
    """An ordered set of organizations plus the two verification thresholds.

    ``weight_threshold`` is the minimum total accepted weight for system-level
    acceptance (comparison is >=). ``probability_threshold`` is the bound the
    acceptance probability must strictly exceed for the policy to be valid.
    A weight threshold above the total weight is legal and simply yields
    acceptance probability 0.
    """

    organizations: tuple[Organization, ...]
    weight_threshold: int
    probability_threshold: float

    def __post_init__(self):
        object.__setattr__(self, "organizations", tuple(self.organizations))
        if not self.organizations:
            raise PolicyError("organizations: must contain at least one organization")
        seen = set()
        for org in self.organizations:
            if org.id in seen:
                raise PolicyError(f"organizations: duplicate id {org.id!r}")
            seen.add(org.id)
        _require_int(self.weight_threshold, "weight_threshold", minimum=0)
        _require_prob(self.probability_threshold, "probability_threshold")

    def org_index(self, org_id: str) -> int:
        for i, org in enumerate(self.organizations):
            if org.id == org_id:
                return i
        raise PolicyError(f"unknown organization id {org_id!r}")


def parse_policy(text: str) -> Policy:
    """Parse and validate a policy document (strict JSON schema).

    Unknown keys are rejected to catch typos in experiment configs. Errors
    name the offending field path, e.g. ``organizations[2].refusal_prob``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolicyError(f"malformed policy document: {exc}") from exc
    if not isinstance(doc, dict):
        raise PolicyError("malformed policy document: top level must be an object")

    unknown = set(doc) - set(_POLICY_KEYS)
    if unknown:
        raise PolicyError(f"unknown keys: {sorted(unknown)}")
    missing = set(_POLICY_KEYS) - set(doc)
    if missing:
        raise PolicyError(f"missing keys: {sorted(missing)}")

    raw_orgs = doc["organizations"]
    if not isinstance(raw_orgs, list):
        raise PolicyError("organizations: expected a list")
    if not raw_orgs:
        raise PolicyError("organizations: must contain at least one organization")

    orgs = []
    for i, entry in enumerate(raw_orgs):
        path = f"organizations[{i}]"
        if not isinstance(entry, dict):
            raise PolicyError(f"{path}: expected an object")
        unknown = set(entry) - set(_ORG_KEYS)
        if unknown:
            raise PolicyError(f"{path}: unknown keys: {sorted(unknown)}")
        missing = set(_ORG_KEYS) - set(entry)
        if missing:
            raise PolicyError(f"{path}: missing keys: {sorted(missing)}")
        if not isinstance(entry["id"], str) or not entry["id"]:
            raise PolicyError(f"{path}.id: expected a non-empty string")
        orgs.append(
            Organization(
                id=entry["id"],
                weight=_require_int(entry["weight"], f"{path}.weight", minimum=1),
                refusal_prob=_require_prob(entry["refusal_prob"], f"{path}.refusal_prob"),
            )
        )

    ids = [o.id for o in orgs]
    for org_id in ids:
        if ids.count(org_id) > 1:
            raise PolicyError(f"organizations: duplicate id {org_id!r}")

    return Policy(
        organizations=tuple(orgs),
        weight_threshold=_require_int(doc["weight_threshold"], "weight_threshold", minimum=0),
        probability_threshold=_require_prob(doc["probability_threshold"], "probability_threshold"),
    )


def serialize_policy(policy: Policy) -> str:
    """Render a policy back to its canonical document form."""
    doc = {
        "organizations": [
            {"id": o.id, "weight": o.weight, "refusal_prob": o.refusal_prob}
            for o in policy.organizations
        ],
        "weight_threshold": policy.weight_threshold,
        "probability_threshold": policy.probability_threshold,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_policy(path) -> Policy:
    with open(path, encoding="utf-8") as fh:
        return parse_policy(fh.read())


def total_weight(policy: Policy) -> int:
    """Sum of all organization weights."""
    return sum(org.weight for org in policy.organizations)


def drop_org(policy: Policy, org_id: str) -> Policy:
    """Policy with one organization removed; thresholds unchanged."""
    index = policy.org_index(org_id)
    remaining = policy.organizations[:index] + policy.organizations[index + 1 :]
    if not remaining:
        raise PolicyError("cannot remove the last organization")
    return replace(policy, organizations=remaining)


def with_refusal_prob(policy: Policy, org_id: str, refusal_prob: float) -> Policy:
    """Policy with one organization's refusal probability replaced."""
    index = policy.org_index(org_id)
    orgs = list(policy.organizations)
    orgs[index] = replace(orgs[index], refusal_prob=refusal_prob)
    return replace(policy, organizations=tuple(orgs))


def with_weight_threshold(policy: Policy, weight_threshold: int) -> Policy:
    return replace(policy, weight_threshold=weight_threshold)
