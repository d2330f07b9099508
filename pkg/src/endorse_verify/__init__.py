"""Verifier for weighted multi-party endorsement policies.

Builds the explicit DTMC response tree for a policy, labels it with
accepted weights, synthesizes the reachability property, and checks it
three ways: exact dynamic-programming computation, seeded Monte-Carlo
estimation, and Wald's sequential probability ratio test. Models and
properties export to PRISM source formats for external cross-checking.
"""

from .policy import (
    Organization,
    Policy,
    PolicyError,
    drop_org,
    load_policy,
    parse_policy,
    serialize_policy,
    total_weight,
    with_refusal_prob,
    with_weight_threshold,
)
from .dtmc import (
    ACCEPT,
    REFUSE,
    MAX_TREE_ORGS,
    DtmcModel,
    DtmcNode,
    ModelTooLargeError,
    PltlSpec,
    build_dtmc,
    dump_model,
    generate_rejection_spec,
    generate_spec,
    label_weights,
)
from .oracle import (
    OutcomeDistribution,
    exact_acceptance_probability,
    exact_rejection_probability,
    verdict_exact,
    weight_distribution,
)
from .smc import (
    RNG_ID,
    Estimate,
    HypothesisResult,
    SimConfig,
    batch_rng,
    estimate_probability,
    hoeffding_halfwidth,
    hypothesis_test,
    required_samples,
    result_record,
    simulate_outcome,
    simulate_outcomes,
)
from .prism import (
    ParsedDtmc,
    PrismArtifacts,
    export_artifacts,
    export_model,
    export_property,
    parse_model,
    state_numbering,
)

__version__ = "0.1.0"

__all__ = [
    "Organization",
    "Policy",
    "PolicyError",
    "drop_org",
    "load_policy",
    "parse_policy",
    "serialize_policy",
    "total_weight",
    "with_refusal_prob",
    "with_weight_threshold",
    "ACCEPT",
    "REFUSE",
    "MAX_TREE_ORGS",
    "DtmcModel",
    "DtmcNode",
    "ModelTooLargeError",
    "PltlSpec",
    "build_dtmc",
    "dump_model",
    "generate_rejection_spec",
    "generate_spec",
    "label_weights",
    "OutcomeDistribution",
    "exact_acceptance_probability",
    "exact_rejection_probability",
    "verdict_exact",
    "weight_distribution",
    "RNG_ID",
    "Estimate",
    "HypothesisResult",
    "SimConfig",
    "batch_rng",
    "estimate_probability",
    "hoeffding_halfwidth",
    "hypothesis_test",
    "required_samples",
    "result_record",
    "simulate_outcome",
    "simulate_outcomes",
    "ParsedDtmc",
    "PrismArtifacts",
    "export_artifacts",
    "export_model",
    "export_property",
    "parse_model",
    "state_numbering",
]
