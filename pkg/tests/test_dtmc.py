import math
from collections import Counter

import numpy as np
import pytest

from endorse_verify.dtmc import (
    ACCEPT,
    REFUSE,
    ModelTooLargeError,
    build_dtmc,
    dump_model,
    generate_rejection_spec,
    generate_spec,
    label_weights,
)
from endorse_verify.policy import Organization, Policy, with_weight_threshold

from brute import brute_distribution, enumerate_outcomes, leaf_index, random_policy


def _labeled(policy):
    return label_weights(build_dtmc(policy))


def _single_org_policy(refusal=0.3):
    return Policy(
        organizations=(Organization(id="A", weight=1, refusal_prob=refusal),),
        weight_threshold=1,
        probability_threshold=0.5,
    )


def test_reference_tree_structure(ref_policy):
    model = _labeled(ref_policy)
    assert len(model.nodes) == 15
    assert len(model.leaves) == 8
    assert model.root.node_id == "n0"
    assert model.root.org_id == "O1"
    assert model.root.in_prob == 1.0
    # level k models organization k's response
    assert model.root.accept_child.org_id == "O2"
    assert model.root.accept_child.accept_child.org_id == "O3"
    assert [leaf.node_id for leaf in model.leaves] == [f"L{k}" for k in range(8)]


def test_single_org_tree():
    model = _labeled(_single_org_policy(refusal=0.3))
    assert len(model.nodes) == 3
    assert model.root.accept_child.in_prob == 0.7
    assert model.root.refuse_child.in_prob == 0.3
    assert model.root.accept_child.is_leaf and model.root.refuse_child.is_leaf


def test_two_org_path_probabilities_match_enumeration():
    policy = Policy(
        organizations=(
            Organization(id="A", weight=2, refusal_prob=0.25),
            Organization(id="B", weight=1, refusal_prob=0.4),
        ),
        weight_threshold=2,
        probability_threshold=0.5,
    )
    model = _labeled(policy)
    assert len(model.leaves) == 4
    expected = {leaf_index(pattern): prob for pattern, prob, _ in enumerate_outcomes(policy)}
    for k, leaf in enumerate(model.leaves):
        assert leaf.path_probability() == pytest.approx(expected[k], abs=1e-15)


def test_reference_leaf_weights(ref_policy):
    model = _labeled(ref_policy)
    weights = Counter(leaf.total_weight for leaf in model.leaves)
    assert weights == Counter({0: 1, 1: 1, 2: 1, 3: 2, 4: 1, 5: 1, 6: 1})
    assert model.leaves[0].total_weight == 6  # all-accept path
    assert model.leaves[-1].total_weight == 0  # all-refuse path


def test_labeling_relation_and_monotonicity(ref_policy):
    model = _labeled(ref_policy)
    for node in model.nodes:
        if node.parent is None:
            assert node.total_weight == 0
            continue
        expected = node.parent.total_weight
        if node.parent_reply == ACCEPT:
            expected += node.parent.weight
        assert node.total_weight == expected
        assert node.total_weight >= node.parent.total_weight
    for node in model.nodes:
        if not node.is_leaf:
            assert len(node.children) == 2
            assert node.accept_child.in_prob + node.refuse_child.in_prob == pytest.approx(1.0, abs=1e-12)
            assert node.accept_child.parent_reply == ACCEPT
            assert node.refuse_child.parent_reply == REFUSE


def test_leaf_depth_equals_org_count(ref_policy):
    model = _labeled(ref_policy)
    for leaf in model.leaves:
        depth = 0
        node = leaf
        while node.parent is not None:
            depth += 1
            node = node.parent
        assert depth == 3


def test_generate_spec_reference(ref_policy):
    model = _labeled(ref_policy)
    spec = generate_spec(model, ref_policy)
    assert spec.targets == ("L0", "L4")
    assert spec.bound == 0.95
    assert spec.render() == "P > 0.95 [ F (L0 | L4) ]"


def test_generate_spec_threshold_extremes(ref_policy):
    model = _labeled(ref_policy)
    all_leaves = generate_spec(model, with_weight_threshold(ref_policy, 0), )
    assert all_leaves.targets == tuple(f"L{k}" for k in range(8))
    empty = generate_spec(model, with_weight_threshold(ref_policy, 7))
    assert empty.targets == ()
    assert empty.render() == "P > 0.95 [ F false ]"


def test_generate_rejection_spec(ref_policy):
    model = _labeled(ref_policy)
    spec = generate_rejection_spec(model, ref_policy)
    assert spec.targets == ("L3", "L7")  # refuse O2 and O3 / refuse everyone
    everything = generate_rejection_spec(model, with_weight_threshold(ref_policy, 0))
    assert everything.targets == tuple(f"L{k}" for k in range(8))


def test_acceptance_rejection_target_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(25):
        policy = random_policy(rng, max_orgs=6)
        model = _labeled(policy)
        accept_targets = {int(t[1:]) for t in generate_spec(model, policy).targets}
        reject_targets = {int(t[1:]) for t in generate_rejection_spec(model, policy).targets}
        mirrored = {2 ** len(policy.organizations) - 1 - k for k in reject_targets}
        assert accept_targets == mirrored


def test_spec_requires_labeled_model(ref_policy):
    model = build_dtmc(ref_policy)
    with pytest.raises(ValueError, match="not labeled"):
        generate_spec(model, ref_policy)
    with pytest.raises(ValueError, match="not labeled"):
        generate_rejection_spec(model, ref_policy)


def test_node_cap():
    orgs = tuple(Organization(id=f"G{i}", weight=1, refusal_prob=0.1) for i in range(4))
    policy = Policy(organizations=orgs, weight_threshold=1, probability_threshold=0.5)
    with pytest.raises(ModelTooLargeError, match="on-the-fly simulation"):
        build_dtmc(policy, max_orgs=3)


def test_acceptance_and_rejection_weights_cover_total(ref_policy):
    model = _labeled(ref_policy)
    for leaf in model.leaves:
        refused = 6 - leaf.total_weight
        assert 0 <= refused <= 6


def test_random_models_match_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(100):
        policy = random_policy(rng, max_orgs=7)
        model = _labeled(policy)
        probs = {leaf_index(p): prob for p, prob, _ in enumerate_outcomes(policy)}
        weights = {leaf_index(p): weight for p, _, weight in enumerate_outcomes(policy)}
        total = 0.0
        for k, leaf in enumerate(model.leaves):
            path_prob = leaf.path_probability()
            assert path_prob == pytest.approx(probs[k], abs=1e-12)
            assert leaf.total_weight == weights[k]
            total += path_prob
        assert total == pytest.approx(1.0, abs=1e-12)
        expected_targets = tuple(
            f"L{k}" for k in sorted(probs) if weights[k] >= policy.weight_threshold
        )
        assert generate_spec(model, policy).targets == expected_targets


def test_dump_model_reference(ref_policy):
    model = _labeled(ref_policy)
    dump = dump_model(model)
    lines = dump.splitlines()
    assert len(lines) == 15
    assert lines[0] == "n0 - - 1.0 0"
    assert lines[1] == f"n1 n0 accept {1 - 0.07!r} 1"
    assert lines[3] == "L0 n2 accept 0.98 6"
    assert lines[-1] == "L7 n6 refuse 0.02 0"
    assert dump_model(model) == dump  # deterministic


def test_path_probability_sums_to_one_reference(ref_policy):
    model = _labeled(ref_policy)
    assert math.fsum(leaf.path_probability() for leaf in model.leaves) == pytest.approx(1.0, abs=1e-12)
