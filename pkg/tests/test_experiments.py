import json

import pytest

from endorse_verify.experiments import (
    REPORTED_SWEEP_OBSERVATIONS,
    analytic_cases,
    drop_org_report,
    fit_line,
    reference_policy,
    render_csv,
    run_paper_suite,
    simulation_histogram,
    sweep_org_prob,
    sweep_weight,
)
from endorse_verify.oracle import exact_acceptance_probability
from endorse_verify.policy import Organization, Policy, PolicyError
from endorse_verify.smc import SimConfig

CFG = SimConfig(samples=2000, seed=11, batch_size=512)

EXPECTED_EXACT_SWEEP = {
    1: 0.999986,
    2: 0.999800,
    3: 0.999114,
    4: 0.988614,
    5: 0.970200,
    6: 0.902286,
    7: 0.0,
}


def test_reference_policy_shape():
    policy = reference_policy()
    assert [(o.id, o.weight, o.refusal_prob) for o in policy.organizations] == [
        ("O1", 1, 0.07),
        ("O2", 3, 0.01),
        ("O3", 2, 0.02),
    ]
    assert policy.weight_threshold == 5
    assert policy.probability_threshold == 0.95


def test_analytic_cases_exact_values():
    expected = [1.0, 1.0, 0.0, 0.25]
    cases = analytic_cases()
    assert [c.expected_exact for c in cases] == expected
    for case in cases:
        assert exact_acceptance_probability(case.policy) == case.expected_exact


def test_sweep_weight_reference(ref_policy):
    rows = sweep_weight(ref_policy, 1, 7, CFG)
    assert [r.weight_threshold for r in rows] == list(range(1, 8))
    for row in rows:
        assert row.exact_p == pytest.approx(EXPECTED_EXACT_SWEEP[row.weight_threshold], abs=1e-9)
        assert row.samples == CFG.samples
        assert row.seed == CFG.seed
    exacts = [r.exact_p for r in rows]
    assert all(a >= b for a, b in zip(exacts, exacts[1:]))


def test_sweep_weight_single_row(ref_policy):
    rows = sweep_weight(ref_policy, 5, 5, CFG)
    assert len(rows) == 1
    assert rows[0].exact_p == pytest.approx(0.9702, abs=1e-12)


def test_sweep_weight_validates_range(ref_policy):
    with pytest.raises(ValueError, match="w_min"):
        sweep_weight(ref_policy, 5, 4, CFG)
    with pytest.raises(ValueError, match="w_min"):
        sweep_weight(ref_policy, -1, 4, CFG)


def test_sweep_org_prob_linear(ref_policy):
    rows = sweep_org_prob(ref_policy, "O3", 0.98, 0.79, 0.01, CFG)
    assert len(rows) == 20
    for row in rows:
        # acceptance at threshold 5 requires both O2 and O3
        assert row.exact_p == pytest.approx(0.99 * row.acceptance_prob, abs=1e-12)
    fit = fit_line([r.acceptance_prob for r in rows], [r.exact_p for r in rows])
    assert fit.max_residual <= 1e-9
    assert fit.slope == pytest.approx(0.99, abs=1e-9)


def test_sweep_org_prob_extremes(ref_policy):
    zero = sweep_org_prob(ref_policy, "O3", 0.0, 0.0, 0.01, CFG)
    assert zero[0].exact_p == 0.0
    one = sweep_org_prob(ref_policy, "O3", 1.0, 1.0, 0.01, CFG)
    assert one[0].exact_p == pytest.approx(0.99, abs=1e-12)


def test_sweep_org_prob_validation(ref_policy):
    with pytest.raises(PolicyError, match="unknown organization"):
        sweep_org_prob(ref_policy, "O9", 0.1, 0.9, 0.01, CFG)
    with pytest.raises(ValueError, match="step"):
        sweep_org_prob(ref_policy, "O3", 0.1, 0.9, 0.0, CFG)
    with pytest.raises(ValueError, match="p_from"):
        sweep_org_prob(ref_policy, "O3", -0.1, 0.9, 0.01, CFG)


def test_drop_org_report(ref_policy):
    report = drop_org_report(ref_policy, "O1", CFG)
    assert report.exact_difference == 0.0
    assert report.exact_before == pytest.approx(0.9702, abs=1e-12)
    heavy = drop_org_report(ref_policy, "O2", CFG)
    assert heavy.exact_after == 0.0
    single = Policy(
        organizations=(Organization(id="A", weight=1, refusal_prob=0.1),),
        weight_threshold=1,
        probability_threshold=0.5,
    )
    with pytest.raises(PolicyError, match="last organization"):
        drop_org_report(single, "A", CFG)


def test_simulation_histogram(ref_policy):
    rows = simulation_histogram(ref_policy, CFG)
    assert sum(r.count for r in rows) == CFG.samples
    assert sum(r.frequency for r in rows) == pytest.approx(1.0, abs=1e-12)
    assert sum(r.exact_mass for r in rows) == pytest.approx(1.0, abs=1e-12)
    assert [r.weight for r in rows] == sorted(r.weight for r in rows)


def test_render_csv_format(ref_policy):
    rows = sweep_weight(ref_policy, 5, 6, CFG)
    text = render_csv(rows, CFG)
    lines = text.splitlines()
    assert lines[0].startswith("# seed=11 rng=")
    assert "samples=2000" in lines[0]
    assert lines[1] == "weight_threshold,exact_p,p_hat,ci_halfwidth,samples,seed"
    assert lines[2].startswith("5,0.9702,")
    assert text.endswith("\n")
    with pytest.raises(ValueError, match="no rows"):
        render_csv([], CFG)


def test_reported_observations_cover_table():
    assert sorted(REPORTED_SWEEP_OBSERVATIONS) == list(range(1, 8))


def test_run_paper_suite(tmp_path):
    result = run_paper_suite(tmp_path / "suite", CFG, make_plots=True)
    assert result.passed
    names = {check.name for check in result.checks}
    assert "analytic_coin_flips_exact" in names
    assert "drop_O1_exact_unchanged" in names
    assert "sweep_reported_rows_1_3_noise_flagged" in names
    produced = {path.name for path in result.files}
    assert produced == {
        "analytic_cases.csv",
        "orgprob_sweep.csv",
        "orgprob_sweep.png",
        "weight_sweep.csv",
        "weight_sweep.png",
        "reported_comparison.csv",
        "summary.json",
    }
    summary = json.loads((tmp_path / "suite" / "summary.json").read_text(encoding="utf-8"))
    assert summary["passed"] is True
    assert summary["config"]["seed"] == CFG.seed
    flagged = [
        check for check in summary["checks"] if check["name"] == "sweep_reported_rows_1_3_noise_flagged"
    ]
    assert flagged and flagged[0]["passed"]


def test_run_paper_suite_no_plots(tmp_path):
    result = run_paper_suite(tmp_path / "suite", CFG, make_plots=False)
    assert result.passed
    assert not any(path.suffix == ".png" for path in result.files)
