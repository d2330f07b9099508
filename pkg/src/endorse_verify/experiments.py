"""Experiment harness: threshold sweeps, perturbation reports, and the
bundled reproduction suite for the reference three-organization policy.

Exact values come from the closed-form oracle; simulated columns come from
the seeded estimator, so every CSV is reproducible bit-for-bit for a fixed
(seed, batch_size). CSVs carry the seed, RNG id, and sample count in a
leading comment row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import plots
from .oracle import exact_acceptance_probability
from .policy import Policy, Organization, drop_org, with_refusal_prob, with_weight_threshold, total_weight
from .smc import Estimate, SimConfig, RNG_ID, estimate_probability

__all__ = [
    "SweepRow",
    "ProbSweepRow",
    "DropOrgReport",
    "AnalyticCase",
    "LineFit",
    "SuiteCheck",
    "PaperSuiteResult",
    "reference_policy",
    "analytic_cases",
    "sweep_weight",
    "sweep_org_prob",
    "fit_line",
    "drop_org_report",
    "simulation_histogram",
    "run_paper_suite",
    "render_csv",
    "REPORTED_SWEEP_OBSERVATIONS",
    "REPORTED_BASE_OBSERVATION",
    "REPORTED_DROP_OBSERVATION",
]

# Independently reported simulation results for the reference policy
# (10000 samples, quoted +/- error). Consistency anchors, never targets:
# the low-threshold rows are mutually inconsistent (the value at threshold 1
# sits far outside its own error bar relative to the exact probability, and
# rows 1-2 are non-monotone), so rows 1-3 are flagged instead of reconciled.
REPORTED_SWEEP_OBSERVATIONS: dict[int, tuple[float, float]] = {
    1: (0.9990, 0.0004),
    2: (0.9997, 0.0005),
    3: (0.9989, 0.001),
    4: (0.9894, 0.0003),
    5: (0.9717, 0.0005),
    6: (0.9035, 0.0009),
    7: (0.0, 0.0),
}
NOISE_FLAGGED_THRESHOLDS = frozenset({1, 2, 3})
RECONCILED_TOLERANCE = 0.002

# Reported system acceptance for the reference policy before/after the
# lowest-weight organization leaves the channel.
REPORTED_BASE_OBSERVATION = 0.9689
REPORTED_DROP_OBSERVATION = 0.9683


def reference_policy() -> Policy:
    """The three-organization reference system used by the bundled suite."""
    return Policy(
        organizations=(
            Organization(id="O1", weight=1, refusal_prob=0.07),
            Organization(id="O2", weight=3, refusal_prob=0.01),
            Organization(id="O3", weight=2, refusal_prob=0.02),
        ),
        weight_threshold=5,
        probability_threshold=0.95,
    )


@dataclass(frozen=True)
class AnalyticCase:
    """A refusal-vector assignment with a hand-computable acceptance probability."""

    name: str
    policy: Policy
    expected_exact: float


def analytic_cases() -> list[AnalyticCase]:
    """Four closed-form cases on the reference weights and thresholds."""
    base = reference_policy()

    def assign(probs: tuple[float, float, float]) -> Policy:
        pol = base
        for org, p in zip(base.organizations, probs):
            pol = with_refusal_prob(pol, org.id, p)
        return pol

    return [
        AnalyticCase("all_accept", assign((0.0, 0.0, 0.0)), 1.0),
        AnalyticCase("majority_accepts", assign((1.0, 0.0, 0.0)), 1.0),
        AnalyticCase("minority_accepts", assign((0.0, 1.0, 1.0)), 0.0),
        AnalyticCase("coin_flips", assign((0.5, 0.5, 0.5)), 0.25),
    ]


@dataclass(frozen=True)
class SweepRow:
    weight_threshold: int
    exact_p: float
    p_hat: float
    ci_halfwidth: float
    samples: int
    seed: int


@dataclass(frozen=True)
class ProbSweepRow:
    varied_org_id: str
    acceptance_prob: float
    exact_p: float
    p_hat: float


def sweep_weight(policy: Policy, w_min: int, w_max: int, cfg: SimConfig) -> list[SweepRow]:
    """One row per weight threshold in [w_min, w_max], exact and simulated.

    The exact column is checked to be non-increasing; a violation raises,
    since it would mean the oracle itself is broken.
    """
    if w_min > w_max:
        raise ValueError(f"w_min ({w_min}) must be <= w_max ({w_max})")
    if w_min < 0:
        raise ValueError(f"w_min must be >= 0, got {w_min}")
    rows = []
    for threshold in range(w_min, w_max + 1):
        pol = with_weight_threshold(policy, threshold)
        estimate = estimate_probability(pol, cfg)
        rows.append(
            SweepRow(
                weight_threshold=threshold,
                exact_p=exact_acceptance_probability(pol),
                p_hat=estimate.p_hat,
                ci_halfwidth=estimate.ci_halfwidth,
                samples=estimate.samples_used,
                seed=cfg.seed,
            )
        )
    for earlier, later in zip(rows, rows[1:]):
        if later.exact_p > earlier.exact_p:
            raise ValueError(
                f"exact column increased between thresholds {earlier.weight_threshold} "
                f"and {later.weight_threshold}"
            )
    return rows


def sweep_org_prob(
    policy: Policy, org_id: str, p_from: float, p_to: float, step: float, cfg: SimConfig
) -> list[ProbSweepRow]:
    """Vary one organization's acceptance probability from p_from to p_to."""
    policy.org_index(org_id)  # raises PolicyError for unknown ids
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    for name, value in (("p_from", p_from), ("p_to", p_to)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")

    count = int(round(abs(p_to - p_from) / step))
    direction = 1.0 if p_to >= p_from else -1.0
    rows = []
    for k in range(count + 1):
        acceptance = p_from + direction * k * step
        acceptance = min(max(acceptance, 0.0), 1.0)  # swallow last-point fp drift
        pol = with_refusal_prob(policy, org_id, 1.0 - acceptance)
        estimate = estimate_probability(pol, cfg)
        rows.append(
            ProbSweepRow(
                varied_org_id=org_id,
                acceptance_prob=acceptance,
                exact_p=exact_acceptance_probability(pol),
                p_hat=estimate.p_hat,
            )
        )
    return rows


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    max_residual: float


def fit_line(xs, ys) -> LineFit:
    """Least-squares line with the worst absolute residual."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    residuals = np.abs(ys - (slope * xs + intercept))
    return LineFit(slope=float(slope), intercept=float(intercept), max_residual=float(residuals.max()))


@dataclass(frozen=True)
class DropOrgReport:
    """Exact and simulated system acceptance before/after one org leaves."""

    org_id: str
    exact_before: float
    exact_after: float
    estimate_before: Estimate
    estimate_after: Estimate

    @property
    def exact_difference(self) -> float:
        return self.exact_after - self.exact_before


def drop_org_report(policy: Policy, org_id: str, cfg: SimConfig) -> DropOrgReport:
    reduced = drop_org(policy, org_id)
    return DropOrgReport(
        org_id=org_id,
        exact_before=exact_acceptance_probability(policy),
        exact_after=exact_acceptance_probability(reduced),
        estimate_before=estimate_probability(policy, cfg),
        estimate_after=estimate_probability(reduced, cfg),
    )


@dataclass(frozen=True)
class HistogramRow:
    weight: int
    count: int
    frequency: float
    exact_mass: float


def simulation_histogram(policy: Policy, cfg: SimConfig) -> list[HistogramRow]:
    """Empirical accepted-weight histogram next to the exact masses."""
    from .oracle import weight_distribution
    from .smc import batch_rng, simulate_outcomes

    counts: dict[int, int] = {}
    done = 0
    index = 0
    while done < cfg.samples:
        size = min(cfg.batch_size, cfg.samples - done)
        outcomes = simulate_outcomes(policy, batch_rng(cfg.seed, index), size)
        values, batch_counts = np.unique(outcomes, return_counts=True)
        for value, count in zip(values, batch_counts):
            counts[int(value)] = counts.get(int(value), 0) + int(count)
        done += size
        index += 1
    exact = weight_distribution(policy).entries
    weights = sorted(set(counts) | set(exact))
    return [
        HistogramRow(
            weight=w,
            count=counts.get(w, 0),
            frequency=counts.get(w, 0) / cfg.samples,
            exact_mass=exact.get(w, 0.0),
        )
        for w in weights
    ]


def render_csv(rows, cfg: SimConfig) -> str:
    """Delimited text for a list of dataclass rows, seed metadata up front."""
    if not rows:
        raise ValueError("nothing to render: no rows")
    names = [f.name for f in fields(rows[0])]
    lines = [f"# seed={cfg.seed} rng={RNG_ID} samples={cfg.samples} batch_size={cfg.batch_size}"]
    lines.append(",".join(names))
    for row in rows:
        cells = []
        for name in names:
            value = getattr(row, name)
            cells.append(repr(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SuiteCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ComparisonRow:
    weight_threshold: int
    exact_p: float
    reported_p: float
    reported_err: float
    abs_difference: float
    z_score: float
    reconciled: bool
    noise_flag: bool


def _comparison_rows(sweep: list[SweepRow], samples: int) -> list[ComparisonRow]:
    rows = []
    for entry in sweep:
        reported = REPORTED_SWEEP_OBSERVATIONS.get(entry.weight_threshold)
        if reported is None:
            continue
        reported_p, reported_err = reported
        diff = abs(entry.exact_p - reported_p)
        sigma = math.sqrt(entry.exact_p * (1.0 - entry.exact_p) / samples)
        z = 0.0 if diff == 0.0 else (diff / sigma if sigma > 0.0 else math.inf)
        flagged = entry.weight_threshold in NOISE_FLAGGED_THRESHOLDS
        rows.append(
            ComparisonRow(
                weight_threshold=entry.weight_threshold,
                exact_p=entry.exact_p,
                reported_p=reported_p,
                reported_err=reported_err,
                abs_difference=diff,
                z_score=z,
                reconciled=not flagged and diff <= RECONCILED_TOLERANCE,
                noise_flag=flagged,
            )
        )
    return rows


@dataclass(frozen=True)
class CaseRow:
    case: str
    exact_p: float
    expected_exact: float
    p_hat: float
    ci_halfwidth: float
    agrees: bool


@dataclass
class PaperSuiteResult:
    checks: list[SuiteCheck]
    files: list[Path]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def run_paper_suite(out_dir, cfg: SimConfig, make_plots: bool = True) -> PaperSuiteResult:
    """Run the full reproduction suite on the reference policy.

    Writes the analytic-case table, both invariant sweeps, the weight sweep
    with its reported-value comparison, figures, and a summary; each summary
    check must pass for the suite to count as green.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = reference_policy()
    checks: list[SuiteCheck] = []
    files: list[Path] = []

    def emit(name: str, text: str) -> Path:
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        files.append(path)
        return path

    # Analytic cases: the oracle must hit the hand-computed values exactly,
    # and the estimator must land inside its own interval.
    case_rows = []
    for case in analytic_cases():
        exact = exact_acceptance_probability(case.policy)
        estimate = estimate_probability(case.policy, cfg)
        agrees = abs(estimate.p_hat - exact) <= estimate.ci_halfwidth
        case_rows.append(
            CaseRow(
                case=case.name,
                exact_p=exact,
                expected_exact=case.expected_exact,
                p_hat=estimate.p_hat,
                ci_halfwidth=estimate.ci_halfwidth,
                agrees=agrees,
            )
        )
        checks.append(
            SuiteCheck(
                name=f"analytic_{case.name}_exact",
                passed=exact == case.expected_exact,
                detail=f"exact={exact!r} expected={case.expected_exact!r}",
            )
        )
        checks.append(
            SuiteCheck(
                name=f"analytic_{case.name}_smc_agrees",
                passed=agrees,
                detail=f"p_hat={estimate.p_hat!r} ci={estimate.ci_halfwidth!r}",
            )
        )
    emit("analytic_cases.csv", render_csv(case_rows, cfg))

    # Acceptance-probability perturbation: the exact column must be affine
    # in the varied acceptance probability.
    prob_rows = sweep_org_prob(base, "O3", 0.98, 0.79, 0.01, cfg)
    emit("orgprob_sweep.csv", render_csv(prob_rows, cfg))
    fit = fit_line([r.acceptance_prob for r in prob_rows], [r.exact_p for r in prob_rows])
    checks.append(
        SuiteCheck(
            name="orgprob_exact_linear",
            passed=fit.max_residual <= 1e-9,
            detail=f"max_residual={fit.max_residual!r} slope={fit.slope!r}",
        )
    )
    if make_plots:
        files.append(plots.plot_orgprob_sweep(prob_rows, out_dir / "orgprob_sweep.png"))

    # Membership change: removing the lowest-weight organization must leave
    # the exact probability untouched; removal can never increase it.
    drop = drop_org_report(base, "O1", cfg)
    checks.append(
        SuiteCheck(
            name="drop_O1_exact_unchanged",
            passed=drop.exact_difference == 0.0,
            detail=f"before={drop.exact_before!r} after={drop.exact_after!r}",
        )
    )
    for org in base.organizations:
        report = drop_org_report(base, org.id, cfg)
        checks.append(
            SuiteCheck(
                name=f"drop_{org.id}_never_increases",
                passed=report.exact_after <= report.exact_before,
                detail=f"before={report.exact_before!r} after={report.exact_after!r}",
            )
        )

    # Threshold sweep with the reported-value comparison.
    sweep = sweep_weight(base, 1, total_weight(base) + 1, cfg)
    emit("weight_sweep.csv", render_csv(sweep, cfg))
    if make_plots:
        files.append(plots.plot_weight_sweep(sweep, out_dir / "weight_sweep.png"))
    comparison = _comparison_rows(sweep, samples=10_000)
    emit("reported_comparison.csv", render_csv(comparison, cfg))
    reconciled_rows = [r for r in comparison if not r.noise_flag]
    checks.append(
        SuiteCheck(
            name="sweep_reported_rows_4_7_within_tolerance",
            passed=all(r.abs_difference <= RECONCILED_TOLERANCE for r in reconciled_rows),
            detail=f"max_diff={max(r.abs_difference for r in reconciled_rows)!r}",
        )
    )
    flagged = [r.weight_threshold for r in comparison if r.noise_flag]
    checks.append(
        SuiteCheck(
            name="sweep_reported_rows_1_3_noise_flagged",
            passed=flagged == sorted(NOISE_FLAGGED_THRESHOLDS),
            detail=f"flagged_thresholds={flagged} (reported values at low thresholds are "
            "mutually inconsistent; recorded as noisy observations, not targets)",
        )
    )
    checks.append(
        SuiteCheck(
            name="sweep_smc_within_ci",
            passed=all(abs(r.p_hat - r.exact_p) <= r.ci_halfwidth for r in sweep),
            detail="every sweep row's estimate inside its interval",
        )
    )

    summary = {
        "passed": all(c.passed for c in checks),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
        "config": {
            "samples": cfg.samples,
            "accuracy": cfg.accuracy,
            "confidence_delta": cfg.confidence_delta,
            "seed": cfg.seed,
            "batch_size": cfg.batch_size,
            "rng_id": RNG_ID,
        },
        "reported_observations": {
            "base_acceptance": REPORTED_BASE_OBSERVATION,
            "after_drop_O1": REPORTED_DROP_OBSERVATION,
        },
    }
    emit("summary.json", json.dumps(summary, indent=2) + "\n")
    return PaperSuiteResult(checks=checks, files=files)
