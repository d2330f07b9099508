"""Statistical verification of a policy by seeded path simulation.

Simulation is on-the-fly: one Bernoulli draw per organization per sample,
never a walk over the materialized tree, so cost is O(n) per sample
regardless of policy size. Sampling is organized in batches; batch i draws
from an independent Philox substream derived from ``(seed, i)``, so results
are bit-for-bit reproducible for a fixed (seed, batch_size) under any
degree of parallelism, and merged by summation.

Two modes answer the two standard questions: fixed-sample estimation with a
Chernoff-Hoeffding (or optional Wald) confidence interval, and Wald's
sequential probability ratio test against the policy's probability
threshold with an indifference region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Literal, Optional

import numpy as np

from .policy import Policy

__all__ = [
    "RNG_ID",
    "SimConfig",
    "Estimate",
    "HypothesisResult",
    "batch_rng",
    "simulate_outcome",
    "simulate_outcomes",
    "estimate_probability",
    "required_samples",
    "hoeffding_halfwidth",
    "hypothesis_test",
    "result_record",
]

Decision = Literal["holds", "fails", "indeterminate"]

# Counter-based generator; substream for batch i is seeded from (seed, i).
RNG_ID = "numpy-philox4x64(seedseq(seed,batch_index))"

_PROB_FLOOR = 1e-12  # clip bound keeping SPRT hypothesis probabilities inside (0, 1)


@dataclass(frozen=True)
class SimConfig:
    """Simulation knobs. ``accuracy`` is the estimation half-width target
    epsilon and ``confidence_delta`` the allowed failure probability; they
    are independent of the SPRT's indifference region."""

    samples: int = 10_000
    accuracy: float = 0.001
    confidence_delta: float = 0.01
    seed: int = 0
    batch_size: int = 4096

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if not 0.0 < self.accuracy < 1.0:
            raise ValueError(f"accuracy must be in (0, 1), got {self.accuracy}")
        if not 0.0 < self.confidence_delta < 1.0:
            raise ValueError(f"confidence_delta must be in (0, 1), got {self.confidence_delta}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Estimate:
    """Point estimate of the acceptance probability with its interval."""

    p_hat: float
    ci_halfwidth: float
    samples_used: int
    successes: int


@dataclass(frozen=True)
class HypothesisResult:
    """Outcome of testing P(accept) > threshold.

    ``alpha`` bounds the false-holds rate, ``beta`` the false-fails rate.
    ``clipped`` flags an indifference region that had to be clipped into
    (0, 1). ``indeterminate`` means the fixed-sample interval straddled the
    threshold, or the SPRT hit its sample cap.
    """

    decision: Decision
    samples_used: int
    successes: int
    test: Literal["sprt", "fixed_sample"]
    alpha: float
    beta: float
    indifference_delta: float
    clipped: bool = False


def batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    """Independent substream for one sample batch."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=(seed, batch_index))))


def simulate_outcome(policy: Policy, rng: np.random.Generator) -> int:
    """Draw one joint response: total weight of accepting organizations."""
    weight = 0
    for org in policy.organizations:
        if rng.random() < org.acceptance_prob:
            weight += org.weight
    return weight


def simulate_outcomes(policy: Policy, rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized batch of accepted-weight outcomes (shape ``(count,)``)."""
    acceptance = np.array([org.acceptance_prob for org in policy.organizations])
    weights = np.array([org.weight for org in policy.organizations], dtype=np.int64)
    accepted = rng.random((count, len(weights))) < acceptance[np.newaxis, :]
    return accepted @ weights


def _batch_sizes(samples: int, batch_size: int) -> list[int]:
    full, rest = divmod(samples, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def required_samples(accuracy: float, confidence_delta: float) -> int:
    """Chernoff-Hoeffding sample count: smallest N with 2 exp(-2 N eps^2) <= delta."""
    if not 0.0 < accuracy < 1.0:
        raise ValueError(f"accuracy must be in (0, 1), got {accuracy}")
    if not 0.0 < confidence_delta < 1.0:
        raise ValueError(f"confidence_delta must be in (0, 1), got {confidence_delta}")
    return math.ceil(math.log(2.0 / confidence_delta) / (2.0 * accuracy**2))


def hoeffding_halfwidth(samples: int, confidence_delta: float) -> float:
    """Interval half-width implied by N samples at confidence 1 - delta."""
    return math.sqrt(math.log(2.0 / confidence_delta) / (2.0 * samples))


def estimate_probability(
    policy: Policy, cfg: SimConfig, interval: Literal["hoeffding", "wald"] = "hoeffding"
) -> Estimate:
    """Fixed-sample estimate of P(accepted weight >= weight_threshold).

    Deterministic given (policy, seed, samples, batch_size). The default
    interval is the distribution-free Hoeffding half-width; ``wald`` selects
    the normal approximation for comparison with +/- style reports.
    """
    successes = 0
    for index, size in enumerate(_batch_sizes(cfg.samples, cfg.batch_size)):
        outcomes = simulate_outcomes(policy, batch_rng(cfg.seed, index), size)
        successes += int(np.count_nonzero(outcomes >= policy.weight_threshold))
    p_hat = successes / cfg.samples
    if interval == "hoeffding":
        halfwidth = hoeffding_halfwidth(cfg.samples, cfg.confidence_delta)
    elif interval == "wald":
        z = NormalDist().inv_cdf(1.0 - cfg.confidence_delta / 2.0)
        halfwidth = z * math.sqrt(p_hat * (1.0 - p_hat) / cfg.samples)
    else:
        raise ValueError(f"unknown interval kind {interval!r}")
    return Estimate(p_hat=p_hat, ci_halfwidth=halfwidth, samples_used=cfg.samples, successes=successes)


def hypothesis_test(
    policy: Policy,
    cfg: SimConfig,
    *,
    alpha: float = 0.01,
    beta: float = 0.01,
    indifference_delta: float = 0.005,
    method: Literal["sprt", "fixed_sample"] = "sprt",
    sample_cap: Optional[int] = None,
) -> HypothesisResult:
    """Test whether P(accept) exceeds the policy's probability threshold.

    SPRT (default) tests H1: p >= theta + delta against H0: p <= theta - delta,
    deciding on a log-likelihood-ratio boundary crossing and returning
    indeterminate only at the sample cap (default ``10 * required_samples``).
    ``fixed_sample`` draws ``cfg.samples`` outcomes and decides by comparing
    the confidence interval against theta, returning indeterminate when the
    interval straddles it. No accuracy is promised inside the indifference
    region.
    """
    if not 0.0 < alpha < 1.0 or not 0.0 < beta < 1.0:
        raise ValueError("alpha and beta must be in (0, 1)")
    if indifference_delta <= 0.0:
        raise ValueError("indifference_delta must be positive")
    if sample_cap is not None and sample_cap < 1:
        raise ValueError(f"sample_cap must be >= 1, got {sample_cap}")

    theta = policy.probability_threshold

    if method == "fixed_sample":
        estimate = estimate_probability(policy, cfg)
        if estimate.p_hat - estimate.ci_halfwidth > theta:
            decision: Decision = "holds"
        elif estimate.p_hat + estimate.ci_halfwidth < theta:
            decision = "fails"
        else:
            decision = "indeterminate"
        return HypothesisResult(
            decision=decision,
            samples_used=estimate.samples_used,
            successes=estimate.successes,
            test="fixed_sample",
            alpha=alpha,
            beta=beta,
            indifference_delta=indifference_delta,
        )
    if method != "sprt":
        raise ValueError(f"unknown test method {method!r}")

    p0 = theta - indifference_delta
    p1 = theta + indifference_delta
    clipped = False
    if p0 < _PROB_FLOOR:
        p0, clipped = _PROB_FLOOR, True
    if p1 > 1.0 - _PROB_FLOOR:
        p1, clipped = 1.0 - _PROB_FLOOR, True
    if p0 >= p1:
        raise ValueError("indifference region collapsed after clipping")

    # Per-observation log-likelihood-ratio increments for success/failure.
    llr_success = math.log(p1 / p0)
    llr_failure = math.log((1.0 - p1) / (1.0 - p0))
    upper = math.log((1.0 - beta) / alpha)  # crossing accepts H1 -> holds
    lower = math.log(beta / (1.0 - alpha))  # crossing accepts H0 -> fails

    if sample_cap is None:
        sample_cap = 10 * required_samples(cfg.accuracy, cfg.confidence_delta)

    llr = 0.0
    successes = 0
    samples_used = 0
    batch_index = 0
    while samples_used < sample_cap:
        size = min(cfg.batch_size, sample_cap - samples_used)
        outcomes = simulate_outcomes(policy, batch_rng(cfg.seed, batch_index), size)
        batch_index += 1
        hits = outcomes >= policy.weight_threshold
        # Cumulative LLR along the batch; the first boundary crossing is the
        # sequential stopping point, so later draws in the batch are discarded.
        increments = np.where(hits, llr_success, llr_failure)
        path = llr + np.cumsum(increments)
        crossing = (path >= upper) | (path <= lower)
        if crossing.any():
            stop = int(np.argmax(crossing))
            samples_used += stop + 1
            successes += int(np.count_nonzero(hits[: stop + 1]))
            decision = "holds" if path[stop] >= upper else "fails"
            return HypothesisResult(
                decision=decision,
                samples_used=samples_used,
                successes=successes,
                test="sprt",
                alpha=alpha,
                beta=beta,
                indifference_delta=indifference_delta,
                clipped=clipped,
            )
        llr = float(path[-1])
        successes += int(np.count_nonzero(hits))
        samples_used += size

    return HypothesisResult(
        decision="indeterminate",
        samples_used=samples_used,
        successes=successes,
        test="sprt",
        alpha=alpha,
        beta=beta,
        indifference_delta=indifference_delta,
        clipped=clipped,
    )


def result_record(
    cfg: SimConfig,
    estimate: Optional[Estimate] = None,
    hypothesis: Optional[HypothesisResult] = None,
) -> dict:
    """Machine-readable result record for CLI output."""
    record = {
        "p_hat": None,
        "ci_halfwidth": None,
        "samples": None,
        "seed": cfg.seed,
        "rng_id": RNG_ID,
        "decision": None,
        "test": None,
        "alpha": None,
        "beta": None,
        "indifference_delta": None,
    }
    if estimate is not None:
        record.update(
            p_hat=estimate.p_hat,
            ci_halfwidth=estimate.ci_halfwidth,
            samples=estimate.samples_used,
        )
    if hypothesis is not None:
        record.update(
            decision=hypothesis.decision,
            test=hypothesis.test,
            alpha=hypothesis.alpha,
            beta=hypothesis.beta,
            indifference_delta=hypothesis.indifference_delta,
            samples=hypothesis.samples_used,
        )
        if record["p_hat"] is None and hypothesis.samples_used:
            record["p_hat"] = hypothesis.successes / hypothesis.samples_used
    return record
