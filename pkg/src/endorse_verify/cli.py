"""Command-line front end.

Exit codes follow the scripting contract: 0 success (verify: property
holds), 1 parse/validation/assertion errors, 2 verify decided fails,
3 verify indeterminate. Commands that write delimited reports also render
a figure with the same stem unless --no-plot is given.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import experiments, plots
from .dtmc import build_dtmc, generate_spec, label_weights
from .oracle import exact_acceptance_probability, verdict_exact
from .policy import PolicyError, load_policy, total_weight
from .prism import export_artifacts
from .smc import SimConfig, estimate_probability, hypothesis_test, result_record


def _policy_option(fn):
    return click.option(
        "--policy",
        "policy_path",
        required=True,
        metavar="FILE",
        help="Policy document (JSON).",
    )(fn)


def _sim_options(fn):
    options = [
        click.option("--samples", type=int, default=10_000, show_default=True, help="Simulation sample count."),
        click.option("--accuracy", type=float, default=0.001, show_default=True, help="Estimation accuracy epsilon."),
        click.option("--delta", type=float, default=0.01, show_default=True, help="Confidence failure probability."),
        click.option(
            "--seed",
            type=int,
            default=0,
            show_default=True,
            envvar="ENDORSE_VERIFY_SEED",
            help="RNG seed (env ENDORSE_VERIFY_SEED).",
        ),
        click.option("--batch-size", type=int, default=4096, show_default=True, help="Samples per RNG substream batch."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _test_options(fn):
    options = [
        click.option("--alpha", type=float, default=0.01, show_default=True, help="False-holds error bound."),
        click.option("--beta", type=float, default=0.01, show_default=True, help="False-fails error bound."),
        click.option("--indifference", type=float, default=0.005, show_default=True, help="SPRT indifference half-width."),
        click.option(
            "--method",
            type=click.Choice(["sprt", "fixed_sample"]),
            default="sprt",
            show_default=True,
            help="Hypothesis-test flavor.",
        ),
        click.option("--sample-cap", type=int, default=None, help="SPRT hard sample cap (default 10x required samples)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _config(ctx, samples, accuracy, delta, seed, batch_size) -> SimConfig:
    try:
        return SimConfig(
            samples=samples,
            accuracy=accuracy,
            confidence_delta=delta,
            seed=seed,
            batch_size=batch_size,
        )
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)


def _load(ctx, policy_path):
    try:
        return load_policy(policy_path)
    except (PolicyError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)


def _write_json(path, record) -> None:
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _emit_report(out, text, rows, plot, plotter) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    out = Path(out)
    out.write_text(text, encoding="utf-8")
    click.echo(f"wrote {out}")
    if plot:
        figure = plotter(rows, out.with_suffix(".png"))
        click.echo(f"wrote {figure}")


@click.group()
def main():
    """Verify weighted multi-party endorsement policies."""


@main.command()
@_policy_option
@_sim_options
@_test_options
@click.option("--out", metavar="FILE", default=None, help="Write the machine-readable result record (JSON).")
@click.pass_context
def verify(ctx, policy_path, samples, accuracy, delta, seed, batch_size, alpha, beta, indifference, method, sample_cap, out):
    """Hypothesis-test the policy against its probability threshold."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    try:
        result = hypothesis_test(
            policy,
            cfg,
            alpha=alpha,
            beta=beta,
            indifference_delta=indifference,
            method=method,
            sample_cap=sample_cap,
        )
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    exact = exact_acceptance_probability(policy)
    p_hat = result.successes / result.samples_used if result.samples_used else float("nan")
    click.echo(
        f"{result.test} decision: {result.decision} "
        f"(samples={result.samples_used}, p_hat={p_hat:.6f}, alpha={result.alpha}, "
        f"beta={result.beta}, indifference={result.indifference_delta}, seed={cfg.seed})"
    )
    if result.clipped:
        click.echo("warning: indifference region clipped into (0, 1)")
    relation = ">" if exact > policy.probability_threshold else "<="
    click.echo(
        f"exact oracle: acceptance probability {exact!r} {relation} "
        f"{policy.probability_threshold!r} -> {verdict_exact(policy)}"
    )
    if out is not None:
        _write_json(out, result_record(cfg, hypothesis=result))
        click.echo(f"wrote {out}")
    if result.decision == "fails":
        ctx.exit(2)
    if result.decision == "indeterminate":
        ctx.exit(3)


@main.command()
@_policy_option
@_sim_options
@click.option("--wald-ci", is_flag=True, help="Report a normal-approximation interval instead of Hoeffding.")
@click.option("--out", metavar="FILE", default=None, help="Write the result record (JSON).")
@click.pass_context
def estimate(ctx, policy_path, samples, accuracy, delta, seed, batch_size, wald_ci, out):
    """Fixed-sample estimate of the acceptance probability."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    result = estimate_probability(policy, cfg, interval="wald" if wald_ci else "hoeffding")
    exact = exact_acceptance_probability(policy)
    click.echo(
        f"p_hat={result.p_hat!r} +/- {result.ci_halfwidth!r} "
        f"(samples={result.samples_used}, successes={result.successes}, seed={cfg.seed})"
    )
    click.echo(f"exact oracle: {exact!r}")
    if out is not None:
        _write_json(out, result_record(cfg, estimate=result))
        click.echo(f"wrote {out}")


@main.command()
@_policy_option
@_sim_options
@click.option("--out", metavar="FILE", default=None, help="Histogram CSV path (stdout if omitted).")
@click.option("--no-plot", is_flag=True, help="Skip the figure next to --out.")
@click.pass_context
def simulate(ctx, policy_path, samples, accuracy, delta, seed, batch_size, out, no_plot):
    """Sample accepted-weight outcomes and report their histogram."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    rows = experiments.simulation_histogram(policy, cfg)
    _emit_report(out, experiments.render_csv(rows, cfg), rows, not no_plot, plots.plot_histogram)


@main.command("sweep-weight")
@_policy_option
@_sim_options
@click.option("--w-min", type=int, default=0, show_default=True, help="Lowest weight threshold.")
@click.option("--w-max", type=int, default=None, help="Highest weight threshold (default: total weight + 1).")
@click.option("--out", metavar="FILE", default=None, help="CSV path (stdout if omitted).")
@click.option("--no-plot", is_flag=True, help="Skip the figure next to --out.")
@click.pass_context
def sweep_weight(ctx, policy_path, samples, accuracy, delta, seed, batch_size, w_min, w_max, out, no_plot):
    """Sweep the weight threshold, reporting exact and simulated acceptance."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    if w_max is None:
        w_max = total_weight(policy) + 1
    try:
        rows = experiments.sweep_weight(policy, w_min, w_max, cfg)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    _emit_report(out, experiments.render_csv(rows, cfg), rows, not no_plot, plots.plot_weight_sweep)


@main.command("sweep-orgprob")
@_policy_option
@_sim_options
@click.option("--org", "org_id", required=True, help="Organization whose acceptance probability is varied.")
@click.option("--from", "p_from", type=float, required=True, help="First acceptance probability.")
@click.option("--to", "p_to", type=float, required=True, help="Last acceptance probability.")
@click.option("--step", type=float, default=0.01, show_default=True, help="Sweep step size.")
@click.option("--out", metavar="FILE", default=None, help="CSV path (stdout if omitted).")
@click.option("--no-plot", is_flag=True, help="Skip the figure next to --out.")
@click.pass_context
def sweep_orgprob(ctx, policy_path, samples, accuracy, delta, seed, batch_size, org_id, p_from, p_to, step, out, no_plot):
    """Sweep one organization's acceptance probability."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    try:
        rows = experiments.sweep_org_prob(policy, org_id, p_from, p_to, step, cfg)
    except (PolicyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    _emit_report(out, experiments.render_csv(rows, cfg), rows, not no_plot, plots.plot_orgprob_sweep)


@main.command("drop-org")
@_policy_option
@_sim_options
@click.option("--org", "org_id", required=True, help="Organization to remove.")
@click.option("--out", metavar="FILE", default=None, help="Write the before/after report (JSON).")
@click.pass_context
def drop_org(ctx, policy_path, samples, accuracy, delta, seed, batch_size, org_id, out):
    """Report system acceptance before and after one organization leaves."""
    policy = _load(ctx, policy_path)
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    try:
        report = experiments.drop_org_report(policy, org_id, cfg)
    except PolicyError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    click.echo(f"without {org_id}:")
    click.echo(f"  exact: {report.exact_before!r} -> {report.exact_after!r} (difference {report.exact_difference!r})")
    click.echo(
        f"  simulated: {report.estimate_before.p_hat!r} -> {report.estimate_after.p_hat!r} "
        f"(+/- {report.estimate_before.ci_halfwidth!r}, samples={cfg.samples}, seed={cfg.seed})"
    )
    if out is not None:
        _write_json(
            out,
            {
                "org_id": report.org_id,
                "exact_before": report.exact_before,
                "exact_after": report.exact_after,
                "exact_difference": report.exact_difference,
                "p_hat_before": report.estimate_before.p_hat,
                "p_hat_after": report.estimate_after.p_hat,
                "ci_halfwidth": report.estimate_before.ci_halfwidth,
                "samples": cfg.samples,
                "seed": cfg.seed,
                "rng_id": experiments.RNG_ID,
            },
        )
        click.echo(f"wrote {out}")
    if report.exact_after > report.exact_before:
        click.echo("error: exact probability increased after removal", err=True)
        ctx.exit(1)


@main.command("export-prism")
@_policy_option
@click.option("--out-dir", required=True, metavar="DIR", help="Directory for model.pm and property.pctl.")
@click.pass_context
def export_prism(ctx, policy_path, out_dir):
    """Write the DTMC model and acceptance property in PRISM formats."""
    policy = _load(ctx, policy_path)
    try:
        model = label_weights(build_dtmc(policy))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    artifacts = export_artifacts(model, generate_spec(model, policy))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / "model.pm"
    property_path = out / "property.pctl"
    model_path.write_text(artifacts.model_text, encoding="utf-8")
    property_path.write_text(artifacts.property_text, encoding="utf-8")
    click.echo(f"wrote {model_path}")
    click.echo(f"wrote {property_path}")


@main.command("paper-suite")
@_sim_options
@click.option("--out-dir", required=True, metavar="DIR", help="Directory for suite reports and figures.")
@click.option("--no-plot", is_flag=True, help="Skip figures.")
@click.pass_context
def paper_suite(ctx, samples, accuracy, delta, seed, batch_size, out_dir, no_plot):
    """Run the bundled reproduction suite on the reference policy."""
    cfg = _config(ctx, samples, accuracy, delta, seed, batch_size)
    result = experiments.run_paper_suite(out_dir, cfg, make_plots=not no_plot)
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        click.echo(f"{status} {check.name}: {check.detail}")
    for path in result.files:
        click.echo(f"wrote {path}")
    if not result.passed:
        ctx.exit(1)


if __name__ == "__main__":
    main()
