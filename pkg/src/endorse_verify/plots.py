"""Figure rendering for sweep and histogram reports.

Figures are written next to the delimited output with the same stem. The
Agg backend keeps rendering headless and byte-stable for a given
environment; PNG metadata is pinned so repeated runs of the same command
produce identical files.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["plot_weight_sweep", "plot_orgprob_sweep", "plot_histogram"]


def _pyplot():
    # Deferred: matplotlib costs ~0.5 s to import, and most commands never plot.
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "font.size": 10,
    "legend.framealpha": 0.9,
}
_PNG_METADATA = {"Software": "endorse-verify"}


def _save(plt, fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def plot_weight_sweep(rows, path) -> Path:
    """Acceptance probability versus weight threshold, exact and simulated."""
    plt = _pyplot()
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        thresholds = [r.weight_threshold for r in rows]
        ax.plot(thresholds, [r.exact_p for r in rows], "o-", label="exact", zorder=3)
        ax.errorbar(
            thresholds,
            [r.p_hat for r in rows],
            yerr=[r.ci_halfwidth for r in rows],
            fmt="s",
            capsize=3,
            label="simulated",
            alpha=0.8,
        )
        ax.set_xlabel("weight threshold")
        ax.set_ylabel("acceptance probability")
        ax.set_title("System acceptance vs weight threshold")
        ax.legend()
        fig.tight_layout()
        return _save(plt, fig, path)


def plot_orgprob_sweep(rows, path) -> Path:
    """System acceptance versus one organization's acceptance probability."""
    plt = _pyplot()
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        xs = [r.acceptance_prob for r in rows]
        ax.plot(xs, [r.exact_p for r in rows], "-", label="exact")
        ax.plot(xs, [r.p_hat for r in rows], "x", label="simulated", alpha=0.8)
        org = rows[0].varied_org_id if rows else "?"
        ax.set_xlabel(f"{org} acceptance probability")
        ax.set_ylabel("system acceptance probability")
        ax.set_title(f"System acceptance vs {org} acceptance probability")
        ax.legend()
        fig.tight_layout()
        return _save(plt, fig, path)


def plot_histogram(rows, path) -> Path:
    """Empirical accepted-weight frequencies next to the exact masses."""
    plt = _pyplot()
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        weights = [r.weight for r in rows]
        width = 0.4
        ax.bar(
            [w - width / 2 for w in weights],
            [r.frequency for r in rows],
            width=width,
            label="simulated",
        )
        ax.bar(
            [w + width / 2 for w in weights],
            [r.exact_mass for r in rows],
            width=width,
            label="exact",
        )
        ax.set_xlabel("total accepted weight")
        ax.set_ylabel("probability")
        ax.set_title("Accepted-weight distribution")
        ax.set_xticks(weights)
        ax.legend()
        fig.tight_layout()
        return _save(plt, fig, path)
