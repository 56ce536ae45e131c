"""Figures for monotonicity reports, rendered straight to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def suite_figure(report, path) -> None:
    """Scatter of the measure before and after each operation.

    Points above the diagonal are increases; reported violations are drawn
    in red.
    """
    bad = {v["trial"] for v in report.violations}
    xs = [float(b) for b, _, _ in report.pairs]
    ys = [float(a) for _, a, _ in report.pairs]
    ok = [i for i in range(len(xs)) if i not in bad]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    lo = min(xs + ys + [0.0])
    hi = max(xs + ys + [1e-9])
    pad = 0.05 * (hi - lo)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="0.6", lw=1, zorder=0)
    ax.scatter([xs[i] for i in ok], [ys[i] for i in ok], s=14, alpha=0.6, label="no increase")
    if bad:
        idx = sorted(bad)
        ax.scatter([xs[i] for i in idx], [ys[i] for i in idx], s=22, color="tab:red",
                   label=f"violation ({len(idx)})")
    ax.set_xlim(lo - pad, hi + pad)
    ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel("before")
    ax.set_ylabel("after")
    ax.set_title(f"{report.measure}: {report.trials} trials, seed {report.seed}")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
