"""Figure rendering for simulation sweeps.

Renders the sorted bound curves (one figure per side) next to the delimited
plot tables.  Uses the Agg backend so sweeps run headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_STYLES = {
    "tp": dict(color="tab:gray", linestyle="--", label="marginals only"),
    "mlp": dict(color="tab:blue", linestyle="-.", label="best single covariate"),
    "prop": dict(color="tab:red", linestyle="-", label="full program"),
}


def render_bound_curves(series: dict[str, np.ndarray], side: str, path: str | Path) -> None:
    """Plot the sorted per-method bound curves and write a PNG."""
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    rank = series["rank"]
    for method in ("tp", "mlp", "prop"):
        ax.plot(rank, series[method], linewidth=1.2, **_STYLES[method])
    ax.set_xlabel("trial (sorted per method)")
    ax.set_ylabel(f"{'lower' if side == 'lb' else 'upper'} bound")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper left" if side == "lb" else "lower right", frameon=False)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
