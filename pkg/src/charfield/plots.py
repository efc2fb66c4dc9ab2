"""Heatmaps of a joint law of (S, D) beside the product of its marginals.

Rendering uses the Agg backend so it works without a display.  Figures are
illustrations only; verdicts never read anything back from them.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .measure import JointDist, marginals  # noqa: E402


def joint_grids(joint: JointDist):
    """Row labels (S values), column labels (D values), joint and product grids."""
    ms, md = marginals(joint)
    su, sv = ms.support, md.support
    P = np.array([[float(joint(u, v)) for v in sv] for u in su])
    Q = np.array([[float(ms(u) * md(v)) for v in sv] for u in su])
    return su, sv, P, Q


def joint_vs_product(joint: JointDist, path: str, title: str = "") -> None:
    """Three panels: joint, product of marginals, and their difference."""
    fmt = joint.carrier.format_element
    su, sv, P, Q = joint_grids(joint)
    vmax = max(P.max(), Q.max())
    diff = P - Q
    dmax = max(abs(diff).max(), 1e-12)

    fig, axes = plt.subplots(1, 3, figsize=(12, 4), constrained_layout=True)
    panels = [(P, "joint P(S=u, D=v)", "viridis", 0, vmax),
              (Q, "product P(S=u) P(D=v)", "viridis", 0, vmax),
              (diff, "joint - product", "RdBu_r", -dmax, dmax)]
    for ax, (grid, label, cmap, lo, hi) in zip(axes, panels):
        im = ax.imshow(grid, cmap=cmap, vmin=lo, vmax=hi, aspect="auto", origin="lower")
        ax.set_title(label, fontsize=10)
        ax.set_xlabel("D")
        ax.set_ylabel("S")
        step_x = max(1, len(sv) // 12)
        step_y = max(1, len(su) // 12)
        ax.set_xticks(range(0, len(sv), step_x))
        ax.set_xticklabels([fmt(v) for v in sv[::step_x]], rotation=90, fontsize=7)
        ax.set_yticks(range(0, len(su), step_y))
        ax.set_yticklabels([fmt(u) for u in su[::step_y]], fontsize=7)
        fig.colorbar(im, ax=ax, shrink=0.8)
    if title:
        fig.suptitle(title)
    try:
        fig.savefig(path, dpi=120)
    finally:
        plt.close(fig)
