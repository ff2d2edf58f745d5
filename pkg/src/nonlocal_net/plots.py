"""Figure rendering for the CLI report paths (PNG next to the dataset)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .lattice import RoutePlan

SUPERADDITIVITY_BOUND = 1.0 / np.sqrt(2.0)

_STYLE = {"chsh": "o-", "mbk": "s-", "fb": "^-"}


def render_curves(
    rows: list[dict], x_key: str, out_path: str | Path, title: str
) -> Path:
    """Plot every p_cr column of a dataset against its sweep variable."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [row[x_key] for row in rows]
    for key in rows[0]:
        if not key.startswith("pcr_"):
            continue
        label = key.removeprefix("pcr_")
        ys = [row[key] for row in rows]
        ax.plot(xs, ys, _STYLE.get(label, "-"), label=label, markersize=4)
    ax.axhline(SUPERADDITIVITY_BOUND, color="gray", linestyle="--", linewidth=0.8)
    ax.text(
        xs[0], SUPERADDITIVITY_BOUND, " 1/sqrt(2)", va="bottom", fontsize=8, color="gray"
    )
    ax.set_xlabel(x_key)
    ax.set_ylabel("critical noise p_cr")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_route(
    plan: RoutePlan, origin: tuple[int, int], target: tuple[int, int], out_path: str | Path
) -> Path:
    """Draw the lattice patch around a route: path nodes, endpoints, grid."""
    out_path = Path(out_path)
    nodes = [tuple(n) for n in plan.ghz_nodes]
    pts = nodes + [origin, target]
    i_lo = min(p[0] for p in pts) - 1
    i_hi = max(p[0] for p in pts) + 1
    j_lo = min(p[1] for p in pts) - 1
    j_hi = max(p[1] for p in pts) + 1
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for i in range(i_lo, i_hi + 1):
        ax.plot([i, i], [j_lo, j_hi], color="0.85", linewidth=0.6, zorder=0)
    for j in range(j_lo, j_hi + 1):
        ax.plot([i_lo, i_hi], [j, j], color="0.85", linewidth=0.6, zorder=0)
    xs = [n[0] for n in nodes]
    ys = [n[1] for n in nodes]
    ax.plot(xs, ys, "o-", color="tab:purple", label="joint-measurement nodes")
    ax.plot(*origin, "s", color="tab:orange", markersize=10, label="origin site node")
    ax.plot(*target, "D", color="tab:green", markersize=10, label="target site node")
    ax.set_xticks(range(i_lo, i_hi + 1))
    ax.set_yticks(range(j_lo, j_hi + 1))
    ax.set_aspect("equal")
    ax.legend(loc="upper left", fontsize=8)
    spec = plan.equivalent
    ax.set_title(f"route: z={spec.z}, a={spec.a}, m={spec.m}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
