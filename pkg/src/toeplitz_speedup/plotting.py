"""Figures for the ``report`` command: tower labelings, elimination bounds, coincidence columns."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .factors import CoincidenceProfile  # noqa: E402
from .kr import SpeedupSystem, cycle_notation  # noqa: E402

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}
LABEL_COLORS = ["#4eb3d3", "#f4a582", "#a8ddb5", "#d6604d", "#2b8cbe", "#b2abd2", "#fee090", "#878787"]


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_tower_labeling(speedup: SpeedupSystem, path) -> Path:
    """One column per tower; floors colored by orbit label and annotated with the jump."""
    lab = speedup.labeling
    kr = speedup.kr
    towers = kr.letters
    h = kr.height
    grid = np.zeros((h, len(towers)), dtype=int)
    for j, a in enumerate(towers):
        for f in range(h):
            grid[f, j] = lab.labels[a][f] - 1
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(towers), 1.0 + 0.28 * h))
        cmap = ListedColormap(LABEL_COLORS[:max(lab.c, 1)])
        ax.imshow(grid, cmap=cmap, vmin=-0.5, vmax=lab.c - 0.5, origin="lower", aspect="auto")
        if h <= 64:
            for j, a in enumerate(towers):
                base = kr.tower(a).base_word
                for f in range(h):
                    ax.text(j, f, f"{base[f]}  p={speedup.jump(a, f)}", ha="center", va="center", fontsize=6)
        ax.set_xticks(range(len(towers)))
        ax.set_xticklabels([f"{a}\npi = {cycle_notation(lab.permutations[a])}" for a in towers])
        ax.set_ylabel("floor")
        ax.set_title(f"level {lab.level} towers, c = {lab.c}")
        handles = [plt.Rectangle((0, 0), 1, 1, color=LABEL_COLORS[i]) for i in range(lab.c)]
        ax.legend(handles, [f"label {i + 1}" for i in range(lab.c)], loc="upper left",
                  bbox_to_anchor=(1.02, 1.0), frameon=False)
        return _save(fig, path)


def plot_elimination_bounds(certificate: dict, path) -> Path:
    """Lower bounds on the first period by depth, on a log scale."""
    bounds = certificate.get("bounds") or []
    exact = certificate.get("exact") or [True] * len(bounds)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        if bounds:
            depths = np.arange(1, len(bounds) + 1)
            vals = np.array(bounds, dtype=float)
            mask = np.array(exact, dtype=bool)
            ax.semilogy(depths, vals, color="#2b8cbe", zorder=1)
            ax.scatter(depths[mask], vals[mask], color="#2b8cbe", zorder=2, label="all smaller t eliminated")
            if (~mask).any():
                ax.scatter(depths[~mask], vals[~mask], marker="^", color="#d6604d", zorder=2,
                           label="search bound exhausted")
            B = certificate.get("period_bound")
            if B:
                ax.axhline(B, color="#878787", linestyle="--", linewidth=0.8, label=f"period bound {B}")
            ax.set_xticks(depths)
            ax.legend(frameon=False)
        else:
            ax.text(0.5, 0.5, "no elimination data", ha="center", va="center", transform=ax.transAxes)
        ax.set_xlabel("depth k")
        ax.set_ylabel("least surviving period")
        return _save(fig, path)


def plot_periods(periods, path, reference=None) -> Path:
    """Period structure against an optional reference sequence."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        ks = np.arange(1, len(periods) + 1)
        ax.semilogy(ks, periods, marker="o", color="#2b8cbe", label="speedup")
        if reference:
            kr = np.arange(1, len(reference) + 1)
            ax.semilogy(kr, reference, marker="s", color="#d6604d", linestyle=":", label="original")
        ax.set_xlabel("k")
        ax.set_ylabel("period")
        ax.set_xticks(ks if len(ks) >= len(reference or []) else np.arange(1, len(reference) + 1))
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_coincidences(profile: CoincidenceProfile, path) -> Path:
    """Letters against columns; fiber columns are highlighted."""
    sub = profile.substitution
    letters = sub.codomain.letters
    L = profile.length
    grid = np.zeros((len(letters), L))
    for img in sub.images:
        for j, s in enumerate(img):
            grid[sub.codomain.index[s], j] += 1
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.0 + 0.3 * L, 0.8 + 0.3 * len(letters)))
        ax.imshow(grid > 0, cmap=ListedColormap(["white", "#4eb3d3"]), aspect="auto")
        for j in profile.fibers:
            ax.axvspan(j - 0.5, j + 0.5, color="#d6604d", alpha=0.25)
        ax.set_xticks(range(L))
        ax.set_yticks(range(len(letters)))
        ax.set_yticklabels(letters)
        ax.set_xlabel("column")
        ax.set_title(f"{len(profile.fibers)} fiber column(s) out of {L}")
        return _save(fig, path)
