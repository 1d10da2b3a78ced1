"""Matplotlib figures for reports: deviation graphs and defender-set lattices."""
from __future__ import annotations

import itertools
import math
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .devgraph import DevGraph  # noqa: E402
from .game import GameFrame  # noqa: E402

_IN = "#2b6cb0"
_OUT = "#e2e8f0"


def _circle(n: int, radius: float = 1.0):
    if n == 1:
        return [(0.0, 0.0)]
    return [(radius * math.cos(math.pi / 2 - 2 * math.pi * k / n),
             radius * math.sin(math.pi / 2 - 2 * math.pi * k / n)) for k in range(n)]


def deviation_figure(g: DevGraph, frame: GameFrame, highlight: Iterable[int] = (),
                     title: str | None = None):
    highlight = set(highlight)
    pos = dict(zip(g.vertices, _circle(len(g.vertices))))
    fig, ax = plt.subplots(figsize=(5, 5))
    for a, b in g.edges:
        (x0, y0), (x1, y1) = pos[a], pos[b]
        both = a in highlight and b in highlight
        ax.plot([x0, x1], [y0, y1], color=_IN if both else "#718096",
                lw=2.2 if both else 1.0, zorder=1)
    for v in g.self_loops:
        x, y = pos[v]
        ax.add_patch(plt.Circle((x * 1.12, y * 1.12), 0.09, fill=False, ls="--",
                                color="#718096", zorder=1))
    for v in g.vertices:
        x, y = pos[v]
        ax.scatter([x], [y], s=900, color=_IN if v in highlight else _OUT,
                   edgecolors="#1a202c", zorder=2)
        ax.annotate(frame.outcomes[v], (x, y), ha="center", va="center", fontsize=8,
                    color="white" if v in highlight else "#1a202c", zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.margins(0.2)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def lattice_figure(frame: GameFrame, tested: dict, minimal: Iterable[frozenset],
                   title: str | None = None):
    """Every defender set by size; filled if it defends, ringed if minimal.

    Sets never tested (strict supersets of a defending set) defend by
    monotonicity and are drawn filled but lighter.
    """
    minimal = [frozenset(m) for m in minimal]
    n = frame.n_agents
    levels = [list(itertools.combinations(range(n), k)) for k in range(n + 1)]
    pos = {}
    for k, level in enumerate(levels):
        width = len(level)
        for j, combo in enumerate(level):
            pos[frozenset(combo)] = (j - (width - 1) / 2, k)
    fig, ax = plt.subplots(figsize=(max(4, 1.4 * max(len(x) for x in levels)), 1.3 * (n + 1)))
    for d, (x, y) in pos.items():
        for extra in range(n):
            if extra not in d:
                x1, y1 = pos[d | {extra}]
                ax.plot([x, x1], [y, y1], color="#cbd5e0", lw=0.8, zorder=1)
    for d, (x, y) in pos.items():
        if d in tested:
            holds = tested[d].holds
            face = _IN if holds else _OUT
        else:
            holds = any(m <= d for m in minimal)
            face = "#90cdf4" if holds else _OUT
        ring = 3 if d in minimal else 1
        ax.scatter([x], [y], s=1400, color=face, edgecolors="#1a202c", linewidths=ring, zorder=2)
        label = ",".join(frame.agents[i] for i in sorted(d)) or "{}"
        ax.annotate(label, (x, y), ha="center", va="center", fontsize=7,
                    color="white" if face == _IN else "#1a202c", zorder=3)
    ax.axis("off")
    ax.margins(0.25)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def save(fig, path) -> None:
    fig.savefig(path, dpi=120)
    plt.close(fig)
