"""Deviation graphs: outcomes joined when one unilateral deviation links them."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .game import GameFrame, Profile


@dataclass(frozen=True)
class DevGraph:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]  # a < b, sorted
    self_loops: frozenset[int] = frozenset()
    evidence: dict = field(default_factory=dict, compare=False)
    # outcome sets one agent can move between with the others fixed (size >= 2)
    lines: frozenset[frozenset[int]] = frozenset()

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def build(frame: GameFrame) -> DevGraph:
    """Outcome-level deviation graph; each unordered profile pair is counted once."""
    counts: Counter = Counter()
    loops = set()
    lines = set()
    for i, n in enumerate(frame.shape):
        others = [range(k) for j, k in enumerate(frame.shape) if j != i]
        for ctx in itertools.product(*others):
            line = frozenset(frame.outcome_map[frame.flat_index(ctx[:i] + (t,) + ctx[i:])]
                             for t in range(n))
            if len(line) > 1:
                lines.add(line)
    for s in frame.profiles():
        a = frame.outcome_map[frame.flat_index(s)]
        for i, n in enumerate(frame.shape):
            for t in range(s[i] + 1, n):
                b = frame.outcome_map[frame.flat_index(s[:i] + (t,) + s[i + 1:])]
                if a == b:
                    loops.add(a)
                else:
                    counts[(min(a, b), max(a, b))] += 1
    edges = tuple(sorted(counts))
    return DevGraph(tuple(range(frame.n_outcomes)), edges, frozenset(loops), dict(counts),
                    frozenset(lines))


def neighborhood(g: DevGraph, vs: Iterable[int]) -> frozenset[int]:
    vs = set(vs)
    out = set(vs)
    for a, b in g.edges:
        if a in vs:
            out.add(b)
        if b in vs:
            out.add(a)
    return frozenset(out)


def restrict(g: DevGraph, gamma: Iterable[int]) -> DevGraph:
    keep = set(gamma)
    edges = tuple(e for e in g.edges if e[0] in keep and e[1] in keep)
    lines = {line & keep for line in g.lines}
    return DevGraph(tuple(v for v in g.vertices if v in keep), edges,
                    frozenset(g.self_loops & keep),
                    {e: g.evidence[e] for e in edges if e in g.evidence},
                    frozenset(line for line in lines if len(line) > 1))


class _DisjointSets:
    def __init__(self, items: Iterable[Hashable]):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def components(vertices: Iterable[Hashable],
               edges: Iterable[tuple[Hashable, Hashable]]) -> list[tuple[set, int]]:
    """(vertex set, edge count) per connected component, self-loops ignored."""
    vertices = list(vertices)
    edges = [e for e in edges if e[0] != e[1]]
    ds = _DisjointSets(vertices)
    for a, b in edges:
        ds.union(a, b)
    groups: dict = {}
    for v in vertices:
        groups.setdefault(ds.find(v), [set(), 0])[0].add(v)
    for a, _ in edges:
        groups[ds.find(a)][1] += 1
    return [(vs, ne) for vs, ne in groups.values()]


def acyclic_components(vertices, edges) -> list[set]:
    return [vs for vs, ne in components(vertices, edges) if ne == len(vs) - 1]


def acyclic_component_exists(g: DevGraph) -> bool:
    return bool(acyclic_components(g.vertices, g.edges))


def knot_free_components(vertices, lines) -> list[set]:
    """Components of the line hypergraph that contain no Berge cycle.

    A line is everything one agent can reach by changing only its own
    strategy.  Moving around inside a single line can never cycle (the mover
    ranks its own alternatives), so a knot needs a cycle through at least two
    lines: the vertex/line incidence graph of the component must be a tree.
    """
    vertices = list(vertices)
    lines = sorted({frozenset(x) for x in lines if len(x) > 1}, key=sorted)
    ds = _DisjointSets([("v", v) for v in vertices] + [("l", k) for k in range(len(lines))])
    for k, line in enumerate(lines):
        for v in line:
            ds.union(("l", k), ("v", v))
    nodes: dict = {}
    incidences: dict = {}
    for node in ds.parent:
        root = ds.find(node)
        nodes[root] = nodes.get(root, 0) + 1
    for k, line in enumerate(lines):
        root = ds.find(("l", k))
        incidences[root] = incidences.get(root, 0) + len(line)
    out = []
    for root, count in nodes.items():
        if incidences.get(root, 0) == count - 1:
            out.append({v for kind, v in ds.parent if kind == "v" and ds.find(("v", v)) == root})
    return out


def knot_free_component_exists(g: DevGraph) -> bool:
    return bool(knot_free_components(g.vertices, g.lines))


def profile_lines(frame: GameFrame, profiles: Iterable[Profile]) -> list[frozenset]:
    """Per agent and context, the given profiles that agent can move between."""
    keep = frozenset(profiles)
    out = []
    for i, n in enumerate(frame.shape):
        others = [range(k) for j, k in enumerate(frame.shape) if j != i]
        for ctx in itertools.product(*others):
            line = frozenset(ctx[:i] + (t,) + ctx[i:] for t in range(n)) & keep
            if len(line) > 1:
                out.append(line)
    return out


def profile_edges(frame: GameFrame, profiles: Iterable[Profile],
                  skip_equal_outcomes: bool = True) -> list[tuple[Profile, Profile]]:
    """Unilateral-deviation edges among ``profiles`` (profile-level graph)."""
    keep = set(profiles)
    out = []
    for s in sorted(keep):
        for i, n in enumerate(frame.shape):
            for t in range(s[i] + 1, n):
                s2 = s[:i] + (t,) + s[i + 1:]
                if s2 not in keep:
                    continue
                if skip_equal_outcomes and frame.outcome_map[frame.flat_index(s)] == \
                        frame.outcome_map[frame.flat_index(s2)]:
                    continue
                out.append((s, s2))
    return out


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: DevGraph, frame: GameFrame | None = None,
           highlight: Iterable[int] = ()) -> str:
    """Deterministic DOT text; objective members are double circles, self-loops dashed."""
    highlight = set(highlight)
    name = (lambda v: frame.outcomes[v]) if frame is not None else str
    lines = ["graph deviation {"]
    for v in g.vertices:
        shape = "doublecircle" if v in highlight else "circle"
        lines.append(f"  {_quote(name(v))} [shape={shape}];")
    for a, b in g.edges:
        lines.append(f"  {_quote(name(a))} -- {_quote(name(b))};")
    for v in sorted(g.self_loops):
        lines.append(f"  {_quote(name(v))} -- {_quote(name(v))} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
