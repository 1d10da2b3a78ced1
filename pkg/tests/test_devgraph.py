import random

import networkx as nx

from gamedefend import devgraph
from gamedefend.game import GameFrame


def _edges(frame, g):
    return {frozenset((frame.outcomes[a], frame.outcomes[b])) for a, b in g.edges}


def test_ng_graph(ng):
    g = devgraph.build(ng)
    assert _edges(ng, g) == {frozenset(p) for p in [("w0", "w1"), ("w0", "w2"), ("w1", "w2")]}
    assert g.self_loops == ng.objective(["w0"])


def test_injective_2x2_is_a_four_cycle():
    f = GameFrame.injective(2, 2)
    g = devgraph.build(f)
    assert len(g.edges) == 4
    assert all(len(nbrs) == 2 for nbrs in g.adjacency().values())
    assert not devgraph.acyclic_component_exists(g)


def test_single_agent_is_complete():
    f = GameFrame.injective(5)
    g = devgraph.build(f)
    assert len(g.edges) == 10


def test_neighborhood_examples(ng):
    g = devgraph.build(ng)
    assert devgraph.neighborhood(g, ng.objective(["w2"])) == ng.all_outcomes
    assert devgraph.neighborhood(g, ()) == frozenset()
    assert devgraph.neighborhood(g, ng.all_outcomes) == ng.all_outcomes


def test_restrict_examples(ng):
    g = devgraph.build(ng)
    gamma = ng.objective(["w0", "w2"])
    sub = devgraph.restrict(g, gamma)
    assert set(sub.vertices) == gamma
    assert _edges(ng, sub) == {frozenset(("w0", "w2"))}
    assert sub.self_loops == ng.objective(["w0"])
    single = devgraph.restrict(g, ng.objective(["w1"]))
    assert single.vertices == (1,) and single.edges == ()
    assert devgraph.restrict(g, ng.all_outcomes).edges == g.edges


def test_acyclic_component_examples():
    assert devgraph.acyclic_components([0, 1], [(0, 1)]) == [{0, 1}]
    assert devgraph.acyclic_components([0, 1, 2], [(0, 1), (1, 2), (0, 2)]) == []
    assert devgraph.acyclic_components([0, 1, 2, 3], [(0, 1), (1, 2), (0, 2)]) == [{3}]


def test_dot_output(ng):
    g = devgraph.build(ng)
    gamma = ng.objective(["w0", "w2"])
    text = devgraph.to_dot(g, ng, gamma)
    assert text == devgraph.to_dot(g, ng, gamma)
    assert text.count("doublecircle") == 2
    assert text.count("style=dashed") == 1
    assert text.count(" -- ") == 4  # 3 edges and the self-loop
    assert "doublecircle" not in devgraph.to_dot(g, ng, ())


def test_knot_free_square_in_3x3():
    f = GameFrame.injective(3, 3)
    square = f.objective(["a1b1", "a1b2", "a2b2", "a2b1"])
    sub = devgraph.restrict(devgraph.build(f), square)
    assert not devgraph.knot_free_components(sub.vertices, sub.lines)


def test_a_single_row_is_not_a_knot():
    f = GameFrame.injective(2, 3)
    row = f.objective(["a1b1", "a1b2", "a1b3"])
    sub = devgraph.restrict(devgraph.build(f), row)
    # the outcome graph has a triangle, but one mover cannot cycle through it
    assert not devgraph.acyclic_component_exists(sub)
    assert devgraph.knot_free_component_exists(sub)


def test_acyclicity_agrees_with_networkx():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(1, 9)
        edges = {tuple(sorted(rng.sample(range(n), 2))) for _ in range(rng.randint(0, 12))} \
            if n > 1 else set()
        ours = sorted(sorted(c) for c in devgraph.acyclic_components(range(n), edges))
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        theirs = sorted(sorted(c) for c in nx.connected_components(g)
                        if nx.is_tree(g.subgraph(c)))
        assert ours == theirs


def test_berge_acyclicity_agrees_with_networkx_incidence_forest():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(1, 8)
        lines = [frozenset(rng.sample(range(n), rng.randint(2, n))) for _ in range(rng.randint(0, 5))
                 ] if n > 1 else []
        ours = sorted(sorted(c) for c in devgraph.knot_free_components(range(n), lines))
        g = nx.Graph()
        g.add_nodes_from(("v", v) for v in range(n))
        for k, line in enumerate(set(lines)):
            g.add_edges_from((("l", k), ("v", v)) for v in line)
        theirs = sorted(sorted(v for kind, v in c if kind == "v")
                        for c in nx.connected_components(g) if nx.is_tree(g.subgraph(c)))
        assert ours == theirs


def test_profile_edges_degree():
    f = GameFrame.injective(2, 3)
    edges = devgraph.profile_edges(f, list(f.profiles()))
    assert len(edges) == f.n_profiles * sum(n - 1 for n in f.shape) // 2
