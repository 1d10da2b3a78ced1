import itertools

import pytest

from gamedefend.asw import OBJECTIVES, asw_model, asw_source
from gamedefend.defend import defendable_oracle, security_level
from gamedefend.protocol import objectives_of, parse_protocol, plans, play, to_frame


def _plan(tree, agent, **choices):
    """Plan choosing ``choices[action-at-node]`` where given, else the first action."""
    mine = tree.nodes_of(agent)
    picks = []
    for k in mine:
        acts = tree.nodes[k].actions
        wanted = [a for a in acts if a in choices.get(agent, ())]
        picks.append(acts.index(wanted[0]) if wanted else 0)
    return tuple(picks)


def _frame(reliable):
    tree = asw_model(reliable)
    frame = to_frame(tree)
    with pytest.warns(UserWarning):
        named = objectives_of(tree, frame)
    return tree, frame, named


def test_source_parses_to_model():
    for reliable in (True, False):
        assert parse_protocol(asw_source(reliable)) == asw_model(reliable)
        assert dict(asw_model(reliable).objectives) == OBJECTIVES


def test_honest_run_signs_both():
    tree = asw_model(True)
    honest = [_plan(tree, "Alice", Alice={"send_scA"}),
              _plan(tree, "Bob", Bob={"send_cmB", "send_scB", "resolve"})]
    run = play(tree, honest)
    assert run.label == "sign_AB"
    assert [a for _, _, a in run.steps] == ["send_cmB", "send_scA", "send_scB"]


def test_honest_continuations_always_sign_both():
    tree = asw_model(True)
    bob_nodes = tree.nodes_of("Bob")
    for alice in plans(tree, "Alice"):
        for bob in plans(tree, "Bob"):
            honest = all(tree.nodes[k].actions[a] != "stop" for k, a in zip(bob_nodes, bob))
            alice_honest = "stop" not in [tree.nodes[k].actions[a]
                                          for k, a in zip(tree.nodes_of("Alice"), alice)]
            if honest and alice_honest:
                assert play(tree, [alice, bob]).label == "sign_AB"


def test_bob_stops_after_sc_a_then_alice_resolves():
    tree = asw_model(True)
    profile = [_plan(tree, "Alice", Alice={"send_scA"}),
               _plan(tree, "Bob", Bob={"send_cmB", "stop"})]
    run = play(tree, profile)
    assert [a for _, _, a in run.steps] == ["send_cmB", "send_scA", "stop"]
    assert run.label == "sign_AB"


def test_unreliable_ttp_ignores_alices_resolve():
    tree = asw_model(False)
    profile = [_plan(tree, "Alice", Alice={"send_scA"}),
               _plan(tree, "Bob", Bob={"send_cmB", "stop"}),
               _plan(tree, "TTP", TTP={"ignore"})]
    run = play(tree, profile)
    assert run.steps[-1][1:] == ("TTP", "ignore")
    assert run.label == "sign_B"


def test_reliable_model_is_fair_by_construction():
    _, frame, named = _frame(True)
    assert set(frame.outcomes) == {"none", "sign_AB"}
    assert set(named["fair"]) == set(frame.outcomes)


@pytest.mark.parametrize("sc", ["ne", "undom"])
def test_claims_under_reliable_ttp(sc):
    _, f, named = _frame(True)
    assert defendable_oracle(f, f.objective(named["bob_claim"]), f.agent_set(["Bob"]), sc).holds
    assert defendable_oracle(f, f.objective(named["alice_claim"]), f.agent_set(["Alice"]), sc).holds


@pytest.mark.parametrize("sc", ["ne", "undom"])
def test_security_level_without_reliable_ttp(sc):
    _, f, named = _frame(False)
    level = security_level(f, f.objective(named["fair"]), sc)
    assert [sorted(f.agents[i] for i in d) for d in level] == [["Bob"], ["TTP"]]


@pytest.mark.parametrize("sc", ["ne", "undom"])
def test_alice_alone_cannot_protect_herself_without_reliable_ttp(sc):
    _, f, named = _frame(False)
    v = defendable_oracle(f, f.objective(named["alice_claim"]), f.agent_set(["Alice"]), sc)
    assert not v.holds
    assert f.outcomes[v.witness.outcome] == "sign_B"
    assert defendable_oracle(f, f.objective(named["bob_claim"]), f.agent_set(["Bob"]), sc).holds


def test_plan_counts():
    tree = asw_model(False)
    for agent in tree.agents:
        expected = 1
        for k in tree.nodes_of(agent):
            expected *= len(tree.nodes[k].actions)
        assert len(plans(tree, agent)) == expected
    assert to_frame(tree).shape == (4, 16, 16)
    assert list(itertools.islice(plans(tree, "TTP"), 2)) == [(0, 0, 0, 0), (0, 0, 0, 1)]
