import itertools
import random

import pytest

from gamedefend.defend import (OracleEngine, characterization_verdict,
                               defendable_mixed_NE, defendable_mixed_OptNE,
                               defendable_NE_characterization, defendable_OptNE_characterization,
                               defendable_oracle, defendable_reference, deviation_closure,
                               experimental_verdict, is_correct, is_correct_mixed,
                               mixed_counterexample, product_decomposition,
                               sample_supporting_utilities, security_level, valid, violation)
from gamedefend.errors import BudgetExceeded, GameError
from gamedefend.game import GameFrame, UtilityProfile, is_nontrivial, supports
from gamedefend.solution import is_mixed_equilibrium, solve

from conftest import matching_pennies

STOP, SIGN = 0, 1


def _objectives(frame):
    for k in range(1, frame.n_outcomes):
        for combo in itertools.combinations(range(frame.n_outcomes), k):
            yield frozenset(combo)


def _replays(frame, sc, gamma, verdict):
    w = verdict.witness
    assert w is not None
    sols = solve(sc, frame, w.utilities)
    if w.profile is None:
        return not sols and gamma != frame.all_outcomes
    return w.profile in sols and frame.outcome_of(w.profile) == w.outcome and w.outcome not in gamma


def test_is_correct_examples(ng, ng_u):
    assert is_correct(ng, ng_u, "ne", ng.objective(["w0", "w2"]))
    assert not is_correct(ng, ng_u, "ne", ng.objective(["w2"]))
    f, u = matching_pennies()
    assert is_correct(f, u, "ne", f.all_outcomes)
    assert not is_correct(f, u, "ne", f.objective(["a1b1", "a2b2"]))


def test_violation_names_the_offending_profile(ng, ng_u):
    w = violation(ng, ng_u, "ne", ng.objective(["w2"]))
    assert w.profile == (STOP, STOP) and ng.outcomes[w.outcome] == "w0"


def test_is_correct_mixed_examples():
    f, u = matching_pennies()
    assert is_correct_mixed(f, u, f.all_outcomes)
    assert not is_correct_mixed(f, u, f.objective(["a1b1", "a2b2"]))
    dominant = UtilityProfile.cardinal([[3, 3, 0, 0], [3, 0, 3, 0]])
    assert is_correct_mixed(f, dominant, f.objective(["a1b1"]))


def test_oracle_ng_examples(ng):
    v = defendable_oracle(ng, ng.objective(["w0", "w2"]), ng.all_agents, "ne")
    assert v.holds and v.checked == 9
    bad = ng.objective(["w2"])
    v = defendable_oracle(ng, bad, ng.all_agents, "ne")
    assert not v.holds
    assert _replays(ng, "ne", bad, v)
    assert defendable_oracle(ng, ng.all_outcomes, ng.all_agents, "ne").holds


def test_documented_ng_witness_is_a_violation(ng):
    # u_A: w2 > w0 > w1, u_B: w2 > w1 > w0; (stop, stop) is an NE with outcome w0
    u = UtilityProfile.cardinal([[1, 0, 2], [0, 1, 2]])
    gamma = ng.objective(["w2"])
    assert supports(ng.all_agents, u, gamma)
    assert (STOP, STOP) in solve("ne", ng, u)
    assert not is_correct(ng, u, "ne", gamma)


def test_valid_examples(ng):
    assert not valid(ng, ng.objective(["w0", "w2"]), "ne").holds
    assert valid(ng, ng.all_outcomes, "ne").holds
    f = GameFrame.injective(2, 2)
    assert not any(valid(f, g, "ne").holds for g in _objectives(f))


def test_deviation_closure_examples(ng):
    every = frozenset(ng.profiles())
    assert deviation_closure(ng, {(SIGN, SIGN)}) == {(SIGN, SIGN), (STOP, SIGN), (SIGN, STOP)}
    assert deviation_closure(ng, every) == every
    assert deviation_closure(ng, set()) == frozenset()


def test_ne_characterization_examples(ng):
    assert defendable_NE_characterization(ng, ng.objective(["w0", "w2"]))
    f = GameFrame.injective(2, 2)
    assert not defendable_NE_characterization(f, f.objective(["a1b1"]))
    # documented divergence: the characterization accepts, the oracle rejects
    assert defendable_NE_characterization(ng, ng.objective(["w2"]))
    assert not defendable_oracle(ng, ng.objective(["w2"]), ng.all_agents, "ne").holds
    with pytest.raises(GameError):
        defendable_NE_characterization(ng, ng.all_outcomes)


def test_optne_characterization_examples(ng):
    f = GameFrame.injective(2, 2)
    assert defendable_OptNE_characterization(f, f.objective(["a1b1"]))
    assert defendable_oracle(f, f.objective(["a1b1"]), f.all_agents, "optne").holds
    g = GameFrame.injective(3, 3)
    square = g.objective(["a1b1", "a1b2", "a2b2", "a2b1"])
    assert not defendable_OptNE_characterization(g, square)
    # weak orders are out of budget here; a strict-order counterexample is also a weak one
    v = defendable_oracle(g, square, g.all_agents, "optne", strict=True)
    assert not v.holds and _replays(g, "optne", square, v)
    assert defendable_OptNE_characterization(ng, ng.objective(["w0", "w2"]))


def test_characterization_verdict_dispatch(ng):
    gamma = ng.objective(["w0", "w2"])
    assert characterization_verdict(ng, gamma, "po").holds
    assert not characterization_verdict(ng, frozenset(), "po").holds
    with pytest.raises(GameError):
        characterization_verdict(ng, gamma, "undom")
    assert experimental_verdict(ng, gamma, "ne").method == "experimental"


def test_mixed_structural_examples(ng):
    assert defendable_mixed_NE(ng, ng.all_outcomes)
    assert not defendable_mixed_NE(ng, ng.objective(["w0", "w2"]))
    assert not defendable_mixed_NE(ng, ng.objective(["w1"]))
    f = GameFrame.injective(2, 3)
    d = product_decomposition(f, f.objective(["a1b1", "a1b2"]))
    assert d.to_names(f) == [["a1"], ["b1", "b2"]]
    assert product_decomposition(ng, ng.objective(["w0", "w2"])) is None
    full = product_decomposition(ng, ng.all_outcomes)
    assert full.factors == ((0, 1), (0, 1))
    assert defendable_mixed_OptNE(f, f.objective(["a1b1", "a1b2"]))
    assert not defendable_mixed_OptNE(ng, ng.objective(["w0", "w2"]))
    assert defendable_mixed_OptNE(ng, ng.all_outcomes)


def test_security_level_examples(ng):
    level = security_level(ng, ng.objective(["w0", "w2"]), "ne")
    assert level == [frozenset({0}), frozenset({1})]
    assert security_level(ng, ng.all_outcomes, "ne") == [frozenset()]


def test_security_level_is_an_antichain_of_minimal_sets():
    rng = random.Random(5)
    for _ in range(6):
        names = [rng.choice("xyz") for _ in range(8)]
        names[:3] = ["x", "y", "z"]
        rng.shuffle(names)
        f = GameFrame.build(["A", "B", "C"], [["0", "1"]] * 3, ["x", "y", "z"], names)
        for gamma in _objectives(f):
            for sc in ("ne", "undom"):
                level = security_level(f, gamma, sc)
                for d in level:
                    assert defendable_oracle(f, gamma, d, sc).holds
                    for i in d:
                        assert not defendable_oracle(f, gamma, d - {i}, sc).holds
                assert all(not a < b for a in level for b in level)


def test_budget_guard(ng):
    with pytest.raises(BudgetExceeded) as info:
        defendable_oracle(ng, ng.objective(["w2"]), frozenset(), "ne", budget=10)
    assert info.value.needed == 169 * 4


@pytest.mark.parametrize("sc", ["ne", "optne", "undom", "po"])
def test_batched_oracle_matches_reference(sc):
    for frame in [GameFrame.injective(2, 2), GameFrame.build(
            ["A", "B"], [["x", "y"], ["p", "q"]], ["u", "v", "w"], ["u", "u", "v", "w"])]:
        for gamma in _objectives(frame):
            for d in [frozenset(), frozenset({0}), frame.all_agents]:
                fast = defendable_oracle(frame, gamma, d, sc)
                slow = defendable_reference(frame, gamma, d, sc)
                assert fast.holds == slow.holds
                if not fast.holds:
                    assert fast.checked == slow.checked
                    assert fast.witness == slow.witness


def test_worker_count_does_not_change_the_witness():
    f = GameFrame.injective(2, 3)
    gamma = f.objective(["a1b1", "a2b2"])
    one = defendable_oracle(f, gamma, frozenset({0}), "ne", workers=1)
    engine = OracleEngine(f, gamma, frozenset({0}), "ne")
    n = engine.n_prefixes
    pieces = [engine.first_failure(a, min(a + 7, n)) for a in range(0, n, 7)]
    first = next(p for p in pieces if p is not None)
    assert one.checked == first + 1
    two = defendable_oracle(f, gamma, frozenset({0}), "ne", workers=2)
    assert two.witness == one.witness


def test_true_oracle_verdicts_survive_cardinal_sampling():
    rng = random.Random(11)
    f = GameFrame.injective(2, 3)
    for sc in ("ne", "optne", "undom", "po"):
        for gamma in _objectives(f):
            v = defendable_oracle(f, gamma, f.all_agents, sc)
            if not v.holds:
                continue
            for _ in range(100):
                u = sample_supporting_utilities(f, gamma, f.all_agents, rng)
                assert is_correct(f, u, sc, gamma)


def test_mixed_counterexample_replays():
    f = GameFrame.injective(2, 2)
    found = mixed_counterexample(f, f.objective(["a1b1", "a2b2"]), "ne", samples=10)
    assert found is not None
    assert is_mixed_equilibrium(f, found.utilities, found.equilibrium)
    assert supports(f.all_agents, found.utilities, f.objective(["a1b1", "a2b2"]))
    assert not found.equilibrium.domain() <= f.preimage(f.objective(["a1b1", "a2b2"]))


def test_nontrivial_helper(ng):
    assert is_nontrivial(ng, {0})
