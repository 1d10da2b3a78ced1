"""Correctness, validity, defendability and security levels.

The oracle is exact: pure solution concepts only look at utility comparisons,
so quantifying over all utility profiles in which the defenders support the
objective reduces to a finite sweep over weak orders.  The graph-based
characterizations are fast paths that are checked against it.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import devgraph
from .errors import BudgetExceeded, GameError
from .game import (GameFrame, Profile, UtilityProfile, agent_order_choices,
                   count_supporting_profiles, is_nontrivial)
from .solution import (SolutionConcept, mixed_nash_2p, optimal_mixed,
                       solution_outcomes, solve)

DEFAULT_BUDGET = 10 ** 8


@dataclass(frozen=True)
class Witness:
    utilities: UtilityProfile
    profile: Profile | None  # None when the solution set is empty
    outcome: int | None

    def to_dict(self, frame: GameFrame) -> dict:
        return {
            "utilities": self.utilities.to_table(frame),
            "profile": None if self.profile is None else list(frame.profile_names(self.profile)),
            "outcome": None if self.outcome is None else frame.outcomes[self.outcome],
        }


@dataclass(frozen=True)
class Verdict:
    holds: bool
    method: str  # oracle | characterization | experimental
    witness: Witness | None = None
    checked: int = 0  # utility profiles examined by the oracle

    def to_dict(self, frame: GameFrame) -> dict:
        doc = {"holds": self.holds, "method": self.method}
        if self.method == "oracle":
            doc["profiles_checked"] = self.checked
        if self.witness is not None:
            doc["witness"] = self.witness.to_dict(frame)
        return doc


def _objective(frame: GameFrame, gamma: Iterable[int]) -> frozenset[int]:
    gamma = frozenset(gamma)
    if not gamma <= frame.all_outcomes:
        raise GameError("objective contains outcomes outside the frame")
    return gamma


def is_correct(frame: GameFrame, u: UtilityProfile, sc, gamma) -> bool:
    gamma = _objective(frame, gamma)
    nonempty, outs = solution_outcomes(sc, frame, u)
    if nonempty:
        return outs <= gamma
    return gamma == frame.all_outcomes


def violation(frame: GameFrame, u: UtilityProfile, sc, gamma) -> Witness | None:
    """A replayable reason why correctness fails, or None if it holds."""
    gamma = _objective(frame, gamma)
    sols = solve(sc, frame, u)
    if not sols:
        return None if gamma == frame.all_outcomes else Witness(u, None, None)
    for s in sorted(sols):
        o = frame.outcome_map[frame.flat_index(s)]
        if o not in gamma:
            return Witness(u, s, o)
    return None


def is_correct_mixed(frame: GameFrame, u: UtilityProfile, gamma, sc="ne") -> bool:
    """Every pure profile some rational mixed profile can produce lies in gamma."""
    gamma = _objective(frame, gamma)
    result = mixed_nash_2p(frame, u)
    sc = SolutionConcept.parse(sc)
    if sc is SolutionConcept.NE:
        dom = result.domain()
        empty = not result.equilibria
    elif sc is SolutionConcept.OPTNE:
        best = optimal_mixed(frame, u, result.equilibria)
        dom = frozenset().union(*(e.domain() for e in best)) if best else frozenset()
        empty = not best
    else:
        raise GameError("mixed correctness is defined for ne and optne only")
    if empty:
        return gamma == frame.all_outcomes
    return all(frame.outcome_map[frame.flat_index(s)] in gamma for s in dom)


# the batched oracle

class OracleEngine:
    """Exhaustive correctness check over all supporting ordinal profiles.

    Per-agent tables are precomputed for every admissible weak order, and the
    last agent's orders are evaluated together as one array operation.  The
    enumeration order is itertools.product over agents (agent 0 slowest), and
    ``first_failure`` returns the lowest failing index in that order.
    """

    def __init__(self, frame: GameFrame, gamma, defenders, sc, strict: bool = False):
        self.frame = frame
        self.gamma = _objective(frame, gamma)
        self.defenders = frozenset(defenders)
        self.sc = SolutionConcept.parse(sc)
        self.choices = agent_order_choices(frame, self.gamma, self.defenders, strict)
        self.sizes = [len(c) for c in self.choices]
        self.total = math.prod(self.sizes)
        m = frame.n_outcomes
        self.out_flat = np.asarray(frame.outcome_map, dtype=np.intp)
        self.onehot = np.zeros((frame.n_profiles, m), dtype=bool)
        self.onehot[np.arange(frame.n_profiles), self.out_flat] = True
        self.in_gamma = np.zeros(m, dtype=bool)
        self.in_gamma[list(self.gamma)] = True
        self.gamma_is_all = self.gamma == frame.all_outcomes
        self.ranks = [np.array(c, dtype=np.int64).reshape(len(c), m) for c in self.choices]
        need_masks = self.sc in (SolutionConcept.NE, SolutionConcept.OPTNE,
                                 SolutionConcept.UNDOM)
        self.masks = [self._agent_masks(i) for i in range(frame.n_agents)] if need_masks else None
        need_gt = self.sc in (SolutionConcept.OPTNE, SolutionConcept.PO)
        # gt[k, a, b]: outcome a strictly better than b under order k
        self.gt = [r[:, :, None] > r[:, None, :] for r in self.ranks] if need_gt else None

    def _agent_masks(self, i: int) -> np.ndarray:
        shape = self.frame.shape
        vals = self.ranks[i][:, self.frame.outcome_array]  # (K, *shape)
        if self.sc is SolutionConcept.UNDOM:
            k = vals.shape[0]
            x = np.moveaxis(vals, i + 1, 1).reshape(k, shape[i], -1)
            ge = np.all(x[:, :, None, :] >= x[:, None, :, :], axis=3)
            gt = np.any(x[:, :, None, :] > x[:, None, :, :], axis=3)
            dominated = np.any(ge & gt, axis=1)  # (K, strategies of i)
            ok = ~dominated
            idx = np.indices(shape)[i].reshape(-1)
            return ok[:, idx]
        best = vals.max(axis=i + 1, keepdims=True)
        return (vals == best).reshape(vals.shape[0], -1)

    def _batch(self, prefix: tuple[int, ...]) -> np.ndarray:
        """Failure flags for every choice of the last agent after ``prefix``."""
        last = self.frame.n_agents - 1
        sc = self.sc
        if sc is SolutionConcept.PO:
            g = np.ones(self.gt[last].shape[1:], dtype=bool)
            for i, k in enumerate(prefix):
                g &= self.gt[i][k]
            g = g[None] & self.gt[last]  # (K, a, b)
            dominated = np.any(g, axis=1)  # b dominated by some a
            chosen = ~dominated
            return np.any(chosen & ~self.in_gamma, axis=1)
        joint = np.ones(self.frame.n_profiles, dtype=bool)
        for i, k in enumerate(prefix):
            joint &= self.masks[i][k]
        joint = joint[None] & self.masks[last]  # (K, P)
        outs = (joint.astype(np.int32) @ self.onehot.astype(np.int32)) > 0  # (K, m)
        if sc is SolutionConcept.OPTNE:
            g = np.ones(self.gt[last].shape[1:], dtype=bool)
            for i, k in enumerate(prefix):
                g &= self.gt[i][k]
            g = g[None] & self.gt[last]
            dominated = np.any(outs[:, :, None] & g, axis=1)
            outs = outs & ~dominated
        empty = ~np.any(outs, axis=1)
        bad = np.any(outs & ~self.in_gamma, axis=1)
        if not self.gamma_is_all:
            bad |= empty
        return bad

    def prefixes(self, start: int = 0, stop: int | None = None):
        ranges = [range(n) for n in self.sizes[:-1]]
        return itertools.islice(itertools.product(*ranges), start, stop)

    @property
    def n_prefixes(self) -> int:
        return math.prod(self.sizes[:-1])

    def first_failure(self, start: int = 0, stop: int | None = None) -> int | None:
        """Lowest failing flat index among prefixes [start, stop)."""
        width = self.sizes[-1]
        for offset, prefix in enumerate(self.prefixes(start, stop)):
            bad = self._batch(prefix)
            if bad.any():
                return (start + offset) * width + int(np.argmax(bad))
        return None

    def profile_at(self, index: int) -> UtilityProfile:
        combo = np.unravel_index(index, self.sizes)
        return UtilityProfile(tuple(self.choices[i][int(k)] for i, k in enumerate(combo)),
                              ordinal=True)


def _run_chunk(args):
    frame, gamma, defenders, sc, strict, start, stop = args
    return OracleEngine(frame, gamma, defenders, sc, strict).first_failure(start, stop)


def defendable_oracle(frame: GameFrame, gamma, defenders, sc, *,
                      budget: int = DEFAULT_BUDGET, strict: bool = False,
                      workers: int = 1) -> Verdict:
    gamma = _objective(frame, gamma)
    defenders = frozenset(defenders)
    sc = SolutionConcept.parse(sc)
    work = count_supporting_profiles(frame, gamma, defenders, strict) * frame.n_profiles
    if work > budget:
        raise BudgetExceeded(work, budget)
    engine = OracleEngine(frame, gamma, defenders, sc, strict)
    if workers <= 1 or engine.n_prefixes < 2 * workers:
        index = engine.first_failure()
    else:
        n = engine.n_prefixes
        step = -(-n // (4 * workers))
        jobs = [(frame, gamma, defenders, sc, strict, a, min(a + step, n))
                for a in range(0, n, step)]
        index = None
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for found in pool.map(_run_chunk, jobs):
                if found is not None:
                    index = found
                    break
    if index is None:
        return Verdict(True, "oracle", None, engine.total)
    u = engine.profile_at(index)
    witness = violation(frame, u, sc, gamma)
    assert witness is not None, "batched oracle and direct check disagree"
    return Verdict(False, "oracle", witness, index + 1)


def defendable_reference(frame: GameFrame, gamma, defenders, sc, strict=False) -> Verdict:
    """Unbatched oracle: one solve per supporting profile.  Slow; for cross-checks."""
    from .game import enumerate_supporting_profiles
    count = 0
    for u in enumerate_supporting_profiles(frame, gamma, defenders, strict):
        count += 1
        w = violation(frame, u, sc, gamma)
        if w is not None:
            return Verdict(False, "oracle", w, count)
    return Verdict(True, "oracle", None, count)


def valid(frame: GameFrame, gamma, sc, **kw) -> Verdict:
    return defendable_oracle(frame, gamma, frozenset(), sc, **kw)


def security_level(frame: GameFrame, gamma, sc, *, record: dict | None = None,
                   **kw) -> list[frozenset[int]]:
    """Minimal defender sets, smallest first; supersets of a defending set are skipped.

    ``record``, when given, receives the oracle verdict of every subset tested.
    """
    minimal: list[frozenset[int]] = []
    agents = range(frame.n_agents)
    for size in range(frame.n_agents + 1):
        for combo in itertools.combinations(agents, size):
            d = frozenset(combo)
            if any(m <= d for m in minimal):
                continue
            verdict = defendable_oracle(frame, gamma, d, sc, **kw)
            if record is not None:
                record[d] = verdict
            if verdict.holds:
                minimal.append(d)
    return minimal


# characterizations

def deviation_closure(frame: GameFrame, profiles: Iterable[Profile]) -> frozenset[Profile]:
    target = set(profiles)
    out = set()
    for s in frame.profiles():
        if s in target:
            out.add(s)
            continue
        for i, n in enumerate(frame.shape):
            if any(s[:i] + (t,) + s[i + 1:] in target for t in range(n)):
                out.add(s)
                break
    return frozenset(out)


def _nontrivial(frame: GameFrame, gamma) -> frozenset[int]:
    gamma = _objective(frame, gamma)
    if not is_nontrivial(frame, gamma):
        raise GameError("characterizations assume a nontrivial objective")
    return gamma


def defendable_NE_characterization(frame: GameFrame, gamma) -> bool:
    gamma = _nontrivial(frame, gamma)
    g = devgraph.build(frame)
    return (devgraph.neighborhood(g, gamma) == frame.all_outcomes
            and devgraph.knot_free_component_exists(devgraph.restrict(g, gamma)))


def defendable_OptNE_characterization(frame: GameFrame, gamma) -> bool:
    gamma = _nontrivial(frame, gamma)
    g = devgraph.build(frame)
    return devgraph.knot_free_component_exists(devgraph.restrict(g, gamma))


def defendable_OptNE_profile_level(frame: GameFrame, gamma) -> bool:
    """Experimental: knot test on the profile hypergraph of o^-1(gamma).

    Never claimed defendable when the oracle disagrees on any frame tried so
    far, but it can miss defendable objectives whose cycles pass through two
    profiles with the same outcome.  Validated only empirically.
    """
    gamma = _nontrivial(frame, gamma)
    pre = frame.preimage(gamma)
    return bool(devgraph.knot_free_components(sorted(pre), devgraph.profile_lines(frame, pre)))


def defendable_NE_profile_level(frame: GameFrame, gamma) -> bool:
    """Experimental: profile-level deviation closure plus the profile knot test."""
    gamma = _nontrivial(frame, gamma)
    pre = frame.preimage(gamma)
    if deviation_closure(frame, pre) != frozenset(frame.profiles()):
        return False
    return defendable_OptNE_profile_level(frame, gamma)


def experimental_verdict(frame: GameFrame, gamma, sc) -> Verdict:
    sc = SolutionConcept.parse(sc)
    if sc is SolutionConcept.NE:
        return Verdict(defendable_NE_profile_level(frame, gamma), "experimental")
    if sc is SolutionConcept.OPTNE:
        return Verdict(defendable_OptNE_profile_level(frame, gamma), "experimental")
    raise GameError(f"no experimental method for {sc.value}")


def characterization_verdict(frame: GameFrame, gamma, sc) -> Verdict:
    sc = SolutionConcept.parse(sc)
    if sc is SolutionConcept.NE:
        return Verdict(defendable_NE_characterization(frame, gamma), "characterization")
    if sc is SolutionConcept.OPTNE:
        return Verdict(defendable_OptNE_characterization(frame, gamma), "characterization")
    if sc is SolutionConcept.PO:
        # Pareto optima always exist, so only the empty objective fails
        return Verdict(bool(_objective(frame, gamma)), "characterization")
    raise GameError(f"no characterization for {sc.value}; use the oracle")


# mixed strategies

@dataclass(frozen=True)
class ProductDecomposition:
    factors: tuple[tuple[int, ...], ...]

    def to_names(self, frame: GameFrame) -> list[list[str]]:
        return [[frame.strategies[i][k] for k in f] for i, f in enumerate(self.factors)]


def product_decomposition(frame: GameFrame, gamma) -> ProductDecomposition | None:
    gamma = _objective(frame, gamma)
    pre = frame.preimage(gamma)
    if not pre:
        return None
    factors = tuple(tuple(sorted({s[i] for s in pre})) for i in range(frame.n_agents))
    image = {frame.outcome_map[frame.flat_index(s)] for s in itertools.product(*factors)}
    return ProductDecomposition(factors) if image == set(gamma) else None


def defendable_mixed_NE(frame: GameFrame, gamma) -> bool:
    return _objective(frame, gamma) == frame.all_outcomes


def defendable_mixed_OptNE(frame: GameFrame, gamma) -> bool:
    return product_decomposition(frame, gamma) is not None


def sample_supporting_utilities(frame: GameFrame, gamma, defenders, rng,
                                spread: int = 1000) -> UtilityProfile:
    """Random integer utilities in which ``defenders`` support ``gamma``.

    Defenders draw objective outcomes from [spread, 2*spread) and the rest
    from [0, spread); other agents draw everything from [0, 2*spread).
    """
    gamma = frozenset(gamma)
    rows = []
    for i in range(frame.n_agents):
        row = []
        for o in range(frame.n_outcomes):
            if i in defenders:
                lo = spread if o in gamma else 0
                row.append(rng.randrange(lo, lo + spread))
            else:
                row.append(rng.randrange(0, 2 * spread))
        rows.append(row)
    return UtilityProfile.cardinal(rows)


def _coordination_utilities(frame: GameFrame, gamma) -> UtilityProfile | None:
    """Supporting 2x2 utilities with a fully mixed equilibrium, if any exist.

    In a 2x2 game each agent's indifference depends only on its own payoffs:
    the row agent can be made indifferent iff its payoff differences in the
    two columns have strictly opposite signs (and symmetrically for the
    column agent).  Each agent is searched independently on a small grid with
    objective outcomes ranked above the rest.
    """
    if frame.shape != (2, 2):
        return None
    gamma = frozenset(gamma)
    grid = {o: (range(3, 6) if o in gamma else range(0, 3)) for o in range(frame.n_outcomes)}

    def out(r, c):
        return frame.outcome_map[frame.flat_index((r, c))]

    rows = []
    for agent in (0, 1):
        found = None
        for values in itertools.product(*(grid[o] for o in range(frame.n_outcomes))):
            if agent == 0:
                d = [values[out(0, c)] - values[out(1, c)] for c in (0, 1)]
            else:
                d = [values[out(r, 0)] - values[out(r, 1)] for r in (0, 1)]
            if d[0] * d[1] < 0:
                found = values
                break
        if found is None:
            return None
        rows.append(found)
    return UtilityProfile.cardinal(rows)


@dataclass
class MixedCounterexample:
    utilities: UtilityProfile
    equilibrium: "object"  # MixedProfile
    source: str  # targeted | sampled
    samples_used: int


def mixed_counterexample(frame: GameFrame, gamma, sc="ne", *, samples: int = 10_000,
                         rng=None, targeted: bool = True) -> MixedCounterexample | None:
    """Search grand-coalition-supporting utilities for a mixed equilibrium
    (optimal ones when ``sc`` is optne) that puts weight outside gamma."""
    import random
    gamma = _objective(frame, gamma)
    sc = SolutionConcept.parse(sc)
    rng = rng or random.Random(0)
    pre = frame.preimage(gamma)

    def offending(u):
        eqs = mixed_nash_2p(frame, u).equilibria
        if sc is SolutionConcept.OPTNE:
            eqs = optimal_mixed(frame, u, eqs)
        for e in eqs:
            if not e.domain() <= pre:
                return e
        return None

    if targeted and sc is SolutionConcept.NE:
        u = _coordination_utilities(frame, gamma)
        if u is not None:
            e = offending(u)
            if e is not None:
                return MixedCounterexample(u, e, "targeted", 0)
    for k in range(samples):
        u = sample_supporting_utilities(frame, gamma, frame.all_agents, rng)
        e = offending(u)
        if e is not None:
            return MixedCounterexample(u, e, "sampled", k + 1)
    return None
