"""Pure-strategy solution concepts and exact two-player mixed Nash equilibria.

Every pure concept here depends on utilities only through per-agent
comparisons, so each one works on canonical ranks; ordinal and cardinal
profiles are handled identically.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from gmpy2 import mpq

from .errors import GameError, UnsupportedOperation
from .game import GameFrame, MixedProfile, Profile, UtilityProfile
from .rational import polytope_vertices


class SolutionConcept(enum.Enum):
    NE = "ne"
    OPTNE = "optne"
    UNDOM = "undom"
    PO = "po"

    @classmethod
    def parse(cls, text: "str | SolutionConcept") -> "SolutionConcept":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            choices = ", ".join(c.value for c in cls)
            raise GameError(f"unknown solution concept {text!r} (choose from {choices})") from None


SolutionSet = frozenset  # of Profile


def utility_arrays(frame: GameFrame, u: UtilityProfile) -> list[np.ndarray]:
    """Per agent, an array over the profile grid holding that agent's rank."""
    u.check(frame)
    return [r[frame.outcome_array] for r in u.ranks]


def _profiles_of(mask: np.ndarray) -> SolutionSet:
    return frozenset(tuple(int(x) for x in idx) for idx in np.argwhere(mask))


def nash_mask(frame: GameFrame, u: UtilityProfile) -> np.ndarray:
    mask = np.ones(frame.shape, dtype=bool)
    for i, arr in enumerate(utility_arrays(frame, u)):
        mask &= arr == arr.max(axis=i, keepdims=True)
    return mask


def pure_nash(frame: GameFrame, u: UtilityProfile) -> SolutionSet:
    return _profiles_of(nash_mask(frame, u))


def _dominated_outcomes(ranks: np.ndarray, candidates: Iterable[int],
                        by: Iterable[int]) -> set[int]:
    """Outcomes in ``candidates`` strictly worse for all agents than one in ``by``."""
    by = list(by)
    out = set()
    for o in candidates:
        if by and np.any(np.all(ranks[:, by] > ranks[:, [o]], axis=0)):
            out.add(o)
    return out


def optimal_nash(frame: GameFrame, u: UtilityProfile) -> SolutionSet:
    mask = nash_mask(frame, u)
    ne_outcomes = set(int(x) for x in np.unique(frame.outcome_array[mask]))
    bad = _dominated_outcomes(u.ranks, ne_outcomes, ne_outcomes)
    if bad:
        mask &= ~np.isin(frame.outcome_array, sorted(bad))
    return _profiles_of(mask)


def pareto_optimal_profiles(frame: GameFrame, u: UtilityProfile) -> SolutionSet:
    u.check(frame)
    everything = range(frame.n_outcomes)
    bad = _dominated_outcomes(u.ranks, everything, everything)
    return _profiles_of(~np.isin(frame.outcome_array, sorted(bad)))


def undominated_strategies(frame: GameFrame, u: UtilityProfile) -> list[list[int]]:
    """Per agent, the strategies no other strategy weakly dominates."""
    result = []
    for i, arr in enumerate(utility_arrays(frame, u)):
        x = np.moveaxis(arr, i, 0).reshape(frame.shape[i], -1)
        ge = np.all(x[:, None, :] >= x[None, :, :], axis=2)
        gt = np.any(x[:, None, :] > x[None, :, :], axis=2)
        dominated = np.any(ge & gt, axis=0)  # [b, a]: b dominates a
        result.append([a for a in range(frame.shape[i]) if not dominated[a]])
    return result


def undominated_profiles(frame: GameFrame, u: UtilityProfile) -> SolutionSet:
    return frozenset(itertools.product(*undominated_strategies(frame, u)))


_DISPATCH = {
    SolutionConcept.NE: pure_nash,
    SolutionConcept.OPTNE: optimal_nash,
    SolutionConcept.UNDOM: undominated_profiles,
    SolutionConcept.PO: pareto_optimal_profiles,
}


def solve(sc, frame: GameFrame, u: UtilityProfile) -> SolutionSet:
    return _DISPATCH[SolutionConcept.parse(sc)](frame, u)


def solution_outcomes(sc, frame: GameFrame, u: UtilityProfile) -> tuple[bool, set[int]]:
    """(nonempty, outcome set) of a pure concept, without listing profiles."""
    sc = SolutionConcept.parse(sc)
    if sc is SolutionConcept.NE:
        mask = nash_mask(frame, u)
        return bool(mask.any()), set(np.unique(frame.outcome_array[mask]).tolist())
    sols = solve(sc, frame, u)
    return bool(sols), {frame.outcome_map[frame.flat_index(s)] for s in sols}


# mixed equilibria, two players

@dataclass
class MixedNashResult:
    equilibria: list[MixedProfile]
    supports: list[tuple[tuple[int, ...], tuple[int, ...]]]
    degenerate: bool

    def domain(self) -> frozenset[Profile]:
        """Pure profiles played with positive probability by some equilibrium."""
        out = set()
        for rows, cols in self.supports:
            out.update(itertools.product(rows, cols))
        for eq in self.equilibria:
            out.update(eq.domain())
        return frozenset(out)


def payoff_matrices(frame: GameFrame, u: UtilityProfile) -> tuple[list, list]:
    if frame.n_agents != 2:
        raise UnsupportedOperation("mixed equilibria are only computed for 2 agents")
    if u.ordinal:
        raise GameError("mixed analysis needs cardinal (rational) utilities")
    u.check(frame)
    rows, cols = frame.shape
    a = [[Fraction(u.values[0][frame.outcome_of((r, c))]) for c in range(cols)]
         for r in range(rows)]
    b = [[Fraction(u.values[1][frame.outcome_of((r, c))]) for c in range(cols)]
         for r in range(rows)]
    return a, b


def _indifference_vertices(pay, own: tuple[int, ...], other: tuple[int, ...],
                           n_own: int, n_other: int):
    """Vertices of the mixtures on ``own`` making the opponent indifferent on
    ``other`` and no better off anywhere else.

    ``pay[k][j]`` is the opponent's payoff when we play k and they play j.
    Variables are the probabilities on ``own`` followed by the opponent's value.
    """
    size = len(own) + 1
    one, zero = mpq(1), mpq(0)
    eq_a = [[one] * len(own) + [zero]]
    eq_b = [one]
    le_a, le_b = [], []
    for j in range(n_other):
        row = [pay[k][j] for k in own] + [-one]
        if j in other:
            eq_a.append(row)
            eq_b.append(zero)
        else:
            le_a.append(row)
            le_b.append(zero)
    for pos in range(len(own)):
        row = [zero] * size
        row[pos] = -one
        le_a.append(row)
        le_b.append(zero)
    verts = polytope_vertices(eq_a, eq_b, le_a, le_b, size)
    out = []
    for v in verts:
        full = [Fraction(0)] * n_own
        for k, p in zip(own, v[:-1]):
            full[k] = p
        out.append(tuple(full))
    return out


def _nonempty_subsets(n: int):
    for k in range(1, n + 1):
        yield from itertools.combinations(range(n), k)


def mixed_nash_2p(frame: GameFrame, u: UtilityProfile) -> MixedNashResult:
    """All equilibria of a two-player game by support enumeration, exactly.

    For every support pair the sets of feasible row and column mixtures are
    polytopes; a pair is kept when some mixture uses its full support.  When
    either polytope has more than one vertex the game is degenerate there and
    the vertex combinations are reported.
    """
    a, b = payoff_matrices(frame, u)
    a = [[mpq(v.numerator, v.denominator) for v in row] for row in a]
    b = [[mpq(v.numerator, v.denominator) for v in row] for row in b]
    n_rows, n_cols = frame.shape
    b_rows = b  # b[r][c]: column player's payoff
    a_cols = [[a[r][c] for r in range(n_rows)] for c in range(n_cols)]  # a_cols[c][r]
    equilibria, supports, seen = [], [], set()
    degenerate = False
    for rows in _nonempty_subsets(n_rows):
        for cols in _nonempty_subsets(n_cols):
            xs = _indifference_vertices(b_rows, rows, cols, n_rows, n_cols)
            if not xs or {k for x in xs for k, p in enumerate(x) if p > 0} != set(rows):
                continue
            ys = _indifference_vertices(a_cols, cols, rows, n_cols, n_rows)
            if not ys or {k for y in ys for k, p in enumerate(y) if p > 0} != set(cols):
                continue
            supports.append((rows, cols))
            if len(xs) > 1 or len(ys) > 1:
                degenerate = True
            for x in xs:
                for y in ys:
                    if (x, y) not in seen:
                        seen.add((x, y))
                        equilibria.append(MixedProfile((x, y)))
    return MixedNashResult(equilibria, supports, degenerate)


def expected_utilities(frame: GameFrame, u: UtilityProfile,
                       mp: MixedProfile) -> tuple[Fraction, ...]:
    total = [Fraction(0)] * frame.n_agents
    for s in itertools.product(*mp.support()):
        p = Fraction(1)
        for i, x in enumerate(s):
            p *= mp.probs[i][x]
        o = frame.outcome_map[frame.flat_index(s)]
        for i in range(frame.n_agents):
            total[i] += p * Fraction(u.values[i][o])
    return tuple(total)


def is_mixed_equilibrium(frame: GameFrame, u: UtilityProfile, mp: MixedProfile) -> bool:
    """No agent has a pure strategy doing strictly better than its mixture."""
    value = expected_utilities(frame, u, mp)
    for i in range(frame.n_agents):
        for t in range(frame.shape[i]):
            probs = list(mp.probs)
            probs[i] = tuple(Fraction(int(k == t)) for k in range(frame.shape[i]))
            if expected_utilities(frame, u, MixedProfile(tuple(probs)))[i] > value[i]:
                return False
    return True


def optimal_mixed(frame: GameFrame, u: UtilityProfile,
                  equilibria: list[MixedProfile]) -> list[MixedProfile]:
    """Equilibria not strictly worse for every agent than another equilibrium."""
    values = [expected_utilities(frame, u, e) for e in equilibria]
    keep = []
    for e, v in zip(equilibria, values):
        if not any(all(w[i] > v[i] for i in range(len(v))) for w in values):
            keep.append(e)
    return keep
