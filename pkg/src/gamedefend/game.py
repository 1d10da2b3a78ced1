"""Finite game frames, objectives, utilities and the enumeration primitives.

A frame is the tuple (agents, strategies, outcomes, outcome map).  Profiles are
tuples of strategy indices, one per agent.  Objectives are frozensets of
outcome indices and defender sets are frozensets of agent indices.  Utilities
always attach to outcomes, so a profile is worth ``u_i[o(s)]`` to agent i.
"""
from __future__ import annotations

import itertools
import json
import math
import string
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import GameError

Profile = tuple[int, ...]
WeakOrder = tuple[int, ...]


@dataclass(frozen=True)
class GameFrame:
    agents: tuple[str, ...]
    strategies: tuple[tuple[str, ...], ...]
    outcomes: tuple[str, ...]
    outcome_map: tuple[int, ...]  # flat, mixed radix, agent 0 most significant

    def __post_init__(self):
        if len(set(self.agents)) != len(self.agents):
            raise GameError("agent names must be unique")
        if len(self.strategies) != len(self.agents):
            raise GameError("one strategy list per agent required")
        for name, strats in zip(self.agents, self.strategies):
            if not strats:
                raise GameError(f"agent {name} has no strategies")
            if len(set(strats)) != len(strats):
                raise GameError(f"duplicate strategy names for agent {name}")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise GameError("outcome names must be unique")
        if len(self.outcome_map) != math.prod(self.shape):
            raise GameError(
                f"outcome_map has {len(self.outcome_map)} entries, "
                f"expected {math.prod(self.shape)}")
        if any(not 0 <= o < len(self.outcomes) for o in self.outcome_map):
            raise GameError("outcome_map refers to an unknown outcome")
        if set(self.outcome_map) != set(range(len(self.outcomes))):
            raise GameError("outcome map must be surjective")

    @classmethod
    def build(cls, agents: Sequence[str], strategies: Sequence[Sequence[str]],
              outcomes: Sequence[str], outcome_names: Sequence[str]) -> "GameFrame":
        """Build a frame from outcome names, pruning outcomes nobody reaches."""
        outcomes = list(outcomes)
        unknown = set(outcome_names) - set(outcomes)
        if unknown:
            raise GameError(f"outcome_map names undeclared outcomes: {sorted(unknown)}")
        used = set(outcome_names)
        pruned = [o for o in outcomes if o not in used]
        if pruned:
            warnings.warn(f"pruning unreachable outcomes {pruned}", stacklevel=2)
            outcomes = [o for o in outcomes if o in used]
        index = {o: k for k, o in enumerate(outcomes)}
        return cls(tuple(agents), tuple(tuple(s) for s in strategies),
                   tuple(outcomes), tuple(index[o] for o in outcome_names))

    @classmethod
    def injective(cls, *sizes: int) -> "GameFrame":
        """Canonical frame where every profile is its own outcome.

        Agents are A, B, C...; agent A's strategies are a1, a2, ... and the
        outcome of (a1, b2) is named ``a1b2``.
        """
        agents = [string.ascii_uppercase[i] for i in range(len(sizes))]
        strats = [[f"{a.lower()}{k + 1}" for k in range(n)]
                  for a, n in zip(agents, sizes)]
        names = ["".join(p) for p in itertools.product(*strats)]
        return cls(tuple(agents), tuple(tuple(s) for s in strats),
                   tuple(names), tuple(range(len(names))))

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategies)

    @cached_property
    def outcome_array(self) -> np.ndarray:
        arr = np.array(self.outcome_map, dtype=np.intp).reshape(self.shape)
        arr.setflags(write=False)
        return arr

    @cached_property
    def is_injective(self) -> bool:
        return len(self.outcomes) == len(self.outcome_map)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*(range(n) for n in self.shape))

    @property
    def n_profiles(self) -> int:
        return len(self.outcome_map)

    def check_profile(self, s: Sequence[int]) -> Profile:
        s = tuple(s)
        if len(s) != self.n_agents or any(
                not 0 <= x < n for x, n in zip(s, self.shape)):
            raise GameError(f"invalid strategy profile {s} for shape {self.shape}")
        return s

    def flat_index(self, s: Profile) -> int:
        return int(np.ravel_multi_index(s, self.shape))

    def outcome_of(self, s: Sequence[int]) -> int:
        return self.outcome_map[self.flat_index(self.check_profile(s))]

    def outcome_name(self, s: Sequence[int]) -> str:
        return self.outcomes[self.outcome_of(s)]

    def profile_names(self, s: Profile) -> tuple[str, ...]:
        return tuple(self.strategies[i][x] for i, x in enumerate(s))

    def preimage(self, gamma: Iterable[int]) -> frozenset[Profile]:
        gamma = set(gamma)
        return frozenset(s for s in self.profiles()
                         if self.outcome_map[self.flat_index(s)] in gamma)

    # name lookups

    def agent_index(self, name: str) -> int:
        try:
            return self.agents.index(name)
        except ValueError:
            raise GameError(f"unknown agent {name!r}") from None

    def agent_set(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self.agent_index(n) for n in names)

    def objective(self, names: Iterable[str]) -> frozenset[int]:
        out = set()
        for n in names:
            try:
                out.add(self.outcomes.index(n))
            except ValueError:
                raise GameError(f"unknown outcome {n!r}") from None
        return frozenset(out)

    @property
    def all_outcomes(self) -> frozenset[int]:
        return frozenset(range(self.n_outcomes))

    @property
    def all_agents(self) -> frozenset[int]:
        return frozenset(range(self.n_agents))


def deviate(s: Sequence[int], i: int, t: int, frame: GameFrame | None = None) -> Profile:
    """Profile ``s`` with agent ``i`` switched to strategy ``t``."""
    s = tuple(s)
    if not 0 <= i < len(s):
        raise GameError(f"agent index {i} out of range")
    if t < 0 or (frame is not None and t >= frame.shape[i]):
        raise GameError(f"strategy index {t} out of range for agent {i}")
    return s[:i] + (t,) + s[i + 1:]


def unilateral_neighbors(frame: GameFrame, s: Profile) -> Iterator[tuple[int, Profile]]:
    """Yield (agent, profile) for every profile one strategy change away."""
    for i, n in enumerate(frame.shape):
        for t in range(n):
            if t != s[i]:
                yield i, s[:i] + (t,) + s[i + 1:]


def is_nontrivial(frame: GameFrame, gamma: Iterable[int]) -> bool:
    gamma = frozenset(gamma)
    return bool(gamma) and gamma != frame.all_outcomes


# utilities

def _as_fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise GameError("booleans are not utilities")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise GameError(f"bad rational utility {value!r}") from None
    raise GameError(f"utilities must be integers or 'p/q' strings, got {value!r}")


def canonical_ranks(values: Sequence) -> WeakOrder:
    """Weak order (0-based consecutive ranks, larger preferred) of a value list."""
    levels = {v: k for k, v in enumerate(sorted(set(values)))}
    return tuple(levels[v] for v in values)


@dataclass(frozen=True)
class UtilityProfile:
    """Per-agent utilities indexed by outcome.

    ``ordinal`` profiles hold canonical weak-order ranks; cardinal ones hold
    exact rationals and are what mixed analysis needs.
    """
    values: tuple[tuple, ...]
    ordinal: bool = False

    @classmethod
    def from_orders(cls, orders: Iterable[WeakOrder]) -> "UtilityProfile":
        return cls(tuple(tuple(o) for o in orders), ordinal=True)

    @classmethod
    def cardinal(cls, rows: Iterable[Iterable]) -> "UtilityProfile":
        return cls(tuple(tuple(_as_fraction(v) for v in row) for row in rows))

    def __len__(self):
        return len(self.values)

    def utility(self, i: int, outcome: int):
        return self.values[i][outcome]

    @cached_property
    def ranks(self) -> np.ndarray:
        """(agents, outcomes) array of canonical ranks."""
        arr = np.array([canonical_ranks(v) for v in self.values], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def orders(self) -> tuple[WeakOrder, ...]:
        return tuple(canonical_ranks(v) for v in self.values)

    def check(self, frame: GameFrame) -> "UtilityProfile":
        if len(self.values) != frame.n_agents or any(
                len(v) != frame.n_outcomes for v in self.values):
            raise GameError("utility profile does not match the frame")
        return self

    def to_table(self, frame: GameFrame) -> dict:
        def fmt(v):
            v = Fraction(v)
            return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return {a: {frame.outcomes[k]: fmt(v) for k, v in enumerate(row)}
                for a, row in zip(frame.agents, self.values)}


def supports(defenders: Iterable[int], u: UtilityProfile, gamma: Iterable[int]) -> bool:
    """Every defender strictly prefers each objective outcome to each other one."""
    gamma = frozenset(gamma)
    for i in defenders:
        row = u.values[i]
        inside = [row[k] for k in gamma]
        outside = [row[k] for k in range(len(row)) if k not in gamma]
        if inside and outside and min(inside) <= max(outside):
            return False
    return True


@dataclass(frozen=True)
class MixedProfile:
    probs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        for dist in self.probs:
            if any(p < 0 for p in dist) or sum(dist) != 1:
                raise GameError(f"not a probability distribution: {dist}")

    def support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(k for k, p in enumerate(d) if p > 0) for d in self.probs)

    def domain(self) -> frozenset[Profile]:
        return frozenset(itertools.product(*self.support()))

    def is_pure(self) -> bool:
        return all(len(s) == 1 for s in self.support())

    def as_strings(self) -> list[list[str]]:
        return [[str(p) for p in d] for d in self.probs]


# enumeration

def weak_orders(m: int, strict: bool = False) -> Iterator[WeakOrder]:
    """Every weak order on ``m`` items once, in a fixed order.

    Orders come grouped by number of indifference classes; ``strict=True``
    yields only the m! linear orders.
    """
    if m == 0:
        yield ()
        return
    if strict:
        yield from itertools.permutations(range(m))
        return
    for k in range(1, m + 1):
        for ranks in itertools.product(range(k), repeat=m):
            if len(set(ranks)) == k:
                yield ranks


def count_weak_orders(m: int, strict: bool = False) -> int:
    if strict:
        return math.factorial(m)
    # ordered Bell numbers: a(n) = sum_k C(n,k) a(n-k)
    a = [1]
    for n in range(1, m + 1):
        a.append(sum(math.comb(n, k) * a[n - k] for k in range(1, n + 1)))
    return a[m]


def _stacked_orders(m: int, gamma: frozenset[int], strict: bool) -> list[WeakOrder]:
    inside = sorted(gamma)
    outside = [k for k in range(m) if k not in gamma]
    result = []
    for low in weak_orders(len(outside), strict):
        offset = max(low) + 1 if low else 0
        for high in weak_orders(len(inside), strict):
            ranks = [0] * m
            for k, r in zip(outside, low):
                ranks[k] = r
            for k, r in zip(inside, high):
                ranks[k] = r + offset
            result.append(tuple(ranks))
    return result


def agent_order_choices(frame: GameFrame, gamma: Iterable[int], defenders: Iterable[int],
                        strict: bool = False) -> list[list[WeakOrder]]:
    """Per agent, the weak orders compatible with ``defenders`` supporting ``gamma``."""
    gamma = frozenset(gamma)
    defenders = frozenset(defenders)
    m = frame.n_outcomes
    free = list(weak_orders(m, strict))
    stacked = _stacked_orders(m, gamma, strict)
    return [stacked if i in defenders else free for i in range(frame.n_agents)]


def count_supporting_profiles(frame: GameFrame, gamma, defenders, strict=False) -> int:
    gamma = frozenset(gamma)
    g, m = len(gamma), frame.n_outcomes
    stacked = count_weak_orders(g, strict) * count_weak_orders(m - g, strict)
    free = count_weak_orders(m, strict)
    return math.prod(stacked if i in defenders else free for i in range(frame.n_agents))


def enumerate_supporting_profiles(frame: GameFrame, gamma, defenders,
                                  strict: bool = False) -> Iterator[UtilityProfile]:
    """Ordinal utility profiles, one per equivalence class, in which D supports gamma."""
    choices = agent_order_choices(frame, gamma, defenders, strict)
    for combo in itertools.product(*choices):
        yield UtilityProfile(combo, ordinal=True)


def permute(frame: GameFrame, u: UtilityProfile | None,
            perm: Sequence[Sequence[int]]) -> tuple[GameFrame, UtilityProfile | None]:
    """Relabel strategies: profile pi(s) of the new frame has outcome o(s)."""
    perm = [tuple(p) for p in perm]
    if len(perm) != frame.n_agents or any(
            sorted(p) != list(range(n)) for p, n in zip(perm, frame.shape)):
        raise GameError("permutation profile does not match the frame")
    new_map = [0] * frame.n_profiles
    for s in frame.profiles():
        image = tuple(p[x] for p, x in zip(perm, s))
        new_map[frame.flat_index(image)] = frame.outcome_map[frame.flat_index(s)]
    new = GameFrame(frame.agents, frame.strategies, frame.outcomes, tuple(new_map))
    return new, u


def apply_permutation(perm: Sequence[Sequence[int]], s: Profile) -> Profile:
    return tuple(p[x] for p, x in zip(perm, s))


# file format

def frame_from_dict(doc: dict) -> tuple[GameFrame, UtilityProfile | None, dict]:
    """Parse a game document; returns frame, optional utilities, named objectives."""
    try:
        agents = list(doc["agents"])
        strategies = [list(s) for s in doc["strategies"]]
        outcomes = list(doc["outcomes"])
        names = list(doc["outcome_map"])
    except (KeyError, TypeError) as exc:
        raise GameError(f"game document missing or malformed field: {exc}") from None
    frame = GameFrame.build(agents, strategies, outcomes, names)
    utilities = None
    if doc.get("utilities") is not None:
        table = doc["utilities"]
        if isinstance(table, dict):
            table = [table.get(a) for a in frame.agents]
        if len(table) != frame.n_agents or any(t is None for t in table):
            raise GameError("utilities must cover every agent")
        rows = []
        for row in table:
            missing = set(frame.outcomes) - set(row)
            if missing:
                raise GameError(f"utilities missing outcomes {sorted(missing)}")
            rows.append([row[o] for o in frame.outcomes])
        utilities = UtilityProfile.cardinal(rows)
    objectives = {}
    for name, labels in (doc.get("objectives") or {}).items():
        objectives[name] = [x for x in labels if x in frame.outcomes]
    return frame, utilities, objectives


def frame_to_dict(frame: GameFrame, utilities: UtilityProfile | None = None,
                  objectives: dict | None = None) -> dict:
    doc = {
        "agents": list(frame.agents),
        "strategies": [list(s) for s in frame.strategies],
        "outcomes": list(frame.outcomes),
        "outcome_map": [frame.outcomes[k] for k in frame.outcome_map],
    }
    if utilities is not None:
        doc["utilities"] = utilities.to_table(frame)
    if objectives:
        doc["objectives"] = {k: list(v) for k, v in objectives.items()}
    return doc


def load_game(path) -> tuple[GameFrame, UtilityProfile | None, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GameError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise GameError(f"{path}: game document must be a JSON object")
    return frame_from_dict(doc)


def dumps_game(frame: GameFrame, utilities=None, objectives=None) -> str:
    return json.dumps(frame_to_dict(frame, utilities, objectives), indent=2,
                      ensure_ascii=False) + "\n"
