"""Game data model: partitions, objectives, game graphs, strategies, verdicts.

All identifiers are kept as opaque strings for I/O, while every internal
structure works on dense integer indices assigned in document order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union


class GameError(ValueError):
    """Base class for validation failures."""


class PartitionError(GameError):
    pass


class TotalityError(GameError):
    pass


class DistributionError(GameError):
    pass


class PreconditionError(GameError):
    pass


# ---------------------------------------------------------------------------
# observation partitions


@dataclass(frozen=True)
class Partition:
    """A partition of ``range(n)`` into cells, ordered by smallest member."""

    cells: tuple[tuple[int, ...], ...]
    cell_of: tuple[int, ...]
    owner: int = 0

    @classmethod
    def from_cells(
        cls,
        cells: Iterable[Iterable[int]],
        n: int,
        owner: int = 0,
        names: Sequence[str] | None = None,
    ) -> "Partition":
        label = (lambda q: names[q]) if names is not None else str
        cell_of = [-1] * n
        raw = [tuple(sorted(set(c))) for c in cells]
        for idx, c in enumerate(raw):
            if not c:
                raise PartitionError("empty observation cell")
            for q in c:
                if not 0 <= q < n:
                    raise PartitionError(f"cell member {q} is not a state")
                if cell_of[q] != -1:
                    raise PartitionError(f"state {label(q)} lies in two cells")
                cell_of[q] = idx
        gaps = [label(q) for q in range(n) if cell_of[q] == -1]
        if gaps:
            raise PartitionError("states not covered by any cell: " + ", ".join(gaps))
        raw.sort(key=lambda c: c[0])
        index = [0] * n
        for i, c in enumerate(raw):
            for q in c:
                index[q] = i
        return cls(tuple(raw), tuple(index), owner)

    @classmethod
    def perfect(cls, n: int, owner: int = 0) -> "Partition":
        return cls(tuple((q,) for q in range(n)), tuple(range(n)), owner)

    @classmethod
    def blind(cls, n: int, owner: int = 0) -> "Partition":
        return cls((tuple(range(n)),), (0,) * n, owner)

    @classmethod
    def from_labels(cls, labels: Sequence, owner: int = 0) -> "Partition":
        """Group states with equal labels into one cell."""
        groups: dict = {}
        for q, lab in enumerate(labels):
            groups.setdefault(lab, []).append(q)
        return cls.from_cells(groups.values(), len(labels), owner)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def size(self) -> int:
        return len(self.cell_of)

    def obs(self, q: int) -> int:
        return self.cell_of[q]

    def is_perfect(self) -> bool:
        return len(self.cells) == len(self.cell_of)

    def is_blind(self) -> bool:
        return len(self.cells) == 1

    def cell_name(self, i: int, names: Sequence[str]) -> str:
        return "{" + ",".join(names[q] for q in self.cells[i]) + "}"

    def refine(self, labels: Sequence) -> "Partition":
        return Partition.from_labels([(self.cell_of[q], labels[q]) for q in range(self.size)], self.owner)


def less_informed(p1: Partition, p2: Partition) -> bool:
    """True iff every cell of ``p2`` lies inside one cell of ``p1``."""
    if p1.size != p2.size:
        raise PartitionError("partitions over different state sets")
    return all(len({p1.cell_of[q] for q in c}) == 1 for c in p2.cells)


# ---------------------------------------------------------------------------
# objectives


@dataclass(frozen=True)
class Reach:
    target: frozenset[int]
    kind = "reach"


@dataclass(frozen=True)
class Safe:
    target: frozenset[int]
    kind = "safe"


@dataclass(frozen=True)
class Parity:
    priority: tuple[int, ...]
    kind = "parity"

    def __post_init__(self):
        if any(p < 0 for p in self.priority):
            raise GameError("priorities must be non-negative")


Objective = Union[Reach, Safe, Parity]


def check_objective(obj: Objective, n: int) -> None:
    if isinstance(obj, (Reach, Safe)):
        bad = [q for q in obj.target if not 0 <= q < n]
        if bad:
            raise GameError(f"target contains non-states {bad}")
    elif isinstance(obj, Parity):
        if len(obj.priority) != n:
            raise GameError("priority map must cover every state")
    else:
        raise GameError(f"unknown objective {obj!r}")


def eval_lasso(stem: Sequence[int], cycle: Sequence[int], obj: Objective) -> bool:
    """Does the ultimately periodic play ``stem . cycle^omega`` satisfy ``obj``?"""
    if not cycle:
        raise ValueError("cycle must be non-empty")
    if isinstance(obj, Reach):
        return any(q in obj.target for q in stem) or any(q in obj.target for q in cycle)
    if isinstance(obj, Safe):
        return all(q in obj.target for q in stem) and all(q in obj.target for q in cycle)
    return min(obj.priority[q] for q in cycle) % 2 == 0


# ---------------------------------------------------------------------------
# games


def _check_partitions(n: int, *parts: Partition) -> None:
    for p in parts:
        if p.size != n:
            raise PartitionError("observation partition does not match the state set")
        seen = sorted(q for c in p.cells for q in c)
        if seen != list(range(n)):
            raise PartitionError("partition law violated")


def _check_alphabets(actions) -> None:
    for i, a in enumerate(actions, start=1):
        if not a:
            raise GameError(f"alphabet a{i} is empty")
        if len(set(a)) != len(a):
            raise GameError(f"alphabet a{i} has duplicate actions")


@dataclass(frozen=True)
class ThreePlayerGame:
    """Concurrent game ``delta[q][a1][a2][a3] -> q'`` with partial observation
    for players 1 and 2; player 3 always observes the state."""

    states: tuple[str, ...]
    initial: int
    actions: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]
    delta: tuple
    obs1: Partition
    obs2: Partition
    objective: Objective | None = None

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise GameError("game has no states")
        if len(set(self.states)) != n:
            raise GameError("duplicate state names")
        if not 0 <= self.initial < n:
            raise GameError("initial state is not a state")
        _check_alphabets(self.actions)
        _check_partitions(n, self.obs1, self.obs2)
        n1, n2, n3 = (len(a) for a in self.actions)
        if len(self.delta) != n:
            raise TotalityError("transition table does not cover every state")
        for q in range(n):
            row = self.delta[q]
            if len(row) != n1 or any(len(r) != n2 for r in row) or any(
                len(r2) != n3 for r in row for r2 in r
            ):
                raise TotalityError(f"transition table incomplete at state {self.states[q]}")
            for r in row:
                for r2 in r:
                    for t in r2:
                        if not 0 <= t < n:
                            raise GameError(f"transition target {t} out of range")
        if self.objective is not None:
            check_objective(self.objective, n)

    @property
    def n(self) -> int:
        return len(self.states)

    def successor(self, q: int, a1: int, a2: int, a3: int) -> int:
        return self.delta[q][a1][a2][a3]

    def successors(self, q: int) -> set[int]:
        return {t for r in self.delta[q] for r2 in r for t in r2}

    def is_absorbing(self, q: int) -> bool:
        return self.successors(q) == {q}

    def reachable(self) -> list[int]:
        seen = {self.initial}
        order = [self.initial]
        for q in order:
            for t in sorted(self.successors(q)):
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        return sorted(order)

    def with_objective(self, obj: Objective | None) -> "ThreePlayerGame":
        return ThreePlayerGame(self.states, self.initial, self.actions, self.delta, self.obs1, self.obs2, obj)

    def with_observations(self, obs1: Partition, obs2: Partition) -> "ThreePlayerGame":
        return ThreePlayerGame(self.states, self.initial, self.actions, self.delta, obs1, obs2, self.objective)


def post(g: ThreePlayerGame, s: Iterable[int], a1: int, a2: int) -> frozenset[int]:
    """States reachable in one step from ``s`` under ``a1, a2`` and any ``a3``."""
    return frozenset(t for q in s for t in g.delta[q][a1][a2])


@dataclass(frozen=True)
class FourPlayerGame:
    """Turn-based extension: at states with ``turn[q] == 3`` player 3 picks the
    last action from ``actions[2]``, at ``turn[q] == 4`` player 4 picks it from
    ``actions[3]``.  ``delta[q][a1][a2][x]`` uses the alphabet of the mover."""

    states: tuple[str, ...]
    initial: int
    actions: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...], tuple[str, ...]]
    turn: tuple[int, ...]
    delta: tuple
    obs1: Partition
    obs2: Partition
    objective: Objective | None = None

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise GameError("game has no states")
        if len(set(self.states)) != n:
            raise GameError("duplicate state names")
        if not 0 <= self.initial < n:
            raise GameError("initial state is not a state")
        _check_alphabets(self.actions)
        _check_partitions(n, self.obs1, self.obs2)
        if len(self.turn) != n or any(t not in (3, 4) for t in self.turn):
            raise GameError("turn map must assign 3 or 4 to every state")
        n1, n2 = len(self.actions[0]), len(self.actions[1])
        if len(self.delta) != n:
            raise TotalityError("transition table does not cover every state")
        for q in range(n):
            nx = len(self.actions[self.turn[q] - 1])
            row = self.delta[q]
            if len(row) != n1 or any(len(r) != n2 for r in row) or any(
                len(r2) != nx for r in row for r2 in r
            ):
                raise TotalityError(f"transition table incomplete at state {self.states[q]}")
            for r in row:
                for r2 in r:
                    for t in r2:
                        if not 0 <= t < n:
                            raise GameError(f"transition target {t} out of range")
        if self.objective is not None:
            check_objective(self.objective, n)

    @property
    def n(self) -> int:
        return len(self.states)

    def successors(self, q: int) -> set[int]:
        return {t for r in self.delta[q] for r2 in r for t in r2}

    def is_absorbing(self, q: int) -> bool:
        return self.successors(q) == {q}

    def with_objective(self, obj):
        return FourPlayerGame(self.states, self.initial, self.actions, self.turn, self.delta, self.obs1, self.obs2, obj)


@dataclass(frozen=True)
class StochasticGame:
    """Two-player partial-observation game with exact rational transitions.

    ``delta[q][a1][a2]`` is a tuple of ``(target, probability)`` pairs with
    positive probabilities, sorted by target index."""

    states: tuple[str, ...]
    initial: int
    actions: tuple[tuple[str, ...], tuple[str, ...]]
    delta: tuple
    obs1: Partition
    obs2: Partition
    objective: Objective | None = None

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise GameError("game has no states")
        if len(set(self.states)) != n:
            raise GameError("duplicate state names")
        if not 0 <= self.initial < n:
            raise GameError("initial state is not a state")
        _check_alphabets(self.actions)
        _check_partitions(n, self.obs1, self.obs2)
        n1, n2 = len(self.actions[0]), len(self.actions[1])
        if len(self.delta) != n:
            raise TotalityError("transition table does not cover every state")
        for q in range(n):
            row = self.delta[q]
            if len(row) != n1 or any(len(r) != n2 for r in row):
                raise TotalityError(f"transition table incomplete at state {self.states[q]}")
            for i, r in enumerate(row):
                for j, dist in enumerate(r):
                    if not dist:
                        raise TotalityError(
                            f"missing distribution at ({self.states[q]}, "
                            f"{self.actions[0][i]}, {self.actions[1][j]})"
                        )
                    total = Fraction(0)
                    for t, p in dist:
                        if not 0 <= t < n:
                            raise GameError(f"transition target {t} out of range")
                        if not isinstance(p, Fraction) or p <= 0:
                            raise DistributionError("probabilities must be positive rationals")
                        total += p
                    if total != 1:
                        raise DistributionError(
                            f"distribution at ({self.states[q]}, {self.actions[0][i]}, "
                            f"{self.actions[1][j]}) sums to {total}"
                        )
        if self.objective is not None:
            check_objective(self.objective, n)

    @property
    def n(self) -> int:
        return len(self.states)

    def support(self, q: int, a1: int, a2: int) -> tuple[int, ...]:
        return tuple(t for t, _ in self.delta[q][a1][a2])

    def with_objective(self, obj):
        return StochasticGame(self.states, self.initial, self.actions, self.delta, self.obs1, self.obs2, obj)


AnyGame = Union[ThreePlayerGame, FourPlayerGame, StochasticGame]


# ---------------------------------------------------------------------------
# strategies and verdicts


@dataclass(frozen=True)
class MooreStrategy:
    """Finite-memory observation-based strategy.

    On entering a state with observation ``o`` the memory moves to
    ``update[m][o]`` and then ``output`` of the new memory is played.  The
    initial memory element therefore only matters through its update row.
    """

    memory: tuple[str, ...]
    initial: int
    update: tuple[tuple[int, ...], ...]
    output: tuple[int, ...]
    owner: int = 1

    def __post_init__(self):
        k = len(self.memory)
        if k == 0 or not 0 <= self.initial < k:
            raise GameError("strategy needs a non-empty memory with a valid initial element")
        if len(self.update) != k or len(self.output) != k:
            raise GameError("update and output must be total on memory")
        width = {len(r) for r in self.update}
        if len(width) != 1:
            raise GameError("update rows must have one entry per observation cell")
        if any(not 0 <= m < k for r in self.update for m in r):
            raise GameError("update leaves the memory set")

    @property
    def n_cells(self) -> int:
        return len(self.update[0])

    def play(self, observations: Iterable[int]) -> list[int]:
        """Actions produced along a sequence of observation cells."""
        m = self.initial
        out = []
        for o in observations:
            m = self.update[m][o]
            out.append(self.output[m])
        return out

    def check_against(self, obs: Partition, n_actions: int) -> None:
        if self.n_cells != len(obs):
            raise GameError("strategy observation cells do not match the partition")
        if any(not 0 <= a < n_actions for a in self.output):
            raise GameError("strategy outputs an unknown action")


YES = "YES"
NO = "NO"


@dataclass
class Verdict:
    yes: bool
    method: str
    witness: MooreStrategy | None = None
    complete: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def answer(self) -> str:
        return YES if self.yes else NO

    def as_dict(self) -> dict:
        return {
            "answer": self.answer,
            "method": self.method,
            "complete": self.complete,
            "diagnostics": dict(sorted(self.diagnostics.items())),
            "has_witness": self.witness is not None,
        }
