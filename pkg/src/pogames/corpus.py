"""Fixed regression games and seeded random instance generators."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Callable, Iterator

from .game import (
    FourPlayerGame,
    Parity,
    Partition,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
)
from .parity import ParityGame


def build_three(states, initial, actions, step: Callable, obs1=None, obs2=None, objective=None) -> ThreePlayerGame:
    """Build a game from a successor function over names."""
    idx = {s: i for i, s in enumerate(states)}
    a1, a2, a3 = actions
    delta = tuple(
        tuple(tuple(tuple(idx[step(q, x, y, z)] for z in a3) for y in a2) for x in a1) for q in states
    )
    n = len(states)

    def part(p, owner):
        if p is None:
            return Partition.perfect(n, owner)
        if p == "blind":
            return Partition.blind(n, owner)
        return Partition.from_cells([[idx[s] for s in c] for c in p], n, owner, states)

    return ThreePlayerGame(tuple(states), idx[initial], (tuple(a1), tuple(a2), tuple(a3)), delta,
                           part(obs1, 1), part(obs2, 2), objective)


def g0() -> ThreePlayerGame:
    """One forced step from s to the absorbing target t."""
    return build_three(["s", "t"], "s", (["a"], ["a"], ["a"]), lambda q, x, y, z: "t",
                       objective=Reach(frozenset([1])))


def g1() -> ThreePlayerGame:
    """Matching pennies: w iff both blind players pick the same side."""

    def step(q, x, y, z):
        if q != "s":
            return q
        return "w" if x == y else "l"

    return build_three(["s", "w", "l"], "s", (["h", "t"], ["h", "t"], ["a"]), step, "blind", "blind",
                       Reach(frozenset([1])))


def g2() -> ThreePlayerGame:
    """Player 3 picks between the target t and the trap b."""

    def step(q, x, y, z):
        if q != "s":
            return q
        return "t" if z == "l" else "b"

    return build_three(["s", "t", "b"], "s", (["a"], ["a"], ["l", "r"]), step, objective=Reach(frozenset([1])))


FIXED = {"g0": g0, "g1": g1, "g2": g2}


# ---------------------------------------------------------------------------
# random instances


def _alphabet(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(k))


def random_partition(rng: random.Random, n: int, owner: int, blocks: int | None = None) -> Partition:
    k = blocks if blocks is not None else rng.randint(1, n)
    return Partition.from_labels([rng.randrange(k) for _ in range(n)], owner)


def coarsen(rng: random.Random, p: Partition, owner: int) -> Partition:
    """Random partition that every cell of ``p`` refines."""
    merge = [rng.randrange(len(p)) for _ in range(len(p))]
    return Partition.from_labels([merge[p.cell_of[q]] for q in range(p.size)], owner)


def _layered_targets(rng: random.Random, n: int) -> tuple[list[bool], list[list[int]]]:
    """Successor candidates forming a DAG over non-absorbing states, so every
    play is absorbed within n - 1 steps."""
    absorbing = [q == n - 1 or (q > 0 and rng.random() < 0.25) for q in range(n)]
    cands = [[q] if absorbing[q] else list(range(q + 1, n)) for q in range(n)]
    return absorbing, cands


def random_objective(rng: random.Random, n: int, kind: str | None = None):
    kind = kind or rng.choice(["reach", "safe"])
    target = frozenset(q for q in range(n) if rng.random() < 0.5)
    return Reach(target) if kind == "reach" else Safe(target)


def random_three(rng: random.Random, max_states: int = 4, max_actions: int = 2, kind: str | None = None,
                 perfect1: bool = False) -> ThreePlayerGame:
    """Horizon-bounded game (DAG into absorbing states) with a random reach or
    safe objective; obs1 coarsens obs2 unless ``perfect1`` is set, in which
    case player 1 is perfect and obs2 is arbitrary."""
    n = rng.randint(2, max_states)
    sizes = [rng.randint(1, max_actions) for _ in range(3)]
    _, cands = _layered_targets(rng, n)
    delta = tuple(
        tuple(tuple(tuple(rng.choice(cands[q]) for _ in range(sizes[2])) for _ in range(sizes[1]))
              for _ in range(sizes[0]))
        for q in range(n)
    )
    if perfect1:
        obs1 = Partition.perfect(n, 1)
        obs2 = random_partition(rng, n, 2)
    else:
        obs2 = random_partition(rng, n, 2)
        obs1 = coarsen(rng, obs2, 1)
    return ThreePlayerGame(
        tuple(f"q{i}" for i in range(n)), 0, (_alphabet("a", sizes[0]), _alphabet("b", sizes[1]), _alphabet("c", sizes[2])),
        delta, obs1, obs2, random_objective(rng, n, kind),
    )


def random_cyclic_three(rng: random.Random, max_states: int = 3, max_actions: int = 2, kind: str | None = None) -> ThreePlayerGame:
    """Unrestricted transition structure (cycles allowed)."""
    n = rng.randint(1, max_states)
    sizes = [rng.randint(1, max_actions) for _ in range(3)]
    delta = tuple(
        tuple(tuple(tuple(rng.randrange(n) for _ in range(sizes[2])) for _ in range(sizes[1])) for _ in range(sizes[0]))
        for _ in range(n)
    )
    obs2 = random_partition(rng, n, 2)
    obs1 = coarsen(rng, obs2, 1)
    if kind == "parity":
        pr = [rng.randrange(3) for _ in range(n)]
        pr = [pr[obs2.cell_of[q]] for q in range(n)]
        obj = Parity(tuple(pr))
    else:
        obj = random_objective(rng, n, kind)
    return ThreePlayerGame(
        tuple(f"q{i}" for i in range(n)), 0, (_alphabet("a", sizes[0]), _alphabet("b", sizes[1]), _alphabet("c", sizes[2])),
        delta, obs1, obs2, obj,
    )


def random_four(rng: random.Random, max_states: int = 3, max_actions: int = 2, kind: str | None = None) -> FourPlayerGame:
    n = rng.randint(2, max_states)
    sizes = [rng.randint(1, max_actions) for _ in range(4)]
    _, cands = _layered_targets(rng, n)
    turn = tuple(rng.choice((3, 4)) for _ in range(n))
    delta = tuple(
        tuple(tuple(tuple(rng.choice(cands[q]) for _ in range(sizes[turn[q] - 1])) for _ in range(sizes[1]))
              for _ in range(sizes[0]))
        for q in range(n)
    )
    obs2 = random_partition(rng, n, 2)
    obs1 = coarsen(rng, obs2, 1)
    return FourPlayerGame(
        tuple(f"q{i}" for i in range(n)), 0,
        (_alphabet("a", sizes[0]), _alphabet("b", sizes[1]), _alphabet("c", sizes[2]), _alphabet("d", sizes[3])),
        turn, delta, obs1, obs2, random_objective(rng, n, kind),
    )


def _random_dist(rng: random.Random, cands: list[int]) -> tuple:
    k = rng.randint(1, min(2, len(cands)))
    support = sorted(rng.sample(cands, k))
    weights = [rng.randint(1, 3) for _ in support]
    total = sum(weights)
    return tuple((t, Fraction(w, total)) for t, w in zip(support, weights))


def random_stochastic(rng: random.Random, max_states: int = 3, max_actions: int = 2, cyclic: bool = True,
                      kind: str = "reach") -> StochasticGame:
    n = rng.randint(2, max_states)
    sizes = [rng.randint(1, max_actions) for _ in range(2)]
    if cyclic:
        cands = [list(range(n))] * n
    else:
        _, cands = _layered_targets(rng, n)
    delta = tuple(
        tuple(tuple(_random_dist(rng, cands[q]) for _ in range(sizes[1])) for _ in range(sizes[0])) for q in range(n)
    )
    obs2 = random_partition(rng, n, 2)
    obs1 = coarsen(rng, obs2, 1)
    target = frozenset(q for q in range(1, n) if rng.random() < 0.5) or frozenset([n - 1])
    obj = Reach(target) if kind == "reach" else Safe(frozenset(range(n)) - target | {0})
    return StochasticGame(tuple(f"q{i}" for i in range(n)), 0, (_alphabet("a", sizes[0]), _alphabet("b", sizes[1])),
                          delta, obs1, obs2, obj)


# ---------------------------------------------------------------------------
# parity game enumeration


def successor_choices(n: int, max_succ: int = 2) -> list[tuple[int, ...]]:
    return [c for k in range(1, max_succ + 1) for c in itertools.combinations(range(n), k)]


def all_parity_games(n: int, max_succ: int = 2, priorities: tuple[int, ...] = (0, 1)) -> Iterator[ParityGame]:
    """Every labelled game on ``n`` vertices with the given bounds."""
    choices = successor_choices(n, max_succ)
    for owner in itertools.product((0, 1), repeat=n):
        for prio in itertools.product(priorities, repeat=n):
            for succ in itertools.product(choices, repeat=n):
                yield ParityGame(owner, succ, prio, 0)


def count_parity_games(n: int, max_succ: int = 2, n_prio: int = 2) -> int:
    return (2 * n_prio) ** n * len(successor_choices(n, max_succ)) ** n


def random_parity_game(rng: random.Random, n: int, max_succ: int = 2, priorities: tuple[int, ...] = (0, 1)) -> ParityGame:
    choices = successor_choices(n, max_succ)
    return ParityGame(
        tuple(rng.randrange(2) for _ in range(n)),
        tuple(rng.choice(choices) for _ in range(n)),
        tuple(rng.choice(priorities) for _ in range(n)),
        0,
    )


def graph_orbits(n: int, max_succ: int | None = None) -> list[tuple[tuple[int, ...], ...]]:
    """One successor structure per class of graphs equal up to renaming
    vertices.  Every graph on ``n`` vertices with out-degree at most
    ``max_succ`` is a relabelling of exactly one returned graph."""
    choices = successor_choices(n, max_succ if max_succ is not None else n)
    masks = [sum(1 << w for w in c) for c in choices]
    index = {m: i for i, m in enumerate(masks)}
    perms = list(itertools.permutations(range(n)))
    seen: set[tuple[int, ...]] = set()
    reps = []
    for g in itertools.product(masks, repeat=n):
        if g in seen:
            continue
        reps.append(tuple(choices[index[m]] for m in g))
        for pi in perms:
            img = [0] * n
            for v, m in enumerate(g):
                img[pi[v]] = sum(1 << pi[w] for w in range(n) if m >> w & 1)
            seen.add(tuple(img))
    return reps
