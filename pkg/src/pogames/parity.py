"""Perfect-information turn-based parity games (min-parity, Even = player 0)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .game import GameError

EVEN, ODD = 0, 1


@dataclass(frozen=True)
class ParityGame:
    owner: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    priority: tuple[int, ...]
    initial: int = 0

    def __post_init__(self):
        n = len(self.owner)
        if len(self.succ) != n or len(self.priority) != n:
            raise GameError("owner, succ and priority must have one entry per vertex")
        for v, s in enumerate(self.succ):
            if not s:
                raise GameError(f"vertex {v} is a dead end")
            if any(not 0 <= w < n for w in s):
                raise GameError(f"vertex {v} has an out-of-range successor")
        if any(o not in (EVEN, ODD) for o in self.owner):
            raise GameError("owners must be 0 (Even) or 1 (Odd)")
        if n and not 0 <= self.initial < n:
            raise GameError("initial vertex out of range")

    @property
    def n(self) -> int:
        return len(self.owner)

    def predecessors(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in range(self.n)]
        for v, s in enumerate(self.succ):
            for w in s:
                if not pred[w] or pred[w][-1] != v:
                    pred[w].append(v)
        return pred


@dataclass(frozen=True)
class ParitySolution:
    win: tuple[frozenset[int], frozenset[int]]
    strategy: tuple[dict[int, int], dict[int, int]]

    def winner(self, v: int) -> int:
        return EVEN if v in self.win[EVEN] else ODD


def attractor(
    g: ParityGame, pred: Sequence[Sequence[int]], player: int, target, sub: set[int]
) -> tuple[set[int], dict[int, int]]:
    """Vertices of ``sub`` from which ``player`` forces a visit to ``target``."""
    attr = set(target)
    strat: dict[int, int] = {}
    remaining: dict[int, int] = {}
    queue = sorted(attr)
    owner, succ = g.owner, g.succ
    for v in queue:
        for u in pred[v]:
            if u not in sub or u in attr:
                continue
            if owner[u] == player:
                attr.add(u)
                strat[u] = v
                queue.append(u)
            else:
                left = remaining.get(u)
                if left is None:
                    left = sum(1 for w in succ[u] if w in sub)
                left -= 1
                remaining[u] = left
                if left == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strat


def _zielonka(g: ParityGame, pred, sub: set[int], win, strat) -> None:
    owner, succ, prio = g.owner, g.succ, g.priority
    sub = set(sub)
    while sub:
        d = min(prio[v] for v in sub)
        i = d % 2
        top = [v for v in sorted(sub) if prio[v] == d]
        a_set, a_strat = attractor(g, pred, i, top, sub)
        rest = sub - a_set
        w_sub = (set(), set())
        s_sub: tuple[dict, dict] = ({}, {})
        _zielonka(g, pred, rest, w_sub, s_sub)
        if not w_sub[1 - i]:
            win[i].update(sub)
            strat[i].update(s_sub[i])
            strat[i].update(a_strat)
            for v in top:
                if owner[v] == i:
                    strat[i][v] = next(w for w in succ[v] if w in sub)
            return
        b_set, b_strat = attractor(g, pred, 1 - i, w_sub[1 - i], sub)
        win[1 - i].update(b_set)
        strat[1 - i].update({v: w for v, w in s_sub[1 - i].items() if v in w_sub[1 - i]})
        strat[1 - i].update(b_strat)
        sub = sub - b_set


def solve_parity_perfect(g: ParityGame) -> ParitySolution:
    """Winning regions and positional winning strategies (recursive
    decomposition with attractors; the opponent-region step is iterated)."""
    pred = g.predecessors()
    win: tuple[set[int], set[int]] = (set(), set())
    strat: tuple[dict, dict] = ({}, {})
    _zielonka(g, pred, set(range(g.n)), win, strat)
    s0 = {v: w for v, w in sorted(strat[0].items()) if v in win[0] and g.owner[v] == EVEN}
    s1 = {v: w for v, w in sorted(strat[1].items()) if v in win[1] and g.owner[v] == ODD}
    return ParitySolution((frozenset(win[0]), frozenset(win[1])), (s0, s1))


def play_lasso(g: ParityGame, v: int, s0: dict[int, int], s1: dict[int, int]) -> tuple[list[int], list[int]]:
    """Unique play from ``v`` when both players follow positional strategies
    (vertices missing from a strategy take their first successor)."""
    seen: dict[int, int] = {}
    path: list[int] = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        s = s0 if g.owner[v] == EVEN else s1
        v = s.get(v, g.succ[v][0])
    k = seen[v]
    return path[:k], path[k:]
