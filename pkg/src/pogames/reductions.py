"""Game-to-game transformations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .game import (
    FourPlayerGame,
    GameError,
    Objective,
    Parity,
    Partition,
    PreconditionError,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
    less_informed,
    post,
)


class VisibilityError(PreconditionError):
    """Priorities are not constant on the cells of some observation partition."""


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, progress: dict | None = None):
        super().__init__(message)
        self.progress = progress or {}


def unique_names(names: list[str]) -> tuple[str, ...]:
    out: list[str] = []
    seen: set[str] = set()
    for s in names:
        while s in seen:
            s += "'"
        seen.add(s)
        out.append(s)
    return tuple(out)


def priorities_constant_on(priority, part: Partition) -> bool:
    return all(len({priority[q] for q in c}) == 1 for c in part.cells)


def _resolve(g, obs1, obs2, obj):
    return (obs1 if obs1 is not None else g.obs1, obs2 if obs2 is not None else g.obs2, obj if obj is not None else g.objective)


# ---------------------------------------------------------------------------
# reach/safe -> visible parity


def make_visible(g: ThreePlayerGame, obs1=None, obs2=None, obj=None):
    """Product with a reached/violated flag; flagged states are absorbing.

    Returns ``(game, obs1, obs2, parity)`` where the returned game already
    carries the refined partitions and the parity objective.  State ``2q+f``
    is ``(q, f)``."""
    obs1, obs2, obj = _resolve(g, obs1, obs2, obj)
    if not isinstance(obj, (Reach, Safe)):
        raise PreconditionError("make_visible expects a reach or safe objective")
    reach = isinstance(obj, Reach)
    target = obj.target

    def flag_of(q: int) -> int:
        return int(q in target) if reach else int(q not in target)

    n = g.n
    names = unique_names([f"{s}/{f}" for s in g.states for f in (0, 1)])
    delta = []
    for q in range(n):
        for f in (0, 1):
            if f == 1:
                me = 2 * q + 1
                delta.append(tuple(tuple((me,) * len(g.actions[2]) for _ in g.actions[1]) for _ in g.actions[0]))
            else:
                delta.append(
                    tuple(
                        tuple(tuple(2 * t + flag_of(t) for t in r2) for r2 in r)
                        for r in g.delta[q]
                    )
                )
    flags = [f for _ in range(n) for f in (0, 1)]
    base = [q for q in range(n) for _ in (0, 1)]
    o1 = Partition.from_labels([(obs1.obs(base[v]), flags[v]) for v in range(2 * n)], owner=1)
    o2 = Partition.from_labels([(obs2.obs(base[v]), flags[v]) for v in range(2 * n)], owner=2)
    if reach:
        prio = tuple(0 if f else 1 for f in flags)
    else:
        prio = tuple(1 if f else 0 for f in flags)
    par = Parity(prio)
    init = 2 * g.initial + flag_of(g.initial)
    out = ThreePlayerGame(names, init, g.actions, tuple(delta), o1, o2, par)
    return out, o1, o2, par


# ---------------------------------------------------------------------------
# knowledge game


@dataclass(frozen=True)
class KnowledgeGame:
    """Two-player game over player-2 knowledges of a base game.

    ``moves[h][a1][a2]`` lists the non-empty options ``(obs2 cell, h')`` of the
    composite action's table entry for ``(h, a2)``; choosing a cell with an
    empty intersection would lead to ``sink`` and is never materialized as an
    option.  ``obs1_cells[c]`` holds the knowledges covered by obs1 cell ``c``
    of the base game (possibly empty if no reachable knowledge lies there)."""

    base: ThreePlayerGame
    obs1: Partition
    obs2: Partition
    knowledge: tuple[frozenset[int], ...]
    initial: int
    sink: int
    moves: tuple
    priority: tuple[int, ...]
    cell1_of: tuple[int, ...]
    obs1_cells: tuple[tuple[int, ...], ...]

    @property
    def n_knowledge(self) -> int:
        return len(self.knowledge)


def lift_priority(obj: Parity, s) -> int:
    vals = {obj.priority[q] for q in s}
    if len(vals) != 1:
        raise VisibilityError(f"mixed priorities {sorted(vals)} inside one knowledge")
    return vals.pop()


def build_knowledge_game(g: ThreePlayerGame, obs1=None, obs2=None, obj=None, budget: int = 10**6) -> KnowledgeGame:
    obs1, obs2, obj = _resolve(g, obs1, obs2, obj)
    if not isinstance(obj, Parity):
        raise PreconditionError("knowledge game needs a parity objective (use make_visible first)")
    if not less_informed(obs1, obs2):
        raise PreconditionError("player 1 is not less informed than player 2")
    if not priorities_constant_on(obj.priority, obs2):
        raise VisibilityError("priority is not constant on player-2 observations")
    n1, n2 = len(g.actions[0]), len(g.actions[1])
    start = frozenset([g.initial])
    index = {start: 0}
    know = [start]
    moves = []
    for s in know:
        rows = []
        for a1 in range(n1):
            row = []
            for a2 in range(n2):
                succ = post(g, s, a1, a2)
                opts = []
                groups: dict[int, list[int]] = {}
                for t in succ:
                    groups.setdefault(obs2.obs(t), []).append(t)
                for c in sorted(groups):
                    s2 = frozenset(groups[c])
                    h2 = index.get(s2)
                    if h2 is None:
                        h2 = index[s2] = len(know)
                        know.append(s2)
                        if len(know) > budget:
                            raise BudgetExceeded("knowledge game exceeds budget", {"knowledge_states": len(know)})
                    opts.append((c, h2))
                row.append(tuple(opts))
            rows.append(tuple(row))
        moves.append(tuple(rows))
    prio = [lift_priority(obj, s) for s in know]
    top = max(obj.priority)
    sink_prio = top if top % 2 == 1 else top + 1
    sink = len(know)
    cell1 = [obs1.obs(next(iter(s))) for s in know]
    groups1: list[list[int]] = [[] for _ in range(len(obs1))]
    for h, c in enumerate(cell1):
        groups1[c].append(h)
    # the sink is designated to the initial state's obs1 cell
    return KnowledgeGame(
        g,
        obs1,
        obs2,
        tuple(know),
        0,
        sink,
        tuple(moves),
        tuple(prio + [sink_prio]),
        tuple(cell1 + [obs1.obs(g.initial)]),
        tuple(tuple(c) for c in groups1),
    )


def knowledge_candidates(obs2: Partition) -> int:
    """Size of the full knowledge space: sum over cells of 2^|cell| - 1."""
    return sum(2 ** len(c) - 1 for c in obs2.cells)


# ---------------------------------------------------------------------------
# four players -> three players


def four_to_three(g4: FourPlayerGame) -> ThreePlayerGame:
    """Merge players 2 and 4: player 2 additionally announces a resolver
    ``Q4 -> A4`` that fires on player-4 states."""
    if not less_informed(g4.obs1, g4.obs2):
        raise PreconditionError("player 1 is not less informed than player 2")
    q4 = [q for q in range(g4.n) if g4.turn[q] == 4]
    a2, a4 = g4.actions[1], g4.actions[3]
    resolvers = list(product(range(len(a4)), repeat=len(q4)))
    pos = {q: i for i, q in enumerate(q4)}
    composite = [(b, r) for b in range(len(a2)) for r in resolvers]
    if q4:
        names = [
            f"{a2[b]}<" + ",".join(f"{g4.states[q]}:{a4[r[pos[q]]]}" for q in q4) + ">"
            for b, r in composite
        ]
    else:
        names = [a2[b] for b, _ in composite]
    n3 = len(g4.actions[2])
    delta = []
    for q in range(g4.n):
        rows = []
        for i in range(len(g4.actions[0])):
            row = []
            for b, r in composite:
                if g4.turn[q] == 3:
                    row.append(tuple(g4.delta[q][i][b]))
                else:
                    row.append((g4.delta[q][i][b][r[pos[q]]],) * n3)
            rows.append(tuple(row))
        delta.append(tuple(rows))
    return ThreePlayerGame(
        g4.states,
        g4.initial,
        (g4.actions[0], unique_names(names), g4.actions[2]),
        tuple(delta),
        g4.obs1,
        g4.obs2,
        g4.objective,
    )


# ---------------------------------------------------------------------------
# stochastic correspondences


def uniform(g: ThreePlayerGame) -> StochasticGame:
    """Replace player 3 by a uniform choice over its actions."""
    k = len(g.actions[2])
    delta = []
    for q in range(g.n):
        rows = []
        for r in g.delta[q]:
            row = []
            for r2 in r:
                counts: dict[int, int] = {}
                for t in r2:
                    counts[t] = counts.get(t, 0) + 1
                row.append(tuple((t, Fraction(c, k)) for t, c in sorted(counts.items())))
            rows.append(tuple(row))
        delta.append(tuple(rows))
    return StochasticGame(g.states, g.initial, (g.actions[0], g.actions[1]), tuple(delta), g.obs1, g.obs2, g.objective)


def support_game(sg: StochasticGame) -> ThreePlayerGame:
    """Let player 3 pick the i-th support element (clamped to the last one)."""
    k = max(len(d) for rows in sg.delta for r in rows for d in r)
    delta = []
    for q in range(sg.n):
        rows = []
        for r in sg.delta[q]:
            row = []
            for d in r:
                supp = [t for t, _ in d]
                row.append(tuple(supp[min(i, len(supp) - 1)] for i in range(k)))
            rows.append(tuple(row))
        delta.append(tuple(rows))
    a3 = tuple(str(i + 1) for i in range(k))
    return ThreePlayerGame(sg.states, sg.initial, (sg.actions[0], sg.actions[1], a3), tuple(delta), sg.obs1, sg.obs2, sg.objective)


def absorb_targets(sg: StochasticGame) -> StochasticGame:
    """Make reach targets (or safety violations) absorbing; verdict-neutral."""
    obj = sg.objective
    if isinstance(obj, Reach):
        stop = obj.target
    elif isinstance(obj, Safe):
        stop = frozenset(range(sg.n)) - obj.target
    else:
        return sg
    delta = []
    for q in range(sg.n):
        if q in stop:
            delta.append(tuple(tuple(((q, Fraction(1)),) for _ in sg.actions[1]) for _ in sg.actions[0]))
        else:
            delta.append(sg.delta[q])
    return StochasticGame(sg.states, sg.initial, sg.actions, tuple(delta), sg.obs1, sg.obs2, obj)


@dataclass(frozen=True)
class GadgetInfo:
    """Bookkeeping of a gadget game: ``kind[v]`` is ``regular``, ``chooser``,
    ``demonic`` or ``plain``; ``source[v]`` is the stochastic state whose step
    produced ``v``."""

    kind: tuple[str, ...]
    source: tuple[int, ...]
    regular: tuple[int, ...]


def gadget(sg: StochasticGame) -> tuple[FourPlayerGame, GadgetInfo]:
    """Turn-based replacement of probabilistic transitions.

    Every step of ``sg`` becomes two steps.  At a regular state player 4
    either resolves the support itself (landing in a ``demonic`` state) or
    hands the choice to player 3 (a ``chooser`` state); deterministic steps
    pass through a ``plain`` state.  Intermediate states sit in the
    observation cells of their source, so players 1 and 2 see one repeated
    observation per step.  The objective becomes parity: for reach, demonic
    landings have priority 0 and every other non-target state priority 1, so
    player 4 must eventually leave all choices to player 3 and player 3 then
    needs a path to the target.  For safety every state except violations has
    priority 0.  A game without probabilistic transitions is returned with
    dummy player-3/4 alphabets and no new states.
    """
    obj = sg.objective
    if not isinstance(obj, (Reach, Safe)):
        raise PreconditionError("gadget supports reach and safe objectives")
    sg = absorb_targets(sg)
    n1, n2 = len(sg.actions[0]), len(sg.actions[1])
    k = max(len(d) for rows in sg.delta for r in rows for d in r)
    good = obj.target if isinstance(obj, Reach) else frozenset(range(sg.n)) - obj.target

    def base_prio(q: int) -> int:
        if isinstance(obj, Reach):
            return 0 if q in good else 1
        return 1 if q in good else 0

    if k == 1:
        delta = tuple(
            tuple(tuple((sg.delta[q][i][j][0][0],) for j in range(n2)) for i in range(n1)) for q in range(sg.n)
        )
        g4 = FourPlayerGame(
            sg.states, sg.initial, (sg.actions[0], sg.actions[1], ("_",), ("_",)),
            (3,) * sg.n, delta, sg.obs1, sg.obs2, Parity(tuple(base_prio(q) for q in range(sg.n))),
        )
        return g4, GadgetInfo(("regular",) * sg.n, tuple(range(sg.n)), tuple(range(sg.n)))

    names = list(sg.states)
    kind = ["regular"] * sg.n
    source = list(range(sg.n))
    prio = [base_prio(q) for q in range(sg.n)]
    index: dict = {}

    def node(key, name, knd, src, p):
        v = index.get(key)
        if v is None:
            v = index[key] = len(names)
            names.append(name)
            kind.append(knd)
            source.append(src)
            prio.append(p)
        return v

    a3 = tuple(str(i + 1) for i in range(k))
    a4 = tuple(f"d{i + 1}" for i in range(k)) + ("pass",)
    reg_rows = []
    chooser_rows: dict[int, list[int]] = {}
    for q in range(sg.n):
        rows = []
        for i in range(n1):
            row = []
            for j in range(n2):
                supp = sg.support(q, i, j)
                if len(supp) == 1:
                    v = node(("plain", q, supp[0]), f"{sg.states[q]}>{sg.states[supp[0]]}", "plain", q, prio[q])
                    row.append((v,) * len(a4))
                    continue
                cells = []
                for x in range(k):
                    t = supp[min(x, len(supp) - 1)]
                    cells.append(node(("demonic", q, t), f"{sg.states[q]}!{sg.states[t]}", "demonic", q, 0 if isinstance(obj, Reach) else prio[q]))
                c = node(("chooser", q, i, j), f"{sg.states[q]}?{sg.actions[0][i]},{sg.actions[1][j]}", "chooser", q, prio[q])
                chooser_rows[c] = [supp[min(x, len(supp) - 1)] for x in range(k)]
                cells.append(c)
                row.append(tuple(cells))
            rows.append(tuple(row))
        reg_rows.append(tuple(rows))
    total = len(names)
    delta = list(reg_rows)
    for v in range(sg.n, total):
        if kind[v] == "chooser":
            targets = tuple(chooser_rows[v])
        else:
            key = next(kk for kk, vv in index.items() if vv == v)
            targets = (key[2],) * k
        delta.append(tuple(tuple(targets for _ in range(n2)) for _ in range(n1)))
    turn = tuple(4 if v < sg.n else 3 for v in range(total))
    o1 = Partition.from_labels([sg.obs1.obs(source[v]) for v in range(total)], owner=1)
    o2 = Partition.from_labels([sg.obs2.obs(source[v]) for v in range(total)], owner=2)
    g4 = FourPlayerGame(
        unique_names(names), sg.initial, (sg.actions[0], sg.actions[1], a3, a4), turn, tuple(delta), o1, o2, Parity(tuple(prio))
    )
    return g4, GadgetInfo(tuple(kind), tuple(source), tuple(range(sg.n)))


def objective_of(g) -> Objective:
    if g.objective is None:
        raise GameError("game has no objective")
    return g.objective
