"""Decision procedures for three-player partial-observation games."""

from __future__ import annotations

from dataclasses import dataclass, field

from .game import (
    FourPlayerGame,
    MooreStrategy,
    Objective,
    Parity,
    Partition,
    PreconditionError,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
    Verdict,
    less_informed,
)
from .oracles import decision_histories, horizon_certificate, moore_machines
from .parity import EVEN, ODD, ParityGame, solve_parity_perfect
from .reductions import (
    BudgetExceeded,
    KnowledgeGame,
    VisibilityError,
    build_knowledge_game,
    knowledge_candidates,
    make_visible,
    priorities_constant_on,
)

DEFAULT_BUDGET = 10**6


# ---------------------------------------------------------------------------
# belief (subset) construction over the knowledge game


@dataclass
class BeliefGame:
    """Perfect-information parity game over player-1 beliefs of a knowledge game.

    Even vertices are beliefs (sets of knowledges); Odd vertices are outcome
    maps ``obs1 cell -> next belief`` produced by composite actions, and Odd
    resolves the observation.  ``choice[(v, w)]`` records the first composite
    action ``(a1, table)`` leading from Even vertex ``v`` to Odd vertex ``w``;
    ``table`` maps ``(knowledge, a2)`` to the announced obs2 cell."""

    parity: ParityGame
    belief: dict[int, frozenset[int]]
    outcome: dict[int, tuple[tuple[int, int], ...]]
    choice: dict[tuple[int, int], tuple[int, dict]]
    initial: int
    counters: dict = field(default_factory=dict)


def _minimal(cands: dict) -> dict:
    keep: dict = {}
    for key in sorted(cands, key=len):
        if not any(k <= key for k in keep):
            keep[key] = cands[key]
    return {k: cands[k] for k in cands if k in keep}


def subset_construct(h: KnowledgeGame, budget: int = DEFAULT_BUDGET) -> BeliefGame:
    """Belief construction for the knowledge game (player 2 perfect in it).

    Composite actions whose outcome is a superset of another outcome (per
    obs1 cell) are dominated and not materialized; this never changes which
    beliefs Even wins because smaller beliefs are easier for Even."""
    for cell in h.obs1_cells:
        if len({h.priority[x] for x in cell}) > 1:
            raise VisibilityError("lifted priority is not constant on player-1 observations")
    n1, n2 = len(h.base.actions[0]), len(h.base.actions[1])
    owner: list[int] = []
    succ: list[list[int]] = []
    prio: list[int] = []
    belief: dict[int, frozenset[int]] = {}
    outcome: dict[int, tuple] = {}
    choice: dict = {}
    even_index: dict[frozenset[int], int] = {}
    odd_index: dict[tuple, int] = {}

    def new_vertex(o: int, p: int) -> int:
        owner.append(o)
        succ.append([])
        prio.append(p)
        if len(owner) > budget:
            raise BudgetExceeded(
                "belief construction exceeds budget",
                {"belief_vertices": len(belief), "vertices": len(owner)},
            )
        return len(owner) - 1

    def even_vertex(k: frozenset[int]) -> int:
        v = even_index.get(k)
        if v is None:
            v = even_index[k] = new_vertex(EVEN, h.priority[next(iter(k))])
            belief[v] = k
            work.append(v)
        return v

    work: list[int] = []
    init = even_vertex(frozenset([h.initial]))
    while work:
        v = work.pop()
        k = belief[v]
        members = sorted(k)
        cands: dict = {}
        for a1 in range(n1):
            pairs = [(x, b) for x in members for b in range(n2)]
            partial: dict = {frozenset(): ()}
            for x, b in pairs:
                opts = h.moves[x][a1][b]
                nxt: dict = {}
                for got, picks in partial.items():
                    for ci, (_, x2) in enumerate(opts):
                        key = got | {x2}
                        if key not in nxt:
                            nxt[key] = picks + (ci,)
                partial = _minimal(nxt)
            for got, picks in partial.items():
                if got not in cands:
                    cands[got] = (a1, pairs, picks)
        for got, (a1, pairs, picks) in _minimal(cands).items():
            groups: dict[int, set[int]] = {}
            for x2 in got:
                groups.setdefault(h.cell1_of[x2], set()).add(x2)
            out_key = tuple((c, frozenset(groups[c])) for c in sorted(groups))
            key = (prio[v], out_key)
            w = odd_index.get(key)
            if w is None:
                w = odd_index[key] = new_vertex(ODD, prio[v])
                outcome[w] = tuple((c, even_vertex(kk)) for c, kk in out_key)
                succ[w] = [t for _, t in outcome[w]]
            if w not in succ[v]:
                succ[v].append(w)
                table = {(x, b): h.moves[x][a1][b][ci][0] for (x, b), ci in zip(pairs, picks)}
                choice[(v, w)] = (a1, table)
    pg = ParityGame(tuple(owner), tuple(tuple(s) for s in succ), tuple(prio), init)
    counters = {"belief_vertices": len(belief), "odd_vertices": len(outcome), "vertices": len(owner)}
    return BeliefGame(pg, belief, outcome, choice, init, counters)


# ---------------------------------------------------------------------------
# strategies


def minimize_moore(sigma: MooreStrategy) -> MooreStrategy:
    """Merge behaviourally equivalent memory elements (partition refinement)
    and drop unreachable ones."""
    k = len(sigma.memory)
    block = list(sigma.output)
    while True:
        sigs = [(block[m],) + tuple(block[t] for t in sigma.update[m]) for m in range(k)]
        ids: dict = {}
        new = [ids.setdefault(s, len(ids)) for s in sigs]
        if len(ids) == len(set(block)):
            block = new
            break
        block = new
    order: list[int] = []
    seen: set[int] = set()
    queue = [block[sigma.initial]]
    seen.add(queue[0])
    rep = {}
    for m in range(k):
        rep.setdefault(block[m], m)
    while queue:
        b = queue.pop(0)
        order.append(b)
        for t in sigma.update[rep[b]]:
            if block[t] not in seen:
                seen.add(block[t])
                queue.append(block[t])
    pos = {b: i for i, b in enumerate(order)}
    update = tuple(tuple(pos[block[t]] for t in sigma.update[rep[b]]) for b in order)
    output = tuple(sigma.output[rep[b]] for b in order)
    return MooreStrategy(tuple(f"m{i}" for i in range(len(order))), 0, update, output, sigma.owner)


def extract_witness(bg: BeliefGame, sol, n_cells: int, project, preference) -> MooreStrategy:
    """Moore strategy whose memory is the reachable beliefs plus a start element.

    ``project[c]`` maps an obs1 cell of the solved game to a cell of the game
    the strategy is for; among several cells with the same projection the one
    with the smallest ``preference`` wins."""
    strat = sol.strategy[EVEN]
    pg = bg.parity
    order = [bg.initial]
    seen = {bg.initial}
    for v in order:
        w = strat.get(v)
        if w is None:
            w = next(x for x in pg.succ[v] if x in sol.win[EVEN])
        for _, t in bg.outcome[w]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    mem = {v: i + 1 for i, v in enumerate(order)}
    update = []
    output = []
    first = {}
    for v in order:
        w = strat.get(v)
        if w is None:
            w = next(x for x in pg.succ[v] if x in sol.win[EVEN])
        a1, _ = bg.choice[(v, w)]
        row = [mem[v]] * n_cells
        best: dict[int, tuple] = {}
        for c, t in bg.outcome[w]:
            o = project[c]
            cand = (preference[c], mem[t])
            if o not in best or cand < best[o]:
                best[o] = cand
        for o, (_, m) in best.items():
            row[o] = m
        update.append(tuple(row))
        output.append(a1)
        first[v] = a1
    init_belief = bg.belief[bg.initial]
    start_row = [0] * n_cells
    start_row[project[_cell_of_belief(bg, bg.initial)]] = 1
    names = ("start",) + tuple(f"b{i}" for i in range(len(order)))
    return MooreStrategy(names, 0, (tuple(start_row),) + tuple(update), (output[0],) + tuple(output))


def _cell_of_belief(bg: BeliefGame, v: int) -> int:
    return bg.counters["cell1_of"][next(iter(bg.belief[v]))]


# ---------------------------------------------------------------------------
# strategy verification


def _product(g: ThreePlayerGame, obs1: Partition, sigma: MooreStrategy):
    o1 = obs1.cell_of
    upd, out = sigma.update, sigma.output
    q0 = g.initial
    init = (q0, upd[sigma.initial][o1[q0]])

    def step(qm, a2):
        q, m = qm
        a1 = out[m]
        return {(t, upd[m][o1[t]]) for t in g.delta[q][a1][a2]}

    return init, step


def verify_strategy(g: ThreePlayerGame, obs1=None, obs2=None, obj=None, sigma1: MooreStrategy | None = None,
                    budget: int = DEFAULT_BUDGET) -> bool:
    """Does ``sigma1`` guarantee that for every player-2 strategy some
    player-3 strategy satisfies the objective?  Decided on the complement as
    a game where player 2 holds beliefs over (state, memory) pairs."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    if sigma1 is None:
        raise PreconditionError("a strategy is required")
    sigma1.check_against(obs1, len(g.actions[0]))
    init, step = _product(g, obs1, sigma1)
    n2 = len(g.actions[1])
    o2 = obs2.cell_of
    if isinstance(obj, Safe):
        if init[0] not in obj.target:
            return False
        keep = lambda qm: qm[0] in obj.target  # noqa: E731
    else:
        keep = lambda qm: True  # noqa: E731
    if isinstance(obj, Parity) and not priorities_constant_on(obj.priority, obs2):
        raise VisibilityError("strategy check needs priorities visible to player 2")

    start = frozenset([init])
    index = {start: 0}
    beliefs = [start]
    edges: list[list[list[int]]] = []
    for b in beliefs:
        rows = []
        for a2 in range(n2):
            groups: dict[int, set] = {}
            for qm in b:
                for nxt in step(qm, a2):
                    if keep(nxt):
                        groups.setdefault(o2[nxt[0]], set()).add(nxt)
            row = []
            for c in sorted(groups):
                fb = frozenset(groups[c])
                j = index.get(fb)
                if j is None:
                    j = index[fb] = len(beliefs)
                    beliefs.append(fb)
                    if len(beliefs) > budget:
                        raise BudgetExceeded("strategy check exceeds budget", {"beliefs": len(beliefs)})
                row.append(j)
            rows.append(row)
        edges.append(rows)

    nb = len(beliefs)
    if isinstance(obj, Reach):
        # player 1 wins iff the cell choices can force a belief touching the target
        bad = [any(qm[0] in obj.target for qm in b) for b in beliefs]
        return _forall_exists_attractor(nb, edges, bad)[0]
    if isinstance(obj, Safe):
        # player 2 wins iff some a2 choice empties every branch eventually
        return not _exists_forall_attractor(nb, edges)[0]
    prio = obj.priority
    owner, succ, pr = [], [], []
    for i, b in enumerate(beliefs):
        p = prio[next(iter(b))[0]]
        owner.append(ODD)
        succ.append([nb + i * n2 + a2 for a2 in range(n2)])
        pr.append(p)
    for i, b in enumerate(beliefs):
        p = pr[i]
        for a2 in range(n2):
            owner.append(EVEN)
            succ.append(edges[i][a2])
            pr.append(p)
    pg = ParityGame(tuple(owner), tuple(tuple(s) for s in succ), tuple(pr), 0)
    return 0 in solve_parity_perfect(pg).win[EVEN]


def _predecessors(nb, edges):
    pred: list[list[tuple[int, int]]] = [[] for _ in range(nb)]
    for i, rows in enumerate(edges):
        for a2, row in enumerate(rows):
            for j in row:
                pred[j].append((i, a2))
    return pred


def _forall_exists_attractor(nb, edges, goal) -> list[bool]:
    """Vertices where for every a2 some successor leads to ``goal``."""
    won = list(goal)
    n2 = len(edges[0]) if edges else 0
    pending = [n2] * nb
    hit = [[False] * n2 for _ in range(nb)]
    pred = _predecessors(nb, edges)
    queue = [i for i in range(nb) if won[i]]
    for j in queue:
        for i, a2 in pred[j]:
            if won[i] or hit[i][a2]:
                continue
            hit[i][a2] = True
            pending[i] -= 1
            if pending[i] == 0:
                won[i] = True
                queue.append(i)
    return won


def _exists_forall_attractor(nb, edges) -> list[bool]:
    """Vertices where some a2 makes every successor branch reach the empty belief."""
    n2 = len(edges[0]) if edges else 0
    left = [[len(set(edges[i][a2])) for a2 in range(n2)] for i in range(nb)]
    won = [any(x == 0 for x in left[i]) for i in range(nb)]
    pred: list[list[tuple[int, int]]] = [[] for _ in range(nb)]
    for i in range(nb):
        for a2 in range(n2):
            for j in set(edges[i][a2]):
                pred[j].append((i, a2))
    queue = [i for i in range(nb) if won[i]]
    for j in queue:
        for i, a2 in pred[j]:
            if won[i]:
                continue
            left[i][a2] -= 1
            if left[i][a2] == 0:
                won[i] = True
                queue.append(i)
    return won


# ---------------------------------------------------------------------------
# bounded enumeration


def completeness_threshold(g: ThreePlayerGame, obs1: Partition, obs2: Partition, obj: Objective) -> tuple[int, str]:
    """Memory bound from which a negative bounded answer is final."""
    cert = horizon_certificate(g, obj)
    if cert is not None:
        return max(1, len(decision_histories(g, obs1, cert))), "horizon"
    if isinstance(obj, (Reach, Safe)):
        vis = make_visible(g, obs1, obs2, obj)[0]
        cells = vis.obs2
    else:
        cells = obs2
    return 1 + 2 ** knowledge_candidates(cells), "doubly-exponential"


def bounded_solve(g: ThreePlayerGame, obs1=None, obs2=None, obj=None, m1: int = 2, m2: int = 1,
                  budget: int = DEFAULT_BUDGET) -> Verdict:
    """Enumerate player-1 Moore strategies with at most ``m1`` memory
    elements, checking each exactly.  ``m2`` is recorded only: the inner
    check is exact, so player 2 is never restricted."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    if m1 < 1 or m2 < 1:
        raise PreconditionError("memory bounds must be at least 1")
    checked = 0
    cells, n1 = len(obs1), len(g.actions[0])
    for k in range(1, m1 + 1):
        for sigma in moore_machines(k, cells, n1):
            checked += 1
            if checked > budget:
                raise BudgetExceeded("bounded enumeration exceeds budget", {"strategies_checked": checked - 1, "memory": k})
            if verify_strategy(g, obs1, obs2, obj, sigma):
                return Verdict(True, "bounded", sigma, True, {"strategies_checked": checked, "m1": m1, "m2": m2})
    need, rule = completeness_threshold(g, obs1, obs2, obj)
    return Verdict(False, "bounded", None, m1 >= need,
                   {"strategies_checked": checked, "m1": m1, "m2": m2, "complete_from": need, "rule": rule})


# ---------------------------------------------------------------------------
# end-to-end


def solve_three(g: ThreePlayerGame, obs1=None, obs2=None, obj=None, method: str = "auto", m1: int = 2, m2: int = 1,
                budget: int = DEFAULT_BUDGET, check_witness: bool = True) -> Verdict:
    """Exists sigma1, forall sigma2, exists sigma3: play satisfies obj."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    if obj is None:
        raise PreconditionError("no objective")
    if not less_informed(obs1, obs2):
        raise PreconditionError("player 1 is not less informed than player 2")
    if method == "bounded":
        return bounded_solve(g, obs1, obs2, obj, m1, m2, budget)
    if method not in ("auto", "knowledge"):
        raise PreconditionError(f"unknown method {method!r}")
    diag: dict = {}
    if isinstance(obj, (Reach, Safe)):
        vg, vo1, vo2, par = make_visible(g, obs1, obs2, obj)
        project = [vo1.cells[c][0] // 2 for c in range(len(vo1))]
        project = [obs1.obs(q) for q in project]
        preference = [vo1.cells[c][0] % 2 for c in range(len(vo1))]
        diag["visible_states"] = vg.n
    else:
        if not priorities_constant_on(obj.priority, obs2):
            raise VisibilityError("priority is not constant on player-2 observations")
        vg, vo1, vo2, par = g, obs1, obs2, obj
        project = list(range(len(obs1)))
        preference = [0] * len(obs1)
    try:
        h = build_knowledge_game(vg, vo1, vo2, par, budget)
        diag["knowledge_states"] = h.n_knowledge
        diag["knowledge_bound"] = knowledge_candidates(vo2)
        bg = subset_construct(h, budget)
    except VisibilityError:
        if method == "knowledge":
            raise
        v = bounded_solve(g, obs1, obs2, obj, m1, m2, budget)
        v.diagnostics.update(diag, fallback="visibility")
        return v
    bg.counters["cell1_of"] = h.cell1_of
    diag.update({k: v for k, v in bg.counters.items() if k != "cell1_of"})
    sol = solve_parity_perfect(bg.parity)
    if bg.initial not in sol.win[EVEN]:
        return Verdict(False, "knowledge", None, True, diag)
    raw = extract_witness(bg, sol, len(obs1), project, preference)
    witness = minimize_moore(raw)
    diag["witness_memory"] = len(witness.memory)
    if check_witness and not verify_strategy(g, obs1, obs2, obj, witness, budget):
        raise AssertionError("extracted witness failed verification")
    return Verdict(True, "knowledge", witness, True, diag)


# ---------------------------------------------------------------------------
# almost-sure reachability through the turn-based gadget


def gadget_pair_wins(g4: FourPlayerGame, info, sigma1: MooreStrategy, sigma2: MooreStrategy) -> bool:
    """With both Moore strategies fixed (acting and updating at regular
    states only), does player 3 win the gadget's parity game against player
    4?  For reach objectives this is almost-sure reachability of the chain
    obtained by fixing the same strategies in the stochastic game."""
    regular = set(info.regular)
    o1, o2 = g4.obs1.cell_of, g4.obs2.cell_of
    u1, u2 = sigma1.update, sigma2.update

    def enter(v, m1, m2):
        if v in regular:
            return (v, u1[m1][o1[v]], u2[m2][o2[v]])
        return (v, m1, m2)

    start = enter(g4.initial, sigma1.initial, sigma2.initial)
    index = {start: 0}
    nodes = [start]
    succ: list = []
    owner: list = []
    for v, m1, m2 in nodes:
        outs = g4.delta[v][sigma1.output[m1]][sigma2.output[m2]]
        row = []
        for t in sorted(set(outs)):
            key = enter(t, m1, m2)
            w = index.get(key)
            if w is None:
                w = index[key] = len(nodes)
                nodes.append(key)
            row.append(w)
        succ.append(tuple(row))
        owner.append(EVEN if g4.turn[v] == 3 else ODD)
    prio = tuple(g4.objective.priority[v] for v, _, _ in nodes)
    sol = solve_parity_perfect(ParityGame(tuple(owner), tuple(succ), prio, 0))
    return sol.winner(0) == EVEN


def almost_sure_via_gadget(sg: StochasticGame, k1: int = 2, k2: int = 2) -> Verdict:
    """Exists sigma1 with at most ``k1`` memory elements such that for every
    sigma2 with at most ``k2`` elements player 3 wins the gadget game."""
    from .oracles import moore_up_to
    from .reductions import gadget

    g4, info = gadget(sg)
    n1, n2 = len(sg.actions[0]), len(sg.actions[1])
    seconds = [_as_owner(s, 2) for s in moore_up_to(k2, len(sg.obs2), n2)]
    for s1 in moore_up_to(k1, len(sg.obs1), n1):
        if all(gadget_pair_wins(g4, info, s1, s2) for s2 in seconds):
            return Verdict(True, "gadget", s1, diagnostics={"gadget_states": g4.n})
    return Verdict(False, "gadget", diagnostics={"gadget_states": g4.n})


def _as_owner(s: MooreStrategy, owner: int) -> MooreStrategy:
    return MooreStrategy(s.memory, s.initial, s.update, s.output, owner)
