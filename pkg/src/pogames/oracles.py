"""Ground-truth engines: exhaustive enumeration on horizon-bounded games,
lasso search, and qualitative Markov-chain analysis."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

from .game import (
    FourPlayerGame,
    MooreStrategy,
    NO,
    Objective,
    Parity,
    Partition,
    PreconditionError,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
    Verdict,
)
from .reductions import BudgetExceeded, uniform

PROBABILITY_ONE = "probability-one"
POSITIVE = "positive"
ZERO = "zero"


class NoCertificate(PreconditionError):
    """The game is not horizon-bounded within the requested horizon."""


# ---------------------------------------------------------------------------
# horizon certificates


@dataclass(frozen=True)
class HorizonCertificate:
    horizon: int
    determined: frozenset[int]
    depth: dict


def _successor_sets(g) -> list[set[int]]:
    return [g.successors(q) for q in range(g.n)]


def determined_states(g, obj: Objective) -> frozenset[int]:
    """States at which the verdict of every continuation is already fixed."""
    absorbing = {q for q in range(g.n) if g.is_absorbing(q)}
    if isinstance(obj, Reach):
        return frozenset(obj.target | absorbing)
    if isinstance(obj, Safe):
        return frozenset((set(range(g.n)) - obj.target) | (absorbing & obj.target))
    return frozenset(absorbing)


def determined_value(q: int, obj: Objective) -> bool:
    if isinstance(obj, Reach):
        return q in obj.target
    if isinstance(obj, Safe):
        return q in obj.target
    return obj.priority[q] % 2 == 0


def horizon_certificate(g, obj: Objective) -> HorizonCertificate | None:
    """Backward absorption: depth 0 on determined states, otherwise one more
    than the deepest successor.  A cycle outside the determined set means
    there is no certificate."""
    det = determined_states(g, obj)
    succ = _successor_sets(g)
    depth: dict[int, int] = {}
    on_stack: set[int] = set()
    stack = [(g.initial, iter(sorted(succ[g.initial])) if g.initial not in det else iter(()))]
    if g.initial in det:
        return HorizonCertificate(0, det, {g.initial: 0})
    on_stack.add(g.initial)
    while stack:
        q, it = stack[-1]
        advanced = False
        for t in it:
            if t in det:
                depth[t] = 0
                continue
            if t in on_stack:
                return None
            if t not in depth:
                on_stack.add(t)
                stack.append((t, iter(sorted(succ[t]))))
                advanced = True
                break
        if not advanced:
            stack.pop()
            on_stack.discard(q)
            depth[q] = 1 + max(depth[t] for t in succ[q])
    return HorizonCertificate(depth[g.initial], det, depth)


def decision_histories(g, obs: Partition, cert: HorizonCertificate) -> list[tuple[int, ...]]:
    """Observation histories ending in an undetermined state, in canonical order."""
    out: set[tuple[int, ...]] = set()
    succ = _successor_sets(g)
    stack = [(g.initial, (obs.obs(g.initial),))]
    while stack:
        q, h = stack.pop()
        if q in cert.determined:
            continue
        out.add(h)
        for t in succ[q]:
            stack.append((t, h + (obs.obs(t),)))
    return sorted(out, key=lambda h: (len(h), h))


def history_strategy_to_moore(histories, choice, n_cells: int) -> MooreStrategy:
    """Moore machine whose memory is the history tree (plus start and done)."""
    nodes = ["start"] + ["h" + ".".join(map(str, h)) for h in histories] + ["done"]
    pos = {h: i + 1 for i, h in enumerate(histories)}
    done = len(nodes) - 1
    update = []
    update.append(tuple(pos.get((o,), done) for o in range(n_cells)))
    for h in histories:
        update.append(tuple(pos.get(h + (o,), done) for o in range(n_cells)))
    update.append((done,) * n_cells)
    output = (0,) + tuple(choice[h] for h in histories) + (0,)
    return MooreStrategy(tuple(nodes), 0, tuple(update), output)


def brute_force_three(
    g: ThreePlayerGame, obs1=None, obs2=None, obj=None, h: int | None = None, budget: int = 10**7
) -> Verdict:
    """Exists sigma1, forall sigma2, exists sigma3 by enumeration of history
    functions on a horizon-certified game."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    cert = horizon_certificate(g, obj)
    if cert is None or (h is not None and cert.horizon > h):
        raise NoCertificate("no horizon certificate" + ("" if h is None else f" within {h}"))
    det = cert.determined
    h1 = decision_histories(g, obs1, cert)
    h2 = decision_histories(g, obs2, cert)
    n1, n2 = len(g.actions[0]), len(g.actions[1])
    total = n1 ** len(h1) * n2 ** len(h2)
    if total > budget:
        raise BudgetExceeded("strategy enumeration exceeds budget", {"pairs": total})
    c1, c2, delta = obs1.cell_of, obs2.cell_of, g.delta

    def exists_path(q, x1, x2, s1, s2) -> bool:
        if q in det:
            return determined_value(q, obj)
        row = delta[q][s1[x1]][s2[x2]]
        for t in set(row):
            if exists_path(t, x1 + (c1[t],), x2 + (c2[t],), s1, s2):
                return True
        return False

    q0 = g.initial
    x10, x20 = (c1[q0],), (c2[q0],)
    checked = 0
    for choice1 in product(range(n1), repeat=len(h1)):
        s1 = dict(zip(h1, choice1))
        ok = True
        for choice2 in product(range(n2), repeat=len(h2)):
            checked += 1
            if not exists_path(q0, x10, x20, s1, dict(zip(h2, choice2))):
                ok = False
                break
        if ok:
            w = history_strategy_to_moore(h1, s1, len(obs1))
            return Verdict(True, "oracle", w, True, {"horizon": cert.horizon, "pairs_checked": checked})
    return Verdict(False, "oracle", None, True, {"horizon": cert.horizon, "pairs_checked": checked})


def brute_force_four(g: FourPlayerGame, obs1=None, obs2=None, obj=None, h: int | None = None, budget: int = 10**7) -> Verdict:
    """Exists sigma1, forall sigma2, exists sigma3, forall sigma4 (players 3
    and 4 perfectly informed and turn-based) on a horizon-certified game."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    cert = horizon_certificate(g, obj)
    if cert is None or (h is not None and cert.horizon > h):
        raise NoCertificate("no horizon certificate" + ("" if h is None else f" within {h}"))
    det = cert.determined
    h1 = decision_histories(g, obs1, cert)
    h2 = decision_histories(g, obs2, cert)
    n1, n2 = len(g.actions[0]), len(g.actions[1])
    total = n1 ** len(h1) * n2 ** len(h2)
    if total > budget:
        raise BudgetExceeded("strategy enumeration exceeds budget", {"pairs": total})
    c1, c2, delta, turn = obs1.cell_of, obs2.cell_of, g.delta, g.turn

    def wins(q, x1, x2, s1, s2) -> bool:
        if q in det:
            return determined_value(q, obj)
        row = set(delta[q][s1[x1]][s2[x2]])
        results = (wins(t, x1 + (c1[t],), x2 + (c2[t],), s1, s2) for t in sorted(row))
        return any(results) if turn[q] == 3 else all(results)

    q0 = g.initial
    checked = 0
    for choice1 in product(range(n1), repeat=len(h1)):
        s1 = dict(zip(h1, choice1))
        ok = True
        for choice2 in product(range(n2), repeat=len(h2)):
            checked += 1
            if not wins(q0, (c1[q0],), (c2[q0],), s1, dict(zip(h2, choice2))):
                ok = False
                break
        if ok:
            w = history_strategy_to_moore(h1, s1, len(obs1))
            return Verdict(True, "oracle-four", w, True, {"horizon": cert.horizon, "pairs_checked": checked})
    return Verdict(False, "oracle-four", None, True, {"horizon": cert.horizon, "pairs_checked": checked})


def brute_force_three_forall3(g: ThreePlayerGame, obs1=None, obs2=None, obj=None, h: int | None = None) -> Verdict:
    """Same enumeration with player 3 adversarial (forall sigma3)."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    obj = obj or g.objective
    g4 = FourPlayerGame(
        g.states, g.initial, (g.actions[0], g.actions[1], ("_",), g.actions[2]),
        (4,) * g.n, g.delta, obs1, obs2, obj,
    )
    v = brute_force_four(g4, obs1, obs2, obj, h)
    v.method = "oracle-forall3"
    return v


# ---------------------------------------------------------------------------
# lasso search


def _reach_path(succ, src: int, goal: Callable[[int], bool], allowed: Callable[[int], bool] = lambda v: True):
    """Shortest path from ``src`` to a goal vertex through allowed vertices."""
    if not allowed(src):
        return None
    parent = {src: None}
    queue = [src]
    for v in queue:
        if goal(v):
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            return path[::-1]
        for w in succ[v]:
            if w not in parent and allowed(w):
                parent[w] = v
                queue.append(w)
    return None


def _cycle_through(succ, u: int, allowed: Callable[[int], bool]):
    """A cycle u -> ... -> u inside the allowed vertices, or None."""
    parent = {}
    queue = []
    for w in succ[u]:
        if allowed(w) and w not in parent:
            parent[w] = u
            queue.append(w)
    for v in queue:
        if v == u:
            path = [u]
            x = parent[u]
            while x != u:
                path.append(x)
                x = parent[x]
            return [u] + path[1:][::-1]
        for w in succ[v]:
            if allowed(w) and w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def _any_lasso_from(succ, v: int):
    seen: dict[int, int] = {}
    path: list[int] = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = succ[v][0]
    k = seen[v]
    return path[:k], path[k:]


def exists_play(succ: Sequence[Sequence[int]], initial: int, obj: Objective):
    """Is there an infinite play from ``initial`` satisfying ``obj``?

    Returns ``(True, (stem, cycle))`` or ``(False, None)``.  Every vertex must
    have a successor."""
    if isinstance(obj, Reach):
        path = _reach_path(succ, initial, lambda v: v in obj.target)
        if path is None:
            return False, None
        stem2, cycle = _any_lasso_from(succ, path[-1])
        return True, (path[:-1] + stem2, cycle)
    if isinstance(obj, Safe):
        inside = lambda v: v in obj.target  # noqa: E731
        seen = _reachable(succ, initial, inside)
        for u in sorted(seen):
            cyc = _cycle_through(succ, u, inside)
            if cyc is not None:
                stem = _reach_path(succ, initial, lambda v: v == u, inside)
                return True, (stem[:-1], cyc)
        return False, None
    prio = obj.priority
    everywhere = _reachable(succ, initial, lambda v: True)
    for p in sorted({prio[v] for v in everywhere if prio[v] % 2 == 0}):
        ok = lambda v, p=p: prio[v] >= p  # noqa: E731
        for u in sorted(v for v in everywhere if prio[v] == p):
            cyc = _cycle_through(succ, u, ok)
            if cyc is not None:
                stem = _reach_path(succ, initial, lambda v: v == u)
                return True, (stem[:-1], cyc)
    return False, None


def _reachable(succ, src: int, allowed: Callable[[int], bool]) -> set[int]:
    if not allowed(src):
        return set()
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen and allowed(w):
                seen.add(w)
                stack.append(w)
    return seen


# ---------------------------------------------------------------------------
# Markov chains


@dataclass(frozen=True)
class MarkovChain:
    succ: tuple[tuple[tuple[int, Fraction], ...], ...]
    initial: int

    @property
    def n(self) -> int:
        return len(self.succ)


def _sccs(n: int, succ) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            for j in range(i, len(succ[v])):
                w = succ[v][j]
                if index[w] == -1:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


def markov_qualitative(mc: MarkovChain, target: Iterable[int]) -> str:
    """Classify reachability of ``target`` as probability-one, positive or zero
    from the support graph alone."""
    target = set(target)
    # freeze the chain at the target
    succ = [[t for t, _ in mc.succ[v]] if v not in target else [v] for v in range(mc.n)]
    reach = _reachable(succ, mc.initial, lambda v: True)
    if not reach & target:
        return ZERO
    sub = sorted(reach)
    pos = {v: i for i, v in enumerate(sub)}
    local = [[pos[w] for w in succ[v]] for v in sub]
    for comp in _sccs(len(sub), local):
        members = set(comp)
        bottom = all(w in members for v in comp for w in local[v])
        if bottom and not any(sub[v] in target for v in comp):
            return POSITIVE
    return PROBABILITY_ONE


def chain_of(sg: StochasticGame, sigma1: MooreStrategy, sigma2: MooreStrategy):
    """Markov chain of ``sg`` under two Moore strategies; returns the chain and
    the base state of each chain vertex."""
    o1, o2 = sg.obs1.cell_of, sg.obs2.cell_of
    u1, u2 = sigma1.update, sigma2.update
    q0 = sg.initial
    start = (q0, u1[sigma1.initial][o1[q0]], u2[sigma2.initial][o2[q0]])
    index = {start: 0}
    nodes = [start]
    succ = []
    for q, m1, m2 in nodes:
        row = []
        for t, p in sg.delta[q][sigma1.output[m1]][sigma2.output[m2]]:
            key = (t, u1[m1][o1[t]], u2[m2][o2[t]])
            v = index.get(key)
            if v is None:
                v = index[key] = len(nodes)
                nodes.append(key)
            row.append((v, p))
        succ.append(tuple(row))
    return MarkovChain(tuple(succ), 0), [k[0] for k in nodes]


def classify_pair(sg: StochasticGame, sigma1: MooreStrategy, sigma2: MooreStrategy, target) -> str:
    mc, base = chain_of(sg, sigma1, sigma2)
    return markov_qualitative(mc, [v for v in range(mc.n) if base[v] in target])


def almost_sure_bounded(sg: StochasticGame, target, k1: int = 2, k2: int = 2) -> Verdict:
    """Exists sigma1 with at most ``k1`` memory elements such that every
    sigma2 with at most ``k2`` elements yields a chain reaching ``target``
    with probability one."""
    seconds = [MooreStrategy(s.memory, s.initial, s.update, s.output, 2)
               for s in moore_up_to(k2, len(sg.obs2), len(sg.actions[1]))]
    for s1 in moore_up_to(k1, len(sg.obs1), len(sg.actions[0])):
        if all(classify_pair(sg, s1, s2, target) == PROBABILITY_ONE for s2 in seconds):
            return Verdict(True, "markov-oracle", s1)
    return Verdict(False, "markov-oracle")


def moore_machines(k: int, n_cells: int, n_actions: int):
    """All Moore machines with exactly ``k`` memory elements, every element
    reachable from element 0, in canonical order."""
    mem = tuple(f"m{i}" for i in range(k))
    for upd_flat in product(range(k), repeat=k * n_cells):
        update = tuple(tuple(upd_flat[m * n_cells:(m + 1) * n_cells]) for m in range(k))
        if k > 1:
            seen = {0}
            stack = [0]
            while stack:
                m = stack.pop()
                for x in update[m]:
                    if x not in seen:
                        seen.add(x)
                        stack.append(x)
            if len(seen) != k:
                continue
        for out in product(range(n_actions), repeat=k):
            yield MooreStrategy(mem, 0, update, out)


def moore_up_to(k: int, n_cells: int, n_actions: int):
    for size in range(1, k + 1):
        yield from moore_machines(size, n_cells, n_actions)


# ---------------------------------------------------------------------------
# the Uniform correspondence


def positive_winning_bounded(sg: StochasticGame, target, obs1=None, obs2=None, h: int | None = None) -> Verdict:
    """Exists sigma1 forall sigma2 with positive reach probability, by
    enumerating history functions of a horizon-certified game."""
    obs1 = obs1 or sg.obs1
    obs2 = obs2 or sg.obs2
    reach = Reach(frozenset(target))
    support = support_view(sg)
    cert = horizon_certificate(support, reach)
    if cert is None or (h is not None and cert.horizon > h):
        raise NoCertificate("no horizon certificate")
    h1 = decision_histories(support, obs1, cert)
    h2 = decision_histories(support, obs2, cert)
    n1, n2 = len(sg.actions[0]), len(sg.actions[1])
    c1, c2 = obs1.cell_of, obs2.cell_of
    for choice1 in product(range(n1), repeat=len(h1)):
        s1 = dict(zip(h1, choice1))
        ok = True
        for choice2 in product(range(n2), repeat=len(h2)):
            s2 = dict(zip(h2, choice2))
            mc, targets = _history_chain(sg, cert, c1, c2, s1, s2, reach.target)
            if markov_qualitative(mc, targets) == ZERO:
                ok = False
                break
        if ok:
            return Verdict(True, "markov-oracle", history_strategy_to_moore(h1, s1, len(obs1)))
    return Verdict(False, "markov-oracle")


def _history_chain(sg, cert, c1, c2, s1, s2, target):
    """Tree-shaped chain over (state, histories) up to the determined states."""
    q0 = sg.initial
    start = (q0, (c1[q0],), (c2[q0],))
    index = {start: 0}
    nodes = [start]
    succ = []
    for q, x1, x2 in nodes:
        if q in cert.determined:
            succ.append(((index[(q, x1, x2)], Fraction(1)),))
            continue
        row = []
        for t, p in sg.delta[q][s1[x1]][s2[x2]]:
            key = (t, x1 + (c1[t],), x2 + (c2[t],))
            v = index.get(key)
            if v is None:
                v = index[key] = len(nodes)
                nodes.append(key)
            row.append((v, p))
        succ.append(tuple(row))
    targets = [v for v, k in enumerate(nodes) if k[0] in target]
    return MarkovChain(tuple(succ), 0), targets


class _SupportView:
    """Graph view of a stochastic game used for horizon analysis."""

    def __init__(self, sg: StochasticGame):
        self.sg = sg
        self.n = sg.n
        self.initial = sg.initial

    def successors(self, q: int) -> set[int]:
        return {t for r in self.sg.delta[q] for d in r for t, _ in d}

    def is_absorbing(self, q: int) -> bool:
        return self.successors(q) == {q}


def support_view(sg: StochasticGame) -> _SupportView:
    return _SupportView(sg)


def check_lemma_uniform(g: ThreePlayerGame, obs1=None, obs2=None, target=None, h: int | None = None) -> bool:
    """Three-player reach verdict equals positive winning in the uniform game."""
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    if target is None:
        if not isinstance(g.objective, Reach):
            raise PreconditionError("a reach target is required")
        target = g.objective.target
    reach = Reach(frozenset(target))
    three = brute_force_three(g, obs1, obs2, reach, h)
    pos = positive_winning_bounded(uniform(g), reach.target, obs1, obs2, h)
    return three.yes == pos.yes


# ---------------------------------------------------------------------------
# positional enumeration for perfect-information parity games


def _functional_cycles(n: int, f: Sequence[int]) -> list[int]:
    """Bitmask of the cycle reached from each vertex of the map ``f``."""
    out = [0] * n
    for v in range(n):
        pos: dict[int, int] = {}
        path = []
        u = v
        while u not in pos:
            pos[u] = len(path)
            path.append(u)
            u = f[u]
        mask = 0
        for w in path[pos[u]:]:
            mask |= 1 << w
        out[v] = mask
    return out


def positional_parity_winners(g) -> tuple[int, ...]:
    """Winner (0 = Even) of every vertex by trying all positional strategy
    pairs.  Exponential in the number of branching vertices."""
    n = g.n
    even = [v for v in range(n) if g.owner[v] == 0]
    odd = [v for v in range(n) if g.owner[v] == 1]
    won = [False] * n
    for ce in product(*(g.succ[v] for v in even)):
        f = [0] * n
        for v, w in zip(even, ce):
            f[v] = w
        holds = [True] * n
        for co in product(*(g.succ[v] for v in odd)):
            for v, w in zip(odd, co):
                f[v] = w
            for v, cyc in enumerate(_functional_cycles(n, f)):
                if holds[v] and min(g.priority[u] for u in range(n) if cyc >> u & 1) % 2:
                    holds[v] = False
        won = [a or b for a, b in zip(won, holds)]
    return tuple(0 if w else 1 for w in won)


def positional_parity_sweep(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Even's winning vertices for every labelling of a fixed graph with
    owners and priorities in {0, 1}.

    ``result[o][p]`` is the bitmask of Even-winning vertices when bit v of
    ``o`` makes v an Odd vertex and bit v of ``p`` gives v priority 1.  The
    outcome of a strategy pair depends on ``p`` only through the cycle it
    ends in (the play is even iff that cycle holds a priority-0 vertex), so
    the enumeration runs once per graph and evaluates all ``p`` as bitsets."""
    n = len(succ)
    full_p = (1 << (1 << n)) - 1
    even_for = {}

    def evens(cyc: int) -> int:
        # bitset over p of "cyc has a vertex with priority 0"
        r = even_for.get(cyc)
        if r is None:
            r = 0
            for p in range(1 << n):
                if cyc & ~p:
                    r |= 1 << p
            even_for[cyc] = r
        return r

    profiles = list(product(*succ))
    outcome = {c: [evens(m) for m in _functional_cycles(n, c)] for c in profiles}
    result = []
    for o in range(1 << n):
        groups: dict[tuple, list[int]] = {}
        for c in profiles:
            key = tuple(c[v] for v in range(n) if not o >> v & 1)
            acc = groups.get(key)
            res = outcome[c]
            if acc is None:
                groups[key] = list(res)
            else:
                for v in range(n):
                    acc[v] &= res[v]
        win = [0] * n
        for acc in groups.values():
            for v in range(n):
                win[v] |= acc[v]
        per_p = [0] * (1 << n)
        for v in range(n):
            bits = win[v] & full_p
            for p in range(1 << n):
                if bits >> p & 1:
                    per_p[p] |= 1 << v
        result.append(per_p)
    return result


__all__ = [
    "HorizonCertificate", "NoCertificate", "horizon_certificate", "brute_force_three", "brute_force_four",
    "exists_play", "markov_qualitative", "check_lemma_uniform", "MarkovChain", "chain_of", "classify_pair",
    "moore_machines", "moore_up_to", "PROBABILITY_ONE", "POSITIVE", "ZERO", "NO",
    "positional_parity_winners", "positional_parity_sweep",
]
