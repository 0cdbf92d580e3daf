"""Safety games with a perfectly informed player 1 via path-counting functions.

A position records, for every state, how many distinct state histories
consistent with the observations of player 2 are still alive (inside the safe
set).  Player 1 distributes the histories at each state over its actions,
player 2 picks an action, and the surviving histories are split by the
observation of player 2; since player 3 only needs one safe play, player 1
may follow any branch with a non-empty support.  Branches stop at nodes that
dominate an ancestor, where the ancestor's strategy can be replayed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .game import GameError, MooreStrategy, Partition, PreconditionError, Safe, ThreePlayerGame, Verdict
from .reductions import BudgetExceeded

OMEGA = math.inf
DEFAULT_BUDGET = 200_000


class EmptySupport(GameError):
    """The observation branch contains no surviving history."""


@dataclass(frozen=True, order=False)
class CountingFunction:
    counts: tuple

    def __post_init__(self):
        for c in self.counts:
            if not (c == OMEGA or (isinstance(c, int) and c >= 0)):
                raise GameError(f"invalid count {c!r}")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(q for q, c in enumerate(self.counts) if c)

    def __le__(self, other: "CountingFunction") -> bool:
        return all(a <= b for a, b in zip(self.counts, other.counts))

    def __lt__(self, other: "CountingFunction") -> bool:
        return self <= other and self != other

    def __ge__(self, other: "CountingFunction") -> bool:
        return other <= self

    def has_omega(self) -> bool:
        return any(c == OMEGA for c in self.counts)

    def label(self, states) -> str:
        return "[" + ", ".join(f"{states[q]}:{'w' if c == OMEGA else c}" for q, c in enumerate(self.counts) if c) + "]"


def _require_perfect_player1(g: ThreePlayerGame, obs1: Partition | None) -> None:
    if not (obs1 or g.obs1).is_perfect():
        raise PreconditionError("the counting procedure needs perfect observation for player 1")


def counting_root(g: ThreePlayerGame, obs1: Partition | None = None) -> CountingFunction:
    _require_perfect_player1(g, obs1)
    return CountingFunction(tuple(1 if q == g.initial else 0 for q in range(g.n)))


def _split_of(c: CountingFunction, move, n1: int):
    if isinstance(move, int):
        return {q: tuple(k if a == move else 0 for a in range(n1)) for q, k in enumerate(c.counts) if k}
    return move


def counting_step(g: ThreePlayerGame, c: CountingFunction, move, a2: int, o2: int, obs2: Partition | None = None,
                  keep=None, by_action: bool = False) -> CountingFunction:
    """Successor counts inside cell ``o2``.

    ``move`` is one action for every history or a split ``{q: counts per
    action}``.  Histories are state sequences, so several player-3 actions
    reaching the same state extend a history once; ``by_action`` counts them
    separately instead.  ``keep`` restricts the successors (the safe set)."""
    obs2 = obs2 or g.obs2
    split = _split_of(c, move, len(g.actions[0]))
    out = [0] * g.n
    cell = obs2.cell_of
    for q, per_action in split.items():
        for a1, k in enumerate(per_action):
            if not k:
                continue
            row = g.delta[q][a1][a2]
            targets = row if by_action else set(row)
            for t in targets:
                if cell[t] == o2 and (keep is None or t in keep):
                    out[t] = out[t] + k
    res = CountingFunction(tuple(out))
    if not res.support:
        raise EmptySupport("no surviving history in this observation")
    return res


def viable_states(g: ThreePlayerGame, target) -> frozenset[int]:
    """States of ``target`` with some infinite path inside ``target``."""
    alive = set(target)
    changed = True
    while changed:
        changed = False
        for q in sorted(alive):
            if not g.successors(q) & alive:
                alive.discard(q)
                changed = True
    return frozenset(alive)


def splits(c: CountingFunction, n1: int):
    """Every way of distributing the histories at each state over the actions
    (an unbounded count plays every action)."""
    per_state = []
    for q, k in enumerate(c.counts):
        if not k:
            continue
        if k == OMEGA:
            opts = [tuple([OMEGA] * n1)]
        else:
            opts = [p for p in itertools.product(range(k + 1), repeat=n1) if sum(p) == k]
            opts.sort(reverse=True)
        per_state.append([(q, p) for p in opts])
    for combo in itertools.product(*per_state):
        yield dict(combo)


# ---------------------------------------------------------------------------
# covering tree


@dataclass
class TreeNode:
    ident: int
    counting: CountingFunction
    depth: int
    parent: int | None
    tag: str = "p1"
    cover: int | None = None
    children: dict = field(default_factory=dict)  # (split index, a2) -> [(o2, child)]
    splits: list = field(default_factory=list)
    win: bool | None = None
    choice: int | None = None  # winning split index
    branch: dict = field(default_factory=dict)  # a2 -> (o2, child)


@dataclass
class CoveringTree:
    nodes: list[TreeNode]
    game: ThreePlayerGame
    obs2: Partition
    target: frozenset[int]

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def path(self, v: int):
        while v is not None:
            yield self.nodes[v]
            v = self.nodes[v].parent


class _Builder:
    def __init__(self, g, obs2, target, budget, accelerate):
        self.g, self.obs2, self.budget, self.accelerate = g, obs2, budget, accelerate
        self.keep = viable_states(g, target)
        self.tree = CoveringTree([], g, obs2, frozenset(target))
        self.n1, self.n2 = len(g.actions[0]), len(g.actions[1])

    def node(self, c: CountingFunction, parent: int | None) -> TreeNode:
        nodes = self.tree.nodes
        if len(nodes) >= self.budget:
            raise BudgetExceeded("covering tree exceeds budget", {"tree_nodes": len(nodes)})
        depth = 0 if parent is None else nodes[parent].depth + 1
        ancestors = list(self.tree.path(parent)) if parent is not None else []
        cover = None
        for anc in ancestors:
            if anc.counting <= c and (not self.accelerate or anc.counting == c):
                cover = anc.ident
                break
        if cover is None and self.accelerate:
            counts = list(c.counts)
            for anc in ancestors:
                if anc.counting <= c:
                    for q, (x, y) in enumerate(zip(anc.counting.counts, c.counts)):
                        if y > x:
                            counts[q] = OMEGA
            c = CountingFunction(tuple(counts))
        n = TreeNode(len(nodes), c, depth, parent, cover=cover)
        nodes.append(n)
        if cover is not None:
            n.win = True
        return n

    def options(self, n: TreeNode, split: dict, a2: int) -> list[tuple[int, CountingFunction]]:
        res = []
        for o2 in range(len(self.obs2)):
            try:
                res.append((o2, counting_step(self.g, n.counting, split, a2, o2, self.obs2, self.keep)))
            except EmptySupport:
                continue
        return res

    def expand(self, n: TreeNode) -> None:
        """Full expansion (every split, every branch)."""
        stack = [n]
        while stack:
            x = stack.pop()
            if x.cover is not None:
                continue
            x.splits = list(splits(x.counting, self.n1))
            for si, sp in enumerate(x.splits):
                for a2 in range(self.n2):
                    kids = []
                    for o2, c2 in self.options(x, sp, a2):
                        child = self.node(c2, x.ident)
                        kids.append((o2, child.ident))
                        stack.append(child)
                    x.children[(si, a2)] = kids

    def solve_full(self) -> None:
        for x in reversed(self.tree.nodes):
            if x.cover is not None:
                continue
            x.win = False
            for si in range(len(x.splits)):
                branch = {}
                for a2 in range(self.n2):
                    hit = next(((o2, k) for o2, k in x.children[(si, a2)] if self.tree.nodes[k].win), None)
                    if hit is None:
                        break
                    branch[a2] = hit
                else:
                    x.win, x.choice, x.branch = True, si, branch
                    break

    def search(self, n: TreeNode) -> bool:
        """Depth-first search expanding only what the verdict needs."""
        if n.cover is not None:
            return True
        n.splits = list(splits(n.counting, self.n1))
        for si, sp in enumerate(n.splits):
            branch = {}
            for a2 in range(self.n2):
                found = None
                kids = []
                for o2, c2 in self.options(n, sp, a2):
                    child = self.node(c2, n.ident)
                    kids.append((o2, child.ident))
                    if self.search(child):
                        found = (o2, child.ident)
                        break
                n.children[(si, a2)] = kids
                if found is None:
                    break
                branch[a2] = found
            else:
                n.win, n.choice, n.branch = True, si, branch
                return True
        n.win = False
        return False


def unravel(g: ThreePlayerGame, obs2: Partition | None = None, target=None, budget: int = DEFAULT_BUDGET,
            accelerate: bool = False, obs1: Partition | None = None) -> CoveringTree:
    """Complete self-covering tree (every split and observation branch)."""
    _require_perfect_player1(g, obs1)
    obs2 = obs2 or g.obs2
    target = frozenset(target if target is not None else g.objective.target)
    b = _Builder(g, obs2, target, budget, accelerate)
    root = counting_root(g, obs1)
    if g.initial not in b.keep:
        n = b.node(root, None)
        n.win = False
        return b.tree
    b.expand(b.node(root, None))
    b.solve_full()
    return b.tree


# ---------------------------------------------------------------------------
# strategy extraction


def _assignments(split: dict, n1: int):
    """Action of each history copy ``(q, i)`` under a split."""
    out = {}
    for q, per_action in split.items():
        i = 0
        for a1 in range(n1):
            k = per_action[a1]
            if k == OMEGA:
                out[(q, ("w", a1))] = a1
                continue
            for _ in range(k):
                out[(q, i)] = a1
                i += 1
    return out


def _child_index(g, tree, node: TreeNode, split: dict, a2: int, child: TreeNode, n1: int):
    """Map copies of ``node`` to copies of ``child`` (or of its covering ancestor)."""
    acts = _assignments(split, n1)
    cell, o2 = tree.obs2.cell_of, None
    target = child.counting
    keep = child.counting.support
    nxt: dict[int, int] = {}
    mapping: dict = {}
    for (q, i), a1 in sorted(acts.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        for t in sorted(set(g.delta[q][a1][a2])):
            if t not in keep:
                continue
            if target.counts[t] == OMEGA:
                mapping[(q, i, t)] = ("w", 0)
                continue
            j = nxt.get(t, 0)
            nxt[t] = j + 1
            mapping[(q, i, t)] = j
    dest = child
    if child.cover is not None:
        dest = tree.nodes[child.cover]
        limit = dest.counting.counts
        mapping = {k: v for k, v in mapping.items() if v == ("w", 0) or v < limit[k[2]]}
    del cell, o2
    return dest, mapping


def extract_strategy(tree: CoveringTree) -> MooreStrategy:
    """Moore strategy over states whose memory is the set of (tree node,
    history copy) pairs the current history may correspond to."""
    g = tree.game
    n1, n2 = len(g.actions[0]), len(g.actions[1])
    nodes = tree.nodes
    acts_cache: dict[int, dict] = {}
    child_cache: dict = {}

    def acts(v: int) -> dict:
        if v not in acts_cache:
            x = nodes[v]
            acts_cache[v] = _assignments(x.splits[x.choice], n1)
        return acts_cache[v]

    def follow(v: int, a2: int):
        key = (v, a2)
        if key not in child_cache:
            x = nodes[v]
            o2, k = x.branch[a2]
            child_cache[key] = (o2,) + _child_index(g, tree, x, x.splits[x.choice], a2, nodes[k], n1)
        return child_cache[key]

    def output(mem) -> int:
        for v, q, i in sorted(mem, key=str):
            return acts(v)[(q, i)]
        return 0

    def update(mem, t: int):
        nxt = set()
        for v, q, i in mem:
            a1 = acts(v)[(q, i)]
            for a2 in range(n2):
                if t not in g.delta[q][a1][a2]:
                    continue
                o2, dest, mapping = follow(v, a2)
                if tree.obs2.cell_of[t] != o2 or (q, i, t) not in mapping:
                    continue
                nxt.add((dest.ident, t, mapping[(q, i, t)]))
        return frozenset(nxt)

    start = "start"
    first = {}
    for t in range(g.n):
        first[t] = frozenset([(0, t, 0)]) if t == g.initial and nodes[0].win else frozenset()
    index: dict = {start: 0}
    order: list = [start]
    rows: list = []
    for mem in order:
        row = []
        for t in range(g.n):
            nm = first[t] if mem == start else update(mem, t)
            if nm not in index:
                index[nm] = len(order)
                order.append(nm)
            row.append(index[nm])
        rows.append(tuple(row))
    outs = tuple(0 if m == start else output(m) for m in order)
    names = tuple(["start"] + [f"k{i}" for i in range(1, len(order))])
    # perfect observation: cell index equals state index
    return MooreStrategy(names, 0, tuple(rows), outs)


def solve_counting_safety(g: ThreePlayerGame, obs2: Partition | None = None, target=None,
                          budget: int = DEFAULT_BUDGET, accelerate: bool = False, check_witness: bool = True,
                          obs1: Partition | None = None) -> Verdict:
    """Exists sigma1, forall sigma2, exists sigma3 with Safe(target), player 1 perfect.

    The abstraction lets player 1 react to player 2's action, so a negative
    answer is final while a positive one is reported only with a witness
    that passes the exact strategy check."""
    from .solvers import verify_strategy

    _require_perfect_player1(g, obs1)
    obs1 = obs1 or g.obs1
    obs2 = obs2 or g.obs2
    if target is None:
        if not isinstance(g.objective, Safe):
            raise PreconditionError("a safety objective is required")
        target = g.objective.target
    target = frozenset(target)
    b = _Builder(g, obs2, target, budget, accelerate)
    root = b.node(counting_root(g, obs1), None)
    won = g.initial in b.keep and b.search(root)
    tree = b.tree
    diag = {"tree_nodes": len(tree.nodes), "covered_leaves": sum(1 for x in tree.nodes if x.cover is not None)}
    if not won:
        return Verdict(False, "counting", None, True, diag)
    sigma = extract_strategy(tree)
    diag["witness_memory"] = len(sigma.memory)
    if check_witness and not verify_strategy(g, obs1, obs2, Safe(target), sigma):
        diag["witness_rejected"] = True
        return Verdict(False, "counting", None, False, diag)
    return Verdict(True, "counting", sigma, True, diag)


def tree_to_dot(tree: CoveringTree) -> str:
    from .io import _q

    g = tree.game
    lines = ["digraph covering {", "  node [shape=box];"]
    for x in tree.nodes:
        style = ""
        if x.cover is not None:
            style = ", style=dashed"
        elif x.win is False:
            style = ", color=red"
        lines.append(f"  n{x.ident} [label={_q(x.counting.label(g.states))}{style}];")
    for x in tree.nodes:
        for (si, a2), kids in sorted(x.children.items()):
            for o2, k in kids:
                lab = f"s{si} {g.actions[1][a2]} {tree.obs2.cell_name(o2, g.states)}"
                lines.append(f"  n{x.ident} -> n{k} [label={_q(lab)}];")
        if x.cover is not None:
            lines.append(f"  n{x.ident} -> n{x.cover} [style=dotted, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"
