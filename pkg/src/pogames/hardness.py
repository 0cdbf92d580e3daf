"""Turing-machine hardness instances.

Player 1 announces the configurations of a space-bounded alternating machine
one symbol per slot; player 2 may check one symbol against the same cell of
the next configuration by counting slots in binary, and player 3 may audit
one bit of that counter.  The game is won (target reached) exactly when the
machine accepts.

Layout (tags appear in state names):

* ``begin``: first step; player 2 may start a marker check here (the start of
  the tape acts as a configuration boundary).
* ``main``: announcement loop.  A slot is ``n`` steps; player 1's symbol or
  marker (a transition) is read at sub-step 0, player 2 announces one counter
  bit per sub-step.  A marker slot lasts one step.  The state keeps the phase
  (initial word position, padding, free loop), the class of the previous
  symbol, and the head symbol of the current configuration.
* ``ded``: after a marker whose head is in a universal state, player 2 names
  the transition; the state entered next is tagged with it, and these tags are
  all that players 1 and 2 observe.
* ``chk``: player 2 checks.  ``kind=s`` compares a symbol with the expected
  symbol of the next configuration, ``kind=m`` checks that the next
  configuration has exactly ``2^n`` cells.
* ``aud``: player 3 stores one counter bit and compares it with the same bit
  of the next block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .game import GameError, Partition, Reach, StochasticGame, ThreePlayerGame

BLANK = "#"


class MachineError(GameError):
    pass


@dataclass(frozen=True)
class AlternatingTM:
    or_states: tuple[str, ...]
    and_states: tuple[str, ...]
    sigma: tuple[str, ...]
    delta: tuple[tuple[str, str, str, str, int], ...]
    initial: str
    accept: str
    reject: str
    name: str = "machine"

    def __post_init__(self):
        self.validate(strict=False)

    @property
    def states(self) -> tuple[str, ...]:
        return self.or_states + self.and_states

    @property
    def gamma(self) -> tuple[str, ...]:
        return self.sigma + (BLANK,)

    def validate(self, strict: bool = True) -> None:
        if set(self.or_states) & set(self.and_states):
            raise MachineError("a state is both existential and universal")
        if len(set(self.states)) != len(self.states):
            raise MachineError("duplicate machine state")
        for q in (self.initial, self.accept, self.reject):
            if q not in self.states:
                raise MachineError(f"unknown state {q}")
        if self.accept == self.reject:
            raise MachineError("accepting and rejecting states coincide")
        if BLANK in self.sigma:
            raise MachineError("the blank may not be an input symbol")
        for q, g, q2, g2, d in self.delta:
            if q not in self.states or q2 not in self.states:
                raise MachineError(f"transition uses an unknown state: {(q, g, q2, g2, d)}")
            if g not in self.gamma or g2 not in self.gamma:
                raise MachineError(f"transition uses an unknown symbol: {(q, g, q2, g2, d)}")
            if d not in (-1, 1):
                raise MachineError("head moves must be -1 or +1")
            if q in (self.accept, self.reject):
                raise MachineError("halting states have no outgoing transitions")
        if len(set(self.delta)) != len(self.delta):
            raise MachineError("duplicate transition")
        if strict:
            missing = self.missing()
            if missing:
                raise MachineError(f"no transition for {missing[0]}")

    def missing(self) -> list[tuple[str, str]]:
        have = {(q, g) for q, g, *_ in self.delta}
        return [(q, g) for q in self.states if q not in (self.accept, self.reject)
                for g in self.gamma if (q, g) not in have]

    def completed(self) -> "AlternatingTM":
        """Add a rejecting move for every non-halting pair without transitions."""
        extra = tuple((q, g, self.reject, g, 1) for q, g in self.missing())
        return AlternatingTM(self.or_states, self.and_states, self.sigma, self.delta + extra, self.initial,
                             self.accept, self.reject, self.name)

    def transitions(self, q: str, g: str) -> list[int]:
        return [i for i, (p, a, *_) in enumerate(self.delta) if (p, a) == (q, g)]

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "or_states": list(self.or_states),
            "and_states": list(self.and_states),
            "sigma": list(self.sigma),
            "initial": self.initial,
            "accept": self.accept,
            "reject": self.reject,
            "delta": [[q, g, q2, g2, d] for q, g, q2, g2, d in self.delta],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "AlternatingTM":
        try:
            return cls(
                tuple(doc["or_states"]), tuple(doc.get("and_states", [])), tuple(doc["sigma"]),
                tuple((r[0], r[1], r[2], r[3], int(r[4])) for r in doc["delta"]),
                doc["initial"], doc["accept"], doc["reject"], doc.get("name", "machine"),
            )
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise MachineError(f"malformed machine description: {e}") from None


def load_machine(text: str) -> AlternatingTM:
    try:
        return AlternatingTM.from_doc(json.loads(text))
    except json.JSONDecodeError as e:
        raise MachineError(f"line {e.lineno} column {e.colno}: {e.msg}") from None


# ---------------------------------------------------------------------------
# direct simulation


def initial_configuration(m: AlternatingTM, w: str, cells: int):
    word = list(w) or [BLANK]
    if len(word) > cells:
        return None
    return (m.initial, 0, tuple(word + [BLANK] * (cells - len(word))))


def successor_configuration(m: AlternatingTM, conf, t: int):
    """Apply transition ``t`` (ignoring whether it matches); ``None`` if the
    head leaves the tape."""
    _, pos, tape = conf
    _, _, q2, g2, d = m.delta[t]
    tape = tape[:pos] + (g2,) + tape[pos + 1:]
    if not 0 <= pos + d < len(tape):
        return None
    return (q2, pos + d, tape)


def tm_accepts(m: AlternatingTM, w: str, n: int, budget: int = 200_000) -> bool:
    """Acceptance on a tape of 2^n cells by explicit configuration-graph search.

    A configuration accepts when its state is accepting; a move off the tape
    or into the rejecting state loses; existential states need one accepting
    successor, universal states all of them; cycles do not accept."""
    m = m.completed()
    c0 = initial_configuration(m, w, 2 ** n)
    if c0 is None:
        return False
    succ: dict = {}
    order = [c0]
    seen = {c0}
    while order:
        c = order.pop()
        q, pos, tape = c
        if q in (m.accept, m.reject):
            succ[c] = []
            continue
        nxt = [successor_configuration(m, c, t) for t in m.transitions(q, tape[pos])]
        succ[c] = nxt
        for x in nxt:
            if x is not None and x not in seen:
                seen.add(x)
                order.append(x)
                if len(seen) > budget:
                    raise MachineError(f"configuration graph exceeds {budget} configurations")
    accepting = {c for c in succ if c[0] == m.accept}
    universal = set(m.and_states)
    changed = True
    while changed:
        changed = False
        for c, nxt in succ.items():
            if c in accepting or c[0] in (m.accept, m.reject):
                continue
            ok = [x in accepting for x in nxt if x is not None] + [False for x in nxt if x is None]
            if (c[0] in universal and ok and all(ok)) or (c[0] not in universal and any(ok)):
                accepting.add(c)
                changed = True
    return c0 in accepting


def accepting_choice(m: AlternatingTM, w: str, n: int):
    """For an accepted word: map from existential configurations on the
    accepting region to a transition that keeps acceptance (with ranks so
    the choice makes progress)."""
    m = m.completed()
    c0 = initial_configuration(m, w, 2 ** n)
    if c0 is None:
        return None
    rank: dict = {}
    choice: dict = {}
    configs = set()
    stack = [c0]
    while stack:
        c = stack.pop()
        if c in configs:
            continue
        configs.add(c)
        q, pos, tape = c
        if q in (m.accept, m.reject):
            continue
        for t in m.transitions(q, tape[pos]):
            x = successor_configuration(m, c, t)
            if x is not None:
                stack.append(x)
    for c in configs:
        if c[0] == m.accept:
            rank[c] = 0
    level = 0
    while True:
        level += 1
        new = {}
        for c in configs:
            if c in rank or c[0] in (m.accept, m.reject):
                continue
            q, pos, tape = c
            ts = m.transitions(q, tape[pos])
            nxt = [(t, successor_configuration(m, c, t)) for t in ts]
            good = [(t, x) for t, x in nxt if x is not None and x in rank]
            if q in m.and_states:
                if len(good) == len(nxt) and nxt:
                    new[c] = None
            elif good:
                new[c] = good[0][0]
        if not new:
            break
        for c, t in new.items():
            rank[c] = level
            if t is not None:
                choice[c] = t
    if c0 not in rank:
        return None
    return choice


# ---------------------------------------------------------------------------
# game construction


class Main(NamedTuple):
    phase: object
    prev: object
    head: object
    sub: int
    tag: object = None


class Check(NamedTuple):
    kind: str
    z1: object
    z2: object
    z3: object
    t: object
    exp: object
    head: object
    passed: bool
    counted: bool
    sub: int
    first: bool
    ones: bool
    match: bool
    waiting: bool
    tag: object = None


class Audit(NamedTuple):
    kind: str
    p: int
    b: int
    flip: bool
    stage: str
    head: object
    passed: bool
    sub: int
    tag: object = None


class Ded(NamedTuple):
    head: object
    cont: object


BEGIN = ("begin",)
SINK = ("sink",)
GOAL = ("goal",)


@dataclass
class TMGame:
    """Generated instance plus the information needed to inspect it."""

    game: ThreePlayerGame
    machine: AlternatingTM
    word: str
    n: int
    target: frozenset[int]
    phase_counts: dict
    keys: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def obs1(self) -> Partition:
        return self.game.obs1

    @property
    def obs2(self) -> Partition:
        return self.game.obs2

    def parts(self) -> tuple[ThreePlayerGame, Partition, Partition, Reach]:
        return self.game, self.obs1, self.obs2, Reach(self.target)


class _Encoder:
    def __init__(self, m: AlternatingTM, w: str, n: int):
        self.m, self.w, self.n = m, w, n
        self.heads = [("h", q, g) for q in m.states for g in m.gamma]
        self.plain = [("g", g) for g in m.gamma]
        self.a1 = self.plain + self.heads + [("t", i) for i in range(len(m.delta))]
        self.a2 = [("bit", 0), ("bit", 1), ("c",)] + [("t", i) for i in range(len(m.delta))]
        self.a3 = ["noop", "audit"]
        word = list(w) or [BLANK]
        self.c0 = [("h", m.initial, word[0])] + [("g", x) for x in word[1:]]
        self.universal = set(m.and_states)

    # -- names --------------------------------------------------------------
    def sym_name(self, x) -> str:
        if x[0] == "g":
            return x[1]
        if x[0] == "h":
            return f"{x[1]}:{x[2]}"
        q, g, q2, g2, d = self.m.delta[x[1]]
        return f"{q}/{g}>{q2}/{g2}/{'R' if d > 0 else 'L'}"

    def a2_name(self, y) -> str:
        if y[0] == "bit":
            return str(y[1])
        if y[0] == "c":
            return "c"
        return self.sym_name(y)

    def _v(self, v) -> str:
        if v is None:
            return "-"
        if isinstance(v, tuple) and v and v[0] in ("g", "h", "t"):
            return self.sym_name(v)
        if isinstance(v, bool):
            return "1" if v else "0"
        return str(v)

    def state_name(self, s) -> str:
        if s in (BEGIN, SINK, GOAL):
            return s[0]
        if isinstance(s, Ded):
            return "ded|h=" + self._v(s.head) + "|" + self.state_name(s.cont)
        kind = {Main: "main", Check: "chk", Audit: "aud"}[type(s)]
        return kind + "|" + "|".join(f"{k}={self._v(v)}" for k, v in zip(s._fields, s))

    # -- helpers ------------------------------------------------------------
    @staticmethod
    def klass(x):
        if x[0] == "t":
            return "mk"
        if x[0] == "h":
            return x
        return "pl"

    def matches(self, t: int, head) -> bool:
        q, g, *_ = self.m.delta[t]
        return head is not None and (q, g) == (head[1], head[2])

    def expected(self, z1, z2, z3, t):
        """Symbol expected in the same cell of the next configuration."""
        if z2[0] == "h":
            return ("g", self.m.delta[t][3]) if t is not None else None
        heads = [z for z in (z1, z3) if isinstance(z, tuple) and z[0] == "h"]
        if not heads:
            return z2
        if t is None:
            return None
        _, _, q2, _, d = self.m.delta[t]
        if isinstance(z1, tuple) and z1[0] == "h" and d == 1:
            return ("h", q2, z2[1])
        if isinstance(z3, tuple) and z3[0] == "h" and d == -1:
            return ("h", q2, z2[1])
        return z2

    def window_ready(self, c: Check):
        if c.z3 is None:
            return None
        return self.expected(c.z1, c.z2, c.z3, c.t)

    def next_sub(self, sub: int) -> int:
        return (sub + 1) % self.n

    # -- transition function -----------------------------------------------
    def is_univ(self, head) -> bool:
        return isinstance(head, tuple) and head[1] in self.universal

    def canon(self, s):
        """Forget what no longer influences the outcome."""
        if isinstance(s, Ded):
            return Ded(s.head, self.canon(s.cont))
        if isinstance(s, Check) and s.kind == "s":
            if s.passed and s.t is not None:
                return s._replace(z1=None, z2=None, z3=None, t=None, head=None)
            if s.head is not None and not self.is_univ(s.head):
                return s._replace(head="seen")
        if isinstance(s, Audit):
            if s.passed:
                return s._replace(head=None)
            if s.head is not None and not self.is_univ(s.head):
                return s._replace(head="seen")
        return s

    def step(self, s, x, y, z):
        return self.canon(self._step(s, x, y, z))

    def _step(self, s, x, y, z):
        if s in (SINK, GOAL):
            return s
        if s == BEGIN:
            if y == ("c",):
                return Check("m", None, None, None, None, None, None, False, True, 0, True, True, False, False)
            return Main(0, "mk", None, 0)
        if isinstance(s, Ded):
            if y[0] != "t" or not self.matches(y[1], s.head):
                return GOAL
            return self.after_ded(s.cont, y[1])
        if isinstance(s, Main):
            return self.step_main(s, x, y)
        if isinstance(s, Check):
            return self.step_check(s, x, y, z)
        return self.step_audit(s, x, y)

    def after_ded(self, cont, t):
        if isinstance(cont, Main):
            return Main("loop", "mk", None, 0, t)
        if isinstance(cont, Check):
            c = cont._replace(t=t, tag=t)
            return c._replace(exp=self.window_ready(c)) if c.kind == "s" else c
        return cont._replace(tag=t)

    def step_main(self, s: Main, x, y):
        n = self.n
        if s.sub > 0:
            return Main(s.phase, s.prev, s.head, self.next_sub(s.sub))
        if y == ("c",):
            if x[0] == "t":
                c = Check("m", None, None, None, None, None, None, False, True, 0, True, True, False, False)
                if s.head is not None and s.head[1] in self.universal:
                    return Ded(s.head, c)
                return c
            head = s.head if s.head is not None or x[0] != "h" else x
            c = Check("s", s.prev, x, None, None, None, head, False, self.n == 1, self.next_sub(0), True, True, False, False)
            return c
        phase = s.phase
        if isinstance(phase, int):
            if x != self.c0[phase]:
                return SINK
        elif phase == "pad":
            if x[0] != "t" and x != ("g", BLANK):
                return SINK
        if x[0] == "t":
            if s.head is None:
                return SINK
            if s.head[1] in self.universal:
                return Ded(s.head, Main("loop", "mk", None, 0))
            if not self.matches(x[1], s.head):
                return SINK
            return Main("loop", "mk", None, 0)
        head = s.head
        if x[0] == "h":
            if x[1] == self.m.accept:
                return GOAL
            if head is not None:
                return SINK
            head = x
        if isinstance(phase, int):
            phase = phase + 1 if phase + 1 < len(self.c0) else "pad"
        return Main(phase, self.klass(x), head, self.next_sub(0))

    def _bit(self, y):
        return y[1] if y[0] == "bit" else None

    def end_block(self, c: Check):
        if c.ones:
            if c.kind == "s":
                return GOAL if c.match else SINK
            return c._replace(sub=0, waiting=True, tag=None)
        return c._replace(sub=0, first=False, counted=True, tag=None)

    def step_check(self, c: Check, x, y, z):
        c = c._replace(tag=None)
        if c.waiting:
            return GOAL if x[0] == "t" else SINK
        if not c.counted:
            # rest of the checked slot: bits are not read
            nxt = self.next_sub(c.sub)
            return c._replace(sub=nxt, counted=nxt == 0)
        if c.sub == 0 and x[0] == "t":
            if c.kind == "m" or c.passed:
                return SINK
            c = c._replace(passed=True)
            if c.z3 is None:
                c = c._replace(z3="mk")
            if self.is_univ(c.head):
                return Ded(c.head, c)
            c = c._replace(t=x[1])
            return c._replace(exp=self.window_ready(c))
        bit = self._bit(y)
        if bit is None or (c.first and bit == 1):
            return GOAL
        if c.sub == 0:
            if c.kind == "s":
                if c.z3 is None and not c.passed:
                    c = c._replace(z3=self.klass(x))
                    c = c._replace(exp=self.window_ready(c))
                if x[0] == "h" and c.head is None and not c.passed:
                    c = c._replace(head=x)
                c = c._replace(match=c.passed and c.exp is not None and x == c.exp)
            c = c._replace(ones=bit == 1)
        else:
            c = c._replace(ones=c.ones and bit == 1)
        if z == "audit":
            a = Audit(c.kind, c.sub, bit, True, "cur", c.head if c.kind == "s" else None, c.passed, c.sub)
            return self.audit_advance(a)
        if c.sub == self.n - 1:
            return self.end_block(c)
        return c._replace(sub=c.sub + 1)

    def audit_advance(self, a: Audit):
        """Move an audit past the step it just processed."""
        if a.stage == "cur":
            if a.sub == self.n - 1:
                return a._replace(stage="next", b=a.b ^ int(a.flip), sub=0, tag=None)
            return a._replace(sub=a.sub + 1, tag=None)
        return a._replace(sub=self.next_sub(a.sub), tag=None)

    def step_audit(self, a: Audit, x, y):
        a = a._replace(tag=None)
        if a.stage == "next" and a.sub == 0 and x[0] == "t":
            if a.kind == "m" or a.passed:
                return SINK
            a = a._replace(passed=True)
            if self.is_univ(a.head):
                return Ded(a.head, a)
            return a
        bit = self._bit(y)
        if bit is None:
            return GOAL
        if a.stage == "cur":
            return self.audit_advance(a._replace(flip=a.flip and bit == 1))
        if a.sub == 0 and x[0] == "h" and a.head is None and not a.passed and a.kind == "s":
            a = a._replace(head=x)
        if a.sub == a.p:
            return SINK if bit == a.b else GOAL
        return self.audit_advance(a)


def _representatives(enc: _Encoder, s, x, y, z):
    """Collapse actions the transition from ``s`` cannot tell apart."""
    other = ("c",)
    if isinstance(s, Ded):
        return enc.a1[0], y, "noop"
    if isinstance(s, (Main, tuple)) and not isinstance(s, (Check, Audit)):
        if isinstance(s, Main) and s.sub > 0:
            return enc.a1[0], other, "noop"
        return x, (y if y == other else ("bit", 0)), "noop"
    if y[0] != "bit":
        y = other
    if isinstance(s, Check):
        if s.waiting:
            return (x if x[0] == "t" else enc.a1[0]), other, "noop"
        if not s.counted:
            return enc.a1[0], other, "noop"
        return x, y, z
    if s.stage == "cur":
        return enc.a1[0], y, "noop"
    return x, y, "noop"


def _build(m: AlternatingTM, w: str, n: int):
    if n < 1:
        raise MachineError("space exponent must be at least 1")
    m = m.completed()
    enc = _Encoder(m, w, n)
    index = {BEGIN: 0}
    keys = [BEGIN]
    rows = []
    for s in keys:
        memo: dict = {}
        table = []
        for x in enc.a1:
            r2 = []
            for y in enc.a2:
                r3 = []
                for z in enc.a3:
                    rep = _representatives(enc, s, x, y, z)
                    if rep not in memo:
                        t = enc.step(s, *rep)
                        if t not in index:
                            index[t] = len(keys)
                            keys.append(t)
                        memo[rep] = index[t]
                    r3.append(memo[rep])
                r2.append(tuple(r3))
            table.append(tuple(r2))
        rows.append(tuple(table))
    return enc, keys, rows, index


def _tag_of(s):
    if isinstance(s, (Main, Check, Audit)):
        return s.tag
    return None


def _phase_counts(keys) -> dict:
    out: dict = {}
    for s in keys:
        if isinstance(s, Main):
            k = "main"
        elif isinstance(s, Check):
            k = "check"
        elif isinstance(s, Audit):
            k = "audit"
        elif isinstance(s, Ded):
            k = "transition"
        else:
            k = s[0]
        out[k] = out.get(k, 0) + 1
    return dict(sorted(out.items()))


def tm_to_game(m: AlternatingTM, w: str, n: int, visible_start: bool = False) -> TMGame:
    """Three-player reachability game whose answer is acceptance of ``w``
    within 2^n cells.  Both players observe only the transitions player 2
    names at universal configurations (plus the start state when
    ``visible_start`` is set, used by the restarting variant)."""
    enc, keys, rows, index = _build(m, w, n)
    labels = []
    for s in keys:
        tag = _tag_of(s)
        if visible_start and s == BEGIN:
            labels.append("start")
        elif tag is not None:
            labels.append(f"t{tag}")
        else:
            labels.append("blind")
    obs1 = Partition.from_labels(labels, 1)
    obs2 = Partition.from_labels(labels, 2)
    target = frozenset([index[GOAL]]) if GOAL in index else frozenset()
    names = tuple(enc.state_name(s) for s in keys)
    g = ThreePlayerGame(
        names, 0,
        (tuple(enc.sym_name(x) for x in enc.a1), tuple(enc.a2_name(y) for y in enc.a2), tuple(enc.a3)),
        tuple(rows), obs1, obs2, Reach(target),
    )
    return TMGame(g, m.completed(), w, n, target, _phase_counts(keys), keys, labels)


def tm_to_stochastic(m: AlternatingTM, w: str, n: int) -> tuple[StochasticGame, Reach, TMGame]:
    """Player 3 replaced by a fair coin and every sink replaced by a restart
    in the (observable) initial state."""
    tg = tm_to_game(m, w, n, visible_start=True)
    g = tg.game
    sink = tg.keys.index(SINK) if SINK in tg.keys else None
    half = Fraction(1, 2)
    delta = []
    for q in range(g.n):
        rows = []
        for a1 in range(len(g.actions[0])):
            r2 = []
            for a2 in range(len(g.actions[1])):
                outs = [g.initial if t == sink else t for t in g.delta[q][a1][a2]]
                if sink is not None and q == sink:
                    outs = [g.initial] * len(outs)
                dist: dict[int, Fraction] = {}
                for t in outs:
                    dist[t] = dist.get(t, Fraction(0)) + half
                r2.append(tuple(sorted(dist.items())))
            rows.append(tuple(r2))
        delta.append(tuple(rows))
    obj = Reach(tg.target)
    sg = StochasticGame(g.states, g.initial, (g.actions[0], g.actions[1]), tuple(delta), g.obs1, g.obs2, obj)
    return sg, obj, tg


# ---------------------------------------------------------------------------
# faithful player-1 strategy


def faithful_strategy(tg: TMGame, restart_aware: bool = False):
    """Moore strategy announcing an accepting run: existential choices come
    from the configuration graph, universal branches from the observed
    transition tags.  After an accepting configuration it announces one more
    configuration (the formal successor under the first transition) so that
    pending checks see consistent symbols.  With ``restart_aware`` the start
    observation resets the script.  Returns None when the word is rejected."""
    from .game import MooreStrategy

    m, w, n = tg.machine, tg.word, tg.n
    choice = accepting_choice(m, w, n)
    if choice is None:
        return None
    enc = _Encoder(m, w, n)
    sym_index = {x: i for i, x in enumerate(enc.a1)}
    obs = tg.game.obs1
    cell = {}
    for q, lab in enumerate(tg.labels):
        cell.setdefault(lab, obs.cell_of[q])
    blind = cell["blind"]

    def conf_symbols(conf):
        q, pos, tape = conf
        return [("h", q, a) if i == pos else ("g", a) for i, a in enumerate(tape)]

    index: dict = {}
    order: list = []
    edges: dict = {}
    outputs: dict = {}

    def node(key):
        if key not in index:
            index[key] = len(order)
            order.append(key)
            work.append(index[key])
        return index[key]

    work: list = []
    init = node(("init",))
    begin = node(("begin",))
    idle = node(("idle",))
    first = node(("sym", initial_configuration(m, w, 2 ** n), 0, 0, False))
    while work:
        v = work.pop()
        key = order[v]
        outputs[v] = 0
        if key[0] == "init":
            edges[v] = {c: begin for c in cell.values()}
        elif key[0] == "begin":
            edges[v] = {blind: first}
        elif key[0] == "sym":
            _, conf, i, sub, tail = key
            syms = conf_symbols(conf)
            if sub == 0:
                outputs[v] = sym_index[syms[i]]
            if sub + 1 < n:
                nxt = ("sym", conf, i, sub + 1, tail)
            elif i + 1 < len(syms):
                nxt = ("sym", conf, i + 1, 0, tail)
            else:
                nxt = ("mark", conf, tail)
            edges[v] = {blind: node(nxt)}
        elif key[0] == "mark":
            _, conf, tail = key
            q, pos, tape = conf
            if tail or q == m.accept:
                outputs[v] = sym_index[("t", 0)]
                if tail:
                    edges[v] = {blind: idle}
                else:
                    succ = successor_configuration(m, conf, 0)
                    if succ is None:
                        # head left the tape: the cells still change
                        g2 = m.delta[0][3]
                        succ = (None, -1, tape[:pos] + (g2,) + tape[pos + 1:])
                    edges[v] = {blind: node(("sym", succ, 0, 0, True))}
            elif q in enc.universal:
                outputs[v] = sym_index[("t", m.transitions(q, tape[pos])[0])]
                edges[v] = {blind: node(("ded", conf))}
            else:
                t = choice[conf]
                outputs[v] = sym_index[("t", t)]
                edges[v] = {blind: node(("sym", successor_configuration(m, conf, t), 0, 0, False))}
        elif key[0] == "ded":
            conf = key[1]
            q, pos, tape = conf
            row = {}
            for t in m.transitions(q, tape[pos]):
                succ = successor_configuration(m, conf, t)
                if f"t{t}" in cell and succ is not None:
                    row[cell[f"t{t}"]] = node(("sym", succ, 0, 0, False))
            edges[v] = row
        else:
            edges[v] = {}
    update = []
    for v in range(len(order)):
        row = [edges[v].get(c, idle) for c in range(len(obs))]
        if restart_aware and "start" in cell:
            row[cell["start"]] = begin
        update.append(tuple(row))
    return MooreStrategy(tuple(f"m{i}" for i in range(len(order))), init, tuple(update),
                         tuple(outputs[v] for v in range(len(order))))


# ---------------------------------------------------------------------------
# curated machines


def _tm(name, ors, ands, sigma, delta, initial="q0", accept="qa", reject="qr") -> AlternatingTM:
    return AlternatingTM(tuple(ors), tuple(ands), tuple(sigma), tuple(delta), initial, accept, reject, name)


def curated_machines() -> dict[str, tuple[AlternatingTM, str, int]]:
    """Machines with their word and a space exponent at which they are run."""
    R, L = 1, -1
    out = {
        "nd-accept": (_tm("nd-accept", ["q0", "qa", "qr"], [], ["0"], [("q0", "0", "qa", "0", R)]), "0", 1),
        "nd-reject": (_tm("nd-reject", ["q0", "qa", "qr"], [], ["0"], [("q0", "0", "qr", "0", R)]), "0", 1),
        "nd-guess": (_tm("nd-guess", ["q0", "qa", "qr"], [], ["0", "1"],
                         [("q0", "0", "qr", "0", R), ("q0", "0", "qa", "1", R)]), "0", 1),
        "nd-walk-off": (_tm("nd-walk-off", ["q0", "q1", "qa", "qr"], [], ["0", "1"],
                            [("q0", "0", "q1", "0", R), ("q1", "1", "q1", "1", R),
                             ("q1", "#", "qa", "#", L)]), "01", 1),
        "alt-accept": (_tm("alt-accept", ["q1", "q2", "qa", "qr"], ["q0"], ["0", "1"],
                           [("q0", "0", "q1", "1", R), ("q0", "0", "q2", "0", R),
                            ("q1", "#", "qa", "#", L), ("q2", "#", "qa", "0", L)]), "0", 1),
        "alt-reject": (_tm("alt-reject", ["q1", "q2", "qa", "qr"], ["q0"], ["0", "1"],
                           [("q0", "0", "q1", "1", R), ("q0", "0", "q2", "0", R),
                            ("q1", "#", "qa", "#", L), ("q2", "#", "qr", "0", L)]), "0", 1),
    }
    return out


# ---------------------------------------------------------------------------
# scripted player-2 strategies and the restart sweep


def scripted_checker(tg: TMGame, sigma1, check_step: int | None, horizon: int = 200, branch: int = 0):
    """Player-2 Moore strategy that plays honestly along the no-audit play
    against ``sigma1``: it starts a check at step ``check_step`` (never if
    None), counts blocks correctly, and at universal steps names the
    ``branch``-th matching transition.  The start observation resets it."""
    from .game import MooreStrategy

    g = tg.game
    enc = _Encoder(tg.machine, tg.word, tg.n)
    a2 = {name: i for i, name in enumerate(g.actions[1])}
    script = []
    q, mem = g.initial, sigma1.initial
    block = 0
    for step in range(horizon):
        key = tg.keys[q]
        mem = sigma1.update[mem][g.obs1.cell_of[q]]
        x = sigma1.output[mem]
        if key in (SINK, GOAL):
            break
        if isinstance(key, Ded):
            ts = [t for t in range(len(tg.machine.delta)) if enc.matches(t, key.head)]
            y = enc.a2_name(("t", ts[min(branch, len(ts) - 1)]))
        elif step == check_step and (key == BEGIN or (isinstance(key, Main) and key.sub == 0)):
            y = "c"
        elif isinstance(key, (Check, Audit)) and not (isinstance(key, Check) and (key.waiting or not key.counted)):
            sub = key.sub
            y = str((block >> (tg.n - 1 - sub)) & 1)
            xs = enc.a1[x]
            if isinstance(key, Check) and sub == 0 and xs[0] == "t":
                y = "0"
            elif sub == tg.n - 1:
                block += 1
        else:
            y = "0"
        script.append(a2[y])
        q = g.delta[q][x][a2[y]][0]
    script.append(a2["0"])
    k = len(script)
    cells = len(g.obs2)
    start_cell = g.obs2.cell_of[g.initial]
    restart = tg.labels[g.initial] == "start"
    # memory i plays script[i]; element k is the pre-start element
    update = []
    for i in range(k + 1):
        nxt = min(i + 1, k - 1) if i < k else 0
        row = [nxt] * cells
        if restart:
            row[start_cell] = 0
        update.append(tuple(row))
    return MooreStrategy(tuple(f"s{i}" for i in range(k + 1)), k, tuple(update), tuple(script) + (a2["0"],), owner=2)


def restart_sweep(m: AlternatingTM, w: str, n: int, sigma1=None, k2: int = 2, horizon: int = 200):
    """Classify ``sigma1`` (default: the restart-aware faithful strategy)
    against every player-2 Moore machine with at most ``k2`` memory elements
    and against every scripted honest checker.  Returns the list of
    (description, classification) pairs that are not probability-one and the
    number of pairs examined."""
    from .oracles import PROBABILITY_ONE, classify_pair, moore_up_to

    sg, obj, tg = tm_to_stochastic(m, w, n)
    if sigma1 is None:
        sigma1 = faithful_strategy(tg, restart_aware=True)
        if sigma1 is None:
            raise MachineError("word is rejected: no faithful strategy")
    bad = []
    checked = 0
    for s2 in moore_up_to(k2, len(sg.obs2), len(sg.actions[1])):
        checked += 1
        c = classify_pair(sg, sigma1, _owned(s2, 2), obj.target)
        if c != PROBABILITY_ONE:
            bad.append((f"memory-{len(s2.memory)} {s2.output}", c))
    for step in [None] + list(range(horizon)):
        for branch in range(max(1, len(m.completed().delta))):
            s2 = scripted_checker(tg, sigma1, step, horizon, branch)
            checked += 1
            c = classify_pair(sg, sigma1, s2, obj.target)
            if c != PROBABILITY_ONE:
                bad.append((f"checker at step {step} branch {branch}", c))
    return bad, checked


def refute_almost_sure(m: AlternatingTM, w: str, n: int, candidates, k2: int = 2, horizon: int = 200):
    """For each candidate player-1 strategy find a player-2 strategy (small
    Moore machine or scripted checker) under which the target is not reached
    with probability one.  Returns the candidates left unrefuted."""
    from .oracles import PROBABILITY_ONE, classify_pair, moore_up_to

    sg, obj, tg = tm_to_stochastic(m, w, n)
    small = [_owned(s2, 2) for s2 in moore_up_to(k2, len(sg.obs2), len(sg.actions[1]))]
    left = []
    for s1 in candidates:
        refuted = any(classify_pair(sg, s1, s2, obj.target) != PROBABILITY_ONE for s2 in small)
        branches = range(max(1, len(m.completed().delta)))
        for step in ([None] + list(range(horizon))) if not refuted else []:
            if any(classify_pair(sg, s1, scripted_checker(tg, s1, step, horizon, b), obj.target) != PROBABILITY_ONE
                   for b in branches):
                refuted = True
                break
        if not refuted:
            left.append(s1)
    return left


def _owned(s, owner: int):
    from .game import MooreStrategy

    return MooreStrategy(s.memory, s.initial, s.update, s.output, owner)


def scripted_announcer(tg: TMGame, names: list[str], restart_aware: bool = True):
    """Player-1 strategy playing a fixed action sequence (by name), one per
    step starting with the initial step, then repeating the last action."""
    from .game import MooreStrategy

    g = tg.game
    idx = {a: i for i, a in enumerate(g.actions[0])}
    out = tuple(idx[a] for a in names)
    k = len(out)
    cells = len(g.obs1)
    start_cell = g.obs1.cell_of[g.initial]
    restart = restart_aware and tg.labels[g.initial] == "start"
    update = []
    for i in range(k + 1):
        row = [min(i + 1, k - 1) if i < k else 0] * cells
        if restart:
            row[start_cell] = 0
        update.append(tuple(row))
    return MooreStrategy(tuple(f"a{i}" for i in range(k + 1)), k, tuple(update), out + (out[0],))


def lying_strategy(m: AlternatingTM, w: str, n: int, visible_start: bool = True):
    """Player-1 strategy for the game of ``m`` that announces the run of the
    machine whose rejecting moves are redirected to acceptance.  Markers name
    the genuine transitions, so only a check on the configurations exposes
    the lie.  Returns None when even the redirected machine rejects."""
    from .game import MooreStrategy

    base = m.completed()
    liar = AlternatingTM(base.or_states, base.and_states, base.sigma,
                         tuple((q, g, base.accept if q2 == base.reject else q2, g2, d)
                               for q, g, q2, g2, d in base.delta),
                         base.initial, base.accept, base.reject, base.name + "-liar")
    tg_liar = tm_to_game(liar, w, n, visible_start)
    sigma = faithful_strategy(tg_liar, restart_aware=visible_start)
    if sigma is None:
        return None
    tg = tm_to_game(m, w, n, visible_start)
    g, gl = tg.game, tg_liar.game
    enc, encl = _Encoder(base, w, n), _Encoder(liar, w, n)
    action = [enc.a1.index(x) for x in encl.a1]
    cell_of_label = {lab: g.obs1.cell_of[q] for q, lab in enumerate(tg.labels)}
    liar_cell = {}
    for q, lab in enumerate(tg_liar.labels):
        liar_cell.setdefault(gl.obs1.cell_of[q], lab)
    order = [liar_cell[c] for c in range(len(gl.obs1))]
    update = []
    for row in sigma.update:
        new = [sigma.initial] * len(g.obs1)
        by_label = {lab: row[c] for c, lab in enumerate(order)}
        for lab, c in cell_of_label.items():
            new[c] = by_label.get(lab, row[0])
        update.append(tuple(new))
    return MooreStrategy(sigma.memory, sigma.initial, tuple(update), tuple(action[a] for a in sigma.output))
