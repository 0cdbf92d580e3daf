"""JSON game documents, strategy files and DOT export."""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import product
from typing import Any

from .game import (
    AnyGame,
    DistributionError,
    FourPlayerGame,
    GameError,
    MooreStrategy,
    Parity,
    Partition,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
    TotalityError,
    Verdict,
)

WILDCARD = "*"
KINDS = ("three-player", "four-player", "stochastic")
_TOP_KEYS = {
    "kind", "states", "initial", "actions", "obs1", "obs2", "turn",
    "transitions", "objective", "provenance", "meta",
}


class GameFormatError(GameError):
    """Malformed game document (JSON syntax or schema)."""


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _names(doc: dict, key: str, what: str) -> list[str]:
    val = doc.get(key)
    if not isinstance(val, list) or not val or not all(isinstance(x, str) for x in val):
        raise GameFormatError(f"{what} must be a non-empty array of strings")
    if len(set(val)) != len(val):
        raise GameFormatError(f"{what} contains duplicates")
    return val


def _index(names: list[str], value: Any, what: str) -> int:
    try:
        return names.index(value)
    except ValueError:
        raise GameFormatError(f"unknown {what} {value!r}") from None


def _expand(names: list[str], value: Any, what: str) -> list[int]:
    if value == WILDCARD:
        return list(range(len(names)))
    return [_index(names, value, what)]


def _partition(doc: dict, key: str, states: list[str], owner: int) -> Partition:
    n = len(states)
    if key not in doc:
        return Partition.perfect(n, owner)
    cells = doc[key]
    if cells == [WILDCARD]:
        return Partition.blind(n, owner)
    if not isinstance(cells, list) or not all(isinstance(c, list) for c in cells):
        raise GameFormatError(f"{key} must be an array of arrays of state names")
    idx_cells = []
    for c in cells:
        idx_cells.append([_index(states, s, f"state in {key}") for s in c])
    # name overlaps before delegating, so the message uses state names
    seen: dict[int, int] = {}
    for ci, c in enumerate(idx_cells):
        if not c:
            raise GameFormatError(f"{key} has an empty cell")
        for q in c:
            if q in seen and seen[q] != ci:
                raise GameFormatError(f"{key}: cells overlap on state {states[q]}")
            seen[q] = ci
    return Partition.from_cells(idx_cells, n, owner, names=states)


def _objective(doc: dict, states: list[str]):
    obj = doc.get("objective")
    if obj is None:
        return None
    if not isinstance(obj, dict) or "type" not in obj:
        raise GameFormatError("objective must be an object with a type")
    t = obj["type"]
    if t in ("reach", "safe"):
        target = frozenset(_index(states, s, "target state") for s in obj.get("target", []))
        return Reach(target) if t == "reach" else Safe(target)
    if t == "parity":
        pr = obj.get("priorities")
        if not isinstance(pr, dict):
            raise GameFormatError("parity objective needs a priorities map")
        missing = [s for s in states if s not in pr]
        if missing:
            raise GameFormatError("priority missing for states: " + ", ".join(missing))
        for s in pr:
            _index(states, s, "state in priorities")
        vals = [pr[s] for s in states]
        if not all(isinstance(v, int) and v >= 0 for v in vals):
            raise GameFormatError("priorities must be non-negative integers")
        return Parity(tuple(vals))
    raise GameFormatError(f"unknown objective type {t!r}")


def _fraction(value: Any) -> Fraction:
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, (int, str)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError):
        pass
    raise GameFormatError(f"probability {value!r} is not an exact rational")


def parse_game(text: str) -> AnyGame:
    """Parse and validate a game document; wildcards expand to a total table."""
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise GameFormatError("top level must be an object")
    if "obs3" in doc:
        raise GameFormatError("obs3 is not allowed: player 3 always observes the state")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise GameFormatError("unknown keys: " + ", ".join(unknown))
    kind = doc.get("kind")
    if kind not in KINDS:
        raise GameFormatError(f"kind must be one of {', '.join(KINDS)}")
    states = _names(doc, "states", "states")
    if not isinstance(doc.get("initial"), str):
        raise GameFormatError("initial must be a state name")
    initial = _index(states, doc["initial"], "initial state")
    acts = doc.get("actions")
    if not isinstance(acts, dict):
        raise GameFormatError("actions must be an object")
    keys = {"three-player": ("a1", "a2", "a3"), "four-player": ("a1", "a2", "a3", "a4"), "stochastic": ("a1", "a2")}[kind]
    extra = sorted(set(acts) - set(keys))
    if extra:
        raise GameFormatError(f"unexpected alphabets for {kind}: " + ", ".join(extra))
    alph = [_names(acts, k, f"alphabet {k}") for k in keys]
    obs1 = _partition(doc, "obs1", states, 1)
    obs2 = _partition(doc, "obs2", states, 2)
    objective = _objective(doc, states)
    trans = doc.get("transitions")
    if not isinstance(trans, list):
        raise GameFormatError("transitions must be an array")
    n = len(states)

    if kind == "stochastic":
        table: dict = {}
        for pos, e in enumerate(trans):
            if not isinstance(e, dict) or "dist" not in e:
                raise GameFormatError(f"transition #{pos} needs from, a1, a2 and dist")
            dist: dict[int, Fraction] = {}
            for d in e["dist"]:
                t = _index(states, d.get("to"), "target state")
                p = _fraction(d.get("p"))
                if p < 0:
                    raise DistributionError(f"negative probability in transition #{pos}")
                dist[t] = dist.get(t, Fraction(0)) + p
            if sum(dist.values(), Fraction(0)) != 1:
                raise DistributionError(f"distribution of transition #{pos} does not sum to 1")
            d_norm = tuple(sorted((t, p) for t, p in dist.items() if p > 0))
            for q, i, j in product(
                _expand(states, e.get("from"), "state"),
                _expand(alph[0], e.get("a1"), "action a1"),
                _expand(alph[1], e.get("a2"), "action a2"),
            ):
                if table.setdefault((q, i, j), d_norm) != d_norm:
                    raise GameFormatError(
                        f"conflicting entries for ({states[q]}, {alph[0][i]}, {alph[1][j]})"
                    )
        delta = []
        for q in range(n):
            rows = []
            for i in range(len(alph[0])):
                r = []
                for j in range(len(alph[1])):
                    if (q, i, j) not in table:
                        raise TotalityError(f"missing transition for ({states[q]}, {alph[0][i]}, {alph[1][j]})")
                    r.append(table[(q, i, j)])
                rows.append(tuple(r))
            delta.append(tuple(rows))
        return StochasticGame(tuple(states), initial, tuple(tuple(a) for a in alph), tuple(delta), obs1, obs2, objective)

    if kind == "four-player":
        turn_doc = doc.get("turn")
        if not isinstance(turn_doc, dict):
            raise GameFormatError("four-player games need a turn map")
        turn = []
        for s in states:
            v = turn_doc.get(s)
            if v not in (3, 4):
                raise GameFormatError(f"turn of state {s} must be 3 or 4")
            turn.append(v)
        for s in turn_doc:
            _index(states, s, "state in turn")
    else:
        if "turn" in doc:
            raise GameFormatError("turn is only allowed for four-player games")
        turn = [3] * n

    table = {}
    for pos, e in enumerate(trans):
        if not isinstance(e, dict) or "to" not in e:
            raise GameFormatError(f"transition #{pos} needs from, a1, a2, a3 and to")
        to = _index(states, e["to"], "target state")
        for q in _expand(states, e.get("from"), "state"):
            mover = turn[q]
            key = "a3" if mover == 3 else "a4"
            if kind == "three-player" and "a4" in e:
                raise GameFormatError(f"transition #{pos} has a4 in a three-player game")
            if kind == "three-player" and "a3" not in e:
                raise GameFormatError(f"transition #{pos} lacks a3")
            xs = _expand(alph[mover - 1], e.get(key, WILDCARD), f"action {key}")
            for i, j, x in product(
                _expand(alph[0], e.get("a1"), "action a1"),
                _expand(alph[1], e.get("a2"), "action a2"),
                xs,
            ):
                if table.setdefault((q, i, j, x), to) != to:
                    lab = (states[q], alph[0][i], alph[1][j], alph[mover - 1][x])
                    raise GameFormatError("conflicting entries for (" + ", ".join(lab) + ")")
    delta = []
    for q in range(n):
        nx = len(alph[turn[q] - 1])
        rows = []
        for i in range(len(alph[0])):
            r = []
            for j in range(len(alph[1])):
                cell = []
                for x in range(nx):
                    if (q, i, j, x) not in table:
                        lab = (states[q], alph[0][i], alph[1][j], alph[turn[q] - 1][x])
                        raise TotalityError("missing transition for (" + ", ".join(lab) + ")")
                    cell.append(table[(q, i, j, x)])
                r.append(tuple(cell))
            rows.append(tuple(r))
        delta.append(tuple(rows))
    if kind == "four-player":
        return FourPlayerGame(
            tuple(states), initial, tuple(tuple(a) for a in alph), tuple(turn), tuple(delta), obs1, obs2, objective
        )
    return ThreePlayerGame(tuple(states), initial, tuple(tuple(a) for a in alph), tuple(delta), obs1, obs2, objective)


def load_game(path) -> AnyGame:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


# ---------------------------------------------------------------------------
# serialization


def _partition_doc(p: Partition, states) -> Any:
    if p.is_perfect():
        return None
    if p.is_blind():
        return [WILDCARD]
    return [[states[q] for q in c] for c in p.cells]


def _objective_doc(obj, states) -> Any:
    if obj is None:
        return None
    if isinstance(obj, Parity):
        return {"type": "parity", "priorities": {s: obj.priority[q] for q, s in enumerate(states)}}
    return {"type": obj.kind, "target": [states[q] for q in sorted(obj.target)]}


def game_to_doc(g: AnyGame, provenance: dict | None = None) -> dict:
    states = list(g.states)
    if isinstance(g, StochasticGame):
        kind, keys = "stochastic", ("a1", "a2")
    elif isinstance(g, FourPlayerGame):
        kind, keys = "four-player", ("a1", "a2", "a3", "a4")
    else:
        kind, keys = "three-player", ("a1", "a2", "a3")
    doc: dict = {"kind": kind}
    if provenance:
        doc["provenance"] = provenance
    doc["states"] = states
    doc["initial"] = states[g.initial]
    doc["actions"] = {k: list(a) for k, a in zip(keys, g.actions)}
    for key, p in (("obs1", g.obs1), ("obs2", g.obs2)):
        pd = _partition_doc(p, states)
        if pd is not None:
            doc[key] = pd
    if isinstance(g, FourPlayerGame):
        doc["turn"] = {s: g.turn[q] for q, s in enumerate(states)}
    a1, a2 = g.actions[0], g.actions[1]
    trans = []
    for q, s in enumerate(states):
        rows = g.delta[q]
        if isinstance(g, StochasticGame):
            flat = {d for r in rows for d in r}
            if len(flat) == 1:
                d = next(iter(flat))
                trans.append({"from": s, "a1": WILDCARD, "a2": WILDCARD, "dist": _dist_doc(d, states)})
                continue
            for i, r in enumerate(rows):
                for j, d in enumerate(r):
                    trans.append({"from": s, "a1": a1[i], "a2": a2[j], "dist": _dist_doc(d, states)})
            continue
        key = "a3"
        last = g.actions[2]
        if isinstance(g, FourPlayerGame) and g.turn[q] == 4:
            key, last = "a4", g.actions[3]
        flat = {t for r in rows for r2 in r for t in r2}
        if len(flat) == 1:
            trans.append({"from": s, "a1": WILDCARD, "a2": WILDCARD, key: WILDCARD, "to": states[next(iter(flat))]})
            continue
        for i, r in enumerate(rows):
            for j, r2 in enumerate(r):
                if len(set(r2)) == 1:
                    trans.append({"from": s, "a1": a1[i], "a2": a2[j], key: WILDCARD, "to": states[r2[0]]})
                else:
                    for x, t in enumerate(r2):
                        trans.append({"from": s, "a1": a1[i], "a2": a2[j], key: last[x], "to": states[t]})
    doc["transitions"] = trans
    od = _objective_doc(g.objective, states)
    if od is not None:
        doc["objective"] = od
    return doc


def _dist_doc(d, states):
    return [{"to": states[t], "p": str(p)} for t, p in d]


def serialize_game(g: AnyGame, provenance: dict | None = None) -> str:
    return json.dumps(game_to_doc(g, provenance), indent=1, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# strategies


def strategy_to_doc(sigma: MooreStrategy, obs: Partition, states, actions) -> dict:
    cells = [obs.cell_name(i, states) for i in range(len(obs))]
    mem = list(sigma.memory)
    return {
        "format": "moore-strategy",
        "version": 1,
        "owner": sigma.owner,
        "memory": mem,
        "initial": mem[sigma.initial],
        "cells": cells,
        "update": {mem[m]: {cells[o]: mem[sigma.update[m][o]] for o in range(len(cells))} for m in range(len(mem))},
        "output": {mem[m]: actions[sigma.output[m]] for m in range(len(mem))},
    }


def strategy_from_doc(doc: dict, obs: Partition, states, actions) -> MooreStrategy:
    if doc.get("format") != "moore-strategy":
        raise GameFormatError("not a strategy document")
    cells = [obs.cell_name(i, states) for i in range(len(obs))]
    if sorted(doc.get("cells", [])) != sorted(cells):
        raise GameError("strategy observation cells do not match the game partition")
    mem = list(doc["memory"])
    try:
        update = tuple(tuple(mem.index(doc["update"][m][c]) for c in cells) for m in mem)
        output = tuple(list(actions).index(doc["output"][m]) for m in mem)
    except (KeyError, ValueError) as exc:
        raise GameFormatError(f"incomplete or inconsistent strategy: {exc}") from None
    return MooreStrategy(tuple(mem), mem.index(doc["initial"]), update, output, doc.get("owner", 1))


# ---------------------------------------------------------------------------
# DOT


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(parts: list[str]) -> str:
    return '"' + "\\n".join(_q(p)[1:-1] for p in parts) + '"'


def witness_moves(g: ThreePlayerGame, sigma: MooreStrategy) -> set[tuple[int, int]]:
    """(state, a1) pairs played by ``sigma`` on some reachable configuration."""
    m0 = sigma.update[sigma.initial][g.obs1.obs(g.initial)]
    seen = {(g.initial, m0)}
    stack = [(g.initial, m0)]
    moves = set()
    while stack:
        q, m = stack.pop()
        a = sigma.output[m]
        moves.add((q, a))
        for r in g.delta[q][a]:
            for t in r:
                nxt = (t, sigma.update[m][g.obs1.obs(t)])
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return moves


def export_dot(g: AnyGame, verdict: Verdict | None = None) -> str:
    """Graph description: states as nodes, merged labeled edges, obs1 cells as
    clusters.  Witness moves are highlighted when a verdict carries one."""
    states = g.states
    highlight: set = set()
    if verdict is not None and verdict.witness is not None and isinstance(g, ThreePlayerGame):
        highlight = witness_moves(g, verdict.witness)
    lines = ["digraph game {", "  rankdir=LR;"]
    for ci, cell in enumerate(g.obs1.cells):
        lines.append(f"  subgraph cluster_obs1_{ci} {{")
        lines.append(f"    label={_q('obs1 ' + g.obs1.cell_name(ci, states))};")
        for q in cell:
            attrs = [f"label={_q(states[q])}", f"tooltip={_q('obs2 ' + g.obs2.cell_name(g.obs2.obs(q), states))}"]
            if q == g.initial:
                attrs.append("shape=doublecircle")
            lines.append(f"    {_q(states[q])} [{', '.join(attrs)}];")
        lines.append("  }")
    edges: dict[tuple[int, int], list[str]] = {}
    marked: set[tuple[int, int]] = set()
    a1, a2 = g.actions[0], g.actions[1]
    for q in range(g.n):
        for i in range(len(a1)):
            for j in range(len(a2)):
                if isinstance(g, StochasticGame):
                    for t, p in g.delta[q][i][j]:
                        edges.setdefault((q, t), []).append(f"{a1[i]},{a2[j]}:{p}")
                    continue
                last = g.actions[2]
                if isinstance(g, FourPlayerGame) and g.turn[q] == 4:
                    last = g.actions[3]
                for x, t in enumerate(g.delta[q][i][j]):
                    edges.setdefault((q, t), []).append(f"{a1[i]},{a2[j]},{last[x]}")
                    if (q, i) in highlight:
                        marked.add((q, t))
    for (q, t), labels in sorted(edges.items()):
        attrs = ["label=" + _label(labels)]
        if (q, t) in marked:
            attrs += ["color=blue", "penwidth=2"]
        lines.append(f"  {_q(states[q])} -> {_q(states[t])} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
