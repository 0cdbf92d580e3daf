import random

import pytest
from hypothesis import given, settings, strategies as st

from pogames.corpus import build_three, random_three
from pogames.counting import (
    OMEGA,
    CountingFunction,
    EmptySupport,
    counting_root,
    counting_step,
    solve_counting_safety,
    splits,
    tree_to_dot,
    unravel,
)
from pogames.game import GameError, Partition, PreconditionError, Safe
from pogames.oracles import brute_force_three
from pogames.solvers import verify_strategy


def cf(*counts):
    return CountingFunction(tuple(counts))


def test_root(G0):
    root = counting_root(G0)
    assert root.counts == (1, 0)
    assert root.support == {G0.initial}
    assert root <= root


def test_root_needs_perfect_player1(G1):
    with pytest.raises(PreconditionError):
        counting_root(G1)


def test_observation_filters_branch(G2):
    # the r-branch lands in b, which is a different player-2 cell than t
    c = counting_step(G2, counting_root(G2), 0, 0, G2.obs2.obs(1))
    assert c.counts == (0, 1, 0)


def test_path_multiplicity():
    g = build_three(["s", "t"], "s", (["a"], ["a"], ["0", "1"]), lambda q, x, y, z: "t", None, "blind", Safe(frozenset({0, 1})))
    root = counting_root(g)
    assert counting_step(g, root, 0, 0, 0, by_action=True).counts == (0, 2)
    # as state sequences the two actions extend one history
    assert counting_step(g, root, 0, 0, 0).counts == (0, 1)


def test_omega_absorbs():
    g = build_three(["s", "t"], "s", (["a"], ["a"], ["0"]), lambda q, x, y, z: "t", None, "blind", Safe(frozenset({0, 1})))
    c = counting_step(g, cf(OMEGA, 3), {0: (OMEGA,), 1: (3,)}, 0, 0)
    assert c.counts == (0, OMEGA)


def test_empty_support_raises(G2):
    with pytest.raises(EmptySupport):
        counting_step(G2, counting_root(G2), 0, 0, G2.obs2.obs(0))


def test_invalid_count():
    with pytest.raises(GameError):
        cf(-1)


def test_splits_distribute_histories():
    got = list(splits(cf(2, 0, 1), 2))
    assert len(got) == 3 * 2
    assert all(sum(sp[0]) == 2 and sum(sp[2]) == 1 for sp in got)


@given(st.lists(st.one_of(st.integers(0, 4), st.just(OMEGA)), min_size=3, max_size=3),
       st.lists(st.one_of(st.integers(0, 4), st.just(OMEGA)), min_size=3, max_size=3),
       st.lists(st.one_of(st.integers(0, 4), st.just(OMEGA)), min_size=3, max_size=3))
def test_order_laws(a, b, c):
    x, y, z = cf(*a), cf(*b), cf(*c)
    assert x <= x
    if x <= y and y <= x:
        assert x == y
    if x <= y and y <= z:
        assert x <= z


@settings(max_examples=80)
@given(st.randoms(use_true_random=False))
def test_step_is_monotone(r):
    g = random_three(r, perfect1=True, kind="safe")
    n = g.n
    small = [r.randint(0, 2) for _ in range(n)]
    small[g.initial] = max(small[g.initial], 1)
    big = [x + r.randint(0, 2) for x in small]
    a1 = r.randrange(len(g.actions[0]))
    a2 = r.randrange(len(g.actions[1]))
    for o2 in range(len(g.obs2)):
        try:
            lo = counting_step(g, cf(*small), a1, a2, o2)
        except EmptySupport:
            continue
        assert lo <= counting_step(g, cf(*big), a1, a2, o2)


# --- trees ----------------------------------------------------------------

def test_one_step_tree_covers_quickly(G0):
    tree = unravel(G0, target={0, 1})
    assert tree.root.win
    leaves = [x for x in tree.nodes if not x.children]
    assert leaves and all(x.cover is not None and x.depth <= 2 for x in leaves)


def test_empty_safe_set_single_node(G0):
    tree = unravel(G0, target=set())
    assert len(tree.nodes) == 1 and tree.root.win is False


def test_covered_nodes_dominate_an_ancestor():
    for seed in range(30):
        g = random_three(random.Random(seed), perfect1=True, kind="safe")
        tree = unravel(g)
        ids = {x.ident for x in tree.nodes}
        for x in tree.nodes:
            if x.cover is not None:
                assert x.cover in ids and not x.children
                anc = {a.ident for a in tree.path(x.parent)}
                assert x.cover in anc
                assert tree.nodes[x.cover].counting <= x.counting


def test_tree_dot(G0):
    dot = tree_to_dot(unravel(G0, target={0, 1}))
    assert dot.startswith("digraph") and "->" in dot


# --- solving --------------------------------------------------------------

def test_one_step_safe_yes(G0):
    v = solve_counting_safety(G0, target={0, 1})
    assert v.yes and verify_strategy(G0, obj=Safe(frozenset({0, 1})), sigma1=v.witness)


def test_helper_safe_yes(G2):
    # player 3 plays l and stays in {s, t}; the oracle agrees
    v = solve_counting_safety(G2, target={0, 1})
    assert v.yes
    assert brute_force_three(G2, obj=Safe(frozenset({0, 1}))).yes


def _gap_game():
    def step(q, a, b, c):
        if q == "s":
            return "q" if c == "0" else ("r1" if b == "x" else "r2")
        if q == "q":
            return ("d" if b == "x" else "z") if a == "al" else ("z" if b == "x" else "d")
        if q == "r1":
            return "z" if b == "x" else "d"
        if q == "r2":
            return "d" if b == "x" else "z"
        return q

    states = ["s", "q", "r1", "r2", "z", "d"]
    return build_three(states, "s", (["al", "be"], ["x", "y"], ["0", "1"]), step, None, "blind",
                       Safe(frozenset(range(5))))


def test_abstraction_gap_is_caught():
    g = _gap_game()
    assert not brute_force_three(g).yes
    v = solve_counting_safety(g)
    assert not v.yes
    assert v.diagnostics.get("witness_rejected") and not v.complete


def test_action_multiplicity_overcounts():
    # both player-3 moves reach t; at t player 1 must guess player 2's action
    def step(q, a, b, c):
        if q == "s":
            return "t"
        if q == "t":
            return "z" if (a == "al") == (b == "x") else "d"
        return q

    g = build_three(["s", "t", "z", "d"], "s", (["al", "be"], ["x", "y"], ["0", "1"]), step, None, "blind",
                    Safe(frozenset({0, 1, 2})))
    assert not brute_force_three(g).yes
    assert not solve_counting_safety(g).yes
    # counting per action gives two copies at t, which could then split over al and be
    c = counting_step(g, counting_root(g), 0, 0, 0, by_action=True)
    assert c.counts[1] == 2
    assert any(sp[1] == (1, 1) for sp in splits(c, 2))


@pytest.mark.parametrize("seed", range(40))
def test_counting_matches_oracle(seed):
    g = random_three(random.Random(1000 + seed), perfect1=True, kind="safe")
    v = solve_counting_safety(g)
    assert v.yes == brute_force_three(g).yes
    if v.yes:
        assert verify_strategy(g, sigma1=v.witness)


@pytest.mark.parametrize("seed", range(20))
def test_acceleration_agrees_on_corpus(seed):
    g = random_three(random.Random(2000 + seed), perfect1=True, kind="safe")
    assert solve_counting_safety(g, accelerate=True).yes == solve_counting_safety(g).yes


def test_perfect_player1_required(G1):
    with pytest.raises(PreconditionError):
        solve_counting_safety(G1.with_objective(Safe(frozenset({0, 1}))))


def test_safety_objective_required(G0):
    g = G0.with_observations(Partition.perfect(2, 1), G0.obs2)
    with pytest.raises(PreconditionError):
        solve_counting_safety(g)
