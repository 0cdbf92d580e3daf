import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pogames.corpus import random_three
from pogames.game import Parity, Partition, Reach, Safe, ThreePlayerGame, eval_lasso
from pogames.oracles import (
    POSITIVE,
    PROBABILITY_ONE,
    ZERO,
    MarkovChain,
    NoCertificate,
    brute_force_three,
    check_lemma_uniform,
    exists_play,
    horizon_certificate,
    markov_qualitative,
)

HALF = Fraction(1, 2)
ONE = Fraction(1)


def test_brute_force_fixed_games(G0, G1, G2):
    assert brute_force_three(G0, h=1).yes
    assert not brute_force_three(G1, h=1).yes
    v = brute_force_three(G2, h=1)
    assert v.yes and v.complete


def test_oracle_refuses_cyclic_games():
    # two states swapping forever and a target never reached: no horizon
    loop = ThreePlayerGame(("x", "y"), 0, (("a",), ("a",), ("a",)), ((((1,),),), (((0,),),)),
                           Partition.blind(2, 1), Partition.blind(2, 2), Reach(frozenset()))
    assert horizon_certificate(loop, loop.objective) is None
    with pytest.raises(NoCertificate):
        brute_force_three(loop)


def test_oracle_refuses_short_horizon(G2):
    assert brute_force_three(G2).diagnostics["horizon"] == 1
    with pytest.raises(NoCertificate):
        brute_force_three(G2, h=0)


# --- lassos ---------------------------------------------------------------

def test_absorbing_target():
    ok, (stem, cycle) = exists_play([[0]], 0, Reach(frozenset({0})))
    assert ok and stem == [] and cycle == [0]


def test_odd_cycle_has_no_even_play():
    ok, w = exists_play([[1], [0]], 0, Parity((1, 1)))
    assert not ok and w is None


def _simple_lassos(succ, start):
    """All lassos whose stem and cycle are simple paths."""
    out = []

    def walk(path):
        v = path[-1]
        for w in succ[v]:
            if w in path:
                k = path.index(w)
                out.append((path[:k], path[k:]))
            else:
                walk(path + [w])

    walk([start])
    return out


@settings(max_examples=150)
@given(st.randoms(use_true_random=False), st.sampled_from(["reach", "safe", "parity"]))
def test_exists_play_against_simple_lassos(r, kind):
    n = 6
    succ = [sorted(r.sample(range(n), r.randint(1, 2))) for _ in range(n)]
    if kind == "parity":
        obj = Parity(tuple(r.randrange(4) for _ in range(n)))
    else:
        t = frozenset(q for q in range(n) if r.random() < 0.5)
        obj = Reach(t) if kind == "reach" else Safe(t)
    ok, w = exists_play(succ, 0, obj)
    assert ok == any(eval_lasso(s, c, obj) for s, c in _simple_lassos(succ, 0))
    if ok:
        stem, cycle = w
        path = stem + cycle + [cycle[0]]
        assert path[0] == 0
        assert all(b in succ[a] for a, b in zip(path, path[1:]))
        assert eval_lasso(stem, cycle, obj)


# --- Markov chains --------------------------------------------------------

def test_markov_probability_one():
    mc = MarkovChain((((1, HALF), (0, HALF)), ((1, ONE),)), 0)
    assert markov_qualitative(mc, {1}) == PROBABILITY_ONE


def test_markov_positive():
    mc = MarkovChain((((1, HALF), (2, HALF)), ((1, ONE),), ((2, ONE),)), 0)
    assert markov_qualitative(mc, {1}) == POSITIVE


def test_markov_zero():
    mc = MarkovChain((((0, ONE),), ((1, ONE),)), 0)
    assert markov_qualitative(mc, {1}) == ZERO


@settings(max_examples=150)
@given(st.randoms(use_true_random=False))
def test_positive_iff_reachable_in_support(r):
    n = r.randint(1, 6)
    rows = []
    for _ in range(n):
        k = min(n, r.randint(1, 2))
        rows.append(tuple((t, Fraction(1, k)) for t in r.sample(range(n), k)))
    target = frozenset(q for q in range(n) if r.random() < 0.3)
    mc = MarkovChain(tuple(rows), 0)
    succ = [[t for t, _ in row] for row in rows]
    c = markov_qualitative(mc, target)
    assert (c != ZERO) == exists_play(succ, 0, Reach(target))[0]


# --- the uniform lemma ----------------------------------------------------

def test_lemma_on_fixed_games(G1, G2):
    assert check_lemma_uniform(G2)
    assert check_lemma_uniform(G1, target={1})


@pytest.mark.parametrize("seed", range(30))
def test_lemma_random(seed):
    g = random_three(random.Random(seed), max_states=3, kind="reach")
    assert check_lemma_uniform(g, h=3)
