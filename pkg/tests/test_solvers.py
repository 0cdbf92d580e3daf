import random

import pytest
from hypothesis import given, settings, strategies as st

from pogames.corpus import random_cyclic_three, random_stochastic, random_three
from pogames.game import MooreStrategy, Partition, PreconditionError
from pogames.oracles import almost_sure_bounded, brute_force_three, brute_force_three_forall3, moore_machines
from pogames.reductions import build_knowledge_game, make_visible
from pogames.solvers import (
    almost_sure_via_gadget,
    bounded_solve,
    minimize_moore,
    solve_three,
    subset_construct,
    verify_strategy,
)


def constant(action, cells=1):
    return MooreStrategy(("m",), 0, ((0,) * cells,), (action,))


# --- fixed games ----------------------------------------------------------

def test_one_step_yes_with_single_memory(G0):
    v = solve_three(G0)
    assert v.yes and v.complete
    assert len(v.witness.memory) == 1
    assert verify_strategy(G0, sigma1=v.witness)


def test_pennies_no(G1):
    v = solve_three(G1)
    assert not v.yes and v.witness is None


def test_helper_yes_but_not_for_all_player3(G2):
    assert solve_three(G2).yes
    assert not brute_force_three_forall3(G2).yes


def test_precondition_less_informed(G1):
    with pytest.raises(PreconditionError):
        solve_three(G1, obs1=Partition.perfect(3, 1), obs2=Partition.blind(3, 2))


def test_bounded_examples(G0, G1):
    assert bounded_solve(G0, m1=1).yes
    v = bounded_solve(G1, m1=1)
    assert not v.yes and v.complete


def test_bounded_needs_positive_memory(G0):
    with pytest.raises(PreconditionError):
        bounded_solve(G0, m1=0)


def test_verify_examples(G0, G1):
    assert verify_strategy(G0, sigma1=constant(0, len(G0.obs1)))
    for sigma in moore_machines(1, len(G1.obs1), 2):
        assert not verify_strategy(G1, sigma1=sigma)


def test_verify_rejects_mismatched_strategy(G1):
    with pytest.raises(Exception):
        verify_strategy(G1, sigma1=constant(0, cells=3))


def test_subset_construction_with_perfect_player1():
    # player 1 perfect in the knowledge game: beliefs are single knowledges
    g = random_three(random.Random(8), perfect1=True)
    g = g.with_observations(Partition.perfect(g.n, 1), Partition.perfect(g.n, 2))
    vg = make_visible(g)[0]
    h = build_knowledge_game(vg)
    bg = subset_construct(h)
    assert all(len(b) == 1 for b in bg.belief.values())
    assert len(bg.belief) <= h.n_knowledge + 1


def test_subset_construction_blind_pennies(G1):
    h = build_knowledge_game(make_visible(G1)[0])
    bg = subset_construct(h)
    # one belief per round: the start, then the single reachable outcome per move
    assert len(bg.belief) <= 1 + len(h.knowledge)


def test_minimize_merges_equivalent_memory():
    sigma = MooreStrategy(("a", "b", "c"), 0, ((1,), (2,), (1,)), (0, 0, 0))
    assert len(minimize_moore(sigma).memory) == 1


# --- random sweeps --------------------------------------------------------

@pytest.mark.parametrize("seed", range(40))
def test_solve_matches_oracle_and_witness_verifies(seed):
    g = random_three(random.Random(seed))
    v = solve_three(g)
    assert v.yes == brute_force_three(g).yes
    if v.yes:
        assert verify_strategy(g, sigma1=v.witness)


@pytest.mark.parametrize("seed", range(30))
def test_bounded_yes_confirmed_on_cyclic_games(seed):
    g = random_cyclic_three(random.Random(seed), kind=["reach", "safe", "parity"][seed % 3])
    full = solve_three(g)
    b = bounded_solve(g, m1=2)
    if b.yes:
        assert full.yes and verify_strategy(g, sigma1=b.witness)
    if full.yes:
        assert verify_strategy(g, sigma1=full.witness)
    if not b.yes and b.complete:
        assert not full.yes


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_oracle_horizon_self_consistency(r):
    g = random_three(r, max_states=3)
    h = brute_force_three(g).diagnostics["horizon"]
    assert brute_force_three(g, h=h).yes == brute_force_three(g, h=h + 1).yes


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_verdict_is_deterministic(r):
    g = random_cyclic_three(r)
    a, b = solve_three(g), solve_three(g)
    assert a.as_dict() == b.as_dict() and a.witness == b.witness


# --- almost-sure reachability through the gadget ---------------------------

@pytest.mark.parametrize("seed", range(10))
def test_gadget_agrees_with_markov_sweep(seed):
    sg = random_stochastic(random.Random(seed))
    assert almost_sure_via_gadget(sg).yes == almost_sure_bounded(sg, sg.objective.target).yes

