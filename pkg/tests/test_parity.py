import itertools
import random

import pytest
from hypothesis import given, strategies as st

from pogames.corpus import all_parity_games, count_parity_games, graph_orbits, random_parity_game
from pogames.game import GameError
from pogames.oracles import positional_parity_sweep, positional_parity_winners
from pogames.parity import EVEN, ODD, ParityGame, play_lasso, solve_parity_perfect


def test_self_loop_even():
    sol = solve_parity_perfect(ParityGame((EVEN,), ((0,),), (0,)))
    assert sol.win[EVEN] == {0} and sol.winner(0) == EVEN


def test_self_loop_odd():
    for owner in (EVEN, ODD):
        sol = solve_parity_perfect(ParityGame((owner,), ((0,),), (1,)))
        assert sol.win[ODD] == {0}


def test_dead_end_rejected():
    with pytest.raises(GameError):
        ParityGame((0, 0), ((1,), ()), (0, 0))


def test_exhaustive_up_to_three_vertices():
    for n in (1, 2, 3):
        count = 0
        for g in all_parity_games(n):
            count += 1
            sol = solve_parity_perfect(g)
            w = positional_parity_winners(g)
            assert all(sol.winner(v) == w[v] for v in range(n)), g
        assert count == count_parity_games(n)


def test_sweep_matches_per_game_enumeration():
    for succ in graph_orbits(3):
        table = positional_parity_sweep(succ)
        for o, p in itertools.product(range(8), repeat=2):
            g = ParityGame(tuple(o >> v & 1 for v in range(3)), succ, tuple(p >> v & 1 for v in range(3)))
            w = positional_parity_winners(g)
            assert table[o][p] == sum(1 << v for v in range(3) if w[v] == EVEN)


def test_orbits_cover_every_graph():
    reps = graph_orbits(3, 2)
    seen = set()
    for succ in reps:
        for pi in itertools.permutations(range(3)):
            img = [None] * 3
            for v, s in enumerate(succ):
                img[pi[v]] = tuple(sorted(pi[w] for w in s))
            seen.add(tuple(img))
    n_choices = 3 + 3
    assert len(seen) == n_choices ** 3


def _priorities(max_p):
    return st.integers(1, 6).flatmap(lambda n: st.tuples(
        st.just(n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=3).map(lambda s: tuple(sorted(s))),
                 min_size=n, max_size=n),
        st.lists(st.integers(0, max_p), min_size=n, max_size=n),
    ))


@given(_priorities(4))
def test_regions_partition_and_strategies_win(data):
    n, owner, succ, prio = data
    g = ParityGame(tuple(owner), tuple(succ), tuple(prio))
    sol = solve_parity_perfect(g)
    assert sol.win[EVEN] | sol.win[ODD] == set(range(n))
    assert not sol.win[EVEN] & sol.win[ODD]
    for p in (EVEN, ODD):
        mine = sol.strategy[p]
        assert set(mine) == {v for v in sol.win[p] if g.owner[v] == p}
        assert all(mine[v] in g.succ[v] for v in mine)
        assert all(mine[v] in sol.win[p] for v in mine)
        # against every positional opponent the play closes a lasso of the right parity
        other = [v for v in range(n) if g.owner[v] != p]
        for choice in itertools.product(*(g.succ[v] for v in other)):
            opp = dict(zip(other, choice))
            s0, s1 = (mine, opp) if p == EVEN else (opp, mine)
            for v in sol.win[p]:
                stem, cycle = play_lasso(g, v, s0, s1)
                assert len(stem) + len(cycle) <= n
                assert min(g.priority[u] for u in cycle) % 2 == p


@given(_priorities(5))
def test_matches_positional_enumeration(data):
    n, owner, succ, prio = data
    g = ParityGame(tuple(owner), tuple(succ), tuple(prio))
    w = positional_parity_winners(g)
    assert all(solve_parity_perfect(g).winner(v) == w[v] for v in range(n))


@given(st.randoms(use_true_random=False), st.permutations(range(5)))
def test_relabelling_invariance(r, pi):
    g = random_parity_game(r, 5)
    inv = {pi[v]: v for v in range(5)}
    h = ParityGame(
        tuple(g.owner[inv[v]] for v in range(5)),
        tuple(tuple(sorted(pi[w] for w in g.succ[inv[v]])) for v in range(5)),
        tuple(g.priority[inv[v]] for v in range(5)),
    )
    a, b = solve_parity_perfect(g), solve_parity_perfect(h)
    assert {pi[v] for v in a.win[EVEN]} == set(b.win[EVEN])


def test_deterministic_output():
    g = random_parity_game(random.Random(4), 5)
    assert solve_parity_perfect(g) == solve_parity_perfect(g)
