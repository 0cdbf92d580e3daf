"""Solvers, reductions and oracles for multi-player partial-observation games."""

from .game import (
    FourPlayerGame,
    GameError,
    MooreStrategy,
    Parity,
    Partition,
    Reach,
    Safe,
    StochasticGame,
    ThreePlayerGame,
    Verdict,
    eval_lasso,
    less_informed,
    post,
)
from .io import export_dot, load_game, parse_game, serialize_game
from .solvers import bounded_solve, solve_three, verify_strategy

__version__ = "0.1.0"
