"""Bounded-memory strategies in the repeated Prisoner's Dilemma."""

from .game import (
    CATALOG, PD, DomainError, Memory1Strategy, Memory2Strategy, Outcome, StageGame,
    lift_memory1_to_memory2, named, parse_strategy, payoff_vector,
)
from .payoff_m1 import payoff_m1, payoff_m1_limit, transition_matrix_m1
from .payoff_m2 import payoff_m2, transition_matrix_m2, initial_distribution_m2

__version__ = "0.1.0"
