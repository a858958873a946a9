"""Certified relative value iteration for mean-payoff stochastic games and
entropy games."""

from .matrix_game import MatrixGameResult, solve_matrix_game
from .model import (ConcurrentGame, EntropyGame, GameFormatError, PolicyCapExceeded, PurePolicyPair,
                    TurnBasedGame, dump_game, load_game)
from .numeric import dobrushin_bruteforce, dobrushin_delta, hilbert_seminorm, stationary_distribution
from .operators import EntropyKMOperator, EntropyOperator, KMOperator, ShapleyOperator
from .oracle import entropy_saddle, mean_payoff_of_pair, spectral_radius, turnbased_saddle
from .solver import (Certificate, PolicyCertificate, predict_iteration_bound, rvi, solve, solve_entropy,
                     solve_turnbased_exact)
from .structure import analyze, entropy_structure

__all__ = [
    "Certificate", "ConcurrentGame", "EntropyGame", "EntropyKMOperator", "EntropyOperator",
    "GameFormatError", "KMOperator", "MatrixGameResult", "PolicyCapExceeded", "PolicyCertificate",
    "PurePolicyPair", "ShapleyOperator", "TurnBasedGame", "analyze", "dobrushin_bruteforce",
    "dobrushin_delta", "dump_game", "entropy_saddle", "entropy_structure", "hilbert_seminorm",
    "load_game", "mean_payoff_of_pair", "predict_iteration_bound", "rvi", "solve", "solve_entropy",
    "solve_matrix_game", "solve_turnbased_exact", "spectral_radius", "stationary_distribution",
    "turnbased_saddle",
]
