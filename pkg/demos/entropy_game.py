"""Entropy game on a small tripartite graph.

Despot picks a Tribune, Tribune picks a People node, People spreads to
Despot nodes with multiplicities. The value is the growth rate of the number
of paths under optimal play.
"""

import math

from ergodic_games import EntropyGame
from ergodic_games.oracle import entropy_saddle
from ergodic_games.solver import solve_entropy
from ergodic_games.structure import entropy_structure

game = EntropyGame.from_edges(
    ["d1", "d2"], ["t1", "t2", "t3"], ["p1", "p2", "p3"],
    [("d1", "t1"), ("d1", "t2"), ("d2", "t3"),
     ("t1", "p1"), ("t2", "p2"), ("t2", "p3"), ("t3", "p1"), ("t3", "p3"),
     ("p1", "d1", 1), ("p1", "d2", 2),
     ("p2", "d1", 2), ("p2", "d2", 1),
     ("p3", "d1", 1), ("p3", "d2", 2)],
)

rep = entropy_structure(game)
print(f"k_irr={rep.k_irr} vartheta={rep.vartheta} ambiguity={rep.ambiguity:.4f}")
print(f"contraction rate per {rep.k_irr} steps: {rep.gamma:.6f}")
print(f"log separation constant: {rep.nu_n_log:.2f} "
      f"(exact policy recovery would need about {rep.predicted_iterations:.3g} iterations)")

cert, pol, _ = solve_entropy(game, epsilon=1e-10, report=rep)
lo, hi = cert.rescaled_value_interval
print(f"value in [{lo:.12f}, {hi:.12f}] after {cert.iterations} iterations")
print(f"Despot {pol.sigma_star}, Tribune {pol.tau_star}")

oracle = entropy_saddle(game)
print(f"brute-force value {oracle.value:.12f}")
assert math.isclose(oracle.value, 0.5 * (lo + hi), abs_tol=1e-8)
