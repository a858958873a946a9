"""Solve the bundled three-state turn-based game step by step.

Shows the structural analysis, the damped iteration, the exact solve and an
independent check of the answer against the brute-force saddle search.
"""

from fractions import Fraction
from importlib import resources

import numpy as np

from ergodic_games import load_game
from ergodic_games.operators import KMOperator, ShapleyOperator
from ergodic_games.oracle import turnbased_saddle
from ergodic_games.solver import solve, solve_turnbased_exact
from ergodic_games.structure import analyze, turnbased_epsilon

game = load_game(str(resources.files("ergodic_games") / "data" / "three_state.json"))

rep = analyze(game)
print(f"states: {game.names}")
print(f"unichain={rep.is_unichain} irreducible={rep.is_irreducible} k_uni={rep.k_uni}")
print(f"p_min={rep.p_min} theta={rep.theta}: T_theta^{rep.q} contracts at rate {rep.gamma}")

# a few damped steps by hand, normalized so the top entry is zero
K = KMOperator(ShapleyOperator(game), float(rep.theta))
x = np.zeros(game.n)
for k in range(1, 6):
    y = K(x)
    x = y - y.max()
    print(f"  step {k}: x = {np.round(x, 6)}")

cert, pol, _ = solve(game, 1e-6)
lo, hi = cert.rescaled_value_interval
print(f"value in [{lo:.9f}, {hi:.9f}] after {cert.iterations} iterations")
print(f"bias vector {np.round(cert.x, 6)}")

print(f"precision separating policy values: {turnbased_epsilon(game)}")
_, exact = solve_turnbased_exact(game)
print(f"exact value {exact.claimed_value}, Min {exact.sigma_star}, Max {exact.tau_star}")

oracle = turnbased_saddle(game)
print(f"brute force over {len(oracle.table)} pure pairs: value {oracle.value}, "
      f"saddles {oracle.saddles}")
assert oracle.value == exact.claimed_value == Fraction(15, 4)
