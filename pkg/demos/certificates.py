"""Contraction certificates on random games, checked empirically.

For each game the analysis predicts a rate gamma for T_theta^q. The script
measures the worst Lipschitz ratio over random pairs and the iteration count
of the damped solver against the predicted bound.
"""

import numpy as np

from ergodic_games import ConcurrentGame
from ergodic_games.numeric import hilbert_seminorm
from ergodic_games.operators import KMOperator, ShapleyOperator
from ergodic_games.solver import compliant_eta, predict_iteration_bound, rvi
from ergodic_games.structure import analyze

rng = np.random.default_rng(5)


def random_game(n):
    payoff, trans = [], []
    for _ in range(n):
        na, nb = rng.integers(1, 3, size=2)
        payoff.append(rng.uniform(-3, 3, size=(na, nb)))
        P = rng.random((na, nb, n)) * (rng.random((na, nb, n)) < 0.6)
        P[..., rng.integers(n)] += 0.1
        trans.append(P / P.sum(axis=-1, keepdims=True))
    return ConcurrentGame.from_arrays(payoff, trans)


eps = 1e-6
print(f"{'n':>2} {'k_uni':>5} {'q':>2} {'gamma':>8} {'worst ratio':>11} {'iters':>5} {'bound':>5}")
shown = 0
while shown < 8:
    g = random_game(int(rng.integers(2, 5)))
    rep = analyze(g)
    if not rep.is_unichain or rep.gamma is None:
        continue
    shown += 1
    K = KMOperator(ShapleyOperator(g, 1e-13), float(rep.theta))
    worst = 0.0
    for _ in range(200):
        v, w = rng.normal(size=g.n), rng.normal(size=g.n)
        a, b = v, w
        for _ in range(rep.q):
            a, b = K(a), K(b)
        worst = max(worst, hilbert_seminorm(a - b) / hilbert_seminorm(v - w))
    eta = compliant_eta(eps, rep.q, float(rep.gamma))
    op = KMOperator(ShapleyOperator(g, eta), float(rep.theta))
    bound = predict_iteration_bound(rep.q, float(rep.gamma), hilbert_seminorm(op(np.zeros(g.n))), eps)
    cert = rvi(op, eps, eta, max_iters=10 * bound + 10)
    print(f"{g.n:>2} {rep.k_uni:>5} {rep.q:>2} {float(rep.gamma):>8.4f} {worst:>11.4f} "
          f"{cert.iterations:>5} {bound:>5}")
