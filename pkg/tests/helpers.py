"""Random instance generators shared by the test modules."""

from fractions import Fraction
from importlib import resources

import numpy as np

from ergodic_games.model import ConcurrentGame, EntropyGame, TurnBasedGame, load_game
from ergodic_games.structure import check_irreducible, check_unichain


def fixture_path(name):
    return str(resources.files("ergodic_games") / "data" / f"{name}.json")


def fixture(name):
    return load_game(fixture_path(name))


def random_row(rng, n, sparsity=0.0):
    row = rng.random(n)
    row[rng.random(n) < sparsity] = 0.0
    if row.sum() == 0:
        row[rng.integers(n)] = 1.0
    return row / row.sum()


def random_stochastic(rng, n, sparsity=0.0):
    return np.array([random_row(rng, n, sparsity) for _ in range(n)])


def random_rational_row(rng, n, max_den):
    """Probability row with denominator at most `max_den`, as 'p/q' strings."""
    den = int(rng.integers(1, max_den + 1))
    counts = np.bincount(rng.integers(0, n, size=den), minlength=n)
    return [str(Fraction(int(c), den)) for c in counts]


def random_turnbased(rng, n_max=3, a_max=3, max_den=4, pay=5):
    """Random unichain turn-based game with rational transitions."""
    while True:
        n = int(rng.integers(1, n_max + 1))
        payoff, trans = [], []
        for _ in range(n):
            k = int(rng.integers(1, a_max + 1))
            rows = [random_rational_row(rng, n, max_den) for _ in range(k)]
            pays = [int(x) for x in rng.integers(-pay, pay + 1, size=k)]
            if rng.random() < 0.5:
                payoff.append([[p] for p in pays])
                trans.append([[r] for r in rows])
            else:
                payoff.append([pays])
                trans.append([rows])
        g = TurnBasedGame.from_concurrent(ConcurrentGame.from_arrays(payoff, trans))
        if n > 1 and not any(float(x) > 0 for i, P in enumerate(g.transition)
                             for x in np.delete(P, i, axis=2).flat):
            continue
        if check_unichain(g):
            return g


def random_concurrent(rng, n_max=5, a_max=2, sparsity=0.5, irreducible=False):
    """Random unichain (optionally irreducible) concurrent game, float data."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        payoff, trans = [], []
        for _ in range(n):
            na, nb = int(rng.integers(1, a_max + 1)), int(rng.integers(1, a_max + 1))
            payoff.append(rng.uniform(-3, 3, size=(na, nb)))
            P = np.array([random_row(rng, n, sparsity) for _ in range(na * nb)])
            trans.append(P.reshape(na, nb, n))
        g = ConcurrentGame.from_arrays(payoff, trans)
        ok = check_irreducible(g) if irreducible else check_unichain(g)
        if ok:
            return g


def random_entropy(rng, n_max=3, m_max=4):
    """Random irreducible entropy game (irreducible in the undamped sense)."""
    while True:
        nd = int(rng.integers(1, n_max + 1))
        nt = int(rng.integers(1, 4))
        npp = int(rng.integers(1, 5))
        D = [f"d{i}" for i in range(nd)]
        T = [f"t{i}" for i in range(nt)]
        P = [f"p{i}" for i in range(npp)]
        edges = []
        for d in D:
            for t in rng.choice(T, size=int(rng.integers(1, min(2, nt) + 1)), replace=False):
                edges.append({"from": d, "to": str(t)})
        for t in T:
            for p in rng.choice(P, size=int(rng.integers(1, min(2, npp) + 1)), replace=False):
                edges.append({"from": t, "to": str(p)})
        for p in P:
            for d in rng.choice(D, size=int(rng.integers(1, nd + 1)), replace=False):
                edges.append({"from": p, "to": str(d), "multiplicity": int(rng.integers(1, m_max + 1))})
        g = EntropyGame.from_edges(D, T, P, edges)
        if check_irreducible(g):
            return g
