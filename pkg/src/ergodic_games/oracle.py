"""Brute-force ground truth for small games.

Enumerates every pure policy pair, evaluates it exactly (stationary
distributions in rational arithmetic for stochastic games, certified Perron
roots for entropy games) and scans the table for saddle points. Shares no code
with the iterative solvers beyond the game model and linear-algebra helpers.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import (EntropyGame, enumerate_pure_policy_pairs, induced_entropy_matrix,
                    induced_matrix_and_payoff, max_policies, min_policies)
from .numeric import final_classes, stationary_distribution, strongly_connected_components, support_graph

SPECTRAL_TOL = 1e-10
SADDLE_TOL = 1e-9


@dataclass
class SaddleResult:
    """Table of values of all pure policy pairs and its saddle points.

    ``table[(sigma, tau)]`` is the value of the pair (a scalar, or a
    per-state tuple for entropy games whose values differ between states).
    """

    table: dict
    saddles: list
    value: object

    def is_saddle(self, sigma, tau):
        return (tuple(sigma), tuple(tau)) in self.saddles


def mean_payoff_of_pair(g, pp):
    """Mean payoff ``pi r`` of a pure policy pair whose matrix is unichain.

    Exact (Fraction) for games with rational data, float otherwise.
    """
    P, r = induced_matrix_and_payoff(g, pp, exact=g.exact)
    finals = final_classes(support_graph(P))
    if len(finals) != 1:
        raise ValueError(f"multichain policy pair {pp}: final classes {finals}")
    pi = stationary_distribution(P, exact=g.exact)
    if g.exact:
        return sum((a * b for a, b in zip(pi, r)), Fraction(0))
    return float(pi @ r)


def _perron_root_irreducible(B, tol=SPECTRAL_TOL, max_squarings=200):
    """Perron root of an irreducible nonnegative block, bracketed by
    Collatz-Wielandt bounds.

    Works on the primitive shift ``I + B``; the power iteration is
    accelerated by repeated squaring, while the bounds are always taken with
    ``I + B`` itself so they stay valid.
    """
    n = B.shape[0]
    A = np.eye(n) + B
    Ak = A.copy()
    x = np.ones(n)
    for _ in range(max_squarings):
        y = A @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi) - 1.0
        x = Ak @ x
        x = x / x.max()
        Ak = Ak @ Ak
        Ak = Ak / Ak.max()
    raise ArithmeticError("power iteration did not reach the requested bracket")


def growth_rates(M):
    """Per-state growth rate: largest Perron root among the strongly
    connected blocks reachable from each state."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    succ = support_graph(M)
    comps = strongly_connected_components(succ)
    comp_of = {v: c for c, comp in enumerate(comps) for v in comp}
    own = []
    for comp in comps:
        B = M[np.ix_(comp, comp)]
        if len(comp) == 1 and B[0, 0] == 0:
            own.append(0.0)
        else:
            own.append(_perron_root_irreducible(B))
    # components come out in reverse topological order, so successors first
    best = [0.0] * len(comps)
    for c, comp in enumerate(comps):
        reach = [best[comp_of[w]] for v in comp for w in succ[v] if comp_of[w] != c]
        best[c] = max([own[c]] + reach)
    return np.array([best[comp_of[d]] for d in range(n)])


def spectral_radius(M):
    """Perron root of a nonnegative square matrix, to within 1e-10."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {M.shape}")
    if (M < 0).any():
        raise ValueError("matrix has negative entries")
    return float(growth_rates(M).max())


def _scan(table, sigmas, taus, leq):
    saddles = []
    for s in sigmas:
        for t in taus:
            v = table[(s, t)]
            if all(leq(table[(s, t2)], v) for t2 in taus) and all(leq(v, table[(s2, t)]) for s2 in sigmas):
                saddles.append((s, t))
    return saddles


def turnbased_saddle(g, cap=None):
    """Exhaustive pure saddle-point search for a unichain stochastic game."""
    table = {}
    for pp in enumerate_pure_policy_pairs(g, cap):
        table[(pp.sigma, pp.tau)] = mean_payoff_of_pair(g, pp)
    sigmas, taus = min_policies(g), max_policies(g)
    if g.exact:
        saddles = _scan(table, sigmas, taus, lambda a, b: a <= b)
    else:
        saddles = _scan(table, sigmas, taus, lambda a, b: a <= b + SADDLE_TOL)
    if not saddles:
        raise RuntimeError("no pure saddle point: the game is not a unichain turn-based game")
    return SaddleResult(table, saddles, table[saddles[0]])


def entropy_saddle(g, cap=None):
    """Exhaustive pure saddle-point search for an entropy game.

    The value of a pair is the per-Despot-vertex growth rate of
    ``M^{sigma,tau}``; saddle points are compared state by state.
    """
    if not isinstance(g, EntropyGame):
        raise TypeError("entropy_saddle needs an EntropyGame")
    table = {}
    for pp in enumerate_pure_policy_pairs(g, cap):
        table[(pp.sigma, pp.tau)] = tuple(growth_rates(induced_entropy_matrix(g, pp)).tolist())

    def leq(a, b):
        return all(x <= y + SADDLE_TOL for x, y in zip(a, b))

    saddles = _scan(table, min_policies(g), max_policies(g), leq)
    if not saddles:
        raise RuntimeError("no pure saddle point found")
    v = table[saddles[0]]
    value = v[0] if max(v) - min(v) <= SADDLE_TOL else v
    return SaddleResult(table, saddles, value)
