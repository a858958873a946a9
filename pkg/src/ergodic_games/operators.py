"""Shapley operators of stochastic and entropy games, with Krasnoselskii-Mann
damping.

Every operator is a callable ``op(v) -> ndarray`` on valuations of length
``op.n`` and carries ``op.eta``, a bound on the sup-norm error of its
floating-point evaluation.
"""

from fractions import Fraction

import numpy as np

from .matrix_game import solve_matrix_game
from .model import EntropyGame, TurnBasedGame
from .numeric import bottom, top

DEFAULT_ETA = 1e-12


def _check_dim(v, n):
    v = np.asarray(v)
    if v.shape != (n,):
        raise ValueError(f"dimension mismatch: expected a valuation of length {n}, got shape {v.shape}")
    return v


class ShapleyOperator:
    """Dynamic programming operator of a concurrent or turn-based game.

    ``T_i(v) = min_alpha max_beta (r_i + P_i v)`` over mixed actions. Stage
    games with a pure saddle point (all turn-based states) are evaluated
    exactly by pure min/max; the others go through
    :func:`~ergodic_games.matrix_game.solve_matrix_game` with accuracy `eta`.
    """

    def __init__(self, game, eta=DEFAULT_ETA):
        if isinstance(game, EntropyGame):
            raise TypeError("use EntropyOperator for entropy games")
        if eta < 0:
            raise ValueError("eta must be >= 0")
        self.game = game
        self.n = game.n
        self.eta = eta
        self._r, self._P, self._mask = game.dense

    def stage_payoffs(self, v):
        """Padded stage-game matrices ``G[i, a, b] = r_i^{ab} + P_i^{ab} . v``."""
        v = _check_dim(v, self.n)
        return self._r + self._P @ v

    def _bounds(self, G):
        mask = self._mask
        row_max = np.where(mask, G, -np.inf).max(axis=2)
        upper = np.where(mask.any(axis=2), row_max, np.inf).min(axis=1)
        col_min = np.where(mask, G, np.inf).min(axis=1)
        lower = np.where(mask.any(axis=1), col_min, -np.inf).max(axis=1)
        return upper, lower

    def __call__(self, v):
        G = self.stage_payoffs(v)
        upper, lower = self._bounds(G)
        out = upper.copy()
        pure = upper - lower <= 2 * self.eta
        out[pure] = 0.5 * (upper[pure] + lower[pure])
        for i in np.flatnonzero(~pure):
            na, nb = self.game.payoff[i].shape
            out[i] = solve_matrix_game(G[i, :na, :nb], self.eta or DEFAULT_ETA).value
        return out

    def evaluate_exact(self, v):
        """Rational evaluation for exact turn-based games (no oracle error)."""
        g = self.game
        if not (isinstance(g, TurnBasedGame) and g.exact):
            raise ValueError("exact evaluation needs an exact turn-based game")
        v = np.array([Fraction(x) for x in _check_dim(v, self.n)], dtype=object)
        out = []
        for i in range(self.n):
            G = g.payoff_exact[i] + g.transition_exact[i].dot(v)
            out.append(min(max(row) for row in G))
        return np.array(out, dtype=object)

    def optimal_actions(self, v):
        """Pure actions achieving ``T_i(v)`` (turn-based stage games).

        ``sigma[i]`` minimizes ``max_b G[a, b]`` and ``tau[i]`` maximizes
        ``min_a G[a, b]``, lowest index on ties.
        """
        G = self.stage_payoffs(v)
        mask = self._mask
        row_max = np.where(mask.any(axis=2), np.where(mask, G, -np.inf).max(axis=2), np.inf)
        col_min = np.where(mask.any(axis=1), np.where(mask, G, np.inf).min(axis=1), -np.inf)
        return tuple(np.argmin(row_max, axis=1).tolist()), tuple(np.argmax(col_min, axis=1).tolist())

    def optimal_mixed(self, v):
        """Per-state optimal mixed strategies ``(alpha_i, beta_i)``."""
        G = self.stage_payoffs(v)
        alphas, betas = [], []
        for i in range(self.n):
            na, nb = self.game.payoff[i].shape
            res = solve_matrix_game(G[i, :na, :nb], self.eta or DEFAULT_ETA)
            alphas.append(res.row_strategy)
            betas.append(res.col_strategy)
        return alphas, betas


class KMOperator:
    """Krasnoselskii-Mann damping ``T_theta = theta I + (1 - theta) T``."""

    def __init__(self, base, theta):
        if not 0 < theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        self.base = base
        self.theta = theta
        self.n = base.n
        self.eta = (1 - float(theta)) * base.eta

    @property
    def game(self):
        return self.base.game

    def __call__(self, v):
        v = _check_dim(v, self.n)
        th = float(self.theta)
        return th * v + (1 - th) * self.base(v)


class EntropyOperator:
    """``F_d(x) = min_t max_p sum_d' m(p, d') x_d'`` on positive vectors.

    Calling the operator applies ``log o F o exp`` (the additive Shapley
    operator); :meth:`multiplicative` applies ``F`` itself. Both accept float
    arrays or object arrays of mpmath numbers.
    """

    eta = DEFAULT_ETA

    def __init__(self, game):
        if not isinstance(game, EntropyGame):
            raise TypeError("EntropyOperator needs an EntropyGame")
        self.game = game
        self.n = game.n
        self._rows = game.people_rows.astype(float)

    def _people_values(self, y):
        if y.dtype == object:
            return {p: sum(m * y[d] for d, m in self.game.pd[p]) for p in self.game.reachable_people}
        w = self._rows @ y
        return {p: w[p] for p in self.game.reachable_people}

    def multiplicative(self, y):
        y = _check_dim(y, self.n)
        if any(not yi > 0 for yi in y):
            raise ValueError("entropy operator needs an entrywise positive vector")
        w = self._people_values(y)
        g = self.game
        out = [min(max(w[p] for p in g.tp[t]) for t in g.dt[d]) for d in range(self.n)]
        return np.array(out, dtype=y.dtype)

    def __call__(self, v):
        v = _check_dim(v, self.n)
        s = top(v)
        if v.dtype == object:
            return s + _mp_log(self.multiplicative(_mp_exp(v - s)))
        return s + np.log(self.multiplicative(np.exp(v - s)))

    def optimal_actions(self, y):
        """Despot and Tribune choices achieving ``F(y)`` (lowest index on ties)."""
        g = self.game
        w = self._people_values(_check_dim(y, self.n))
        tau = [None] * len(g.tribune)
        for t in g.reachable_tribunes:
            vals = [w[p] for p in g.tp[t]]
            tau[t] = g.tp[t][vals.index(max(vals))]
        sigma = []
        for d in range(self.n):
            vals = [w[tau[t]] for t in g.dt[d]]
            sigma.append(g.dt[d][vals.index(min(vals))])
        return tuple(sigma), tuple(tau)


class EntropyKMOperator(EntropyOperator):
    """Multiplicative damping ``[T_m(v)]_d = log(vartheta e^{v_d} + F_d(e^v))``."""

    def __init__(self, game, vartheta):
        if not vartheta > 0:
            raise ValueError(f"vartheta must be > 0, got {vartheta}")
        super().__init__(game)
        self.vartheta = vartheta

    def multiplicative(self, y):
        y = _check_dim(y, self.n)
        return self.vartheta * y + EntropyOperator.multiplicative(self, y)


def _mp_exp(v):
    import mpmath
    return np.array([mpmath.exp(x) for x in v], dtype=object)


def _mp_log(v):
    import mpmath
    return np.array([mpmath.log(x) for x in v], dtype=object)


def residual(op, x):
    """``(bottom, top)`` of ``op(x) - x``; their gap is ``||op(x) - x||_H``."""
    d = op(x) - np.asarray(x)
    return bottom(d), top(d)
