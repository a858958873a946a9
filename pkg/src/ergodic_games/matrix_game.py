"""Value and optimal mixed strategies of finite zero-sum matrix games.

The row player (Min) pays ``G[a, b]`` to the column player (Max). The value
is computed by a tableau simplex with Bland's rule. Floating-point solves are
certified by the duality gap of the returned strategies and redone in
rational arithmetic when the certificate is too weak.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass
class MatrixGameResult:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    accuracy: float

    @property
    def gap(self):
        return 2 * self.accuracy


def _simplex_max(A, b, c, zero):
    """Maximize ``c @ y`` subject to ``A @ y <= b``, ``y >= 0`` with ``b > 0``.

    Plain tableau with slack basis and Bland's rule, working in whatever
    arithmetic the entries carry (floats or Fractions). Returns the primal
    solution and the dual prices of the constraints.
    """
    m, k = len(A), len(c)
    tab = [list(A[i]) + [int(i == j) for j in range(m)] + [b[i]] for i in range(m)]
    obj = list(c) + [0] * m
    basis = [k + i for i in range(m)]
    while True:
        enter = next((j for j in range(k + m) if obj[j] > zero), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            aij = tab[i][enter]
            if aij > zero:
                ratio = tab[i][-1] / aij
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise ArithmeticError("unbounded linear program")
        piv = tab[leave][enter]
        prow = [x / piv for x in tab[leave]]
        tab[leave] = prow
        for i in range(m):
            f = tab[i][enter]
            if i != leave and f != 0:
                tab[i] = [x - f * y for x, y in zip(tab[i], prow)]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, prow[:-1])]
        basis[leave] = enter
    y = [0] * k
    for i, var in enumerate(basis):
        if var < k:
            y[var] = tab[i][-1]
    duals = [-obj[k + i] for i in range(m)]
    return y, duals


def _lp_strategies(G, exact):
    m, k = G.shape
    if exact:
        Gx = [[Fraction(float(x)) if not isinstance(x, Fraction) else x for x in row] for row in G]
        shift = 1 - min(min(row) for row in Gx)
        A = [[x + shift for x in row] for row in Gx]
        one, zero = Fraction(1), Fraction(0)
    else:
        shift = 1.0 - float(G.min())
        A = (G + shift).tolist()
        one, zero = 1.0, 1e-12
    # Min's scaled strategy x' solves max 1.x' s.t. A^T x' <= 1; the dual
    # prices of the k constraints are Max's scaled strategy.
    At = [list(col) for col in zip(*A)]
    xs, duals = _simplex_max(At, [one] * k, [one] * m, zero)
    z = sum(xs)
    row = [xi / z for xi in xs]
    col = [max(d, 0 * d) / z for d in duals]
    if exact:
        col = np.array([float(x) for x in col])
        row = np.array([float(x) for x in row])
        value = float(1 / z - shift)
        return row / row.sum(), col / col.sum(), value
    col, row = np.array(col, dtype=float), np.array(row, dtype=float)
    return row / row.sum(), col / col.sum(), None


def solve_matrix_game(G, eta=1e-9):
    """Solve ``min_x max_y x^T G y`` over mixed strategies.

    Parameters
    ----------
    G : (m, k) array_like
        Payments from the row player (minimizer) to the column player.
    eta : float
        Requested accuracy on the value, > 0.

    Returns
    -------
    MatrixGameResult
        ``|value - val(G)| <= accuracy <= eta``; the strategies certify it
        through ``max_b (x^T G)_b - min_a (G y)_a <= 2 * accuracy``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.size == 0:
        raise ValueError(f"payoff matrix must be a nonempty 2-d array, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("payoff matrix has non-finite entries")
    if not eta > 0:
        raise ValueError("eta must be > 0")
    m, k = G.shape
    row_max = G.max(axis=1)
    col_min = G.min(axis=0)
    upper, lower = row_max.min(), col_min.max()
    if upper == lower:
        x = np.zeros(m)
        y = np.zeros(k)
        x[int(np.argmin(row_max))] = 1.0
        y[int(np.argmax(col_min))] = 1.0
        return MatrixGameResult(float(upper), x, y, 0.0)

    x, y, _ = _lp_strategies(G, exact=False)
    hi, lo = float((x @ G).max()), float((G @ y).min())
    if hi - lo <= 2 * eta and np.all(x >= 0) and np.all(y >= 0):
        return MatrixGameResult(0.5 * (hi + lo), x, y, 0.5 * max(hi - lo, 0.0))
    x, y, value = _lp_strategies(G, exact=True)
    hi, lo = float((x @ G).max()), float((G @ y).min())
    return MatrixGameResult(value, x, y, max(hi - value, value - lo, 0.0))


def solve_turnbased_cell(values, maximize=False):
    """Exact min (or max) of a list with lowest-index tie-break."""
    v = np.asarray(values)
    if v.size == 0:
        raise ValueError("empty action list")
    idx = int(np.argmax(v) if maximize else np.argmin(v))
    return v[idx], idx
