"""Vector and matrix primitives: top/bottom, Hilbert's seminorm, Dobrushin's
coefficient, stationary distributions and support-graph components.

Valuations are 1-d numpy arrays. Float arrays are used by the iterative
solvers; object arrays of :class:`fractions.Fraction` are used wherever a
result must be exact.
"""

from fractions import Fraction

import numpy as np

ROW_SUM_TOL = 1e-12
BRUTEFORCE_MAX_N = 20


def top(v):
    """Largest entry of `v`."""
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("empty valuation")
    return v.max()


def bottom(v):
    """Smallest entry of `v`."""
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("empty valuation")
    return v.min()


def hilbert_seminorm(v):
    """Hilbert's seminorm ``top(v) - bottom(v)``.

    It vanishes exactly on constant vectors, so it is a norm on the quotient
    of R^n by the line of constants.
    """
    return top(v) - bottom(v)


def sup_norm(v):
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("empty valuation")
    return abs(v).max()


def is_exact(a):
    return np.asarray(a).dtype == object


def to_fraction_array(a):
    """Convert an array-like of numbers or ``"p/q"`` strings to Fractions."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = x if isinstance(x, Fraction) else Fraction(str(x))
    return out


def to_float_array(a):
    return np.asarray(np.asarray(a, dtype=object).astype(float), dtype=float)


def check_stochastic(M, exact=False, where="matrix"):
    """Validate a stochastic matrix and return it as an ndarray.

    Rows must be nonnegative and sum to one: exactly when `exact`, within
    ``ROW_SUM_TOL`` otherwise.
    """
    M = to_fraction_array(M) if exact else np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"{where}: expected a nonempty square matrix, got shape {M.shape}")
    for i, row in enumerate(M):
        if any(x < 0 for x in row):
            raise ValueError(f"{where}: negative entry in row {i}")
        s = sum(row)
        if (s != 1) if exact else (not np.isfinite(s) or abs(s - 1.0) > ROW_SUM_TOL):
            raise ValueError(f"{where}: row sum of row {i} is {s}, expected 1")
    return M


def dobrushin_delta(M):
    r"""Dobrushin's ergodicity coefficient.

    .. math:: \delta(M) = 1 - \min_{i<j} \sum_k \min(M_{ik}, M_{jk})

    For a stochastic matrix this is the operator norm of ``M`` for Hilbert's
    seminorm. Exact (Fraction) input gives an exact result.

    Parameters
    ----------
    M : (n, n) array_like
        Stochastic matrix, n >= 2.

    Returns
    -------
    float or Fraction
    """
    M = np.asarray(M)
    n = M.shape[0]
    if n < 2:
        raise ValueError("dobrushin_delta needs n >= 2 (no pair i < j)")
    overlap = np.minimum(M[:, None, :], M[None, :, :]).sum(axis=-1)
    iu = np.triu_indices(n, k=1)
    return 1 - overlap[iu].min()


def dobrushin_bruteforce(M):
    """Operator seminorm of `M` by enumeration of the 0/1 vectors.

    The map ``u -> ||M u||_H`` is convex and the unit ball of Hilbert's
    seminorm (modulo constants) is the cube ``[0, 1]^n``, so the maximum is
    attained at a vertex. Independent of :func:`dobrushin_delta`.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"oracle size limit: n={n} > {BRUTEFORCE_MAX_N}")
    best = 0.0
    chunk = 1 << min(n, 16)
    codes = np.arange(1 << n, dtype=np.int64)
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, codes.size, chunk):
        U = ((codes[start:start + chunk, None] >> bits) & 1).astype(float)
        MU = U @ M.T
        best = max(best, float((MU.max(axis=1) - MU.min(axis=1)).max()))
    return best


def _solve_exact(A, b):
    """Gaussian elimination over the rationals; raises on a singular system."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        row = [x / p for x in aug[col]]
        aug[col] = row
        for r in range(n):
            f = aug[r][col]
            if r != col and f != 0:
                aug[r] = [x - f * y for x, y in zip(aug[r], row)]
    return [aug[i][n] for i in range(n)]


def stationary_distribution(P, exact=None):
    r"""Invariant probability vector of a unichain stochastic matrix.

    Solves :math:`(P^T - I)\pi = 0` with the last equation replaced by
    :math:`\sum_i \pi_i = 1`. The replaced system is nonsingular exactly
    when `P` has a single final class.

    Parameters
    ----------
    P : (n, n) array_like
    exact : bool, optional
        Rational arithmetic. Defaults to True for object (Fraction) input.

    Returns
    -------
    pi : (n,) ndarray
        Object array of Fractions in exact mode, float array otherwise.
    """
    if exact is None:
        exact = is_exact(P)
    P = to_fraction_array(P) if exact else np.asarray(P, dtype=float)
    n = P.shape[0]
    A = P.T.copy()
    for i in range(n):
        A[i, i] -= 1
    A[n - 1, :] = 1
    b = [0] * (n - 1) + [1]
    if exact:
        try:
            pi = _solve_exact(A.tolist(), [Fraction(x) for x in b])
        except np.linalg.LinAlgError:
            raise ValueError("multiple invariant measures") from None
        return np.array(pi, dtype=object)
    if np.linalg.cond(A) > 1e12:
        raise ValueError("multiple invariant measures")
    pi = np.linalg.solve(A, np.asarray(b, dtype=float))
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def strongly_connected_components(succ):
    """Tarjan's algorithm on an adjacency list ``succ[i] -> iterable of j``.

    Returns the components as lists, in reverse topological order (a
    component is emitted after every component it can reach).
    """
    n = len(succ)
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack, comps = [], []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        # iterative DFS: frames of (node, iterator over successors)
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        frames = [(root, iter(succ[root]))]
        while frames:
            v, it = frames[-1]
            advanced = False
            for w in it:
                if index[w] is None:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    frames.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            frames.pop()
            if frames:
                u = frames[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def support_graph(M):
    M = np.asarray(M)
    return [[j for j in range(M.shape[1]) if M[i, j] != 0] for i in range(M.shape[0])]


def final_classes(succ):
    """Strongly connected components with no edge leaving them."""
    comps = strongly_connected_components(succ)
    comp_of = {}
    for c, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = c
    finals = []
    for c, comp in enumerate(comps):
        if all(comp_of[w] == c for v in comp for w in succ[v]):
            finals.append(comp)
    return finals


def is_unichain_matrix(M):
    return len(final_classes(support_graph(M))) == 1


def is_irreducible_matrix(M):
    return len(strongly_connected_components(support_graph(M))) == 1
