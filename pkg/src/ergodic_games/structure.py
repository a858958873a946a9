"""Structural analysis of games: unichain / irreducibility, unichain and
irreducibility indices, contraction certificates, entropy-game ambiguity and
the separation bounds used to recover exact optimal policies.

All index computations work on supports only. For stochastic games row ``i``
of ``P^{sigma,tau}`` depends on ``(sigma(i), tau(i))`` alone, so the choices
of different states are independent; for entropy games rows are coupled
through shared Tribune vertices and the enumeration respects that.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .model import EntropyGame, PolicyCapExceeded, policy_cap
from .numeric import final_classes, strongly_connected_components

MAX_INDEX_STATES = 12


@dataclass
class StructureReport:
    n: int
    is_unichain: bool = None
    is_irreducible: bool = None
    k_uni: int = None
    k_irr: int = None
    p_min: float = None
    theta: float = None
    q: int = None
    gamma: float = None
    payoff_sup: float = None
    notes: list = field(default_factory=list)


@dataclass
class EntropyReport:
    n: int
    is_irreducible: bool
    k_irr: int
    W: int
    m_lower: int
    vartheta: int
    ambiguity_l: list
    ambiguity: float
    M_bar: float
    gamma: float
    nu_n_log: float
    epsilon_log: float
    predicted_iterations: float


# -- stochastic games -------------------------------------------------------

def compute_pmin_theta(g):
    """Smallest nonzero off-diagonal transition probability and ``p/(1+p)``."""
    Ps = g.transition_exact if g.exact else g.transition
    best = None
    for i, P in enumerate(Ps):
        for x in np.delete(P, i, axis=2).flat:
            if x > 0 and (best is None or x < best):
                best = x
    if best is None:
        raise ValueError("degenerate: all mass on diagonal")
    return best, best / (1 + best)


def _support_choices(g, states):
    return product(*[g.row_supports(j) for j in states])


def _support_product_count(g):
    return math.prod(len(g.row_supports(i)) for i in range(g.n))


def _all_support_graphs(g, cap):
    count = _support_product_count(g)
    if count > policy_cap(cap):
        raise PolicyCapExceeded(count, policy_cap(cap))
    for rows in _support_choices(g, range(g.n)):
        yield [sorted(r) for r in rows]


def check_unichain(g, cap=None):
    """True iff every pure policy pair induces a matrix with one final class.

    Exhaustive over the distinct row supports of each state.
    """
    if isinstance(g, EntropyGame):
        raise TypeError("unichain analysis applies to stochastic games")
    return all(len(final_classes(succ)) == 1 for succ in _all_support_graphs(g, cap))


def check_irreducible(g, cap=None):
    """True iff every pure policy pair induces an irreducible matrix."""
    if isinstance(g, EntropyGame):
        return all(len(strongly_connected_components(succ)) == 1
                   for succ in _entropy_support_graphs(g, cap))
    return all(len(strongly_connected_components(succ)) == 1
               for succ in _all_support_graphs(g, cap))


def _stochastic_successors(g, S):
    S = tuple(sorted(S))
    out = set()
    for rows in _support_choices(g, S):
        out.add(frozenset(S).union(*rows))
    return out


def unichain_index(g, max_states=MAX_INDEX_STATES):
    """Smallest k such that any k-fold product of damped matrices
    ``theta I + (1 - theta) P^{sigma,tau}`` has pairwise intersecting row
    supports.

    Breadth-first search over pairs of support sets. Both sets of a pair
    evolve under the same policy pair, so each state of their union makes a
    single choice. Supports only grow (positive diagonal), so once a pair
    meets it stays met.
    """
    n = g.n
    if n > max_states:
        raise ValueError(f"size cap: unichain index search limited to n <= {max_states}")
    level = {(frozenset([i]), frozenset([j])) for i in range(n) for j in range(i + 1, n)}
    k = 0
    while level:
        if k >= n:
            raise ValueError("game is not unichain: disjoint supports persist")
        nxt = set()
        for S1, S2 in level:
            union = tuple(sorted(S1 | S2))
            for rows in _support_choices(g, union):
                choice = dict(zip(union, rows))
                T1 = S1.union(*(choice[j] for j in S1))
                T2 = S2.union(*(choice[j] for j in S2))
                if T1.isdisjoint(T2):
                    if (T1, T2) == (S1, S2):
                        raise ValueError("game is not unichain: a policy pair has two closed "
                                         f"disjoint classes {sorted(S1)} and {sorted(S2)}")
                    nxt.add((T1, T2))
        level = nxt
        k += 1
    return max(k, 1)


def _irreducibility_bfs(n, successors):
    full = frozenset(range(n))
    level = {frozenset([d]) for d in range(n)} - {full}
    k = 0
    while level:
        if k >= n:
            raise ValueError("game is not irreducible: supports stop growing")
        nxt = set()
        for S in level:
            for T in successors(S):
                if T == S:
                    raise ValueError(f"game is not irreducible: {sorted(S)} is closed under a policy pair")
                if T != full:
                    nxt.add(T)
        level = nxt
        k += 1
    return max(k, 1)


def irreducibility_index(g, max_states=MAX_INDEX_STATES):
    """Smallest k such that every k-fold product of damped matrices is positive.

    Damped means ``theta I + (1 - theta) P`` for stochastic games and
    ``vartheta I + M`` for entropy games; only the supports matter.
    """
    if g.n > max_states:
        raise ValueError(f"size cap: irreducibility index search limited to n <= {max_states}")
    if isinstance(g, EntropyGame):
        return _irreducibility_bfs(g.n, lambda S: _entropy_successors(g, S))
    return _irreducibility_bfs(g.n, lambda S: _stochastic_successors(g, S))


def contraction_certificate(theta, p_min, n, k_uni, k_irr=None):
    """``(q, gamma)`` such that ``T_theta^q`` is a gamma-contraction.

    Entries of a k-fold product of ``theta I + (1 - theta) P`` that are
    nonzero are at least ``c^k`` with ``c = min(theta, (1 - theta) p_min)``
    (``c = theta`` for ``theta = p_min / (1 + p_min)``). Intersecting rows give
    ``gamma = 1 - c^k_uni``; positive products give ``1 - n c^k_irr``. The
    smaller gamma is returned.
    """
    c = min(theta, (1 - theta) * p_min)
    q, gamma = k_uni, 1 - c**k_uni
    if k_irr is not None:
        g_irr = 1 - n * c**k_irr
        if 0 < g_irr < gamma:
            q, gamma = k_irr, g_irr
    return q, gamma


def analyze(g, theta=None, cap=None):
    """Full :class:`StructureReport` for a stochastic game.

    Checks that exceed the policy cap are left as ``None`` (unverified) and
    recorded in ``notes``.
    """
    rep = StructureReport(n=g.n)
    rs = g.payoff_exact if g.exact else g.payoff
    rep.payoff_sup = max(abs(x) for r in rs for x in r.flat)
    try:
        rep.is_unichain = check_unichain(g, cap)
        rep.is_irreducible = check_irreducible(g, cap)
    except PolicyCapExceeded as exc:
        rep.notes.append(f"unverified: {exc}")
    try:
        rep.p_min, default_theta = compute_pmin_theta(g)
    except ValueError as exc:
        rep.notes.append(str(exc))
        rep.theta = theta
        return rep
    rep.theta = default_theta if theta is None else theta
    if rep.is_unichain and g.n <= MAX_INDEX_STATES:
        rep.k_uni = unichain_index(g)
        if rep.is_irreducible:
            rep.k_irr = irreducibility_index(g)
        rep.q, rep.gamma = contraction_certificate(rep.theta, rep.p_min, g.n, rep.k_uni, rep.k_irr)
    return rep


def separation_turnbased(n, M):
    """``(n M^(n-1))^-2``: distinct pure-policy values differ by more than this."""
    if n < 1 or M < 1:
        raise ValueError("n and M must be positive integers")
    return Fraction(1, (n * M ** (n - 1)) ** 2)


def turnbased_epsilon(g, theta=None):
    """Precision ``(1 - theta) / (n^2 M^(2(n-1)))`` that makes the policies
    read off the final iterate of the damped iteration optimal.

    Needs exact rational transitions (common denominator ``M``) and integer
    payments.
    """
    if not g.exact:
        raise ValueError("exact turn-based solving needs rational 'p/q' transition probabilities")
    if any(x.denominator != 1 for r in g.payoff_exact for x in r.flat):
        raise ValueError("exact turn-based solving needs integer payments")
    if theta is None:
        theta = compute_pmin_theta(g)[1] if g.n > 1 else Fraction(1, 2)
    return (1 - Fraction(theta)) * separation_turnbased(g.n, g.common_denominator)


def iteration_bound_turnbased(g, theta, k_uni):
    """Iteration count guaranteed for the exact turn-based precision."""
    n, M = g.n, g.common_denominator
    rsup = max(1, max(abs(x) for r in g.payoff_exact for x in r.flat))
    terms = (math.log(1 - theta) + 2 * math.log(n) + 2 * (n - 1) * math.log(M)
             + math.log(12) + math.log(rsup))
    return max(terms, 0.0) * k_uni * float(theta) ** (-k_uni)


# -- entropy games ----------------------------------------------------------

def _entropy_successors(g, S):
    """Row supports reachable from Despot set S in one damped step.

    Tribune choices are shared by every Despot vertex that selects the same
    Tribune vertex, so the joint choices are enumerated explicitly.
    """
    S = sorted(S)
    out = set()
    for sig in product(*[g.dt[d] for d in S]):
        ts = sorted(set(sig))
        for tau in product(*[g.tp[t] for t in ts]):
            pick = dict(zip(ts, tau))
            T = set(S)
            for t in sig:
                T.update(d for d, _ in g.pd[pick[t]])
            out.add(frozenset(T))
    return out


def _entropy_support_graphs(g, cap):
    from .model import policy_pair_count, min_policies, max_policies
    count = policy_pair_count(g)
    if count > policy_cap(cap):
        raise PolicyCapExceeded(count, policy_cap(cap))
    for s in min_policies(g):
        for t in max_policies(g):
            yield [[d for d, _ in g.pd[t[s[d]]]] for d in range(g.n)]


def ambiguity_levels(g, L):
    """``[A_1, ..., A_L]``, the l-ambiguities, in exact integer arithmetic.

    ``A_l`` is the largest entry of any product ``M^{s1 t1} ... M^{sl tl}``.
    Column by column, the entrywise maximum of ``M^{s,t} x`` over policy
    pairs is attained by a single pair (pick the best People vertex at every
    Tribune vertex, then the best Tribune vertex at every Despot vertex), so
    ``A_l`` is the l-th iterate of a max-max operator.
    """
    n = g.n
    people = g.reachable_people
    cols = [[int(d == j) for d in range(n)] for j in range(n)]
    out = []
    for _ in range(L):
        new = []
        for x in cols:
            w = {p: sum(m * x[d] for d, m in g.pd[p]) for p in people}
            best_t = {t: max(w[p] for p in g.tp[t]) for t in g.reachable_tribunes}
            new.append([max(best_t[t] for t in g.dt[d]) for d in range(n)])
        cols = new
        out.append(max(max(c) for c in cols))
    return out


def off_diagonal_min(g):
    """Smallest multiplicity appearing off the diagonal of some ``M^{s,t}``.

    ``None`` when no off-diagonal entry is possible (e.g. one Despot vertex).
    """
    best = None
    for d in range(g.n):
        for t in g.dt[d]:
            for p in g.tp[t]:
                for d2, m in g.pd[p]:
                    if d2 != d and (best is None or m < best):
                        best = m
    return best


def log_nu(n, W):
    """Natural log of the entropy-game separation constant ``nu_n``."""
    return (n * math.log(2) + 8 * n * math.log(n + 1) + (2 * n * n + n + 1) * math.log(n)
            + 4 * n * n + 4 * n * n * math.log(max(1.0, W / 2)))


def entropy_structure(g, cap=None):
    """:class:`EntropyReport`: indices, ambiguity, contraction rate and the
    (log-space) separation and precision constants.
    """
    irreducible = check_irreducible(g, cap)
    k = irreducibility_index(g)
    W = g.max_multiplicity
    m_low = off_diagonal_min(g)
    vartheta = m_low if m_low is not None else 1
    levels = ambiguity_levels(g, k)
    A = max(a ** (1.0 / l) for l, a in enumerate(levels, start=1))
    M_bar = (1 + A / vartheta) ** k
    gamma = (M_bar - 1) / (M_bar + 1)
    lnu = log_nu(g.n, W)
    log_one_plus = float(np.logaddexp(0.0, math.log(vartheta + W) + lnu))
    return EntropyReport(
        n=g.n, is_irreducible=irreducible, k_irr=k, W=W, m_lower=m_low, vartheta=vartheta,
        ambiguity_l=levels, ambiguity=A, M_bar=M_bar, gamma=gamma, nu_n_log=lnu,
        epsilon_log=-log_one_plus,
        predicted_iterations=(log_one_plus + math.log(6)) * k * M_bar / 2,
    )
