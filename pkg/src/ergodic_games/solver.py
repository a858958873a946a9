"""Relative value iteration with certified value intervals.

:func:`rvi` works on any operator handle (a callable with ``n`` and ``eta``
attributes). :func:`solve`, :func:`solve_turnbased_exact` and
:func:`solve_entropy` wrap it with the damping, precision and policy
extraction appropriate to each kind of game.
"""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import EntropyGame, PurePolicyPair, TurnBasedGame, induced_matrix_and_payoff
from .numeric import bottom, stationary_distribution, top
from .operators import EntropyKMOperator, EntropyOperator, KMOperator, ShapleyOperator
from . import structure

DEFAULT_EPSILON = 1e-6
FALLBACK_MAX_ITERS = 10**6
FLOAT_EPSILON_FLOOR = 1e-10


@dataclass
class Certificate:
    """Outcome of relative value iteration.

    ``alpha`` and ``beta`` bound ``T(x) - x`` from below and above, so the
    escape rates of the solved operator lie in ``value_interval``. When the
    solved operator is a damped version of the game operator, ``theta`` or
    ``vartheta`` is set and ``rescaled_value_interval`` is the interval for
    the game itself.
    """

    x: np.ndarray
    alpha: float
    beta: float
    epsilon: float
    eta: float
    iterations: int
    terminated: bool
    residual_trace: list = field(default_factory=list)
    theta: float = None
    vartheta: float = None

    @property
    def value_interval(self):
        return (self.alpha - self.epsilon / 3, self.beta + self.epsilon / 3)

    @property
    def rescaled_value_interval(self):
        lo, hi = self.value_interval
        if self.theta is not None:
            s = 1 - float(self.theta)
            return (float(lo) / s, float(hi) / s)
        if self.vartheta is not None:
            # log-space eigenvalue mu = log(vartheta + value)
            vt = float(self.vartheta)
            return (max(math.exp(float(lo)) - vt, 0.0), math.exp(float(hi)) - vt)
        return (float(lo), float(hi))


@dataclass
class PolicyCertificate:
    sigma_star: tuple
    tau_star: tuple
    claimed_value: object
    method: str

    @property
    def pair(self):
        return PurePolicyPair(self.sigma_star, self.tau_star)


def _check_params(epsilon, eta, max_iters):
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0 < eta <= epsilon / 3:
        raise ValueError(f"eta must satisfy 0 < eta <= epsilon/3, got eta={eta}, epsilon={epsilon}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")


def rvi(T, epsilon, eta=None, max_iters=FALLBACK_MAX_ITERS):
    """Relative value iteration from ``x = 0``.

    Repeats ``x := T(x) - top(T(x))`` until ``||x - T(x)||_H <= epsilon/3``,
    then returns ``alpha = bottom(T(x) - x)`` and ``beta = top(T(x) - x)``.
    The escape rates of ``T`` lie in ``[alpha - epsilon/3, beta + epsilon/3]``.

    Parameters
    ----------
    T : operator handle
        Callable on valuations with attributes ``n`` and ``eta``.
    epsilon : float
        Requested width of the value interval.
    eta : float, optional
        Evaluation error of `T`; defaults to ``T.eta``. Must satisfy
        ``0 < eta <= epsilon / 3``.
    max_iters : int

    Returns
    -------
    Certificate
        ``terminated`` is False when `max_iters` ran out; the interval is
        then not certified.
    """
    eta = T.eta if eta is None else eta
    _check_params(epsilon, eta, max_iters)
    x = np.zeros(T.n)
    y = T(x)
    trace = []
    for k in range(1, max_iters + 1):
        x = y - top(y)
        y = T(x)
        d = y - x
        alpha, beta = bottom(d), top(d)
        trace.append((k, beta - alpha, alpha, beta))
        if beta - alpha <= epsilon / 3:
            return Certificate(x, alpha, beta, epsilon, eta, k, True, trace)
    return Certificate(x, alpha, beta, epsilon, eta, max_iters, False, trace)


def rvi_multiplicative(F, y0, epsilon, eta=1e-12, max_iters=FALLBACK_MAX_ITERS, log=math.log):
    """Relative value iteration carried out on ``y = exp(x)``.

    Iterates ``y := F(y) / top(F(y))`` from the all-ones vector `y0` and
    stops once ``||log F(y) - log y||_H <= epsilon / 3``. The certificate is
    expressed in log space, identical to running :func:`rvi` on
    ``log o F o exp``. For multiprecision runs pass an object array of mpmath
    numbers as `y0` and ``log=mpmath.log``.
    """
    _check_params(epsilon, eta, max_iters)
    y = y0
    z = F(y)
    trace = []
    for k in range(1, max_iters + 1):
        y = z / top(z)
        z = F(y)
        ratio = z / y
        alpha, beta = log(bottom(ratio)), log(top(ratio))
        trace.append((k, beta - alpha, alpha, beta))
        if beta - alpha <= epsilon / 3:
            break
    else:
        k = max_iters
    x = np.array([log(v) for v in y], dtype=y.dtype)
    return Certificate(x, alpha, beta, epsilon, eta, k, beta - alpha <= epsilon / 3, trace)


def predict_iteration_bound(q, gamma, T0_norm, epsilon):
    """Iterations sufficient for :func:`rvi` when ``T^q`` is a gamma-contraction.

    ``ceil(q (log ||T(0)||_H + log 6 + |log epsilon|) / |log gamma|)``,
    clamped at 0; 0 when ``||T(0)||_H = 0``.
    """
    if q < 1 or not 0 < gamma < 1 or not epsilon > 0 or T0_norm < 0:
        raise ValueError("need q >= 1, 0 < gamma < 1, epsilon > 0, T0_norm >= 0")
    if T0_norm == 0:
        return 0
    num = math.log(T0_norm) + math.log(6) - math.log(epsilon)
    return max(0, math.ceil(q * num / -math.log(float(gamma))))


def compliant_eta(epsilon, q, gamma):
    """Largest eta with ``eta (12 + 24 q / (1 - gamma)) <= epsilon``."""
    return epsilon / (12 + 24 * q / (1 - float(gamma)))


def game_data_iteration_bound(epsilon, theta, k_uni, payoff_sup):
    """Iteration bound of the damped iteration on a unichain game, from the
    game data alone: ``(|log eps| + log(1-theta) + log 12 + log ||r||)
    k_uni theta^-k_uni``, clamped at 0.
    """
    theta = float(theta)
    terms = (abs(math.log(epsilon)) + math.log(1 - theta) + math.log(12)
             + math.log(max(float(payoff_sup), 1e-300)))
    return max(0.0, terms) * k_uni * theta ** (-k_uni)


def extract_policies(g, x_star, method="heuristic"):
    """Pure policies attaining the min and max in ``T(x_star)``.

    Lowest index on ties. `method` records why the policies are claimed
    optimal: ``exact_turnbased`` / ``exact_entropy`` when `x_star` came from a run at the
    separating precision, ``heuristic`` otherwise. For concurrent games the
    pure choices are always heuristic since optimal strategies may mix.
    """
    if isinstance(g, EntropyGame):
        op = EntropyOperator(g)
        y = np.exp(np.asarray(x_star, dtype=float) - top(np.asarray(x_star, dtype=float)))
        if np.asarray(x_star).dtype == object:
            import mpmath
            s = top(x_star)
            y = np.array([mpmath.exp(v - s) for v in x_star], dtype=object)
        sigma, tau = op.optimal_actions(y)
        return PolicyCertificate(sigma, tau, None, method)
    sigma, tau = ShapleyOperator(g).optimal_actions(np.asarray(x_star, dtype=float))
    if not isinstance(g, TurnBasedGame):
        method = "heuristic"
    return PolicyCertificate(sigma, tau, None, method)


def _default_theta(g, rep):
    if rep.theta is not None:
        return rep.theta
    # no off-diagonal transition: any damping factor works
    return Fraction(1, 2) if g.exact else 0.5


def solve(g, epsilon=DEFAULT_EPSILON, eta=None, theta=None, max_iters=None, report=None):
    """Approximate value of a stochastic game by damped relative value iteration.

    Runs :func:`rvi` on ``T_theta`` with precision ``(1 - theta) epsilon`` so
    that the rescaled interval has width at most `epsilon`.

    Returns
    -------
    cert : Certificate
    policies : PolicyCertificate or None
        None when the run did not terminate.
    report : StructureReport
    """
    if isinstance(g, EntropyGame):
        raise TypeError("use solve_entropy for entropy games")
    rep = report if report is not None else structure.analyze(g, theta=theta)
    th = _default_theta(g, rep) if theta is None else theta
    s = 1 - float(th)
    if eta is None:
        eta = compliant_eta(epsilon, rep.q, rep.gamma) if rep.gamma is not None else epsilon / 12
    elif not 0 < eta <= epsilon / 3:
        raise ValueError(f"eta must satisfy 0 < eta <= epsilon/3, got eta={eta}, epsilon={epsilon}")
    op = KMOperator(ShapleyOperator(g, eta), th)
    if max_iters is None:
        max_iters = FALLBACK_MAX_ITERS
        if rep.gamma is not None:
            t0 = op(np.zeros(g.n))
            bound = predict_iteration_bound(rep.q, float(rep.gamma), float(top(t0) - bottom(t0)), s * epsilon)
            max_iters = max(10 * bound, 10)
    cert = rvi(op, s * epsilon, s * eta, max_iters)
    cert.theta = th
    if not cert.terminated:
        return cert, None, rep
    pol = extract_policies(g, cert.x)
    lo, hi = cert.rescaled_value_interval
    pol.claimed_value = 0.5 * (lo + hi)
    return cert, pol, rep


def mean_payoff(g, pp):
    """Exact ``pi r`` for a pure policy pair with a unichain transition matrix."""
    P, r = induced_matrix_and_payoff(g, pp, exact=True)
    pi = stationary_distribution(P, exact=True)
    return sum((a * b for a, b in zip(pi, r)), Fraction(0))


def solve_turnbased_exact(g, max_iters=None):
    """Exact value and optimal pure policies of a unichain turn-based game.

    Runs the damped iteration at the precision that separates distinct
    pure-policy values, reads off the policies attaining the min and max at
    the final iterate and evaluates them exactly.

    Returns
    -------
    cert : Certificate
    policies : PolicyCertificate
        ``claimed_value`` is a Fraction.
    """
    if not isinstance(g, TurnBasedGame):
        raise TypeError("exact solving needs a turn-based game")
    if not structure.check_unichain(g):
        raise ValueError("game is not unichain: exact solving needs every policy pair unichain")
    if g.n == 1:
        theta = Fraction(1, 2)
    else:
        theta = structure.compute_pmin_theta(g)[1]
    eps = structure.turnbased_epsilon(g, theta)
    if eps < FLOAT_EPSILON_FLOOR:
        raise ValueError(f"required precision {float(eps):.3g} is below double-precision resolution")
    epsilon = float(eps)
    k_uni = structure.unichain_index(g)
    q, gamma = structure.contraction_certificate(theta, structure.compute_pmin_theta(g)[0]
                                                 if g.n > 1 else Fraction(1), g.n, k_uni)
    op = KMOperator(ShapleyOperator(g, min(compliant_eta(epsilon, q, gamma), 1e-12)), theta)
    if max_iters is None:
        t0 = op(np.zeros(g.n))
        max_iters = max(10 * predict_iteration_bound(q, float(gamma), float(top(t0) - bottom(t0)), epsilon), 10)
    cert = rvi(op, epsilon, op.eta, max_iters)
    cert.theta = theta
    if not cert.terminated:
        raise RuntimeError(f"no convergence within {max_iters} iterations")
    pol = extract_policies(g, cert.x, "exact_turnbased")
    pol.claimed_value = mean_payoff(g, pol.pair)
    lo, hi = cert.rescaled_value_interval
    if not lo - 1e-9 <= float(pol.claimed_value) <= hi + 1e-9:
        raise RuntimeError(f"exact value {pol.claimed_value} outside certified interval [{lo}, {hi}]")
    return cert, pol


def solve_entropy(g, mode="approx", epsilon=1e-8, max_iters=None, report=None):
    """Value of an entropy game through the multiplicatively damped operator.

    Parameters
    ----------
    g : EntropyGame
    mode : {"approx", "exact_policies"}
        ``approx`` uses `epsilon` on the log-eigenvalue. ``exact_policies``
        uses the precision that separates distinct policy values, in
        multiprecision arithmetic, and refuses when the predicted iteration
        count exceeds `max_iters`.

    Returns
    -------
    cert : Certificate
        ``vartheta`` is set; ``rescaled_value_interval`` bounds the value.
    policies : PolicyCertificate or None
    report : EntropyReport
    """
    if mode not in ("approx", "exact_policies"):
        raise ValueError(f"unknown mode {mode!r}")
    rep = report if report is not None else structure.entropy_structure(g)
    if not rep.is_irreducible:
        raise ValueError("entropy game is not irreducible")
    vt = rep.vartheta
    if mode == "approx":
        op = EntropyKMOperator(g, float(vt))
        if max_iters is None:
            t0 = op(np.zeros(g.n))
            bound = predict_iteration_bound(rep.k_irr, rep.gamma, float(top(t0) - bottom(t0)), epsilon)
            max_iters = max(10 * bound, 10)
        eta = min(1e-13, epsilon / 3)
        cert = rvi_multiplicative(op.multiplicative, np.ones(g.n), epsilon, eta, max_iters)
    else:
        import mpmath
        predicted = math.ceil(rep.predicted_iterations)
        budget = 10 * predicted if max_iters is None else max_iters
        if predicted > budget:
            raise ValueError(f"predicted iteration count {predicted} exceeds max_iters={budget}")
        dps = int(-rep.epsilon_log / math.log(10)) + 20
        with mpmath.workdps(dps):
            op = EntropyKMOperator(g, mpmath.mpf(vt))
            epsilon = mpmath.exp(mpmath.mpf(rep.epsilon_log))
            ones = np.array([mpmath.mpf(1)] * g.n, dtype=object)
            cert = rvi_multiplicative(op.multiplicative, ones, epsilon, epsilon / 10, budget, log=mpmath.log)
            pol = extract_policies(g, cert.x, "exact_entropy") if cert.terminated else None
        cert.alpha, cert.beta = float(cert.alpha), float(cert.beta)
        cert.epsilon, cert.eta = float(cert.epsilon), float(cert.eta)
        cert.x = np.array([float(v) for v in cert.x])
        cert.vartheta = vt
        if pol is not None:
            lo, hi = cert.rescaled_value_interval
            pol.claimed_value = 0.5 * (lo + hi)
        return cert, pol, rep
    cert.vartheta = vt
    if not cert.terminated:
        return cert, None, rep
    pol = extract_policies(g, cert.x)
    lo, hi = cert.rescaled_value_interval
    pol.claimed_value = 0.5 * (lo + hi)
    return cert, pol, rep


def write_trace_csv(cert, out):
    """Residual trace as CSV (``iteration,residual_H,alpha,beta``), 17 significant digits."""
    def rows(w):
        w.writerow(["iteration", "residual_H", "alpha", "beta"])
        for k, res, a, b in cert.residual_trace:
            w.writerow([k, f"{float(res):.17g}", f"{float(a):.17g}", f"{float(b):.17g}"])

    if hasattr(out, "write"):
        rows(csv.writer(out, lineterminator="\n"))
    else:
        with open(out, "w", newline="") as fh:
            rows(csv.writer(fh, lineterminator="\n"))
