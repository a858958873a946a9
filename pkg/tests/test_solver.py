import io
import math
from fractions import Fraction

import numpy as np
import pytest

from ergodic_games.model import ConcurrentGame, TurnBasedGame
from ergodic_games.numeric import hilbert_seminorm, sup_norm
from ergodic_games.operators import EntropyKMOperator, EntropyOperator, KMOperator, ShapleyOperator
from ergodic_games.oracle import turnbased_saddle
from ergodic_games.solver import (Certificate, compliant_eta, game_data_iteration_bound, extract_policies,
                                  predict_iteration_bound, rvi, solve, solve_entropy, solve_turnbased_exact,
                                  write_trace_csv)
from ergodic_games.structure import analyze

from helpers import fixture, random_concurrent, random_turnbased


def test_single_state_one_iteration():
    T = ShapleyOperator(fixture("single_state"))
    cert = rvi(T, 1e-6, 1e-12)
    assert cert.terminated and cert.iterations == 1
    assert cert.alpha == cert.beta == 5


def test_rvi_parameter_checks():
    T = ShapleyOperator(fixture("single_state"))
    with pytest.raises(ValueError, match="eta"):
        rvi(T, 1e-6, 1e-6)
    with pytest.raises(ValueError, match="epsilon"):
        rvi(T, 0.0, 1e-12)


def test_three_state_solve():
    g = fixture("three_state")
    cert, pol, rep = solve(g, 1e-6)
    lo, hi = cert.rescaled_value_interval
    assert lo <= 3.75 <= hi and hi - lo <= 1e-6
    assert cert.beta - cert.alpha <= cert.epsilon / 3
    assert hilbert_seminorm(cert.x - np.array([-1, -0.5, 0])) <= 1e-6
    assert abs(max(cert.x)) <= 1e-12
    assert (pol.sigma_star, pol.tau_star) == ((0, 1, 0), (0, 0, 0))


def test_three_state_exact():
    cert, pol = solve_turnbased_exact(fixture("three_state"))
    assert pol.claimed_value == Fraction(15, 4)
    assert pol.method == "exact_turnbased"
    assert cert.epsilon == pytest.approx(1 / 15552)


def test_single_state_exact():
    _, pol = solve_turnbased_exact(fixture("single_state"))
    assert pol.claimed_value == 5


def test_exact_matches_oracle_on_random_games():
    rng = np.random.default_rng(17)
    for _ in range(25):
        g = random_turnbased(rng, n_max=2, a_max=2)
        _, pol = solve_turnbased_exact(g)
        res = turnbased_saddle(g)
        assert pol.claimed_value == res.value
        assert res.is_saddle(pol.sigma_star, pol.tau_star)


def test_exact_rejects_multichain():
    with pytest.raises(ValueError, match="not unichain"):
        solve_turnbased_exact(fixture("multichain"))


def test_multichain_reports_non_termination():
    cert, pol, _ = solve(fixture("multichain"), 1e-6, max_iters=300)
    assert not cert.terminated and pol is None
    assert min(r for _, r, _, _ in cert.residual_trace) > 0.1


def test_residual_envelope():
    rng = np.random.default_rng(18)
    for _ in range(10):
        g = random_concurrent(rng, n_max=4)
        rep = analyze(g)
        th = float(rep.theta)
        K = KMOperator(ShapleyOperator(g, 1e-12), th)
        gamma = float(rep.gamma)
        xs = [np.zeros(g.n)]
        for _ in range(60):
            y = K(xs[-1])
            xs.append(y - y.max())
        first = hilbert_seminorm(K(xs[0]) - xs[0])
        for k in range(60):
            step = hilbert_seminorm(xs[k + 1] - xs[k])
            assert step <= gamma ** (k // rep.q) * first + 4 * k * K.eta + 1e-12


def test_km_eigen_equivalence():
    rng = np.random.default_rng(19)
    for _ in range(10):
        g = random_concurrent(rng, n_max=4)
        cert, _, _ = solve(g, 1e-10)
        u = cert.x
        T = ShapleyOperator(g, 1e-12)
        d = T(u) - u
        assert hilbert_seminorm(d) < 1e-9
        lam = d.mean()
        th = float(cert.theta)
        assert sup_norm(KMOperator(T, th)(u) - u - (1 - th) * lam) <= 1e-8


def test_predict_iteration_bound():
    expected = math.ceil((math.log(2) + math.log(6) + 6 * math.log(10)) / math.log(4 / 3))
    assert predict_iteration_bound(1, 0.75, 2.0, 1e-6) == expected
    assert predict_iteration_bound(1, 0.75, 1.0, 6.0) == 0
    assert predict_iteration_bound(1, 0.75, 0.0, 1e-6) == 0
    with pytest.raises(ValueError):
        predict_iteration_bound(0, 0.75, 1.0, 1e-6)
    with pytest.raises(ValueError):
        predict_iteration_bound(1, 1.0, 1.0, 1e-6)


def test_game_data_bound():
    eps, th, k, r = 1e-6, 0.25, 1, 7
    expected = (6 * math.log(10) + math.log(0.75) + math.log(12) + math.log(7)) * 4
    assert game_data_iteration_bound(eps, th, k, r) == pytest.approx(expected)


def test_compliant_eta():
    eta = compliant_eta(1e-6, 1, 0.75)
    assert eta * (12 + 24 / 0.25) == pytest.approx(1e-6)


def test_extract_policies_ties_and_single_action():
    g = TurnBasedGame.from_concurrent(ConcurrentGame.from_arrays(
        [[[1], [1]], [[0]]], [[[["0", "1"]], [["0", "1"]]], [[["1", "0"]]]]))
    pol = extract_policies(g, np.zeros(2))
    assert pol.sigma_star == (0, 0) and pol.tau_star == (0, 0)
    pol = extract_policies(fixture("single_state"), np.zeros(1))
    assert (pol.sigma_star, pol.tau_star) == ((0,), (0,))


def test_entropy_examples():
    cert, pol, _ = solve_entropy(fixture("entropy_one_cycle"))
    lo, hi = cert.rescaled_value_interval
    assert lo <= 2 <= hi and cert.iterations <= 2
    assert pol.claimed_value == pytest.approx(2)
    cert, pol, _ = solve_entropy(fixture("entropy_two_cycle"))
    lo, hi = cert.rescaled_value_interval
    assert lo <= 1 <= hi


def test_entropy_exact_policies_mode():
    cert, pol, rep = solve_entropy(fixture("entropy_two_cycle"), "exact_policies")
    assert pol.method == "exact_entropy"
    assert pol.claimed_value == pytest.approx(1)
    with pytest.raises(ValueError, match="predicted iteration count"):
        solve_entropy(fixture("entropy_two_cycle"), "exact_policies", max_iters=3)


def test_entropy_eigen_equivalence():
    g = fixture("entropy_two_cycle")
    cert, _, _ = solve_entropy(g, epsilon=1e-12)
    u = np.asarray(cert.x, dtype=float)
    d = EntropyOperator(g)(u) - u
    lam = d.mean()
    mu = math.log(1 + math.exp(lam))
    assert EntropyKMOperator(g, 1.0)(u) - u == pytest.approx([mu, mu], abs=1e-9)


def test_trace_csv():
    cert, _, _ = solve(fixture("three_state"), 1e-6)
    buf = io.StringIO()
    write_trace_csv(cert, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "iteration,residual_H,alpha,beta"
    assert len(lines) == cert.iterations + 1
    k, res, a, b = lines[1].split(",")
    assert int(k) == 1 and float(res) == cert.residual_trace[0][1]


def test_certificate_interval_width():
    cert = Certificate(np.zeros(2), 1.0, 1.0 + 1e-7, 3e-7, 1e-8, 4, True, theta=0.5)
    lo, hi = cert.value_interval
    assert hi - lo <= cert.epsilon + 1e-15
    assert cert.rescaled_value_interval == pytest.approx((lo / 0.5, hi / 0.5))
