import math
from fractions import Fraction

import numpy as np
import pytest

from ergodic_games.model import ConcurrentGame, EntropyGame, PolicyCapExceeded, PurePolicyPair
from ergodic_games.oracle import (entropy_saddle, growth_rates, mean_payoff_of_pair, spectral_radius,
                                  turnbased_saddle)

from helpers import fixture, random_entropy, random_turnbased


def test_mean_payoff_examples():
    g = fixture("three_state")
    assert mean_payoff_of_pair(g, PurePolicyPair((0, 1, 0), (0, 0, 0))) == Fraction(15, 4)
    assert mean_payoff_of_pair(fixture("single_state"), PurePolicyPair((0,), (0,))) == 5
    cyc = ConcurrentGame.from_arrays([[[3]], [[8]]], [[[["0", "1"]]], [[["1", "0"]]]])
    assert mean_payoff_of_pair(cyc, PurePolicyPair((0, 0), (0, 0))) == Fraction(11, 2)


def test_mean_payoff_multichain_lists_classes():
    with pytest.raises(ValueError, match=r"final classes \[\[0\], \[1\]\]"):
        mean_payoff_of_pair(fixture("multichain"), PurePolicyPair((0, 0), (0, 0)))


def test_turnbased_saddle_three_state():
    res = turnbased_saddle(fixture("three_state"))
    assert res.value == Fraction(15, 4)
    assert res.is_saddle((0, 1, 0), (0, 0, 0))
    assert len(res.table) == 16
    # the saddle inequalities hold against every pair
    for s, t in res.saddles:
        for (s2, t2), v in res.table.items():
            if s2 == s:
                assert v <= res.value
            if t2 == t:
                assert v >= res.value


def test_turnbased_saddle_single_action_and_cap():
    res = turnbased_saddle(fixture("single_state"))
    assert res.saddles == [((0,), (0,))] and res.value == 5
    with pytest.raises(PolicyCapExceeded):
        turnbased_saddle(fixture("three_state"), cap=4)


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1, abs=1e-10)
    assert spectral_radius([[2]]) == pytest.approx(2, abs=1e-10)
    assert spectral_radius([[1, 2], [3, 1]]) == pytest.approx(1 + math.sqrt(6), abs=1e-10)
    assert spectral_radius([[0, 0], [0, 0]]) == 0
    assert spectral_radius([[0, 1], [1, 0]]) == pytest.approx(1, abs=1e-10)


def test_spectral_radius_matches_eigvals():
    rng = np.random.default_rng(20)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        M = rng.integers(0, 4, size=(n, n)) * (rng.random((n, n)) < 0.5)
        expected = max(abs(np.linalg.eigvals(M.astype(float))))
        assert spectral_radius(M) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_shift_invariance_on_permutations(n):
    P = np.roll(np.eye(n), 1, axis=1)
    for vt in (0.5, 1.0, 3.0):
        assert spectral_radius(vt * np.eye(n) + P) - vt == pytest.approx(spectral_radius(P), abs=1e-10)
        assert spectral_radius(P) == pytest.approx(1.0, abs=1e-10)


def test_growth_rates_of_reducible_matrix():
    # state 0 feeds into a block of radius 3, state 2 is on its own with radius 1
    M = [[1, 1, 0], [0, 3, 0], [0, 0, 1]]
    assert growth_rates(M) == pytest.approx([3, 3, 1])


def test_entropy_saddle_examples():
    assert entropy_saddle(fixture("entropy_one_cycle")).value == pytest.approx(2)
    assert entropy_saddle(fixture("entropy_two_cycle")).value == pytest.approx(1)
    g = EntropyGame.from_edges(["d1", "d2"], ["t1", "t2"], ["p1", "p2"], [
        ("d1", "t1"), ("d2", "t2"), ("t1", "p1"), ("t2", "p2"),
        ("p1", "d1", 1), ("p1", "d2", 2), ("p2", "d1", 3), ("p2", "d2", 1)])
    assert entropy_saddle(g).value == pytest.approx(1 + math.sqrt(6), abs=1e-10)


def test_entropy_saddle_inequalities():
    rng = np.random.default_rng(21)
    for _ in range(20):
        g = random_entropy(rng)
        res = entropy_saddle(g)
        for s, t in res.saddles:
            v = res.table[(s, t)]
            for (s2, t2), w in res.table.items():
                if s2 == s:
                    assert all(a <= b + 1e-9 for a, b in zip(w, v))
                if t2 == t:
                    assert all(a >= b - 1e-9 for a, b in zip(w, v))


def test_turnbased_saddle_random_exists():
    rng = np.random.default_rng(22)
    for _ in range(30):
        res = turnbased_saddle(random_turnbased(rng))
        assert res.saddles
