import math

import numpy as np
import pytest

from seaqt.equilibrium import SpectrumSpec, is_nondissipative, solve_canonical
from seaqt.errors import ArgumentError, NoSolutionError
from seaqt.hilbert import DensityOperator

LEVELS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)


def _gibbs_by_bisection(levels, mean):
    """Independent oracle: bisection on beta for sum p e = mean."""
    e = np.asarray(levels)

    def avg(b):
        w = np.exp(-b * (e - e.min()))
        return (w @ e) / w.sum()

    lo, hi = -200.0, 200.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if avg(mid) > mean:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    w = np.exp(-b * (e - e.min()))
    return w / w.sum(), b


def test_four_level_gibbs_matches_bisection():
    sol = solve_canonical(SpectrumSpec(LEVELS), 0.4)
    p, b = _gibbs_by_bisection(LEVELS, 0.4)
    np.testing.assert_allclose(sol.probabilities, p, atol=1e-12)
    assert sol.beta == pytest.approx(b, rel=1e-10)
    assert sol.temperature == pytest.approx(1.0 / b, rel=1e-10)
    assert sol.theta == pytest.approx(sol.temperature)


def test_four_level_gibbs_reference_values():
    sol = solve_canonical(SpectrumSpec(LEVELS), 0.4)
    np.testing.assert_allclose(sol.probabilities, [0.3474, 0.2722, 0.2133, 0.1671], atol=5e-4)
    assert sol.temperature == pytest.approx(1.366, abs=1e-3)


def test_partial_support_leaves_excluded_level_empty():
    sol = solve_canonical(SpectrumSpec(LEVELS, (0, 1, 3)), 0.4)
    assert sol.probabilities[2] == 0.0
    p, _ = _gibbs_by_bisection([LEVELS[i] for i in (0, 1, 3)], 0.4)
    np.testing.assert_allclose(sol.probabilities[[0, 1, 3]], p, atol=1e-12)


def test_two_level_solution_closed_form():
    sol = solve_canonical(SpectrumSpec(LEVELS, (0, 3)), 0.4)
    np.testing.assert_allclose(sol.probabilities[[0, 3]], [0.6, 0.4], atol=1e-14)
    assert sol.temperature == pytest.approx(1.0 / math.log(1.5), rel=1e-12)


def test_mean_at_spectrum_midpoint_gives_infinite_temperature():
    sol = solve_canonical(SpectrumSpec((0.0, 1.0)), 0.5)
    np.testing.assert_allclose(sol.probabilities, [0.5, 0.5], atol=1e-14)
    assert abs(sol.beta) < 1e-12


def test_inverted_population_has_negative_temperature():
    sol = solve_canonical(SpectrumSpec((0.0, 1.0)), 0.7)
    assert sol.temperature < 0
    np.testing.assert_allclose(sol.probabilities, [0.3, 0.7], atol=1e-12)


@pytest.mark.parametrize("mean", [-0.1, 1.1, 0.0, 1.0])
def test_mean_outside_open_range_has_no_solution(mean):
    with pytest.raises(NoSolutionError):
        solve_canonical(SpectrumSpec(LEVELS), mean)


def test_support_validation():
    with pytest.raises(ArgumentError):
        SpectrumSpec(LEVELS, (0,))
    with pytest.raises(ArgumentError):
        SpectrumSpec(LEVELS, (0, 7))


def test_kelvin_scaling():
    sol = solve_canonical(SpectrumSpec(LEVELS), 0.4, kB=2.0)
    ref = solve_canonical(SpectrumSpec(LEVELS), 0.4)
    np.testing.assert_allclose(sol.probabilities, ref.probabilities, atol=1e-14)
    assert sol.temperature == pytest.approx(ref.temperature / 2.0)


def test_gibbs_states_are_nondissipative():
    H = np.diag(LEVELS)
    for support in (None, (0, 1, 3), (0, 3)):
        p = solve_canonical(SpectrumSpec(LEVELS, support), 0.4).probabilities
        assert is_nondissipative(DensityOperator.from_probabilities(p), H)
    assert not is_nondissipative(DensityOperator.from_probabilities([0.4, 0.3, 0.1, 0.2]), H)
