import numpy as np
import pytest

from seaqt.errors import ArgumentError, DeltaTooLargeError
from seaqt.hilbert import DensityOperator
from seaqt.scenarios import (
    FOUR_LEVEL_MEAN,
    FOUR_LEVELS,
    PRIMORDIAL,
    SCENARIOS,
    ContrastConfig,
    ScenarioConfig,
    false_target,
    four_level_scenario,
    get_scenario,
    initial_state,
    near_false_target,
    random_hamiltonian,
    random_state_corpus,
)
from seaqt.sea import AdaptiveTau


def test_false_target_reference():
    p = false_target()
    assert p[2] == 0.0
    np.testing.assert_allclose(p[[0, 1, 3]], [0.3725, 0.3412, 0.2863], atol=5e-4)


@pytest.mark.parametrize("delta", [0.0, 1e-6, 1e-4, 1e-2])
def test_near_false_target_constraints(delta):
    p = near_false_target(delta)
    assert p[2] == pytest.approx(delta, abs=1e-15)
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    assert p @ np.array(FOUR_LEVELS) == pytest.approx(FOUR_LEVEL_MEAN, abs=1e-14)
    assert np.all(p >= 0)


def test_near_false_target_without_offset_is_near_target():
    np.testing.assert_allclose(near_false_target(0.0, offset=0.0), false_target(), atol=1e-15)


def test_delta_validation():
    with pytest.raises(DeltaTooLargeError):
        four_level_scenario(delta=0.05)
    with pytest.raises(ArgumentError):
        four_level_scenario(delta=-1e-4)
    with pytest.raises(DeltaTooLargeError):
        near_false_target(0.9)


def test_scenario_registry():
    assert set(SCENARIOS) == {"four-level-const-tau", "four-level-adaptive-tau", "klgs-contrast"}
    assert isinstance(get_scenario("klgs-contrast"), ContrastConfig)
    adaptive = get_scenario("four-level-adaptive-tau")
    assert isinstance(adaptive.tau_policy, AdaptiveTau) and adaptive.t_start == 0.0
    with pytest.raises(ArgumentError):
        get_scenario("nope")


def test_scenario_config_validation():
    with pytest.raises(ArgumentError):
        ScenarioConfig("x", (0.0, 1.0), 0.5, (0.7, 0.3))  # wrong mean energy
    with pytest.raises(ArgumentError):
        ScenarioConfig("x", (0.0, 1.0), 0.5, (0.5, 0.5), t_start=1.0)


def test_lead_in_keeps_constraints_and_level_three_small():
    cfg = get_scenario("four-level-const-tau")
    p = initial_state(cfg)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert p @ np.array(FOUR_LEVELS) == pytest.approx(FOUR_LEVEL_MEAN, abs=1e-12)
    assert 0.0 < p[2] < cfg.initial_distribution[2]
    # the lead-in moves the state back towards the primordial distribution
    assert np.linalg.norm(p - np.array(PRIMORDIAL)) < np.linalg.norm(np.array(cfg.initial_distribution) - PRIMORDIAL)


@pytest.mark.parametrize("kind", ["full", "diagonal", "rank-deficient"])
def test_corpus_reproducible_and_valid(kind):
    a = random_state_corpus(4, 5, 123, kind)
    b = random_state_corpus(4, 5, 123, kind)
    for x, y in zip(a, b):
        assert np.array_equal(x.matrix, y.matrix)
        assert isinstance(x, DensityOperator)
    if kind == "rank-deficient":
        assert all(s.rank < 4 for s in a)
    if kind == "diagonal":
        assert all(np.count_nonzero(s.matrix - np.diag(np.diag(s.matrix))) == 0 for s in a)


def test_diagonal_corpus_commutes_with_hamiltonian():
    H = random_hamiltonian(5, 4)
    for s in random_state_corpus(5, 5, 1, "diagonal", hamiltonian=H):
        assert np.linalg.norm(H @ s.matrix - s.matrix @ H) < 1e-12


def test_random_hamiltonian_spectrum():
    w = np.linalg.eigvalsh(random_hamiltonian(6, 0))
    assert w[0] == pytest.approx(0.0, abs=1e-12) and w[-1] == pytest.approx(1.0, abs=1e-12)


def test_corpus_validation():
    with pytest.raises(ArgumentError):
        random_state_corpus(1, 5)
    with pytest.raises(ArgumentError):
        random_state_corpus(3, 5, kind="weird")
