import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seaqt.errors import ValidationError
from seaqt.hilbert import (
    DensityOperator,
    HermitianOperator,
    UnitSystem,
    comm_correlation,
    correlation_coeffs,
    covariance,
    entropy,
    entropy_operator,
    mean,
    scalar_product,
)
from seaqt.scenarios import random_hamiltonian, random_state_corpus


def test_unit_system_rejects_nonpositive():
    with pytest.raises(ValueError):
        UnitSystem(hbar=0.0)
    with pytest.raises(ValueError):
        UnitSystem(kB=-1.0)


def test_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator([[0, 1], [0, 0]])


def test_density_rejects_bad_trace():
    with pytest.raises(ValidationError):
        DensityOperator(np.diag([0.5, 0.49]))


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(ValidationError):
        DensityOperator(np.diag([1.1, -0.1]))


def test_tiny_negative_eigenvalue_is_clipped():
    d = DensityOperator(np.diag([1.0 + 1e-11, -1e-11]))
    assert d.eigenvalues.min() == 0.0
    assert d.rank == 1 and d.is_pure


def test_density_is_immutable():
    d = DensityOperator.from_probabilities([0.5, 0.5])
    with pytest.raises(ValueError):
        d.matrix[0, 0] = 1.0


def test_entropy_of_maximally_mixed_state():
    for n in (2, 3, 5):
        assert entropy(DensityOperator(np.eye(n) / n)) == pytest.approx(math.log(n), abs=1e-14)


def test_entropy_operator_is_zero_on_kernel():
    d = DensityOperator.from_probabilities([0.5, 0.5, 0.0])
    S = entropy_operator(d).matrix
    assert S[2, 2] == 0.0
    assert S[0, 0] == pytest.approx(math.log(2.0))


def test_pure_state_has_zero_entropy():
    d = DensityOperator.pure([1.0, 1j, 0.0])
    assert entropy(d) == pytest.approx(0.0, abs=1e-15)


def test_covariance_known_value():
    # two-level state (0.6, 0.4) with levels (0, 1): Var = 0.24
    d = DensityOperator.from_probabilities([0.6, 0.4])
    H = np.diag([0.0, 1.0])
    assert covariance(d, H, H) == pytest.approx(0.24, abs=1e-15)
    assert mean(d, H) == pytest.approx(0.4)


def test_products():
    F = np.array([[1, 1j], [-1j, 0]])
    G = np.array([[0, 1], [1, 2]])
    assert scalar_product(F, G) == pytest.approx(np.trace(F @ G).real)
    assert scalar_product(F, F) > 0


def test_comm_correlation_vanishes_for_commuting_pair():
    d = DensityOperator.from_probabilities([0.2, 0.3, 0.5])
    assert comm_correlation(d, np.diag([1.0, 2, 3]), np.diag([0.0, 5, 1])) == 0.0


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 5), seed=st.integers(0, 2**31))
def test_correlation_coefficients_obey_schroedinger_bound(dim, seed):
    d = random_state_corpus(dim, 1, seed, "full")[0]
    F = random_hamiltonian(dim, seed + 1)
    G = random_hamiltonian(dim, seed + 2)
    pair = correlation_coeffs(d, F, G)
    assert pair.r**2 + pair.c**2 <= 1.0 + 1e-10


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**31), kind=st.sampled_from(["full", "diagonal", "rank-deficient"]))
def test_entropy_bounds(dim, seed, kind):
    d = random_state_corpus(dim, 1, seed, kind)[0]
    s = entropy(d)
    assert -1e-12 <= s <= math.log(dim) + 1e-12
    assert np.trace(d.matrix).real == pytest.approx(1.0, abs=1e-12)
