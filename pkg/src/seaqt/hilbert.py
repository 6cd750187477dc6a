"""Finite-dimensional operator algebra on density operators.

Operators are dense complex ``numpy`` arrays.  ``HermitianOperator`` and
``DensityOperator`` are thin validated wrappers; every function here also
accepts plain arrays (anything ``numpy.asarray`` understands) so callers
can mix the two freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegenerateSpreadError, ValidationError

HERMITIAN_REJECT_TOL = 1e-8
TRACE_TOL = 1e-10
NEGATIVE_CLIP_TOL = 1e-10
RANK_EPSILON = 1e-12


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants used by the dynamics.

    ``energy_unit`` is the reference energy ``u`` used to
    non-dimensionalise spectra and times (time unit ``hbar/u``).
    """

    hbar: float = 1.0
    kB: float = 1.0
    energy_unit: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "kB", "energy_unit"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ArgumentError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class CorrelationPair:
    """Correlation ``r`` and commutator ``c`` coefficients of two observables."""

    r: float
    c: float


def as_matrix(op) -> np.ndarray:
    """Return ``op`` as a square complex 2-D array (no copy when possible)."""
    m = getattr(op, "matrix", op)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {m.shape}")
    return m


def _pair(F, G):
    f, g = as_matrix(F), as_matrix(G)
    if f.shape != g.shape:
        raise ArgumentError(f"dimension mismatch: {f.shape} vs {g.shape}")
    return f, g


def _hermitize(entries) -> np.ndarray:
    m = as_matrix(entries)
    if not np.all(np.isfinite(m)):
        raise ValidationError("operator has non-finite entries")
    asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if asym > HERMITIAN_REJECT_TOL:
        raise ValidationError(f"operator is not Hermitian (max asymmetry {asym:.3e})")
    return 0.5 * (m + m.conj().T)


class HermitianOperator:
    """Dense Hermitian matrix, symmetrised on construction.

    Inputs whose asymmetry exceeds ``1e-8`` in any entry are rejected, so
    drift accumulated by an integrator surfaces as an error instead of
    being silently projected away.
    """

    __slots__ = ("matrix",)

    def __init__(self, entries):
        m = _hermitize(entries)
        if m.shape[0] < 1:
            raise ValidationError("operator dimension must be at least 1")
        m.setflags(write=False)
        self.matrix = m

    @classmethod
    def diagonal(cls, values) -> HermitianOperator:
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class DensityOperator:
    """Unit-trace positive semidefinite operator with a cached spectrum.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero and the trace is
    renormalised; anything more negative is rejected.  Eigenvalues below
    ``rank_epsilon`` times the largest one count as the kernel.

    Instances are immutable, so the cached eigendecomposition, square root
    and entropy operator never go stale.
    """

    __slots__ = ("matrix", "eigenvalues", "eigenvectors", "rank_epsilon", "_sqrt", "_log")

    def __init__(self, entries, rank_epsilon: float = RANK_EPSILON):
        m = _hermitize(entries)
        trace = float(np.trace(m).real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace must be 1 within {TRACE_TOL:g}, got {trace!r}")
        w, v = np.linalg.eigh(m)
        if w[0] < -NEGATIVE_CLIP_TOL:
            raise ValidationError(f"density operator has negative eigenvalue {w[0]:.3e}")
        if w[0] < 0.0:
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
            m = (v * w) @ v.conj().T
            m = 0.5 * (m + m.conj().T)
        if w[-1] > 1.0 + TRACE_TOL:
            raise ValidationError(f"eigenvalue {w[-1]!r} exceeds 1")
        w, v = w[::-1].copy(), v[:, ::-1].copy()
        for a in (m, w, v):
            a.setflags(write=False)
        self.matrix = m
        self.eigenvalues = w
        self.eigenvectors = v
        self.rank_epsilon = rank_epsilon
        self._sqrt = None
        self._log = None

    @classmethod
    def from_probabilities(cls, p, rank_epsilon: float = RANK_EPSILON) -> DensityOperator:
        """Diagonal density operator with the given occupation probabilities."""
        return cls(np.diag(np.asarray(p, dtype=float)), rank_epsilon=rank_epsilon)

    @classmethod
    def pure(cls, psi) -> DensityOperator:
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def support(self) -> np.ndarray:
        """Boolean mask over ``eigenvalues`` marking the range of the state."""
        w = self.eigenvalues
        return w > self.rank_epsilon * w[0]

    @property
    def rank(self) -> int:
        return int(self.support.sum())

    @property
    def is_pure(self) -> bool:
        return self.rank == 1

    def sqrt(self) -> np.ndarray:
        if self._sqrt is None:
            v = self.eigenvectors
            s = (v * np.sqrt(self.eigenvalues)) @ v.conj().T
            s.setflags(write=False)
            self._sqrt = s
        return self._sqrt

    def log_on_range(self) -> np.ndarray:
        """``P_Ran ln(rho)``: natural log on the range, zero on the kernel."""
        if self._log is None:
            v = self.eigenvectors
            mask = self.support
            logs = np.zeros_like(self.eigenvalues)
            logs[mask] = np.log(self.eigenvalues[mask])
            out = (v * logs) @ v.conj().T
            out.setflags(write=False)
            self._log = out
        return self._log

    def expectation(self, F) -> float:
        return mean(self, F)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityOperator(dim={self.dim}, rank={self.rank})"


def as_density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator(rho)


def scalar_product(F, G) -> float:
    """Real scalar product ``Tr(F^dag G + G^dag F)/2``."""
    f, g = _pair(F, G)
    return float(np.vdot(f, g).real)


def skew_product(F, G) -> float:
    """Antisymmetric form ``i Tr(F^dag G - G^dag F)/2``."""
    f, g = _pair(F, G)
    return float(-np.vdot(f, g).imag)


def mean(rho, F) -> float:
    r, f = _pair(rho, F)
    return float(np.einsum("ij,ji->", r, f).real)


def center(F, rho) -> HermitianOperator:
    """``F - <F> I`` with the mean taken in state ``rho``."""
    f, r = _pair(F, rho)
    return HermitianOperator(f - mean(r, f) * np.eye(f.shape[0]))


def _centered(r: np.ndarray, f: np.ndarray) -> np.ndarray:
    return f - np.einsum("ij,ji->", r, f).real * np.eye(f.shape[0])


def _trace_prod3(a, b, c) -> complex:
    return complex(np.einsum("ij,jk,ki->", a, b, c))


def covariance(rho, F, G) -> float:
    """Symmetrised covariance ``Tr(rho {dF, dG})/2``."""
    r, f = _pair(rho, F)
    _, g = _pair(rho, G)
    return _trace_prod3(r, _centered(r, f), _centered(r, g)).real


def comm_correlation(rho, F, G) -> float:
    """Commutator functional ``Tr(rho [F, G]) / 2i``."""
    r, f = _pair(rho, F)
    _, g = _pair(rho, G)
    return _trace_prod3(r, f, g).imag


def spread_is_zero(variance: float, F) -> bool:
    """True when ``variance`` is indistinguishable from zero at the scale of ``F``."""
    scale = np.linalg.norm(as_matrix(F), 2)
    return variance <= (1e-12 * scale) ** 2


def correlation_coeffs(rho, F, G) -> CorrelationPair:
    vff = covariance(rho, F, F)
    vgg = covariance(rho, G, G)
    if spread_is_zero(vff, F) or spread_is_zero(vgg, G):
        raise DegenerateSpreadError("correlation undefined: an observable has zero spread")
    norm = math.sqrt(vff * vgg)
    return CorrelationPair(covariance(rho, F, G) / norm, comm_correlation(rho, F, G) / norm)


def sqrt_density(rho) -> np.ndarray:
    """Square root of a density operator (same eigenvectors, sqrt eigenvalues)."""
    return as_density(rho).sqrt()


def entropy_operator(rho, kB: float = 1.0) -> HermitianOperator:
    """``S = -kB P_Ran ln(rho)``; the null operator on the kernel."""
    return HermitianOperator(-kB * as_density(rho).log_on_range())


def entropy(rho, kB: float = 1.0) -> float:
    """Von Neumann entropy ``-kB Tr(rho ln rho)`` over the range of ``rho``."""
    d = as_density(rho)
    w = d.eigenvalues[d.support]
    return float(-kB * np.sum(w * np.log(w)))
