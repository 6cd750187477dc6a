"""Pauli master equation baseline.

The diagonal special case of the standard linear (Lindblad-type)
dissipator moves probability between levels at rates ``w[r, s]`` (from
``s`` to ``r``):

    dp_n/dt = sum_r w[n, r] p_r - p_n sum_r w[r, n].

Unlike steepest entropy ascent it repopulates empty levels at a finite
rate, and at that instant the entropy rate is infinite.  The functions
here make that contrast measurable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import AdaptiveRK45, EvolutionSpec, Mode, integrate, solve
from .errors import ArgumentError
from .sea import SeaModel

REPOPULATION_THRESHOLD = 1e-3


@dataclass(frozen=True)
class TransitionMatrix:
    """Nonnegative rates ``w[r, s]`` from level ``s`` to level ``r``; the diagonal is ignored."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ArgumentError(f"transition matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ArgumentError("transition rates must be finite")
        np.fill_diagonal(w, 0.0)
        if np.any(w < 0):
            raise ArgumentError("transition rates must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def generator(self) -> np.ndarray:
        """Rate matrix ``G`` with ``dp/dt = G @ p`` (columns sum to zero)."""
        g = self.w.copy()
        g[np.diag_indices_from(g)] = -self.w.sum(axis=0)
        return g


def _as_rates(w) -> TransitionMatrix:
    return w if isinstance(w, TransitionMatrix) else TransitionMatrix(w)


def _check_probabilities(p, n):
    p = np.asarray(p, dtype=float)
    if p.shape != (n,):
        raise ArgumentError(f"expected {n} probabilities, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ArgumentError("p must be a probability vector")
    return p


def pauli_rhs(p, w) -> np.ndarray:
    """``dp/dt`` of the Pauli master equation."""
    rates = _as_rates(w)
    p = _check_probabilities(p, rates.dim)
    return rates.w @ p - p * rates.w.sum(axis=0)


class RateKind(enum.Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class EntropyRate:
    """Entropy production rate, or a divergence flag when it is unbounded."""

    kind: RateKind
    value: float | None = None

    @property
    def divergent(self) -> bool:
        return self.kind is RateKind.DIVERGENT


def pauli_entropy_rate(p, w, kB: float = 1.0) -> EntropyRate:
    """``d<S>/dt = kB sum_{n,r} w[n, r] p_r (ln p_r - ln p_n)``.

    This is the time derivative of ``-kB sum p ln p`` along the Pauli
    flow.  A transition with ``w[n, r] p_r > 0`` into an empty level
    (``p_n = 0``) makes the rate unbounded; that case is reported as
    :attr:`RateKind.DIVERGENT` instead of a number.  Terms with
    ``p_r = 0`` vanish because nothing flows out of an empty level.
    """
    rates = _as_rates(w)
    p = _check_probabilities(p, rates.dim)
    flux = rates.w * p[None, :]  # flux[n, r] = w[n, r] p_r
    occupied = p > 0
    if np.any(flux[~occupied, :] > 0):
        return EntropyRate(RateKind.DIVERGENT)
    logp = np.zeros_like(p)
    logp[occupied] = np.log(p[occupied])
    terms = flux * (logp[None, :] - logp[:, None])
    return EntropyRate(RateKind.FINITE, float(kB * terms.sum()))


def stationary_distribution(w, iterations: int = 100000, tol: float = 1e-14) -> np.ndarray:
    """Stationary distribution of an irreducible rate matrix by power iteration.

    Iterates ``p <- p + h G p`` with ``h`` below the stability limit of the
    uniformized chain.
    """
    rates = _as_rates(w)
    g = rates.generator()
    h = 0.9 / max(float(np.max(-np.diag(g))), 1e-300)
    p = np.full(rates.dim, 1.0 / rates.dim)
    for _ in range(iterations):
        nxt = p + h * (g @ p)
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - p)) < tol:
            return nxt
        p = nxt
    return p


@dataclass
class ContrastRecord:
    times: np.ndarray
    pauli: np.ndarray
    sea: np.ndarray
    zero_levels: tuple
    pauli_repopulation_time: float | None
    sea_level_max: float
    initial_entropy_rate: EntropyRate
    applicable: bool = True
    pauli_energy_drift: float = 0.0


def _crossing_time(times, values, threshold):
    above = np.nonzero(values > threshold)[0]
    if len(above) == 0:
        return None
    k = above[0]
    if k == 0:
        return float(times[0])
    t0, t1 = times[k - 1], times[k]
    v0, v1 = values[k - 1], values[k]
    return float(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))


def contrast_run(
    p0,
    w,
    sea_model: SeaModel,
    horizon: float = 5.0,
    sample_every: float = 0.01,
    stepper=None,
) -> ContrastRecord:
    """Evolve ``p0`` under the Pauli equation and under SEA side by side.

    The record reports when the first exactly-empty level of ``p0``
    exceeds ``1e-3`` under Pauli dynamics (linear interpolation between
    samples) and the largest value any such level reaches under SEA.
    Without an empty level the comparison is marked not applicable.
    """
    rates = _as_rates(w)
    p0 = _check_probabilities(p0, rates.dim)
    if sea_model.dim != rates.dim:
        raise ArgumentError("SEA model and transition matrix differ in dimension")
    if not horizon > 0:
        raise ArgumentError("horizon must be positive")
    stepper = stepper or AdaptiveRK45()
    zero = tuple(int(i) for i in np.nonzero(p0 == 0.0)[0])
    g = rates.generator()

    def hygiene(y):
        y = np.where(y < 0, 0.0, y)
        return y / y.sum()

    times, pauli, _ = solve(lambda y: g @ y, p0, 0.0, horizon, stepper, sample_every, hygiene=hygiene)
    pauli = np.array(pauli)
    sea = integrate(
        EvolutionSpec(p0, sea_model, 0.0, horizon, stepper, sample_every, Mode.DIAGONAL)
    ).probabilities
    levels = sea_model.levels
    drift = float(np.max(np.abs(pauli @ levels - p0 @ levels)))
    if not zero:
        return ContrastRecord(
            times, pauli, sea, zero, None, 0.0, pauli_entropy_rate(p0, rates, sea_model.units.kB),
            applicable=False, pauli_energy_drift=drift,
        )
    crossings = [_crossing_time(times, pauli[:, n], REPOPULATION_THRESHOLD) for n in zero]
    found = [t for t in crossings if t is not None]
    return ContrastRecord(
        times=times,
        pauli=pauli,
        sea=sea,
        zero_levels=zero,
        pauli_repopulation_time=min(found) if found else None,
        sea_level_max=float(np.max(sea[:, list(zero)])),
        initial_entropy_rate=pauli_entropy_rate(p0, rates, sea_model.units.kB),
        pauli_energy_drift=drift,
    )
