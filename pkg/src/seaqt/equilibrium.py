"""Canonical and partially canonical (nondissipative) distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NoSolutionError

_BISECT_WIDTH = 1e-6
_NEWTON_TOL = 1e-12
_MAX_BRACKET = 1e6


@dataclass(frozen=True)
class SpectrumSpec:
    """Energy levels (repeated per degeneracy) and the levels allowed to be occupied.

    ``support`` may be a boolean mask or a list of level indices; ``None``
    means every level.
    """

    levels: tuple
    support: tuple | None = None

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        if not all(math.isfinite(e) for e in levels):
            raise ArgumentError("levels must be finite")
        n = len(levels)
        if self.support is None:
            mask = (True,) * n
        else:
            sup = tuple(self.support)
            if sup and all(isinstance(s, (bool, np.bool_)) for s in sup):
                if len(sup) != n:
                    raise ArgumentError("support mask length differs from number of levels")
                mask = tuple(bool(s) for s in sup)
            else:
                idx = {int(i) for i in sup}
                if any(i < 0 or i >= n for i in idx):
                    raise ArgumentError(f"support index out of range 0..{n - 1}")
                mask = tuple(i in idx for i in range(n))
        if sum(mask) < 2:
            raise ArgumentError("at least two levels must be in the support")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "support", mask)

    @property
    def mask(self) -> np.ndarray:
        return np.array(self.support, dtype=bool)


@dataclass(frozen=True)
class CanonicalSolution:
    """Occupations with ``temperature`` T and ``beta`` = 1/(kB T)."""

    probabilities: np.ndarray
    temperature: float
    beta: float

    @property
    def theta(self) -> float:
        return self.temperature


def _mean_at(b, x):
    # x in [0, 1]; shift the exponent so the largest weight is exp(0)
    z = -b * x
    w = np.exp(z - z.max())
    w /= w.sum()
    m = float(w @ x)
    return m, float(w @ (x - m) ** 2), w


def solve_canonical(spec: SpectrumSpec, mean_energy: float, kB: float = 1.0) -> CanonicalSolution:
    """Gibbs distribution on ``spec.support`` with prescribed mean energy.

    The inverse temperature is bracketed, bisected to ``1e-6`` and then
    polished with Newton steps; the map from ``beta`` to mean energy is
    strictly decreasing, so the root is unique.  Negative temperatures are
    returned when the target lies above the unweighted mean of the
    supported levels.
    """
    if not math.isfinite(mean_energy):
        raise ArgumentError("mean_energy must be finite")
    if not (math.isfinite(kB) and kB > 0):
        raise ArgumentError("kB must be positive")
    levels = np.asarray(spec.levels)
    mask = spec.mask
    e = levels[mask]
    lo, hi = float(e.min()), float(e.max())
    span = hi - lo
    if span <= 0 or not (lo < mean_energy < hi):
        raise NoSolutionError(
            f"mean energy {mean_energy!r} must lie strictly inside ({lo!r}, {hi!r})"
        )
    x = (e - lo) / span
    target = (mean_energy - lo) / span

    bound = 1.0
    while not (_mean_at(-bound, x)[0] > target > _mean_at(bound, x)[0]):
        bound *= 2.0
        if bound > _MAX_BRACKET:
            raise NoSolutionError("mean energy too close to the edge of the spectrum")
    a, b = -bound, bound
    while b - a > _BISECT_WIDTH:
        mid = 0.5 * (a + b)
        if _mean_at(mid, x)[0] > target:
            a = mid
        else:
            b = mid
    beta = 0.5 * (a + b)
    for _ in range(50):
        m, var, _ = _mean_at(beta, x)
        step = (m - target) / var
        nxt = beta + step
        nxt = min(max(nxt, a), b)
        if _mean_at(nxt, x)[0] > target:
            a = nxt
        else:
            b = nxt
        done = abs(nxt - beta) <= _NEWTON_TOL * max(1.0, abs(nxt))
        beta = nxt
        if done:
            break
    _, _, w = _mean_at(beta, x)

    p = np.zeros(levels.shape)
    p[mask] = w
    # exponent -beta x = -(e - lo) / (kB T), so 1/(kB T) = beta / span
    beta_phys = beta / span
    temperature = math.inf if beta_phys == 0 else 1.0 / (kB * beta_phys)
    return CanonicalSolution(probabilities=p, temperature=temperature, beta=beta_phys)


def is_nondissipative(rho, H, generators=(), tol: float = 1e-12) -> bool:
    """True when ``Cov(M, M) <= tol``, i.e. the SEA dissipator vanishes at ``rho``."""
    from .sea import SeaModel, massieu_coefficients

    model = SeaModel(H, generators)
    return massieu_coefficients(rho, model).cov_mm <= tol
