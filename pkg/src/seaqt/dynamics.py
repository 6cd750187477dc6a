"""Integration of the SEA master equation, full and diagonal.

The full equation is

    drho/dt = -(i/hbar) [H, rho] + {dM(rho), rho} / (2 kB tau)

and for states commuting with a diagonal ``H`` it reduces to a flow on
the occupation probabilities.  Both forms are advanced with classical RK4
or an embedded Dormand-Prince 5(4) pair; after every accepted step the
state is symmetrised, tiny negative eigenvalues are clipped and the trace
is renormalised.  Negative ``t_end - t_start`` integrates backward.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ArgumentError,
    DegenerateGeneratorsError,
    DegenerateSpreadError,
    IntegrationError,
    StepUnderflowError,
)
from .hilbert import NEGATIVE_CLIP_TOL, RANK_EPSILON, DensityOperator, UnitSystem, as_density
from .sea import (
    AdaptiveTau,
    ConstantTau,
    SeaModel,
    diagonal_massieu,
    dissipator_from_log,
    rate_factor,
)

logger = logging.getLogger(__name__)

RELAXED_COV_MM = 1e-12
RELAXED_SAMPLES = 10
# adaptive tau: steps are capped at this fraction of the current tau
ADAPTIVE_STEP_FRACTION = 0.2
# largest eigenvalue a single step may leave on the kernel of a rank-deficient state
KERNEL_LEAK_TOL = 1e-8


class Mode(str, enum.Enum):
    FULL = "full"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class FixedRK4:
    dt: float

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ArgumentError("dt must be positive")


@dataclass(frozen=True)
class AdaptiveRK45:
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_min: float = 1e-12
    dt_max: float = 0.1

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ArgumentError("rtol and atol must be positive")
        if not (0 < self.dt_min <= self.dt_max):
            raise ArgumentError("need 0 < dt_min <= dt_max")


@dataclass
class EvolutionSpec:
    initial_state: object
    model: SeaModel
    t_start: float = 0.0
    t_end: float = 1.0
    stepper: object = field(default_factory=AdaptiveRK45)
    sample_every: float = 0.1
    mode: Mode = Mode.FULL
    stop_when_relaxed: bool = False

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not isinstance(self.stepper, (FixedRK4, AdaptiveRK45)):
            raise ArgumentError(f"unknown stepper {self.stepper!r}")
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ArgumentError("integration window must be finite")
        if not self.sample_every > 0:
            raise ArgumentError("sample_every must be positive")
        if self.mode is Mode.DIAGONAL:
            if not self.model.is_diagonal:
                raise ArgumentError("diagonal fast path needs a diagonal Hamiltonian and generators")
            p = np.asarray(getattr(self.initial_state, "matrix", self.initial_state))
            if p.ndim == 2:
                off = np.max(np.abs(p - np.diag(np.diag(p)))) if p.size else 0.0
                if off > 1e-10:
                    raise ArgumentError("diagonal fast path needs an initial state commuting with H")
                p = np.diag(p).real
            p = np.asarray(p, dtype=float)
            DensityOperator.from_probabilities(p)
            self.initial_state = p
        else:
            self.initial_state = as_density(self.initial_state)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    diagnostics: dict
    mode: Mode
    probabilities: np.ndarray | None = None
    relaxed_at: float | None = None

    def __len__(self):
        return len(self.times)


# --------------------------------------------------------------------------
# right-hand sides


def rhs_full(rho, model: SeaModel) -> np.ndarray:
    """``-(i/hbar)[H, rho] + {dM, rho}/(2 kB tau)`` at a valid density operator."""
    d = as_density(rho)
    return _full_rhs(d.matrix, model, d.eigenvalues, d.eigenvectors)


def _full_rhs(m, model, w=None, v=None):
    if w is None:
        w, v = np.linalg.eigh(m)
    H = model.hamiltonian
    out = (-1j / model.units.hbar) * (H @ m - m @ H)
    wmax = w.max()
    mask = w > RANK_EPSILON * wmax
    if mask.sum() > 1:
        logs = np.zeros_like(w)
        logs[mask] = np.log(w[mask])
        log_rho = (v * logs) @ v.conj().T
        out = out + dissipator_from_log(m, log_rho, model)
    return out


def _diag_rhs(p, basis, model):
    occupied = p > 0
    pp = np.where(occupied, p, 0.0)
    coeffs, _ = diagonal_massieu(pp, basis, model.units.kB)
    factor = rate_factor(model, coeffs.cov_mm, coeffs.cov_hh, coeffs.cov_ss)
    return factor * pp * coeffs.delta_m


def rhs_diagonal(p, levels, tau=1.0, units: UnitSystem | None = None, generators=()) -> np.ndarray:
    """Occupation-probability rates for a state diagonal in the energy basis.

    ``tau`` is a positive number or a tau policy (``ConstantTau`` or
    ``AdaptiveTau``).  Levels with zero occupation get exactly zero rate.
    """
    p = np.asarray(p, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if p.shape != levels.shape:
        raise ArgumentError("probabilities and levels differ in length")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ArgumentError("p must be a probability vector")
    policy = tau if isinstance(tau, (ConstantTau, AdaptiveTau)) else ConstantTau(float(tau))
    model = SeaModel.from_levels(
        levels,
        generators=tuple(np.diag(np.asarray(g, dtype=float)) for g in generators),
        units=units or UnitSystem(),
        tau_policy=policy,
    )
    try:
        return _diag_rhs(p, _basis_rows(model), model)
    except DegenerateGeneratorsError as exc:
        raise DegenerateSpreadError(f"degenerate energy spread: {exc}") from exc


def _basis_rows(model):
    return np.array([np.diag(op).real for op in (model.hamiltonian,) + model.generators])


# --------------------------------------------------------------------------
# steppers

# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_E = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def dp45_step(f, y, h):
    """One Dormand-Prince step; returns the 5th-order solution and the error estimate."""
    k = [f(y)]
    for i in range(1, 7):
        incr = sum(a * ki for a, ki in zip(_DP_A[i], k) if a != 0.0)
        k.append(f(y + h * incr))
    y5 = y + h * sum(b * ki for b, ki in zip(_DP_B5, k) if b != 0.0)
    err = h * sum(e * ki for e, ki in zip(_DP_E, k) if e != 0.0)
    return y5, err


class _Rejected(Exception):
    pass


def _sample_grid(t0, t1, every):
    span = t1 - t0
    direction = 1.0 if span >= 0 else -1.0
    n = int(math.floor(abs(span) / every + 1e-9))
    grid = [t0 + direction * k * every for k in range(n + 1)]
    if abs(grid[-1] - t1) > 1e-12 * max(1.0, abs(t1)):
        grid.append(t1)
    else:
        grid[-1] = t1
    return grid, direction


def solve(
    f: Callable,
    y0,
    t0: float,
    t1: float,
    stepper,
    sample_every: float,
    hygiene: Callable | None = None,
    on_sample: Callable | None = None,
    on_step: Callable | None = None,
    step_limit: Callable | None = None,
):
    """Generic driver shared by the SEA and Pauli integrations.

    ``hygiene(y)`` returns the cleaned state or raises ``_Rejected``;
    ``on_sample(t, y)`` returning True stops the run early; ``step_limit(y)``
    may cap the next adaptive step size.  Returns ``(times, samples, stats)``.
    """
    grid, direction = _sample_grid(t0, t1, sample_every)
    hygiene = hygiene or (lambda y: y)
    y = hygiene(np.array(y0, copy=True))
    t = t0
    times, samples = [t], [y.copy()]
    stats = {"steps": 0, "rejected": 0}
    if on_sample is not None and on_sample(t, y):
        return np.array(times), samples, stats
    adaptive = isinstance(stepper, AdaptiveRK45)
    h = min(stepper.dt_max, sample_every, 1e-3) if adaptive else stepper.dt
    for t_target in grid[1:]:
        while direction * (t_target - t) > 1e-14 * max(1.0, abs(t_target)):
            remaining = abs(t_target - t)
            if adaptive:
                if step_limit is not None:
                    h = min(h, max(step_limit(y), stepper.dt_min))
                step = min(h, remaining)
                last = step == remaining
                y_new, err = dp45_step(f, y, direction * step)
                scale = stepper.atol + stepper.rtol * np.maximum(np.abs(y), np.abs(y_new))
                enorm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
                ok = np.isfinite(enorm) and enorm <= 1.0
                if ok:
                    try:
                        y_new = hygiene(y_new)
                    except _Rejected:
                        ok = False
                        enorm = 1e3
                if not ok:
                    stats["rejected"] += 1
                    if step <= stepper.dt_min * (1 + 1e-12):
                        raise StepUnderflowError(
                            f"step size underflow at t={t!r}", last_time=t, last_state=y
                        )
                    factor = 0.9 * enorm ** -0.2 if np.isfinite(enorm) and enorm > 0 else 0.2
                    h = max(stepper.dt_min, step * min(1.0, max(0.2, factor)))
                    continue
                factor = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
                if not last or factor < 1.0:
                    h = min(stepper.dt_max, max(stepper.dt_min, step * factor))
                t = t_target if last else t + direction * step
            else:
                step = min(stepper.dt, remaining)
                if remaining - step < 1e-12 * stepper.dt:
                    step = remaining
                last = step == remaining
                y_new = rk4_step(f, y, direction * step)
                try:
                    y_new = hygiene(y_new)
                except _Rejected as exc:
                    raise IntegrationError(
                        f"positivity violated at t={t!r}: {exc}", last_time=t, last_state=y
                    ) from None
                t = t_target if last else t + direction * step
            stats["steps"] += 1
            y = y_new
            if on_step is not None:
                on_step(t, y)
        times.append(t)
        samples.append(y.copy())
        if on_sample is not None and on_sample(t, y):
            break
    return np.array(times), samples, stats


# --------------------------------------------------------------------------
# SEA integration


def _clean_probabilities(p):
    low = p.min()
    if low < 0:
        if low < -NEGATIVE_CLIP_TOL:
            raise _Rejected(f"occupation {low:.3e} below clip tolerance")
        p = np.where(p < 0, 0.0, p)
    return p / p.sum()


def _clean_matrix(m, rank=None):
    """Hermitise, clip roundoff-negative eigenvalues and restore the rank.

    The exact dynamics never changes the rank of the state, but a Runge-Kutta
    step is not exactly unitary and leaves small eigenvalues on the kernel.
    SEA amplifies any nonzero occupation, so the ``dim - rank`` smallest
    eigenvalues are reset to zero; a step that put more than
    ``KERNEL_LEAK_TOL`` there is rejected instead.
    """
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    kernel = 0 if rank is None else m.shape[0] - rank
    changed = False
    if kernel:
        leak = float(np.max(np.abs(w[:kernel])))
        if leak > KERNEL_LEAK_TOL:
            raise _Rejected(f"kernel eigenvalue {leak:.3e} above tolerance")
        w = w.copy()
        w[:kernel] = 0.0
        changed = True
    if w[0] < 0:
        if w[0] < -NEGATIVE_CLIP_TOL:
            raise _Rejected(f"eigenvalue {w[0]:.3e} below clip tolerance")
        w = np.clip(w, 0.0, None)
        changed = True
    if changed:
        m = (v * w) @ v.conj().T
        m = 0.5 * (m + m.conj().T)
    return m / np.trace(m).real


def _entropy_of(p):
    q = p[p > 0]
    return float(-np.sum(q * np.log(q)))


def integrate(spec: EvolutionSpec, callback: Callable | None = None) -> Trajectory:
    """Integrate ``spec`` and return the sampled trajectory.

    ``callback(time, state, diagnostics)`` is invoked for every sample in
    time order.  Diagnostics record the worst trace and energy drift and
    the smallest per-step entropy change in the integration direction.
    """
    model = spec.model
    kB = model.units.kB
    diagonal = spec.mode is Mode.DIAGONAL
    adaptive_tau = isinstance(model.tau_policy, AdaptiveTau)
    H = model.hamiltonian

    if diagonal:
        basis = _basis_rows(model)
        levels = basis[0]

        def f(y):
            return _diag_rhs(y, basis, model)

        hygiene = _clean_probabilities

        def energy(y):
            return float(y @ levels)

        def trace(y):
            return float(y.sum())

        def ent(y):
            return kB * _entropy_of(y)

        def coefficients_at(y):
            coeffs, _ = diagonal_massieu(np.where(y > 0, y, 0.0), basis, kB)
            return coeffs

        y0 = spec.initial_state
    else:

        def f(y):
            return _full_rhs(y, model)

        rank0 = spec.initial_state.rank

        def hygiene(y):
            return _clean_matrix(y, rank0)

        def energy(y):
            return float(np.einsum("ij,ji->", y, H).real)

        def trace(y):
            return float(np.trace(y).real)

        def ent(y):
            return kB * _entropy_of(np.linalg.eigvalsh(y))

        def coefficients_at(y):
            from .sea import massieu_coefficients

            return massieu_coefficients(DensityOperator(y), model)

        y0 = spec.initial_state.matrix

    direction = 1.0 if spec.t_end >= spec.t_start else -1.0
    e0 = energy(y0)
    diag = {
        "max_trace_drift": 0.0,
        "max_energy_drift": 0.0,
        "min_entropy_increment": math.inf,
        "direction": direction,
    }
    last_entropy = [ent(y0)]

    def on_step(t, y):
        diag["max_trace_drift"] = max(diag["max_trace_drift"], abs(trace(y) - 1.0))
        diag["max_energy_drift"] = max(diag["max_energy_drift"], abs(energy(y) - e0))
        s = ent(y)
        diag["min_entropy_increment"] = min(diag["min_entropy_increment"], direction * (s - last_entropy[0]))
        last_entropy[0] = s

    relaxed = {"count": 0, "at": None}

    def on_sample(t, y):
        stop = False
        if spec.stop_when_relaxed:
            try:
                cov_mm = coefficients_at(y).cov_mm
            except DegenerateGeneratorsError:
                cov_mm = 0.0
            if cov_mm < RELAXED_COV_MM * kB**2:
                relaxed["count"] += 1
                if relaxed["count"] >= RELAXED_SAMPLES:
                    relaxed["at"] = t
                    stop = True
            else:
                relaxed["count"] = 0
        if callback is not None:
            callback(
                t,
                y.copy(),
                {"trace_drift": abs(trace(y) - 1.0), "energy_drift": abs(energy(y) - e0)},
            )
        return stop

    step_limit = None
    if adaptive_tau and isinstance(spec.stepper, AdaptiveRK45):
        dt_max = spec.stepper.dt_max

        def tau_cap(y):
            # tau shrinks with Delta_M near nondissipative states and sets the
            # time scale on which the remaining deviation decays
            coeffs = coefficients_at(y)
            factor = rate_factor(model, coeffs.cov_mm, coeffs.cov_hh, coeffs.cov_ss)
            if factor == 0.0:
                return dt_max
            return min(dt_max, ADAPTIVE_STEP_FRACTION / (kB * factor))

        step_limit = tau_cap

    times, samples, stats = solve(
        f,
        y0,
        spec.t_start,
        spec.t_end,
        spec.stepper,
        spec.sample_every,
        hygiene=hygiene,
        on_sample=on_sample,
        on_step=on_step,
        step_limit=step_limit,
    )
    diag.update(stats)
    if diag["min_entropy_increment"] == math.inf:
        diag["min_entropy_increment"] = 0.0
    if diagonal:
        probs = np.array(samples)
        states = [DensityOperator.from_probabilities(p) for p in probs]
    else:
        probs = None
        states = [DensityOperator(m) for m in samples]
    logger.debug("integrated %d steps (%d rejected)", stats["steps"], stats["rejected"])
    return Trajectory(
        times=times,
        states=states,
        diagnostics=diag,
        mode=spec.mode,
        probabilities=probs,
        relaxed_at=relaxed["at"],
    )
