"""Steepest-entropy-ascent dissipative generator.

The nonequilibrium Massieu operator is ``dM = dS - dH'/theta``; the
coefficients come from projecting ``sqrt(rho) dS`` onto the span of
``sqrt(rho) dH`` and ``sqrt(rho) dN_i``, which is the same linear system
as the constraint equations for ``theta`` and ``nu`` divided through by
``theta``.  Solving for ``1/theta`` keeps the system regular at states
with ``Cov(S, H) = 0`` (infinite temperature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateGeneratorsError, DegenerateSpreadError
from .hilbert import HermitianOperator, UnitSystem, as_density

COMMUTE_TOL = 1e-10
GRAM_COND_MAX = 1e12
# below this Delta_M / Delta_S the adaptive-tau dissipator is taken as zero;
# Delta_M computed near equilibrium has a roundoff floor near 1e-12 Delta_S
ADAPTIVE_ZERO_RATIO = 1e-10


@dataclass(frozen=True)
class ConstantTau:
    tau: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ArgumentError(f"tau must be positive, got {self.tau!r}")


@dataclass(frozen=True)
class AdaptiveTau:
    """``tau = (hbar / 2 kB) Delta_M / Delta_H``, i.e. ``tau_D = tau_U`` at every state."""


@dataclass(frozen=True)
class SeaModel:
    """Hamiltonian, conserved non-Hamiltonian generators, units and tau policy."""

    hamiltonian: np.ndarray
    generators: tuple = ()
    units: UnitSystem = field(default_factory=UnitSystem)
    tau_policy: object = field(default_factory=ConstantTau)

    def __post_init__(self):
        H = HermitianOperator(self.hamiltonian).matrix
        gens = tuple(HermitianOperator(n).matrix for n in self.generators)
        for i, n in enumerate(gens):
            if n.shape != H.shape:
                raise ArgumentError(f"generator {i} has shape {n.shape}, expected {H.shape}")
            comm = np.linalg.norm(H @ n - n @ H, 2)
            if comm > COMMUTE_TOL:
                raise ArgumentError(f"generator {i} does not commute with H (norm {comm:.3e})")
        if not isinstance(self.tau_policy, (ConstantTau, AdaptiveTau)):
            raise ArgumentError(f"unknown tau policy {self.tau_policy!r}")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_levels(cls, levels, **kwargs) -> SeaModel:
        return cls(np.diag(np.asarray(levels, dtype=float)), **kwargs)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def is_diagonal(self) -> bool:
        ops = (self.hamiltonian,) + self.generators
        return all(np.count_nonzero(op - np.diag(np.diag(op))) == 0 for op in ops)

    @property
    def levels(self) -> np.ndarray:
        return np.diag(self.hamiltonian).real.copy()


@dataclass(frozen=True)
class MassieuCoefficients:
    theta: float
    nu: tuple
    delta_m: np.ndarray
    cov_mm: float
    beta: float
    cov_hphp: float
    cov_ss: float
    cov_hh: float


def _projection(gram, rhs, names):
    """Solve ``gram @ x = rhs`` after a conditioning check."""
    d = np.sqrt(np.diag(gram))
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        bad = [names[i] for i in range(len(d)) if not d[i] > 0]
        raise DegenerateGeneratorsError(f"zero spread for {', '.join(bad)}")
    scaled = gram / np.outer(d, d)
    cond = np.linalg.cond(scaled)
    if not cond < GRAM_COND_MAX:
        w, v = np.linalg.eigh(scaled)
        combo = " + ".join(f"{v[i, 0]:+.3g}*{names[i]}" for i in range(len(names)))
        raise DegenerateGeneratorsError(
            f"sqrt(rho)-weighted generators are linearly dependent (cond {cond:.2e}): {combo}"
        )
    # LAPACK gesv: LU with partial pivoting, deterministic for a fixed input
    return np.linalg.solve(scaled, rhs / d) / d


def _finish(x, cov_mm, cov_hphp, cov_ss, cov_hh, delta_m):
    beta = float(x[0])
    theta = math.inf if beta == 0 else 1.0 / beta
    nu = tuple(math.copysign(math.inf, -xi) if beta == 0 else float(-xi / beta) for xi in x[1:])
    return MassieuCoefficients(
        theta=theta,
        nu=nu,
        delta_m=delta_m,
        cov_mm=max(float(cov_mm), 0.0),
        beta=beta,
        cov_hphp=float(cov_hphp),
        cov_ss=max(float(cov_ss), 0.0),
        cov_hh=float(cov_hh),
    )


def massieu_coefficients(rho, model: SeaModel) -> MassieuCoefficients:
    """Solve for ``theta``, ``nu`` and assemble ``dM`` at state ``rho``."""
    d = as_density(rho)
    if d.matrix.shape != model.hamiltonian.shape:
        raise ArgumentError(
            f"state dimension {d.matrix.shape} does not match model {model.hamiltonian.shape}"
        )
    return massieu_from_log(d.matrix, d.log_on_range(), model)


def massieu_from_log(r: np.ndarray, log_rho: np.ndarray, model: SeaModel) -> MassieuCoefficients:
    """Array-level core of :func:`massieu_coefficients`.

    ``log_rho`` is ``ln(rho)`` on the range of ``r`` and zero on its kernel.
    """
    kB = model.units.kB
    eye = np.eye(r.shape[0])
    ops = (model.hamiltonian,) + model.generators

    def centered(op):
        return op - np.einsum("ij,ji->", r, op).real * eye

    dS = centered(-kB * log_rho)
    basis = [centered(op) for op in ops]
    # Cov(X, Y) = Re Tr(rho dX dY)
    rb = [r @ b for b in basis]
    k = len(basis)
    gram = np.empty((k, k))
    rhs = np.empty(k)
    for i in range(k):
        for j in range(i, k):
            gram[i, j] = gram[j, i] = np.einsum("ij,ji->", rb[i], basis[j]).real
        rhs[i] = np.einsum("ij,ji->", rb[i], dS).real
    names = ["H"] + [f"N{i + 1}" for i in range(k - 1)]
    x = _projection(gram, rhs, names)
    dM = dS - sum(xi * b for xi, b in zip(x, basis))
    dM = 0.5 * (dM + dM.conj().T)
    cov_mm = np.einsum("ij,jk,ki->", r, dM, dM).real
    cov_ss = np.einsum("ij,jk,ki->", r, dS, dS).real
    if x[0] != 0 and k > 1:
        dHp = basis[0] + sum(xi / x[0] * b for xi, b in zip(x[1:], basis[1:]))
        cov_hphp = np.einsum("ij,jk,ki->", r, dHp, dHp).real
    else:
        cov_hphp = gram[0, 0]
    return _finish(x, cov_mm, cov_hphp, cov_ss, gram[0, 0], dM)


def diagonal_massieu(p, basis_rows, kB: float = 1.0):
    """Vector form of :func:`massieu_coefficients` for states diagonal with the generators.

    ``basis_rows`` stacks the diagonals of ``H`` and each ``N_i``.  Returns
    ``(coefficients, mean_S)``; ``coefficients.delta_m`` is a vector over all
    levels of which only the occupied entries carry meaning.
    """
    p = np.asarray(p, dtype=float)
    basis_rows = np.atleast_2d(basis_rows)
    occupied = p > 0
    s = np.zeros_like(p)
    s[occupied] = -kB * np.log(p[occupied])
    mean_s = float(p @ s)
    ds = s - mean_s
    db = basis_rows - (basis_rows @ p)[:, None]
    weighted = db * p
    gram = weighted @ db.T
    rhs = weighted @ ds
    names = ["H"] + [f"N{i + 1}" for i in range(len(basis_rows) - 1)]
    x = _projection(gram, rhs, names)
    dm = ds - x @ db
    cov_mm = float(p @ dm**2)
    cov_ss = float(p @ ds**2)
    if x[0] != 0 and len(x) > 1:
        dhp = db[0] + (x[1:] / x[0]) @ db[1:]
    else:
        dhp = db[0]
    cov_hphp = float(p @ dhp**2)
    return _finish(x, cov_mm, cov_hphp, cov_ss, gram[0, 0], dm), mean_s


def rate_factor(model: SeaModel, cov_mm: float, cov_hh: float, cov_ss: float) -> float:
    """``1 / (kB tau)``: the prefactor multiplying ``{dM, rho}/2`` in the dissipator.

    Under :class:`AdaptiveTau` this is ``2 Delta_H / (hbar Delta_M)``; the
    0/0 at nondissipative states resolves to zero.
    """
    kB = model.units.kB
    policy = model.tau_policy
    if isinstance(policy, ConstantTau):
        return 1.0 / (kB * policy.tau)
    if cov_hh <= 0:
        raise DegenerateSpreadError("adaptive tau needs Delta_H > 0")
    delta_m = math.sqrt(cov_mm)
    if delta_m <= ADAPTIVE_ZERO_RATIO * math.sqrt(cov_ss) or delta_m == 0.0:
        return 0.0
    return 2.0 * math.sqrt(cov_hh) / (model.units.hbar * delta_m)


def dissipation_time(rho, model: SeaModel, coeffs: MassieuCoefficients | None = None) -> float:
    """Dissipation time ``tau`` at ``rho``; zero for adaptive tau at a nondissipative state."""
    policy = model.tau_policy
    if isinstance(policy, ConstantTau):
        return policy.tau
    if coeffs is None:
        coeffs = massieu_coefficients(rho, model)
    if rate_factor(model, coeffs.cov_mm, coeffs.cov_hh, coeffs.cov_ss) == 0.0:
        return 0.0
    u = model.units
    return u.hbar / (2 * u.kB) * math.sqrt(coeffs.cov_mm / coeffs.cov_hh)


def dissipator_from_log(r: np.ndarray, log_rho: np.ndarray, model: SeaModel) -> np.ndarray:
    coeffs = massieu_from_log(r, log_rho, model)
    factor = rate_factor(model, coeffs.cov_mm, coeffs.cov_hh, coeffs.cov_ss)
    if factor == 0.0:
        return np.zeros_like(r)
    dM = coeffs.delta_m
    out = 0.5 * factor * (dM @ r + r @ dM)
    return 0.5 * (out + out.conj().T)


def sea_dissipator(rho, model: SeaModel) -> np.ndarray:
    """Dissipative part ``{dM, rho} / (2 kB tau)`` of the master equation.

    Pure states give the zero operator: the entropy operator vanishes and
    the evolution is purely unitary.
    """
    d = as_density(rho)
    if d.is_pure:
        return np.zeros_like(d.matrix)
    return dissipator_from_log(d.matrix, d.log_on_range(), model)
