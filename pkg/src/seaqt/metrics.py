"""Characteristic times, uncertainty functionals and inequality residuals.

Everything here is a pure function of one state (or one sampled
trajectory) and a :class:`~seaqt.sea.SeaModel`.  Rates of mean values are
evaluated analytically,

    d<F>/dt = (2/hbar) Im Tr(rho F H) + Cov(F, M) / (kB tau),

never by finite differences.  Residuals follow a single sign convention:
``bound - quantity`` for upper bounds and ``quantity - bound`` for lower
bounds, so a residual ``>= 0`` means the inequality holds.  Exact
relations are reported as ``-|lhs - rhs|`` on a dimensionless scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeneratorsError, DegenerateSpreadError
from .hilbert import as_density, as_matrix, spread_is_zero
from .sea import SeaModel, massieu_coefficients, rate_factor

INF = math.inf
# |rate| below this multiple of Delta_F (1/tau_U + 1/tau_D) counts as conserved
CONSERVED_RATE_RATIO = 1e-14
COMMUTE_TOL = 1e-10
# Delta_M at or below this fraction of Delta_S is roundoff: the state is nondissipative
NONDISSIPATIVE_RATIO = 1e-12
# entropy spreads below this (in units of kB) are roundoff of a pure state
ROUNDOFF_SPREAD = 1e-12


@dataclass(frozen=True)
class TimeScales:
    """Shortest characteristic times at one state.

    Fields are positive reals; ``math.inf`` marks a time that does not
    exist because the corresponding mechanism is inactive (for example
    ``tau_D`` at a nondissipative state).
    """

    tau_U: float
    tau_D: float
    tau_K: float
    tau_S: float
    tau_UD: float
    a_tau: float


@dataclass(frozen=True)
class ObservableRow:
    name: str
    delta: float
    rate: float
    tau: float
    r_FM: float
    c_FH: float
    degenerate: bool = False


@dataclass
class UncertaintyReport:
    rows: list
    delta_H: float
    delta_S: float
    delta_M: float
    theta: float
    entropy: float
    entropy_rate: float
    time_scales: TimeScales
    residuals: dict = field(default_factory=dict)

    def worst(self):
        """``(name, value)`` of the most negative residual, or ``None`` if there are none."""
        if not self.residuals:
            return None
        name = min(self.residuals, key=self.residuals.get)
        return name, self.residuals[name]

    @property
    def degenerate_rows(self) -> list:
        return [row.name for row in self.rows if row.degenerate]


# --------------------------------------------------------------------------
# state-level building blocks


class _State:
    """Quantities shared by every function below, computed once per state."""

    def __init__(self, rho, model: SeaModel):
        d = as_density(rho)
        if d.dim != model.dim:
            raise DegenerateSpreadError(f"state dimension {d.dim} does not match model {model.dim}")
        self.density = d
        self.model = model
        units = model.units
        self.hbar, self.kB = units.hbar, units.kB
        r = d.matrix
        self.r = r
        self.sqrt = d.sqrt()
        eye = np.eye(d.dim)
        H = model.hamiltonian
        self.H = H
        self.dH = H - np.einsum("ij,ji->", r, H).real * eye
        self.cov_hh = max(float(np.einsum("ij,jk,ki->", r, self.dH, self.dH).real), 0.0)
        if spread_is_zero(self.cov_hh, H):
            raise DegenerateSpreadError("energy spread is zero; characteristic times need Delta_H > 0")
        self.delta_H = math.sqrt(self.cov_hh)

        S = -self.kB * d.log_on_range()
        self.S = S
        self.entropy = float(np.einsum("ij,ji->", r, S).real)
        self.dS = S - self.entropy * eye
        self.cov_ss = max(float(np.einsum("ij,jk,ki->", r, self.dS, self.dS).real), 0.0)
        self.delta_S = math.sqrt(self.cov_ss)
        if d.is_pure or self.delta_S <= ROUNDOFF_SPREAD * self.kB:
            # a pure state up to eigenvalues at roundoff level
            self.cov_ss = self.delta_S = 0.0

        try:
            coeffs = massieu_coefficients(d, model)
        except DegenerateGeneratorsError as exc:
            raise DegenerateSpreadError(str(exc)) from exc
        self.coeffs = coeffs
        self.dM = coeffs.delta_m
        self.cov_mm = coeffs.cov_mm
        self.delta_M = math.sqrt(coeffs.cov_mm)
        self.delta_Hp = math.sqrt(max(coeffs.cov_hphp, 0.0))
        # g = 1/(kB tau); zero when the dissipator is switched off at this state
        g = 0.0
        if not d.is_pure:
            g = rate_factor(model, coeffs.cov_mm, coeffs.cov_hh, coeffs.cov_ss)
        if self.delta_M <= NONDISSIPATIVE_RATIO * self.delta_S:
            g = 0.0
        self.g = g
        self.dissipative = g > 0.0

        self.inv_U = 2.0 * self.delta_H / self.hbar
        self.inv_D = g * self.delta_M
        self.inv_K = g * self.delta_S if self.dissipative else 0.0
        self.cov_sm = float(np.einsum("ij,jk,ki->", r, self.dS, self.dM).real)
        self.entropy_rate = g * self.cov_sm
        self.c_MH = (
            float(np.einsum("ij,jk,ki->", r, self.dM, self.dH).imag) / (self.delta_M * self.delta_H)
            if self.dissipative
            else 0.0
        )
        self.r_SM = self.delta_M / self.delta_S if self.delta_S > 0 else 0.0
        self.C = (2j / self.hbar) * (self.sqrt @ self.dH) + g * (self.sqrt @ self.dM)
        self.cc = float(np.vdot(self.C, self.C).real)
        self.commutes = np.linalg.norm(H @ r - r @ H, 2) <= COMMUTE_TOL * max(1.0, np.linalg.norm(H, 2))

    def time_scales(self) -> TimeScales:
        inv_S = abs(self.entropy_rate) / self.delta_S if self.delta_S > 0 else 0.0
        if inv_S <= CONSERVED_RATE_RATIO * (self.inv_U + self.inv_D):
            inv_S = 0.0
        return TimeScales(
            tau_U=_inverse(self.inv_U),
            tau_D=_inverse(self.inv_D),
            tau_K=_inverse(self.inv_K),
            tau_S=_inverse(inv_S),
            tau_UD=_inverse(math.sqrt(self.cc)),
            a_tau=self.inv_D / self.inv_U,
        )

    def observable(self, name, F) -> tuple:
        """``(row, inv_tau)`` for observable ``F``; ``inv_tau`` is ``1/tau_F`` or 0 if conserved."""
        f = as_matrix(F)
        if f.shape != self.r.shape:
            raise DegenerateSpreadError(f"observable {name} has shape {f.shape}, expected {self.r.shape}")
        r = self.r
        dF = f - np.einsum("ij,ji->", r, f).real * np.eye(f.shape[0])
        var = float(np.einsum("ij,jk,ki->", r, dF, dF).real)
        if spread_is_zero(var, f) or var <= 0:
            return ObservableRow(name, 0.0, 0.0, math.nan, math.nan, math.nan, degenerate=True), None
        delta = math.sqrt(var)
        im_fh = float(np.einsum("ij,jk,ki->", r, f, self.H).imag)
        cov_fm = float(np.einsum("ij,jk,ki->", r, dF, self.dM).real)
        rate = 2.0 * im_fh / self.hbar + self.g * cov_fm
        c_FH = im_fh / (delta * self.delta_H)
        r_FM = cov_fm / (delta * self.delta_M) if self.delta_M > 0 else 0.0
        inv = abs(rate) / delta
        if inv <= CONSERVED_RATE_RATIO * (self.inv_U + self.inv_D):
            inv = 0.0
        row = ObservableRow(name, delta, rate, _inverse(inv), r_FM, c_FH)
        return row, inv


def _inverse(x: float) -> float:
    return INF if x == 0.0 else 1.0 / x


def _exact(lhs: float, rhs: float) -> float:
    return -abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def characteristic_time(rho, F, model: SeaModel) -> float:
    """``tau_F = Delta_F / |d<F>/dt|``, or ``inf`` for a conserved observable."""
    st = _State(rho, model)
    row, _ = st.observable("F", F)
    if row.degenerate:
        raise DegenerateSpreadError("observable has zero spread in this state")
    return row.tau


def time_scales(rho, model: SeaModel) -> TimeScales:
    return _State(rho, model).time_scales()


def evolution_direction(rho, model: SeaModel):
    """Operator ``C = 2 sqrt(rho) E(rho)`` and its norm ``sqrt((C|C)) = 1/tau_UD``.

    For any observable, ``d<F>/dt = Delta_F (F~|C)`` with
    ``F~ = sqrt(rho) dF / Delta_F``.
    """
    st = _State(rho, model)
    return st.C, math.sqrt(st.cc)


def energy_projectors(H, tol: float = 1e-9) -> list:
    """Projectors onto the eigenspaces of ``H`` in increasing energy order."""
    h = as_matrix(H)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tol * scale:
            vecs = v[:, start:i]
            groups.append(vecs @ vecs.conj().T)
            start = i
    return groups


def default_observables(rho, model: SeaModel) -> list:
    """``H``, the entropy operator frozen at ``rho`` and every energy projector."""
    d = as_density(rho)
    obs = [("H", model.hamiltonian), ("S", -model.units.kB * d.log_on_range())]
    obs += [(f"P{n + 1}", p) for n, p in enumerate(energy_projectors(model.hamiltonian))]
    return obs


def _named(observables):
    out = []
    for i, item in enumerate(observables):
        if isinstance(item, tuple):
            out.append(item)
        else:
            out.append((f"F{i + 1}", item))
    return out


def inequality_suite(rho, model: SeaModel, observables=None) -> UncertaintyReport:
    """Evaluate every characteristic-time relation at ``rho``.

    ``observables`` is a list of operators or ``(name, operator)`` pairs;
    ``None`` selects :func:`default_observables`.  Observables with zero
    spread produce flagged rows and no residuals.
    """
    st = _State(rho, model)
    ts = st.time_scales()
    obs = default_observables(st.density, model) if observables is None else _named(observables)
    res = {}
    a = ts.a_tau
    c = st.c_MH
    inv_UD = math.sqrt(st.cc)

    # state-level relations
    res["ineqUD"] = _exact(st.cc, st.inv_U**2 + st.inv_D**2 + 2 * c * st.inv_U * st.inv_D) if st.cc else 0.0
    res["cMH"] = -abs(c)
    if st.delta_S > 0:
        beta = abs(st.coeffs.beta)
        res["thetabound"] = 1.0 - beta * st.delta_Hp / st.delta_S
        res["thetabound2"] = 1.0 - 2.0 * st.delta_M * st.delta_Hp * beta / st.cov_ss
        res["covSM"] = _exact(st.cov_sm / st.cov_ss, st.cov_mm / st.cov_ss)
        res["covSM_bound"] = 1.0 - st.cov_mm / st.cov_ss
    if st.dissipative:
        inv_S = 1.0 / ts.tau_S if math.isfinite(ts.tau_S) else 0.0
        res["deftauG"] = 1.0 - st.inv_D / st.inv_K
        # Identities whose two sides carry a 1/r_SM factor are compared after
        # multiplying through by r_SM: near equilibrium both Cov(S, M) and
        # Cov(M, M) are differences of O(Cov(S, S)) terms, so their roundoff is
        # absolute at the scale of Cov(S, S), not relative to Cov(M, M).
        res["identity"] = _exact(inv_S / st.inv_K, (st.inv_D / st.inv_K) ** 2)
        res["TES"] = _exact(inv_S / st.inv_U, a * st.r_SM)
        res["genunc3"] = _exact(inv_S / st.inv_K, st.r_SM * st.r_SM)
        res["genunc3_bound"] = 1.0 - st.r_SM
        res["genunc5"] = _exact(inv_S / st.inv_K, st.r_SM**2)
        res["genunc5_bound"] = 1.0 - st.r_SM**2
        res["genunc7"] = 1.0 - st.entropy_rate / (st.g * st.cov_ss)
        res["genunc7_mid"] = 1.0 - st.entropy_rate / (st.g * st.delta_S * st.delta_M)
        res["rateSbound"] = 1.0 - abs(st.entropy_rate) * ts.tau_D / st.delta_S

    rows = []
    for name, F in obs:
        row, inv = st.observable(name, F)
        rows.append(row)
        if row.degenerate:
            continue
        x = inv / st.inv_U  # tau_U / tau_F
        res[f"exactTE[{name}]"] = _exact(x, abs(row.c_FH + a * row.r_FM))
        res[f"ineqCF[{name}]"] = 1.0 - inv / inv_UD if inv_UD > 0 else -inv
        res[f"genunc1[{name}]"] = (1.0 + a * a + 2 * a * c) - x * x
        res[f"genunc8[{name}]"] = (1.0 + a) ** 2 - x * x
        res[f"genunc9[{name}]"] = (1.0 + a * a) - x * x
        res[f"genunc6M[{name}]"] = 1.0 - inv**2 / (st.inv_U**2 + st.inv_D**2)
        if not st.dissipative:
            rfh = float(np.einsum("ij,jk,ki->", st.r, as_matrix(F), st.dH).real) / (row.delta * st.delta_H)
            res[f"nondissTE[{name}]"] = (1.0 - rfh * rfh) - row.c_FH**2
            res[f"genunc11[{name}]"] = 1.0 - x
            continue
        res[f"genunc6[{name}]"] = 1.0 - inv**2 / (st.inv_U**2 + st.inv_K**2)
        tau_hd = a / (1.0 + a) * st.r_SM * ts.tau_S if math.isfinite(ts.tau_S) else 0.0
        res[f"tauHD[{name}]"] = 1.0 - tau_hd * inv
        if st.commutes:
            res[f"genunc12[{name}]"] = 1.0 - inv / st.inv_K
        f = as_matrix(F)
        if np.linalg.norm(f @ st.H - st.H @ f, 2) <= COMMUTE_TOL * max(1.0, np.linalg.norm(f, 2)):
            family = "teuPen" if name.startswith("P") else "dissTEA2"
            res[f"{family}[{name}]"] = _exact(inv / st.inv_K, abs(row.r_FM) * st.r_SM)
            res[f"{family}_bound[{name}]"] = 1.0 - abs(row.r_FM)
            res[f"dissTEA[{name}]"] = a - x
        if _is_projector(F):
            res[f"dpndt[{name}]"] = 1.0 - 2.0 * abs(row.rate) / inv_UD if inv_UD > 0 else 1.0
            res[f"cospn[{name}]"] = 1.0 - inv / inv_UD

    return UncertaintyReport(
        rows=rows,
        delta_H=st.delta_H,
        delta_S=st.delta_S,
        delta_M=st.delta_M,
        theta=st.coeffs.theta,
        entropy=st.entropy,
        entropy_rate=st.entropy_rate,
        time_scales=ts,
        residuals=res,
    )


def _is_projector(F) -> bool:
    f = as_matrix(F)
    return bool(np.allclose(f @ f, f, atol=1e-10))


# --------------------------------------------------------------------------
# trajectories


@dataclass
class TrajectoryReport:
    times: np.ndarray
    reports: list
    # per level: smallest (integral - |arccos difference|) over consecutive samples
    cosfinite: np.ndarray
    cosfinite_worst_interval: list

    def worst_residuals(self) -> dict:
        """Most negative value of every residual family over the whole run."""
        out = {}
        for rep in self.reports:
            for key, value in rep.residuals.items():
                family = key.split("[", 1)[0]
                if family not in out or value < out[family]:
                    out[family] = value
        if len(self.cosfinite):
            out["cosfinite"] = float(np.min(self.cosfinite))
        return out


def trajectory_report(traj, model: SeaModel, observables=None, projectors=None) -> TrajectoryReport:
    """Per-sample :class:`UncertaintyReport` plus the finite-interval arccos bound.

    For every level ``n`` and every pair of consecutive samples the check
    ``|arccos sqrt p(t2) - arccos sqrt p(t1)| <= int dt / (2 tau_UD)`` is
    evaluated with the integral by the trapezoidal rule; consecutive
    intervals imply the bound for any pair of samples by the triangle
    inequality.
    """
    if len(traj.times) < 2:
        raise DegenerateSpreadError("trajectory report needs at least two samples")
    projs = energy_projectors(model.hamiltonian) if projectors is None else [as_matrix(p) for p in projectors]
    reports = []
    inv_ud = np.empty(len(traj.times))
    pops = np.empty((len(traj.times), len(projs)))
    for i, state in enumerate(traj.states):
        rep = inequality_suite(state, model, observables)
        reports.append(rep)
        t_ud = rep.time_scales.tau_UD
        inv_ud[i] = 0.0 if math.isinf(t_ud) else 1.0 / t_ud
        m = state.matrix
        pops[i] = [float(np.einsum("ij,ji->", m, p).real) for p in projs]
    times = np.asarray(traj.times, dtype=float)
    half = 0.5 * np.abs(np.diff(times)) * 0.5 * (inv_ud[1:] + inv_ud[:-1])
    angle = np.arccos(np.sqrt(np.clip(pops, 0.0, 1.0)))
    slack = half[:, None] - np.abs(np.diff(angle, axis=0))
    worst = slack.min(axis=0)
    where = [(float(times[k]), float(times[k + 1])) for k in slack.argmin(axis=0)]
    return TrajectoryReport(times=times, reports=reports, cosfinite=worst, cosfinite_worst_interval=where)
