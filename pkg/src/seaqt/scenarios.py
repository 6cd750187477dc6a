"""Named experiment configurations and random state corpora.

The four-level study uses levels ``(0, 1/3, 2/3, 1) u`` at mean energy
``0.4 u``.  Three nondissipative states matter there: the Gibbs state,
the "false target" (the canonical state with level 3 empty) and the
"primordial" state on levels 1 and 4 only.  A trajectory that leaves the
primordial state with level 3 almost empty first settles towards the
false target, lingers there while the tiny level-3 occupation grows, and
only then relaxes to Gibbs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import AdaptiveRK45, EvolutionSpec, FixedRK4, Mode, Trajectory, integrate
from .equilibrium import SpectrumSpec, solve_canonical
from .errors import ArgumentError, DeltaTooLargeError
from .hilbert import DensityOperator
from .sea import AdaptiveTau, ConstantTau, SeaModel

FOUR_LEVELS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
FOUR_LEVEL_MEAN = 0.4
EXCLUDED_LEVEL = 2
PRIMORDIAL = (0.6, 0.0, 0.0, 0.4)
DEFAULT_DELTA = 1e-4
MAX_DELTA = 1e-2
# fraction of the way from the false target towards the primordial state
DEFAULT_OFFSET = 1e-2
# the forward run starts this long before the anchor state
DEFAULT_LEAD_IN = 3.0
LEAD_IN_DT = 1e-3
ENERGY_TOL = 1e-10


@dataclass(frozen=True)
class ScenarioConfig:
    """A diagonal SEA run.

    ``initial_distribution`` is the state at ``t = 0``.  When ``t_start``
    is negative the forward run begins at the state obtained by
    integrating that distribution back to ``t_start``; the backward run
    always starts at ``t = 0`` and lasts ``backward_horizon``.
    """

    name: str
    levels: tuple
    mean_energy: float
    initial_distribution: tuple
    tau_policy: object = field(default_factory=ConstantTau)
    t_start: float = 0.0
    t_end: float = 40.0
    sample_every: float = 0.1
    backward_horizon: float = 50.0
    stop_when_relaxed: bool = True

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        p = np.asarray(self.initial_distribution, dtype=float)
        if p.shape != (len(levels),):
            raise ArgumentError("initial_distribution and levels differ in length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > ENERGY_TOL:
            raise ArgumentError("initial_distribution must be a probability vector")
        if abs(float(p @ np.array(levels)) - self.mean_energy) > ENERGY_TOL:
            raise ArgumentError(
                f"initial_distribution has mean energy {float(p @ np.array(levels))!r}, "
                f"expected {self.mean_energy!r}"
            )
        if not (self.t_start <= 0.0 < self.t_end):
            raise ArgumentError("need t_start <= 0 < t_end")
        if not (self.sample_every > 0 and self.backward_horizon > 0):
            raise ArgumentError("sample_every and backward_horizon must be positive")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "initial_distribution", tuple(float(x) for x in p))

    def model(self) -> SeaModel:
        return SeaModel.from_levels(self.levels, tau_policy=self.tau_policy)


@dataclass(frozen=True)
class ContrastConfig:
    """Pauli versus SEA comparison from a state with an empty level."""

    name: str
    levels: tuple
    initial_distribution: tuple
    rates: tuple
    horizon: float = 5.0
    sample_every: float = 0.01

    def model(self) -> SeaModel:
        return SeaModel.from_levels(self.levels)


def _energy_correction(p, levels, free, mean_energy):
    """Minimal-norm change on ``free`` restoring ``sum p = 1`` and ``sum p e = mean_energy``."""
    a = np.vstack([np.ones(len(free)), levels[free]])
    r = np.array([1.0 - p.sum(), mean_energy - p @ levels])
    out = p.copy()
    out[free] += a.T @ np.linalg.solve(a @ a.T, r)
    return out


def false_target() -> np.ndarray:
    """Canonical distribution on levels 1, 2 and 4 at the four-level mean energy."""
    support = [i for i in range(len(FOUR_LEVELS)) if i != EXCLUDED_LEVEL]
    return solve_canonical(SpectrumSpec(FOUR_LEVELS, support), FOUR_LEVEL_MEAN).probabilities


def near_false_target(delta: float, offset: float = DEFAULT_OFFSET) -> np.ndarray:
    """False target with occupation ``delta`` moved onto the excluded level.

    The false target is first shifted by ``offset`` along the segment
    towards the primordial state (both have the same mean energy), then
    ``delta`` is taken from the other levels in proportion to their
    occupations and a two-constraint linear correction restores the
    normalisation and mean energy.  The shift fixes the side of the false
    target on which the trajectory lies, and with it the backward limit.
    """
    if not (0.0 <= delta < 1.0):
        raise ArgumentError(f"delta must lie in [0, 1), got {delta!r}")
    if not (0.0 <= offset < 1.0):
        raise ArgumentError(f"offset must lie in [0, 1), got {offset!r}")
    levels = np.array(FOUR_LEVELS)
    p = (1.0 - offset) * false_target() + offset * np.array(PRIMORDIAL)
    others = [i for i in range(len(levels)) if i != EXCLUDED_LEVEL]
    p[others] *= 1.0 - delta
    p[EXCLUDED_LEVEL] = delta
    p = _energy_correction(p, levels, others, FOUR_LEVEL_MEAN)
    if np.any(p < 0):
        raise DeltaTooLargeError(f"delta={delta!r} leaves negative occupations {p}")
    return p


def four_level_scenario(
    tau_policy=None,
    delta: float = DEFAULT_DELTA,
    offset: float = DEFAULT_OFFSET,
    lead_in: float = DEFAULT_LEAD_IN,
    name: str | None = None,
) -> ScenarioConfig:
    """Four-level run passing near the false target.

    ``delta`` is the level-3 occupation at ``t = 0``; the forward run
    starts ``lead_in`` earlier so that the slow passage by the false
    target is part of the sampled trajectory.
    """
    tau_policy = tau_policy or ConstantTau()
    if delta < 0:
        raise ArgumentError(f"delta must be nonnegative, got {delta!r}")
    if delta > MAX_DELTA:
        raise DeltaTooLargeError(f"delta={delta!r} exceeds {MAX_DELTA!r}")
    if name is None:
        name = "four-level-adaptive-tau" if isinstance(tau_policy, AdaptiveTau) else "four-level-const-tau"
    return ScenarioConfig(
        name=name,
        levels=FOUR_LEVELS,
        mean_energy=FOUR_LEVEL_MEAN,
        initial_distribution=tuple(near_false_target(delta, offset)),
        tau_policy=tau_policy,
        t_start=-abs(lead_in) if lead_in else 0.0,
    )


def klgs_contrast() -> ContrastConfig:
    return ContrastConfig(
        name="klgs-contrast",
        levels=(0.0, 0.5, 1.0),
        initial_distribution=(0.7, 0.3, 0.0),
        rates=((0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)),
    )


SCENARIOS = {
    "four-level-const-tau": lambda: four_level_scenario(ConstantTau()),
    "four-level-adaptive-tau": lambda: four_level_scenario(AdaptiveTau(), lead_in=0.0),
    "klgs-contrast": klgs_contrast,
}


def get_scenario(name: str):
    try:
        return SCENARIOS[name]()
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise ArgumentError(f"unknown scenario {name!r}; known: {known}") from None


def initial_state(config: ScenarioConfig) -> np.ndarray:
    """Distribution at ``config.t_start``.

    The lead-in is integrated backward with small fixed RK4 steps: the
    nearly empty level shrinks super-exponentially in backward time and an
    error-controlled step would let it round to zero.
    """
    p = np.array(config.initial_distribution)
    if config.t_start == 0.0:
        return p
    traj = integrate(
        EvolutionSpec(
            p, config.model(), 0.0, config.t_start, FixedRK4(LEAD_IN_DT), abs(config.t_start), Mode.DIAGONAL
        )
    )
    return traj.probabilities[-1]


def run_scenario(config: ScenarioConfig, backward: bool = False, stepper=None, callback=None) -> Trajectory:
    """Integrate a scenario forward from ``t_start`` or backward from ``t = 0``."""
    stepper = stepper or AdaptiveRK45()
    if backward:
        p0, t0, t1 = np.array(config.initial_distribution), 0.0, -config.backward_horizon
    else:
        p0, t0, t1 = initial_state(config), config.t_start, config.t_end
    spec = EvolutionSpec(
        p0,
        config.model(),
        t0,
        t1,
        stepper,
        config.sample_every,
        Mode.DIAGONAL,
        stop_when_relaxed=config.stop_when_relaxed,
    )
    return integrate(spec, callback)


# --------------------------------------------------------------------------
# random corpora

CORPUS_KINDS = ("diagonal", "full", "rank-deficient")


def _haar_unitary(rng, dim):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hamiltonian(dim: int, seed=None, diagonal: bool = False) -> np.ndarray:
    """Random Hermitian matrix with spectrum rescaled to ``[0, 1]``."""
    rng = np.random.default_rng(seed)
    levels = np.sort(rng.uniform(0.0, 1.0, dim))
    levels = (levels - levels[0]) / (levels[-1] - levels[0])
    if diagonal:
        return np.diag(levels).astype(complex)
    u = _haar_unitary(rng, dim)
    h = (u * levels) @ u.conj().T
    return 0.5 * (h + h.conj().T)


def random_state_corpus(dim: int, count: int, seed=None, kind: str = "full", hamiltonian=None) -> list:
    """Reproducible list of random density operators.

    Eigenvalues come from a flat Dirichlet draw and eigenvectors from the
    QR factorisation of a complex Gaussian matrix.  ``diagonal`` states
    are diagonal in the eigenbasis of ``hamiltonian`` (the computational
    basis when none is given); ``rank-deficient`` states have between one
    and ``dim - 1`` nonzero eigenvalues.
    """
    if not (2 <= dim <= 8):
        raise ArgumentError(f"dim must lie in [2, 8], got {dim!r}")
    if count < 1:
        raise ArgumentError("count must be at least 1")
    if kind not in CORPUS_KINDS:
        raise ArgumentError(f"kind must be one of {CORPUS_KINDS}, got {kind!r}")
    rng = np.random.default_rng(seed)
    basis = None
    if kind == "diagonal" and hamiltonian is not None:
        basis = np.linalg.eigh(np.asarray(hamiltonian))[1]
    out = []
    for _ in range(count):
        if kind == "rank-deficient":
            rank = int(rng.integers(1, dim))
            w = np.zeros(dim)
            w[rng.permutation(dim)[:rank]] = rng.dirichlet(np.ones(rank))
        else:
            w = rng.dirichlet(np.ones(dim))
        if kind == "diagonal":
            m = np.diag(w).astype(complex) if basis is None else (basis * w) @ basis.conj().T
        else:
            u = _haar_unitary(rng, dim)
            m = (u * w) @ u.conj().T
        out.append(DensityOperator(0.5 * (m + m.conj().T)))
    return out
