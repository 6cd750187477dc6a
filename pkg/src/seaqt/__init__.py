"""Steepest-entropy-ascent quantum thermodynamics toolkit."""

from .dynamics import AdaptiveRK45, EvolutionSpec, FixedRK4, Mode, Trajectory, integrate, rhs_diagonal, rhs_full
from .equilibrium import CanonicalSolution, SpectrumSpec, is_nondissipative, solve_canonical
from .errors import (
    ArgumentError,
    DegenerateGeneratorsError,
    DegenerateSpreadError,
    DeltaTooLargeError,
    IntegrationError,
    NoSolutionError,
    SeaError,
    StepUnderflowError,
    ValidationError,
)
from .hilbert import DensityOperator, HermitianOperator, UnitSystem, covariance, entropy
from .metrics import (
    TimeScales,
    UncertaintyReport,
    characteristic_time,
    evolution_direction,
    inequality_suite,
    time_scales,
    trajectory_report,
)
from .pauli import TransitionMatrix, contrast_run, pauli_entropy_rate, pauli_rhs
from .scenarios import four_level_scenario, get_scenario, random_state_corpus, run_scenario
from .sea import AdaptiveTau, ConstantTau, SeaModel, massieu_coefficients, sea_dissipator

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
