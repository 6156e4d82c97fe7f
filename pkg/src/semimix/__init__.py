"""Mean matrix-valued Cauchy transforms and spectra of operator-valued semicircular mixtures."""
from .core import (
    ConfigError,
    NumericalFailure,
    SolverSettings,
    SpectralCurve,
    VarianceProfile,
    WorkGuardError,
    l1_norm,
    normalized_trace,
)
from .kernels import BACKEND
from .montecarlo import EntryLaw, MeanTransformResult, ProfileSampler, mean_cauchy, sample_profile
from .solver import (
    FixedPointResult,
    GridSolution,
    closed_form_constant_rowsum,
    eta,
    solve_grid,
    solve_point,
    t_map,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "EntryLaw",
    "FixedPointResult",
    "GridSolution",
    "MeanTransformResult",
    "NumericalFailure",
    "ProfileSampler",
    "SolverSettings",
    "SpectralCurve",
    "VarianceProfile",
    "WorkGuardError",
    "closed_form_constant_rowsum",
    "eta",
    "l1_norm",
    "mean_cauchy",
    "normalized_trace",
    "sample_profile",
    "solve_grid",
    "solve_point",
    "t_map",
]
