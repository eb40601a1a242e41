"""Forced vibration of a cantilever beam against a one-sided snubber spring.

Hermite cubic beam finite elements, a unilateral spring contact law,
adaptive implicit (BDF2) time integration of the resulting stiff
piecewise-linear system, FFT harmonic analysis, and frequency sweeps for
locating the nonlinear resonances.
"""

from .beam_fem import (
    BeamProperties,
    CalibrationReport,
    FEModel,
    add_point_mass,
    assemble,
    calibrate_point_mass,
    eigenfrequencies,
    element_matrices,
)
from .contact import SystemState, UnilateralSpring, contact_force, negative_part, rhs
from .forcing import (
    ForcingSignal,
    SampledPeriodicForcing,
    SineForcing,
    load_samples,
    read_force_file,
)
from .integrator import (
    DivergenceError,
    IntegrationError,
    IntegratorConfig,
    StepStats,
    Trajectory,
    integrate,
    resample_uniform,
)
from .spectral import (
    HarmonicComparison,
    HarmonicPeak,
    Spectrum,
    compare_spectra,
    fft_spectrum,
    find_harmonics,
    normalize_by_max,
    steady_state_spectrum,
)
from .sweep import Resonance, SweepCurve, find_resonances, frequency_sweep

__version__ = "0.1.0"

__all__ = [
    "BeamProperties",
    "CalibrationReport",
    "FEModel",
    "add_point_mass",
    "assemble",
    "calibrate_point_mass",
    "eigenfrequencies",
    "element_matrices",
    "SystemState",
    "UnilateralSpring",
    "contact_force",
    "negative_part",
    "rhs",
    "ForcingSignal",
    "SampledPeriodicForcing",
    "SineForcing",
    "load_samples",
    "read_force_file",
    "DivergenceError",
    "IntegrationError",
    "IntegratorConfig",
    "StepStats",
    "Trajectory",
    "integrate",
    "resample_uniform",
    "HarmonicComparison",
    "HarmonicPeak",
    "Spectrum",
    "compare_spectra",
    "fft_spectrum",
    "find_harmonics",
    "normalize_by_max",
    "steady_state_spectrum",
    "Resonance",
    "SweepCurve",
    "find_resonances",
    "frequency_sweep",
]
