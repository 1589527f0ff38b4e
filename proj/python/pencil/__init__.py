"""Operator pencil series, spectra and inverse reconstruction."""

from ._pencil import (  # noqa: F401
    AdjointCoefficients,
    ComputeError,
    ConfigError,
    InconsistentData,
    PencilError,
    PotentialCoefficients,
    ReconstructionReport,
    ScatteringData,
    SeriesTable,
    SolutionCoefficients,
    build_potential,
    coefficient_slots,
    find_eigenvalues,
    integrate_ode,
    normalizers_from_json,
    omega,
    pole_k,
    potential_from_json,
    reconstruct,
    resolvent_kernel,
    roundtrip,
    scattering_data,
    sector_count,
    sector_ordering,
    series_residual,
    solve_adjoint_coefficients,
    solve_coefficients,
    tail_ratio,
    wronskian,
)

__version__ = "0.1.0"
