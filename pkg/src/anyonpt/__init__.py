"""Toolkit for drifting phase-rotated PT-symmetric Schrodinger problems.

Core model types and operators live in :mod:`anyonpt.model`; spectra,
propagation, scattering, non-normal gain diagnostics and the laser-cavity
mapping each get their own module, and :mod:`anyonpt.cli` drives the
config-based experiment runners.
"""

from .errors import (
    AnyonptError,
    ConfigError,
    ContractError,
    DelocalizedError,
    DivergenceError,
    DomainError,
    InconclusiveError,
    NumericalError,
)
from .model import (
    AnyonicParams,
    GaugeFactors,
    Grid,
    HamiltonianMatrix,
    PoschlTeller,
    Tabulated,
    WaveFunction,
    build_h_eff,
    check_anyonic_symmetry,
    check_pt_condition,
    default_grid,
    eval_potential,
    inner,
)
from .spectra import (
    BoundStateFamily,
    DispersionCurve,
    SpectrumResult,
    continuous_dispersion,
    critical_velocity,
    critical_wavenumber,
    delocalization_margin,
    fit_localization_length,
    moving_bound_state,
    poschl_teller_energies,
    shifted_point_energy,
    solve_spectrum,
)
from .propagation import (
    AbsorberSpec,
    EvolutionRecord,
    PropagatorConfig,
    evolve,
    gauge_growth_factor,
    gauge_transform_check,
    step_split_fourier,
)
from .scattering import (
    PacketSpec,
    ScatteringReport,
    gaussian_packet,
    group_velocity,
    reflected_wavenumber,
    run_packet_scattering,
    stationary_rt,
)
from .nonnormal import (
    AmplificationReport,
    adjoint_bound_state,
    analytic_bound_state_pt,
    g_infinity,
    g_infinity_poschl_teller,
    g_t,
    self_orthogonality,
)
from .lasermap import CavityParams, LaserMapping, map_to_anyonic, mode_locking_threshold
from .config import ExperimentConfig

__version__ = "0.1.0"
