"""Classical dynamics of indistinguishable particles in the lowest Landau level.

Exchange statistics deform the symplectic form on the coherent-state
manifold; this package computes the resulting statistics-dependent classical
trajectories, compares them against exact truncated-Fock quantum evolution,
and estimates Lyapunov exponents for small ensembles.
"""

from .statcore import (
    N_MAX,
    F_MIN,
    StatDynError,
    CoordinateOverflowError,
    CoincidenceError,
    SingularConfigurationError,
    Statistics,
    PhasePoint,
    TwoBodyState,
    NBodyState,
    QuadraticPotential,
    SymplecticMatrix,
    symplectic_factor,
    kahler_slope,
    radial_occupation,
    cm_relative_transform,
    individual_from_cm_relative,
    permutation_sum,
    kahler_potential,
    symplectic_matrix,
    potential_expectation,
    potential_gradient,
)
from .integrator import (
    IntegrationError,
    StepSizeUnderflowError,
    MaxStepsExceededError,
    NonFiniteStateError,
    IntegratorConfig,
    Event,
    EventHit,
    Trajectory,
    integrate,
)
from .dynamics import (
    FixedPointError,
    OpenOrbitError,
    LevelSetError,
    UnclassifiableError,
    OutcomeKind,
    ClassifiedOutcome,
    ScenarioIHO,
    ScenarioLLL,
    iho_momentum,
    iho_initial_z,
    iho_energy,
    iho_flow,
    run_iho,
    classify_iho,
    survival_function,
    cm_energy,
    relative_energy,
    two_body_energy,
    lll_two_body_flow,
    run_lll_two_body,
    relative_flow,
    run_relative,
    lll_nbody_flow,
    run_lll_nbody,
    individual_coordinates,
    rtheta_levelset,
    find_closed_orbit,
    geometric_phase,
)
from .chaos import LyapunovRun, symmetric_three_particle_state, lyapunov_estimate
from .qoracle import (
    DEFAULT_CUTOFF,
    MAX_CUTOFF,
    CutoffError,
    DegenerateStateError,
    FockState,
    Su11Triple,
    make_coherent,
    make_cat,
    su11_matrices,
    expect_n,
    expect_a,
    expect_a2,
    expect_k_triple,
    evolve,
    evolve_with_diagnostics,
    EhrenfestSeries,
    ehrenfest_solve,
    BracketMapReport,
    bracket_map_check,
    quantum_vs_classical_rho,
)

__version__ = "0.1.0"
