"""Geometric phase factors for two exchange-coupled driven qubits.

Library layout:

* linalg / integrate: fixed-size Hermitian eigenproblems, real-root cubics,
  fixed-step RK4;
* model: drive envelopes, lab/rotating fields, the pair Hamiltonian, its
  closed-form spectrum and eigenvectors, crossing times, adiabaticity;
* transport: parallel-transport propagation (ODE and eigen-frame routes);
* phases: sigma/gamma phase factors, permutation detection and invariants;
* scenarios / sweep / cli: runnable experiments writing CSV + JSON.
"""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateDenominator,
    DegeneracyEncountered,
    GeomphaseError,
    GridTooCoarse,
    NonFiniteState,
    NonRealRoots,
    NotAPermutation,
    NullOverlap,
    SchemaMismatch,
    ZeroDenominator,
)
from .integrate import integrate_ode
from .linalg import CubicCoefficients, hermitian_eigensystem, solve_cubic_three_real
from .model import (
    ConstantEnvelope,
    CrossingTimes,
    FieldVector,
    Frame,
    GaussianPulse,
    ModelParams,
    TwinGaussianPulse,
    ZeroEnvelope,
    adiabaticity_ratio,
    analytic_eigenvector,
    basis_state,
    char_poly,
    crossing_times,
    envelope_derivative,
    envelope_value,
    field_at,
    hamiltonian,
    max_adiabaticity_ratio,
)
from .phases import (
    PhaseReport,
    build_phase_report,
    detect_permutation,
    gamma_cycle,
    gamma_diag,
    gamma_offdiag,
    permutation_invariant_check,
    phi_of,
    principal_angle,
    sigma_jk,
)
from .transport import (
    EigenFrame,
    TransportedState,
    eigenframe_transport,
    parallel_transport_ode,
    schrodinger_evolve,
    track_populations,
    transport_basis,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
