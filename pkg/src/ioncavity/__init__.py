"""Driven three-level trapped ion in a cavity: engineered interactions, squeezing and the Fock filter."""
from .adiabatic import (
    EffectiveValidation,
    ValidityReport,
    classify_regime,
    effective_hamiltonian,
    effective_params,
    validate_effective_dynamics,
)
from .dynamics import (
    BogoliubovCoefficients,
    RegimeReport,
    Trajectory,
    bogoliubov,
    classify,
    converge_timedep,
    evolve_static,
    evolve_timedep,
    resonant_detuning,
)
from .errors import (
    ConfigError,
    ContractError,
    IonCavityError,
    RegimeError,
    RegimeWarning,
    SignatureError,
    StepGuardError,
    TruncationError,
    TruncationWarning,
)
from .experiments import (
    FilterResult,
    RegimeMap,
    SemiclassicalCurve,
    SqueezeResult,
    regime_map,
    run_fock_filter,
    run_h1_squeezing,
    run_semiclassical_comparison,
    significant_levels,
    squeezing_rate,
)
from .fockalg import (
    Atom,
    Boson,
    OperatorMatrix,
    SpaceSignature,
    StateVector,
    basis_state,
    coherent_state,
    ladder,
    number,
    product_state,
)
from .model import (
    EffectiveParams,
    SystemParams,
    build_dressed_hamiltonian,
    build_engineered,
    build_full_hamiltonian,
    semiclassical_hamiltonian,
)

__version__ = "0.1.0"
