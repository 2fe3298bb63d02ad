"""Two driven SQUID qutrits in a thermal cavity.

Simulates the five-step pulse sequence that entangles two three-level
SQUIDs sharing a detuned cavity mode, both under the strong-drive
dispersive effective model (closed-form exact) and under time-ordered
integration of the full oscillating interaction Hamiltonian, and
quantifies how well the effective model holds up.
"""

__version__ = "0.1.0"

from .linalg import (
    HilbertLayout,
    annihilation,
    commutator_norm,
    embed,
    kron,
    level_phase,
    level_projector,
    matexp_hermitian,
    squid_lower,
    squid_raise,
)
from .hamiltonians import (
    RegimeReport,
    RegimeThresholds,
    SystemParams,
    check_regime,
    effective_hamiltonian,
    full_hamiltonian,
    single_squid_drive,
    symmetric_drive,
)
from .dynamics import (
    IntegratorConfig,
    IntegratorConvergenceError,
    IntegratorInfo,
    ThermalSpec,
    TruncationError,
    effective_propagator,
    evolve_density,
    evolve_effective,
    evolve_full,
    propagate_full_fixed,
    thermal_state,
    thermal_weights,
)
from .metrics import (
    MixedStateError,
    entanglement_entropy,
    fidelity,
    negativity,
    partial_trace,
    phase_optimized_fidelity,
    trace_distance,
)
from .protocol import (
    CavityWindow,
    ClassicalDrive,
    PhaseCorrection,
    ProtocolResult,
    PulseSequence,
    canonical_sequence,
    phase_correction,
    prepare_initial,
    retarget_pulse,
    run_protocol,
    spectator_frame_phase,
    target_state,
)
from .analysis import (
    ModelComparison,
    SweepRecord,
    compare_models,
    sweep,
    thermal_invariance_gap,
    validation_battery,
    verify_protocol_states,
)
from .config import ConfigError, RunConfig, config_echo, parse_config
