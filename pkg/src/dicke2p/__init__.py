"""Two-atom two-photon cavity dynamics and coherent-state Bell protocols."""

from .hilbert import (
    AtomCoeffs,
    FockCutoff,
    Operator,
    SpaceTag,
    StateVector,
    bell_state,
    cat_state,
    coherent_state,
    fock_state,
    tensor,
)
from .models import (
    EffectiveModelParams,
    FullModelParams,
    effective_coupling,
    full_hamiltonian,
    stark_shift,
    trapped_ion_coupling,
    two_photon_w,
    validity_report,
)
from .dynamics import (
    CoherentBranchState,
    analytic_state,
    coherent_branch_state,
    evolve_exact,
    rabi_see_analytic,
    revival_time,
)
from .analysis import (
    DensityMatrix,
    ensemble_average,
    fidelity,
    haar_random_two_qubit,
    partial_trace,
    wigner,
)
from .protocols import (
    HomodyneConfig,
    OutcomeLabel,
    ProtocolResult,
    bell_outcome_table,
    correction_gate,
    ghz_input,
    ghz_target,
    homodyne_outcome_table,
    run_bell_protocol,
    run_ghz,
    timing_sensitivity,
)

__version__ = "0.1.0"

__all__ = [
    "AtomCoeffs",
    "FockCutoff",
    "Operator",
    "SpaceTag",
    "StateVector",
    "bell_state",
    "cat_state",
    "coherent_state",
    "fock_state",
    "tensor",
    "EffectiveModelParams",
    "FullModelParams",
    "effective_coupling",
    "full_hamiltonian",
    "stark_shift",
    "trapped_ion_coupling",
    "two_photon_w",
    "validity_report",
    "CoherentBranchState",
    "analytic_state",
    "coherent_branch_state",
    "evolve_exact",
    "rabi_see_analytic",
    "revival_time",
    "DensityMatrix",
    "ensemble_average",
    "fidelity",
    "haar_random_two_qubit",
    "partial_trace",
    "wigner",
    "HomodyneConfig",
    "OutcomeLabel",
    "ProtocolResult",
    "bell_outcome_table",
    "correction_gate",
    "ghz_input",
    "ghz_target",
    "homodyne_outcome_table",
    "run_bell_protocol",
    "run_ghz",
    "timing_sensitivity",
    "__version__",
]
