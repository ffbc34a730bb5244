"""treephase: exact recursions for entanglement phases of noisy tree circuits."""

from .cliffords import (
    GATE_ALPHA0,
    GATE_ALPHA1,
    TwoQubitClifford,
    compose,
    enumerate_symplectic_group,
    from_word,
)
from .isingtree import (
    IsingParams,
    RootField,
    boundary_field_scan,
    delta_h_root,
    find_beta_c,
    find_h_c,
    ising_step,
    root_field,
)
from .markov import (
    CState,
    CStateDist,
    FixedPointResult,
    GateParams,
    NoiseParams,
    Protocol,
    TransitionMatrix,
    apply_noise_channel,
    build_transition_matrix,
    iterate,
    mean_mutual_information,
    mipt_fixed_point_closed_form,
    recursion_step,
)
from .oracle import (
    compute_w_exact,
    deterministic_mixture,
    representative_pair,
    uniform_ensemble,
    verify_purification_equivalence,
)
from .tableau import (
    StabilizerTableau,
    apply_clifford,
    classify_cstate,
    entropy,
    measure_z,
    node_op,
    trace_out,
)
from .thresholds import (
    Order,
    Phase,
    PhaseDiagram,
    ThresholdResult,
    boundary_noise_scan,
    boundary_protocol,
    classify_phase,
    find_threshold,
    multistep_protocol,
    multistep_scan,
    probe_phase,
    sweep_grid,
)
from .treesim import TreeSimResult, recursion_prediction, simulate_tree

__version__ = "0.1.0"

__all__ = [
    "CState",
    "CStateDist",
    "FixedPointResult",
    "GATE_ALPHA0",
    "GATE_ALPHA1",
    "GateParams",
    "IsingParams",
    "NoiseParams",
    "Order",
    "Phase",
    "PhaseDiagram",
    "Protocol",
    "RootField",
    "StabilizerTableau",
    "ThresholdResult",
    "TransitionMatrix",
    "TreeSimResult",
    "TwoQubitClifford",
    "apply_clifford",
    "apply_noise_channel",
    "boundary_field_scan",
    "boundary_noise_scan",
    "boundary_protocol",
    "build_transition_matrix",
    "classify_cstate",
    "classify_phase",
    "compose",
    "compute_w_exact",
    "delta_h_root",
    "deterministic_mixture",
    "entropy",
    "enumerate_symplectic_group",
    "find_beta_c",
    "find_h_c",
    "find_threshold",
    "from_word",
    "ising_step",
    "iterate",
    "mean_mutual_information",
    "measure_z",
    "mipt_fixed_point_closed_form",
    "multistep_protocol",
    "multistep_scan",
    "node_op",
    "probe_phase",
    "recursion_prediction",
    "recursion_step",
    "representative_pair",
    "root_field",
    "simulate_tree",
    "sweep_grid",
    "trace_out",
    "uniform_ensemble",
    "verify_purification_equivalence",
    "__version__",
]
