"""Quantum mutual information, classical correlation and discord of bipartite
states, and their behaviour under local quantum channels."""

from .channel import (
    KrausChannel,
    LocalChannelPair,
    apply,
    apply_local,
    choi_matrix,
    completely_decohering,
    depolarizing,
    identity_channel,
    is_reversible_cptp,
    isotropic,
    measure_and_prepare,
    preserves_commutativity_probe,
    superoperator_matrix,
    unitary_channel,
)
from .discord import (
    MeasurementSetting,
    OptimizerConfig,
    classical_correlation,
    classical_quantum_state,
    holevo_value,
    measure_ensemble,
    quantum_discord,
)
from .entropy import mutual_information, relative_entropy, von_neumann_entropy
from .harness import bell_isotropic_demo, lemma1_check, run_invariance_experiment, theorem2_suite
from .qstate import (
    BipartiteState,
    DensityMatrix,
    PureState,
    bell_state,
    partial_trace,
    pure_to_density,
    random_density,
    tensor,
    validate_state,
)
from .recovery import check_sufficiency, petz_map, trace_distance

__version__ = "0.1.0"
