"""Indirect continuous measurement of decohering finite-dimensional systems.

Probe premeasurement in the pointer and conjugate bases, partial-decoherence
readouts, output-decoupling certification and probe-kernel population
tomography.
"""

from .decoherence import (
    LambdaMatrix,
    born_rule_partial,
    build_joint,
    expected_value_expanded,
    expected_value_partial,
    lambda_interpolated,
    lambda_mixed,
    lambda_pure,
)
from .decoupling import (
    DecouplingProblem,
    DecouplingReport,
    build_distribution,
    certify,
    check_feedback,
    check_open_loop,
    simulate_output_invariance,
    trial_deviations,
)
from .errors import ConfigError, NumericalPreconditionError
from .linalg import MatrixSpan, ad_power, commutator, dft_matrix, kron, propagator, span_extend
from .probe import (
    CouplingProfile,
    ProbeSetup,
    alpha,
    alpha_matrix,
    attach_probe,
    expected_probe_closed_form,
    expected_probe_value,
    interaction_hamiltonian,
    premeasure,
    premeasurement_unitary,
    probe_marginal,
    shift_operator,
)
from .protocol import (
    CycleReadout,
    PulseSchedule,
    coherence_indicator,
    conjugate_measure_cycle,
    direct_measure_cycle,
    direct_readouts,
    mixed_baseline,
    pure_prediction,
    qft_system,
    run_schedule,
)
from .states import (
    DriftControlSystem,
    Operator,
    PiecewiseConstant,
    QuantumState,
    apply_local,
    evolve,
    evolve_trajectory,
    expectation,
    partial_trace,
    tensor_state,
)
from .tomography import (
    Histogram,
    PopulationEstimate,
    ProbeWavefunction,
    SampledDensity,
    estimate_populations,
    kernel_w,
    post_interaction_distribution,
    sample_outcomes,
    simplex_least_squares,
    system_density,
)

__version__ = "0.1.0"
