"""Desk-scale simulation lab for amplitude-amplified trellis decoding.

Builds the superposition over admissible trellis paths of a convolutional
code, marks each path with a phase encoding its bit-error count, amplifies,
and validates every step against classical Viterbi and brute-force oracles.
"""

__version__ = "0.1.0"

from .convcode import CODE_5_7, BscChannel, ConvCode, Transition, error_count, hamming
from .errors import DecodeFailure, NoPathError, SizeLimitError
from .hmm import FanoutReport, Hmm, RowCheck, dump_hmm, load_hmm
from .qva import (
    AdaptiveDecodeResult,
    PathSpace,
    QvaParams,
    RunResult,
    ScheduleEntry,
    SweepResult,
    adaptive_decode,
    amplify_phases,
    build_path_space,
    build_path_space_hmm,
    default_schedule,
    diffuse,
    formula_iterations,
    measure,
    phase_mark,
    run_qva,
    single_iteration_prob,
    sweep_omega,
    uniform_superposition,
)
from .circuits import (
    GateCount,
    TwoLevelRotation,
    chain_state,
    chain_step_blocks,
    controlled_block,
    equal_up_to_global_phase,
    gate_counts,
    is_unitary,
    state_preparation,
    step_block,
    step_circuit_00,
    successor_superposition,
)
from .trials import (
    CostReport,
    TrialOutcome,
    TrialPlan,
    amplitude_loaded_state,
    compare_costs,
    mode_failure_rate,
    plan_trials,
    reduced_mode_failure_rate,
    required_trials,
    run_trials,
)
from .viterbi import DecodeResult, brute_force_decode, path_metric_multiset, viterbi_decode

__all__ = [
    "AdaptiveDecodeResult",
    "BscChannel",
    "CODE_5_7",
    "ConvCode",
    "CostReport",
    "DecodeFailure",
    "DecodeResult",
    "FanoutReport",
    "GateCount",
    "Hmm",
    "NoPathError",
    "PathSpace",
    "QvaParams",
    "RowCheck",
    "RunResult",
    "ScheduleEntry",
    "SizeLimitError",
    "SweepResult",
    "Transition",
    "TrialOutcome",
    "TrialPlan",
    "TwoLevelRotation",
    "adaptive_decode",
    "amplify_phases",
    "amplitude_loaded_state",
    "brute_force_decode",
    "build_path_space",
    "build_path_space_hmm",
    "chain_state",
    "chain_step_blocks",
    "compare_costs",
    "controlled_block",
    "default_schedule",
    "diffuse",
    "dump_hmm",
    "equal_up_to_global_phase",
    "error_count",
    "formula_iterations",
    "gate_counts",
    "hamming",
    "is_unitary",
    "load_hmm",
    "measure",
    "mode_failure_rate",
    "path_metric_multiset",
    "phase_mark",
    "plan_trials",
    "reduced_mode_failure_rate",
    "required_trials",
    "run_qva",
    "run_trials",
    "single_iteration_prob",
    "state_preparation",
    "step_block",
    "step_circuit_00",
    "successor_superposition",
    "sweep_omega",
    "uniform_superposition",
    "viterbi_decode",
]
