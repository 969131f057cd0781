"""Information-flow inference over directed contact networks.

A directed contact network is a finite set of timestamped directed
contacts (source, target, time).  This package builds the time-expanded
digraph of such a network, computes per-window absorbing-chain flow
probabilities, composes and persists them, checks continuous-time
embeddability where a criterion exists, and flags rare high-probability
flows against configurable thresholds.
"""

from .core import (
    NEG_INF,
    POS_INF,
    Contact,
    Dcn,
    TemporalDigraph,
    TemporalFiber,
    WindowGrid,
    build_temporal_digraph,
    grid_from_count,
    restrict,
    restricted_temporal_digraph,
    sanitize_grid,
    temporal_fiber,
    uniform_grid,
    validate_dcn,
)
from .detection import (
    BOOLEAN,
    NATURAL,
    ConfusionTallies,
    DetectionConfig,
    DetectionReport,
    GroundTruth,
    build_report,
    confusion,
    exceedance_counts,
    flagged_indices,
    ground_truth,
    rates_and_values,
    threshold_sweep,
    truth_indices,
)
from .embeddability import (
    REASON_ACYCLIC,
    REASON_NEGATIVE_DET,
    REASON_NO_CRITERION,
    REASON_POSITIVE_DET,
    STATUS_EMBEDDABLE,
    STATUS_NOT_EMBEDDABLE,
    STATUS_UNKNOWN,
    EmbeddabilityVerdict,
    check_embeddable,
    is_acyclic,
    log_upper_triangular_2x2,
)
from .errors import (
    GridError,
    IntegrityError,
    NumericalError,
    OracleError,
    ParameterError,
    ParseError,
    PolicyError,
    PreconditionError,
    TrivialNetworkError,
    ValidationError,
)
from .ingest import (
    EventSummary,
    VerbPolicy,
    default_policy,
    events_to_contacts,
    parse_contacts,
    parse_events,
    parse_policy,
    parse_synth_config,
    parse_truth,
    read_flows,
    write_contacts,
    write_flows,
    write_truth,
)
from .markov import (
    FlowMatrix,
    ModelParams,
    TransitionMatrix,
    absorption,
    compose,
    default_beta,
    default_epsilon,
    optimal_window_count,
    reverse_dcn,
    row_distance,
    transition_matrix,
    window_flows,
)
from .oracle import (
    MonteCarloResult,
    coherent_reachability,
    monte_carlo_absorption,
    topo_absorption,
)
from .synth import AnomalySpec, SynthConfig, degrade, generate

__version__ = "0.1.0"

__all__ = [
    "NEG_INF",
    "POS_INF",
    "Contact",
    "Dcn",
    "TemporalDigraph",
    "TemporalFiber",
    "WindowGrid",
    "build_temporal_digraph",
    "grid_from_count",
    "restrict",
    "restricted_temporal_digraph",
    "sanitize_grid",
    "temporal_fiber",
    "uniform_grid",
    "validate_dcn",
    "BOOLEAN",
    "NATURAL",
    "ConfusionTallies",
    "DetectionConfig",
    "DetectionReport",
    "GroundTruth",
    "build_report",
    "confusion",
    "exceedance_counts",
    "flagged_indices",
    "ground_truth",
    "rates_and_values",
    "threshold_sweep",
    "truth_indices",
    "EmbeddabilityVerdict",
    "REASON_ACYCLIC",
    "REASON_NEGATIVE_DET",
    "REASON_NO_CRITERION",
    "REASON_POSITIVE_DET",
    "STATUS_EMBEDDABLE",
    "STATUS_NOT_EMBEDDABLE",
    "STATUS_UNKNOWN",
    "check_embeddable",
    "is_acyclic",
    "log_upper_triangular_2x2",
    "GridError",
    "IntegrityError",
    "NumericalError",
    "OracleError",
    "ParameterError",
    "ParseError",
    "PolicyError",
    "PreconditionError",
    "TrivialNetworkError",
    "ValidationError",
    "EventSummary",
    "VerbPolicy",
    "default_policy",
    "events_to_contacts",
    "parse_contacts",
    "parse_events",
    "parse_policy",
    "parse_synth_config",
    "parse_truth",
    "read_flows",
    "write_contacts",
    "write_flows",
    "write_truth",
    "FlowMatrix",
    "ModelParams",
    "TransitionMatrix",
    "absorption",
    "compose",
    "default_beta",
    "default_epsilon",
    "optimal_window_count",
    "reverse_dcn",
    "row_distance",
    "transition_matrix",
    "window_flows",
    "MonteCarloResult",
    "coherent_reachability",
    "monte_carlo_absorption",
    "topo_absorption",
    "AnomalySpec",
    "SynthConfig",
    "degrade",
    "generate",
    "__version__",
]
