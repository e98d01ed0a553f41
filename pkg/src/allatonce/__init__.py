"""Exact all-at-once inference over constraint-graph models.

Enumerate (or weight-count) every microstate a law allows, give each one
equal prior weight, condition on what has been learned, and read off exact
rational probabilities.
"""

from .errors import (
    AaoError,
    ContradictionError,
    EvidenceError,
    GeometryError,
    GeometryPriorError,
    NotAPathError,
    ScopeError,
    SizeGuardError,
    UnknownNodeError,
    ZeroSupportError,
)
from .model import (
    DEFAULT_LAW,
    TRUE,
    Always,
    And,
    EdgeIs,
    Evidence,
    Geometry,
    GeometryIs,
    Law,
    NodeEquals,
    NodeIs,
    NodesSame,
    Not,
    Or,
    Predicate,
    build_geometry,
    evaluate_predicate,
    validate_evidence,
)
from .oracle import Microstate, MicrostateCount, count_matching, enumerate_microstates
from .weighted import (
    WeightedCount,
    edge_multiplicity,
    eliminate_chain,
    partition_function,
    weighted_count,
)
from .inference import (
    ClassicalInfoState,
    GeometryConditionalTable,
    JointTable,
    UpdateSession,
    deduce_colors,
    geometry_conditional,
    independence_check,
    info_state,
    joint_table,
    probability,
    update,
)
from .dsl import ModelDocument, parse_model, parse_query, serialize_model

__version__ = "0.1.0"
