"""Embedded transactional graph database for higher-order structures.

Hypergraphs, simplicial complexes, node-tuples and subgraph collections are
stored losslessly in a typed labeled property graph with ACID transactions,
a write-ahead log, secondary indexes, path traversal and tensor export.
"""

from .api import DeleteResult, EntityPattern, HigherOrderDB
from .errors import (
    BadParams,
    ClosureViolation,
    Conflict,
    CorruptWal,
    DanglingReference,
    DuplicateIndex,
    HogdbError,
    InvalidValue,
    MalformedLowering,
    MissingKey,
    ParseError,
    RaggedFeatures,
    ReservedLabel,
    TooLarge,
    TxnClosed,
    UnboundVariable,
    UnknownEdge,
    UnknownIndex,
    UnknownKindTransition,
    UnknownNode,
    UnknownSubgraph,
    ValidationFailed,
)
from .model import (
    Edge,
    HigherOrderGraph,
    HyperEdge,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
    Violation,
    missing_faces,
    new_uid,
    validate,
)
from .query import Path, PathElement, TraversalResult, export_edge_index, export_node_features, traverse_path
from .store import LpgStore, Stats
from .transform import (
    canonical_form_small,
    expected_size,
    fingerprint,
    lift,
    lift_hypergraph,
    lift_simplicial,
    lift_subgraph_graph,
    lift_tuple_graph,
    lower,
    lower_hypergraph,
    lower_simplicial,
    lower_subgraph_graph,
    lower_tuple_graph,
)
from .txn import Database, Transaction, recover

__version__ = "0.1.0"

__all__ = [
    "BadParams",
    "ClosureViolation",
    "Conflict",
    "CorruptWal",
    "DanglingReference",
    "Database",
    "DeleteResult",
    "DuplicateIndex",
    "Edge",
    "EntityPattern",
    "HigherOrderDB",
    "HigherOrderGraph",
    "HogdbError",
    "HyperEdge",
    "InvalidValue",
    "LpgStore",
    "MalformedLowering",
    "MissingKey",
    "Node",
    "NodeTuple",
    "ParseError",
    "Path",
    "PathElement",
    "RaggedFeatures",
    "ReservedLabel",
    "Simplex",
    "Stats",
    "Subgraph",
    "SubgraphEdge",
    "TooLarge",
    "Transaction",
    "TraversalResult",
    "TxnClosed",
    "UnboundVariable",
    "UnknownEdge",
    "UnknownIndex",
    "UnknownKindTransition",
    "UnknownNode",
    "UnknownSubgraph",
    "ValidationFailed",
    "Violation",
    "canonical_form_small",
    "expected_size",
    "export_edge_index",
    "export_node_features",
    "fingerprint",
    "lift",
    "lift_hypergraph",
    "lift_simplicial",
    "lift_subgraph_graph",
    "lift_tuple_graph",
    "lower",
    "lower_hypergraph",
    "lower_simplicial",
    "lower_subgraph_graph",
    "lower_tuple_graph",
    "missing_faces",
    "new_uid",
    "recover",
    "traverse_path",
    "validate",
]
