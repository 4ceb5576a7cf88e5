"""GERN: scalable GCN training on random path graphs.

Per epoch, training sees only a sparsified view of the input graph: a random
spanning tree flattened into a path by a depth-first visit.  The package also
ships the machinery those paths are justified by: exact and Monte-Carlo
effective resistance, cut-size accounting, a sequential nearest-neighbor
predictor, and over-smoothing / over-squashing diagnostics.
"""

__version__ = "0.1.0"

from .backend import BACKEND
from .errors import (
    ClassTooSmall,
    CouldNotConnect,
    DisconnectedGraph,
    EdgeSetMismatch,
    EmptySubset,
    GernError,
    InvalidDims,
    InvalidIndex,
    InvalidStart,
    LengthMismatch,
    MissingEdgeResistance,
    MissingFile,
    NonFiniteActivation,
    NonFiniteLoss,
    NumericalFailure,
    ParseError,
    ShapeMismatch,
    SizeCapExceeded,
    StaleCache,
    StepCapExceeded,
)
from .graph import Graph, Split, Subgraph, build_graph, cutsize, k_hop_neighborhood
from .linearize import PathGraph, dfs_linearize, path_cutsize
from .rng import RngStream
from .spanning import (
    SpanningTree,
    a_rst,
    aldous_broder,
    compare_frequency_tables,
    edge_inclusion_frequencies,
    random_bfs_tree,
    sample_tree,
    wilson,
)
from .resistance import (
    effective_resistance_exact,
    effective_resistance_mc,
    laplacian_pseudoinverse,
    resistance_weighted_cutsize,
)
from .gnn import (
    AdamState,
    GCNModel,
    NormalizedAdjacency,
    adam_step,
    accuracy,
    cross_entropy_loss,
    gcn_backward,
    gcn_forward,
    glorot_init,
)
from .trainer import TrainConfig, TrainResult, evaluate, lr_schedule_step, train_gern
from .wta import wta_expected_mistakes, wta_play
from .diagnostics import (
    oversmoothing_curve,
    oversmoothing_metric,
    oversquashing_experiment,
    oversquashing_influence,
)
from .datasets import (
    DatasetBundle,
    load_bundle,
    make_split,
    save_bundle,
    synth_clique_chain,
    synth_sbm,
)

__all__ = [
    "BACKEND",
    "GernError",
    "ClassTooSmall",
    "CouldNotConnect",
    "DisconnectedGraph",
    "EdgeSetMismatch",
    "EmptySubset",
    "InvalidDims",
    "InvalidIndex",
    "InvalidStart",
    "LengthMismatch",
    "MissingEdgeResistance",
    "MissingFile",
    "NonFiniteActivation",
    "NonFiniteLoss",
    "NumericalFailure",
    "ParseError",
    "ShapeMismatch",
    "SizeCapExceeded",
    "StaleCache",
    "StepCapExceeded",
    "Graph",
    "Split",
    "Subgraph",
    "build_graph",
    "cutsize",
    "k_hop_neighborhood",
    "PathGraph",
    "dfs_linearize",
    "path_cutsize",
    "RngStream",
    "SpanningTree",
    "a_rst",
    "aldous_broder",
    "compare_frequency_tables",
    "edge_inclusion_frequencies",
    "random_bfs_tree",
    "sample_tree",
    "wilson",
    "effective_resistance_exact",
    "effective_resistance_mc",
    "laplacian_pseudoinverse",
    "resistance_weighted_cutsize",
    "AdamState",
    "GCNModel",
    "NormalizedAdjacency",
    "adam_step",
    "accuracy",
    "cross_entropy_loss",
    "gcn_backward",
    "gcn_forward",
    "glorot_init",
    "TrainConfig",
    "TrainResult",
    "evaluate",
    "lr_schedule_step",
    "train_gern",
    "wta_expected_mistakes",
    "wta_play",
    "oversmoothing_curve",
    "oversmoothing_metric",
    "oversquashing_experiment",
    "oversquashing_influence",
    "DatasetBundle",
    "load_bundle",
    "make_split",
    "save_bundle",
    "synth_clique_chain",
    "synth_sbm",
]
