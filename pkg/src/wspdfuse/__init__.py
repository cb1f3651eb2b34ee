"""Well-separated pair decompositions as a pruning step for power-weighted path clustering."""

from .clustering import ClusterAssignment, farthest_point_init, kmedoids
from .datagen import DistributionSpec, generate
from .estimators import PowerWeightedKMedoids, PowerWeightedKNN, WellSeparatedPairDecomposition, WSPDPrunedClustering
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    DisconnectedGraphError,
    PointSetError,
    StageError,
    WspdFuseError,
)
from .geometry import Ball, PointSet, ball_gap, euclidean_distance, min_enclosing_ball, power_distance, validate_point_set
from .path_metric import PathParams, build_candidate_graph, pwspm_all_pairs, pwspm_knn
from .pipeline import FusionConfig, run_fusion
from .split_tree import SplitTree, build_split_tree
from .wspd import Realization, WspdPair, find_pairs, is_well_separated, largest_pair, realize

__version__ = "0.1.0"
