"""Structure-only graph attacks, topological attributes, and forest detection."""

__version__ = "0.1.0"

from .attacks import (
    ATTACKS,
    AttackPlan,
    attack_gradargmax,
    attack_meta,
    attack_nettack,
    class_scores_from_labels,
    meta_gradient_proxy,
    nettack_objective,
    plan_succeeds,
    run_attack,
    surrogate_argmax,
    surrogate_class_scores,
)
from .attributes import (
    ATTRIBUTE_NAMES,
    NodeAttributeExtractor,
    attribute_matrix,
    attribute_vector,
    betweenness_centrality,
    closeness_centrality,
    clustering_coefficient,
    eigenvector_centrality,
    subgraph_attributes,
)
from .config import AttackSpec, ConfigError, RunConfig, SyntheticSpec, load_config
from .detection import (
    DetectionDataset,
    DetectionSample,
    EmptyResultError,
    MetricsReport,
    RecognitionReport,
    build_detection_dataset,
    evaluate_detector,
    recognize_attack,
    top_k_sweep,
)
from .forest import GiniForestClassifier, gini_impurity, grow_tree
from .generators import (
    SYNTHETIC_MODELS,
    barabasi_albert_edges,
    block_labels,
    erdos_renyi_edges,
    generate_core_fringe_graph,
    generate_synthetic,
)
from .graph import (
    EdgeFlip,
    EgoSubgraph,
    Graph,
    ParseError,
    ego_subgraph,
    load_graph,
    load_graph_with_mapping,
    write_edge_list,
    write_labels,
)
from .metrics import auc_score, precision_score, relative_gain
from .pipeline import run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
