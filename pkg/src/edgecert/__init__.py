"""Certified-robust graph explanations via hash division and majority voting."""

__version__ = "0.1.0"

from .backend import BACKEND, NUMBA_AVAILABLE
from .certify import (
    Certificate,
    certificate_from_obj,
    certificate_to_obj,
    certify,
    classifier_bound,
    explainer_bound,
    pipeline_digest,
    runner_up_label,
)
from .datasets import DatasetSpec, dataset_stats, generate, motif_graph, motif_size
from .division import (
    DivisionConfig,
    DivisionConfigError,
    HybridSubgraphSet,
    build_hybrid,
    count_differing_subgraphs,
    divide_complete,
    divide_graph,
    edge_subgraph_index,
    mix_indexes,
)
from .gcn import (
    GcnClassifier,
    GcnParams,
    TrainConfig,
    gcn_backward,
    gcn_forward,
    load_params,
    normalized_adjacency,
    save_params,
    train_classifier,
)
from .graphs import (
    Edge,
    Graph,
    GraphFormatError,
    InvalidEdgeError,
    canonical_edge,
    canonical_edge_set,
    complement_edges,
    complete_edges,
    flip_edges,
    load_dataset,
    load_graph,
    make_graph,
    save_dataset,
    save_graph,
)
from .models import (
    CachingClassifier,
    CachingExplainer,
    Classifier,
    Explainer,
    OcclusionExplainer,
    predict_label,
)
from .motifs import MotifMatchClassifier, has_motif, motif_match
from .oracle import (
    AttackReport,
    EnumerationCapError,
    Violation,
    enumerate_perturbations,
    verify_certificate,
    verify_certificate_all,
    verify_subgraph_bound,
)
from .voting import (
    ExplanationResult,
    VoteTally,
    explanation_from_obj,
    explanation_to_obj,
    gamma_threshold,
    make_tally,
    tally_classes,
    tally_edges,
    tally_from_obj,
    tally_to_obj,
    vote_explain,
)
