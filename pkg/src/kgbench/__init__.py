"""kgbench: knowledge-graph embeddings and rule mining over one triple
store, evaluated under a tie-aware filtered ranking protocol, plus graph
topology profiling and relational classification."""

__version__ = "0.1.0"

from .errors import DataError, KgbenchError, NumericError, UsageError
from .kg import (
    HyperFact,
    KnowledgeGraph,
    Reifier,
    Triple,
    ingest_triples,
    load_dataset,
    load_kg,
    parse_hyperfacts,
    project_graph,
    reify,
    save_kg,
)
from .graphs import (
    UndirectedGraph,
    connected_components,
    meta_properties,
    profile_kg,
)
from .embed import (
    EmbeddingModel,
    TrainConfig,
    TrainResult,
    export_features,
    sample_negatives,
    score_complex,
    score_distmult,
    score_transe,
    train,
)
from .ranking import (
    CorruptionSet,
    RankResult,
    Scorer,
    corruption_set,
    evaluate,
    expected_rank,
    optimistic_rank,
    pessimistic_rank,
)
from .rules import (
    Atom,
    HornRule,
    RuleTheory,
    connected_relations,
    filter_degenerate,
    mine_rules,
    rule_scorer,
    theory_analytics,
)
from .classify import (
    CVResult,
    LabeledEntities,
    accuracy_difference,
    knn_classify,
    nested_cv,
    symbolic_cv,
)

__all__ = [
    "__version__",
    "DataError",
    "KgbenchError",
    "NumericError",
    "UsageError",
    "HyperFact",
    "KnowledgeGraph",
    "Reifier",
    "Triple",
    "ingest_triples",
    "load_dataset",
    "load_kg",
    "parse_hyperfacts",
    "project_graph",
    "reify",
    "save_kg",
    "UndirectedGraph",
    "connected_components",
    "meta_properties",
    "profile_kg",
    "EmbeddingModel",
    "TrainConfig",
    "TrainResult",
    "export_features",
    "sample_negatives",
    "score_complex",
    "score_distmult",
    "score_transe",
    "train",
    "CorruptionSet",
    "RankResult",
    "Scorer",
    "corruption_set",
    "evaluate",
    "expected_rank",
    "optimistic_rank",
    "pessimistic_rank",
    "Atom",
    "HornRule",
    "RuleTheory",
    "connected_relations",
    "filter_degenerate",
    "mine_rules",
    "rule_scorer",
    "theory_analytics",
    "CVResult",
    "LabeledEntities",
    "accuracy_difference",
    "knn_classify",
    "nested_cv",
    "symbolic_cv",
]
