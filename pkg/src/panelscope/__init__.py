"""Panel-transition annotation, classification, and narrative analysis toolkit."""

from panelscope.corpus import (
    AnnotationRecord,
    BookMeta,
    Corpus,
    GenreGroup,
    Panel,
    PanelPair,
    TransitionLabel,
    extract_pairs,
    genre_group_of,
    label_distribution,
    load_corpus,
    save_corpus,
)
from panelscope.agreement import (
    ConfusionMatrix,
    KappaScore,
    build_confusion,
    cohen_kappa,
    interpret_kappa,
)
from panelscope.features import FeatureStore, load_features, pair_feature
from panelscope.classifier import MlpParams, TrainConfig, TransitionClassifier
from panelscope.clustering import ElbowReport, ClusterModel, TransitionKMeans, elbow
from panelscope.seqmine import Pattern, PageSequence, ngram_counts, page_sequences, top_k

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "BookMeta",
    "ClusterModel",
    "ConfusionMatrix",
    "Corpus",
    "ElbowReport",
    "FeatureStore",
    "GenreGroup",
    "KappaScore",
    "MlpParams",
    "Panel",
    "PanelPair",
    "Pattern",
    "PageSequence",
    "TrainConfig",
    "TransitionClassifier",
    "TransitionKMeans",
    "TransitionLabel",
    "build_confusion",
    "cohen_kappa",
    "elbow",
    "extract_pairs",
    "genre_group_of",
    "interpret_kappa",
    "label_distribution",
    "load_corpus",
    "load_features",
    "ngram_counts",
    "page_sequences",
    "pair_feature",
    "save_corpus",
    "top_k",
]
