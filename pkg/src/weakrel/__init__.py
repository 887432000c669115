"""weakrel: sentence-level relation extraction learned from conflicting
labeling-function annotations, with context-aware true-label discovery."""

from .corpus import EntitySpan, RelationMention, Sentence, generate_mentions, load_corpus
from .errors import ConfigError, DataError
from .features import (
    FeatureBag,
    FeatureVocab,
    build_bags,
    build_vocab,
    encode,
    extract_features,
    load_brown_clusters,
)
from .inference import (
    MetricsReport,
    Prediction,
    classify,
    default_eta,
    evaluate_classification,
    evaluate_extraction,
    predict,
    predict_all,
    sweep_eta,
)
from .model import (
    Hyperparams,
    Model,
    ModelParams,
    entropy_over_relations,
    init_params,
    load_model,
    match_prob,
    mention_embedding,
    save_model,
    type_distribution,
)
from .supervision import (
    AnnotationSet,
    LabelSpace,
    LabelingFunction,
    PatternRule,
    annotate,
    apply_lf,
    conflict_stats,
    load_labeling_functions,
)
from .training import NoiseTable, TrainReport, train
from .truth import infer_true_label, jt_gradients, jt_local, majority_vote

__version__ = "0.1.0"
