"""Aggregation of local black-box explanations into general association
rules (characteristic or discriminative), with fidelity evaluation."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CHARACTERISTIC,
    DISCRIMINATIVE,
    AssociationRule,
    BlackBoxPredictions,
    ClassLabel,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    FitError,
    IntegrityError,
    Item,
    MiningConfig,
    Prediction,
    SchemaError,
    UnknownCategoryError,
    canonical_render,
    class_item,
    load_schema,
    parse_rule,
    save_schema,
)
from .preprocess import EncodedInstance, encode, encode_dataset, fit_bins, matches  # noqa: F401
from .itemsets import (  # noqa: F401
    ExplanationItemset,
    LocalExplanation,
    generate_explanation_itemsets,
    itemsets_from_rule_form,
    itemsets_from_score_form,
)
from .mining import FrequentItemset, derive_rules, frequent_itemsets  # noqa: F401
from .filtering import RuleSet, filter_orientation, prune_subsumed  # noqa: F401
from .evaluate import (  # noqa: F401
    FidelityReport,
    RuleClassifier,
    fidelity,
    fit,
    mann_whitney_auc,
    predict,
)
from .reference import (  # noqa: F401
    DecisionTree,
    explain_occlusion,
    predict_label,
    predict_proba,
    train_tree,
)
from .pipeline import PipelineConfig, run_pipeline  # noqa: F401
