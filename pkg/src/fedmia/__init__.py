"""Federated training strategies with built-in membership-inference auditing."""

from fedmia.attacks import (
    AttackScoreSet,
    GaussianStats,
    ShadowContext,
    entropy_score,
    entropy_scores,
    fit_gaussian,
    lira_score,
    lira_scores_from_phis,
    logit_confidence,
    logit_confidences,
    mentr_score,
    mentr_scores,
    run_attack,
    run_lira,
)
from fedmia.config import ExperimentConfig, parse_config
from fedmia.datasets import Dataset, make_clusters
from fedmia.estimator import FederatedClassifier
from fedmia.federation import (
    STRATEGIES,
    CommLedger,
    RoundConfig,
    TrainedEnsemble,
    aggregate_prototypes,
    aggregate_weights,
    ledger_bytes,
    local_update,
    run_strategy,
)
from fedmia.harness import (
    CrossValidationResult,
    ModelHandle,
    ResultsRow,
    SplitPlan,
    cross_validate,
    make_splits,
    train_model,
)
from fedmia.metrics import RocCurve, accuracy, auc, roc_curve, tpr_at_fpr
from fedmia.network import (
    Architecture,
    FeatureTable,
    Gradients,
    ModelParams,
    class_prototypes,
    extract_features,
    forward,
    init_network,
    loss_and_grad,
    proximal_grad,
    retrieval_predict,
    sgd_step,
    softmax,
)
from fedmia.results import emit_results, rows_to_records, write_roc_points

__all__ = [
    "Architecture",
    "AttackScoreSet",
    "CommLedger",
    "CrossValidationResult",
    "Dataset",
    "ExperimentConfig",
    "FeatureTable",
    "FederatedClassifier",
    "GaussianStats",
    "Gradients",
    "ModelHandle",
    "ModelParams",
    "ResultsRow",
    "RocCurve",
    "RoundConfig",
    "STRATEGIES",
    "ShadowContext",
    "SplitPlan",
    "TrainedEnsemble",
    "accuracy",
    "aggregate_prototypes",
    "aggregate_weights",
    "auc",
    "class_prototypes",
    "cross_validate",
    "emit_results",
    "entropy_score",
    "entropy_scores",
    "extract_features",
    "fit_gaussian",
    "forward",
    "init_network",
    "ledger_bytes",
    "lira_score",
    "lira_scores_from_phis",
    "local_update",
    "logit_confidence",
    "logit_confidences",
    "loss_and_grad",
    "make_clusters",
    "make_splits",
    "mentr_score",
    "mentr_scores",
    "parse_config",
    "proximal_grad",
    "retrieval_predict",
    "roc_curve",
    "rows_to_records",
    "run_attack",
    "run_lira",
    "run_strategy",
    "sgd_step",
    "softmax",
    "tpr_at_fpr",
    "train_model",
    "write_roc_points",
]
