"""entailkit: entailment reformulation for few-shot text classification.

Pipeline: load or generate labeled records, reformulate them as
premise/hypothesis training instances, optionally add unsupervised
contrastive pairs, then run the seeded K-shot evaluation protocol
against the builtin scoring backend or an external bridge process.
"""

from .augment import ArmParams, AugmentConfig, augment_aggressive, augment_positive, build_uca_set
from .backend import Backend, BackendConfig, BuiltinBackend, HashedTextClassifier, Hyperparams, get_backend
from .corpus import (
    Dataset,
    Metric,
    Record,
    TaskKind,
    TaskRegistry,
    TaskSpec,
    default_registry,
    gen_synthetic,
    gen_synthetic_nli,
    load_records,
    make_nli_task,
    make_task,
)
from .errors import BackendError, DataError, EntailkitError, ValidationError
from .metrics import accuracy, binary_f1, compute_metric, macro_f1, majority_class, pearson, sample_std
from .protocol import (
    FewShotSplit,
    RunReport,
    RunSpec,
    TaskBundle,
    ablate_descriptions,
    few_shot_split,
    format_score,
    multilingual_eval,
    plan_transfer,
    resolve_split,
    run_grid,
    run_protocol,
    run_single,
    sample_few_shot,
    transfer_sweep,
)
from .reformulate import (
    EflPlan,
    EntailmentInstance,
    collapse_nli,
    dump_instances,
    expand_for_inference,
    load_instances,
    predict_multiclass,
    reformulate_binary,
    reformulate_entailment,
    reformulate_multiclass,
    reformulate_native,
    reformulate_regression,
)
from .rng import Rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "ArmParams",
    "AugmentConfig",
    "Backend",
    "BackendConfig",
    "BackendError",
    "BuiltinBackend",
    "Dataset",
    "DataError",
    "EflPlan",
    "EntailkitError",
    "EntailmentInstance",
    "FewShotSplit",
    "HashedTextClassifier",
    "Hyperparams",
    "Metric",
    "Record",
    "Rng",
    "RunReport",
    "RunSpec",
    "TaskBundle",
    "TaskKind",
    "TaskRegistry",
    "TaskSpec",
    "ValidationError",
    "ablate_descriptions",
    "accuracy",
    "augment_aggressive",
    "augment_positive",
    "binary_f1",
    "build_uca_set",
    "collapse_nli",
    "compute_metric",
    "default_registry",
    "derive_seed",
    "dump_instances",
    "expand_for_inference",
    "few_shot_split",
    "format_score",
    "gen_synthetic",
    "gen_synthetic_nli",
    "get_backend",
    "load_instances",
    "load_records",
    "macro_f1",
    "majority_class",
    "make_nli_task",
    "make_task",
    "multilingual_eval",
    "pearson",
    "plan_transfer",
    "predict_multiclass",
    "reformulate_binary",
    "reformulate_entailment",
    "reformulate_multiclass",
    "reformulate_native",
    "reformulate_regression",
    "resolve_split",
    "run_grid",
    "run_protocol",
    "run_single",
    "sample_few_shot",
    "sample_std",
    "transfer_sweep",
]
