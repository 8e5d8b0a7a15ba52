"""Security bug report prediction workbench.

Reproduces an SBR-prediction methodology end to end: corpus ingestion
with chronological train/test splits, FARSEC keyword filtering, a
from-scratch random forest over TF-IDF features with differential
evolution tuning, data augmentation across projects, within- and
cross-project evaluation, and a five-metric report (recall, precision,
F1, false-positive rate, G-measure).
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    BugReport,
    Dataset,
    SplitPair,
    load_dataset,
    sort_chronological,
    split_half,
    split_train_validation,
)
from .farsec import FarsecConfig, FarsecFilter, KeywordTable, filter_nsbrs  # noqa: F401
from .features import TfidfFeaturizer, Vocabulary, build_vocabulary, tokenize  # noqa: F401
from .forest import HyperParams, RandomForestSbrClassifier, classify, train_forest  # noqa: F401
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics, confusion  # noqa: F401
from .tune import Bound, DeConfig, optimize  # noqa: F401
