"""Transformer arm for security bug report prediction.

Fine-tunes a pretrained bidirectional encoder with a sequence
classification head on a bug-report CSV plus split manifest, and emits a
predictions file (issue_id, probability) that the forest-side harness
scores through its external-predictions endpoint.
"""

__version__ = "0.1.0"

from .config import BertRunConfig  # noqa: F401
from .train import fine_tune  # noqa: F401
from .predict import evaluate_split, predict  # noqa: F401
