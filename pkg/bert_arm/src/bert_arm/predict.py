"""Inference over manifest splits and the shared predictions file."""
from __future__ import annotations

from pathlib import Path

import torch
from torch.utils.data import DataLoader
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    DataCollatorWithPadding,
)

from .data import (
    ReportDataset,
    TEST,
    read_manifest,
    read_reports,
    resolve_device,
    select_reports,
    write_predictions,
)
from .scoring import summarize


def _probabilities(model_dir, reports, batch_size: int) -> list[float]:
    device = resolve_device()
    tokenizer = AutoTokenizer.from_pretrained(model_dir)
    model = AutoModelForSequenceClassification.from_pretrained(model_dir)
    model.to(device)
    model.eval()
    limit = getattr(tokenizer, "model_max_length", 512) or 512
    loader = DataLoader(
        ReportDataset(reports, tokenizer, int(limit)),
        batch_size=batch_size,
        collate_fn=DataCollatorWithPadding(tokenizer=tokenizer),
    )
    probs: list[float] = []
    with torch.no_grad():
        for batch in loader:
            batch.pop("labels", None)
            batch = {k: v.to(device) for k, v in batch.items()}
            logits = model(**batch).logits
            probs.extend(torch.softmax(logits, dim=-1)[:, 1].tolist())
    return probs


def predict(
    model_dir: str | Path,
    dataset_csv: str | Path,
    manifest_path: str | Path,
    out_csv: str | Path,
    split: str = TEST,
    batch_size: int = 32,
) -> Path:
    """Write (issue_id, probability) for every id of the manifest split."""
    reports = read_reports(dataset_csv)
    manifest = read_manifest(manifest_path)
    selected = select_reports(reports, manifest, split)
    if not selected:
        raise ValueError(f"manifest has no {split!r} rows")
    probs = _probabilities(model_dir, selected, batch_size)
    write_predictions(out_csv, list(zip((r.id for r in selected), probs)))
    return Path(out_csv)


def evaluate_split(
    model_dir: str | Path,
    dataset_csv: str | Path,
    manifest_path: str | Path,
    split: str = TEST,
    batch_size: int = 32,
) -> dict[str, float]:
    """Metrics of the saved model on one manifest split."""
    reports = read_reports(dataset_csv)
    manifest = read_manifest(manifest_path)
    selected = select_reports(reports, manifest, split)
    if not selected:
        raise ValueError(f"manifest has no {split!r} rows")
    probs = _probabilities(model_dir, selected, batch_size)
    return summarize(probs, [r.label for r in selected])
