"""Fine-tune a pretrained encoder on the train/validation manifest rows.

All parameters train; the checkpoint with the best validation G-measure
is kept. Test rows are never read during optimization: the loaders are
manifest-driven and only consume the train and validation splits.
"""
from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader, RandomSampler
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    DataCollatorWithPadding,
    get_linear_schedule_with_warmup,
)

from .config import BertRunConfig
from .data import (
    ReportDataset,
    TRAIN,
    VALIDATION,
    read_manifest,
    read_reports,
    resolve_device,
    select_reports,
)
from .scoring import summarize

logger = logging.getLogger(__name__)


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)


def _batch_probabilities(model, loader, device) -> list[float]:
    model.eval()
    probs: list[float] = []
    with torch.no_grad():
        for batch in loader:
            labels = batch.pop("labels", None)  # noqa: F841 - unused on purpose
            batch = {k: v.to(device) for k, v in batch.items()}
            logits = model(**batch).logits
            probs.extend(torch.softmax(logits, dim=-1)[:, 1].tolist())
    return probs


def fine_tune(
    dataset_csv: str | Path,
    manifest_path: str | Path,
    cfg: BertRunConfig,
    out_dir: str | Path,
) -> Path:
    """Train on the manifest's train rows, checkpoint on validation
    G-measure, and save the best model plus tokenizer and metadata.

    If training runs out of memory, halve the batch size (and halve again
    if needed); gradient quality degrades gracefully and the defaults
    assume a 12 GB card for the full-size encoder.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _seed_everything(cfg.seed)
    device = resolve_device()

    reports = read_reports(dataset_csv)
    manifest = read_manifest(manifest_path)
    train_reports = select_reports(reports, manifest, TRAIN)
    val_reports = select_reports(reports, manifest, VALIDATION)
    if not train_reports:
        raise ValueError("manifest has no train rows")
    if not val_reports:
        raise ValueError("manifest has no validation rows")

    tokenizer = AutoTokenizer.from_pretrained(cfg.encoder)
    model = AutoModelForSequenceClassification.from_pretrained(cfg.encoder, num_labels=2)
    model.to(device)
    limit = getattr(tokenizer, "model_max_length", cfg.max_length) or cfg.max_length
    max_length = min(cfg.max_length, int(limit))

    collator = DataCollatorWithPadding(tokenizer=tokenizer)
    generator = torch.Generator().manual_seed(cfg.seed)
    train_loader = DataLoader(
        ReportDataset(train_reports, tokenizer, max_length),
        batch_size=cfg.batch_size,
        sampler=RandomSampler(range(len(train_reports)), generator=generator),
        collate_fn=collator,
    )
    val_loader = DataLoader(
        ReportDataset(val_reports, tokenizer, max_length),
        batch_size=cfg.batch_size,
        collate_fn=collator,
    )

    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    total_steps = max(1, len(train_loader) * cfg.epochs)
    scheduler = get_linear_schedule_with_warmup(
        optimizer,
        num_warmup_steps=int(cfg.warmup_fraction * total_steps),
        num_training_steps=total_steps,
    )

    val_labels = [r.label for r in val_reports]
    best = {"g_measure": -1.0, "epoch": 0}
    history = []
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        epoch_loss = 0.0
        for batch in train_loader:
            batch = {k: v.to(device) for k, v in batch.items()}
            out = model(**batch)
            out.loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            epoch_loss += out.loss.item()
        val_metrics = summarize(_batch_probabilities(model, val_loader, device), val_labels)
        history.append({"epoch": epoch, "loss": epoch_loss, **val_metrics})
        logger.info(
            "epoch %d: loss %.4f, validation g %.3f", epoch, epoch_loss, val_metrics["g_measure"]
        )
        if val_metrics["g_measure"] > best["g_measure"]:
            best = {"g_measure": val_metrics["g_measure"], "epoch": epoch, **val_metrics}
            model.save_pretrained(out_dir)
            tokenizer.save_pretrained(out_dir)

    meta = {
        "encoder": cfg.encoder,
        "batch_size": cfg.batch_size,
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
        "max_length": max_length,
        "warmup_fraction": cfg.warmup_fraction,
        "seed": cfg.seed,
        "best": best,
        "history": history,
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return out_dir
