"""Shared-format IO: bug-report CSV, split manifest, predictions file.

These mirror the formats the forest-side workbench reads and writes, so
the two components only ever meet through files.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import Dataset

REQUIRED_COLUMNS = ("issue_id", "summary", "description", "security")

TRAIN = "train"
VALIDATION = "validation"
TEST = "test"


class CoverageError(ValueError):
    """Manifest and dataset ids do not line up."""


@dataclass(frozen=True)
class Report:
    id: str
    text: str
    label: int  # 1 = security


def read_reports(path: str | Path) -> list[Report]:
    path = Path(path)
    out: list[Report] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise ValueError(f"{path.name}: missing required column {col!r}")
        for row in reader:
            issue_id = (row.get("issue_id") or "").strip()
            if not issue_id or issue_id in seen:
                raise ValueError(f"{path.name}: row {reader.line_num}: bad or duplicate id")
            security = (row.get("security") or "").strip()
            if security not in ("0", "1"):
                raise ValueError(
                    f"{path.name}: row {reader.line_num}: security must be 0 or 1"
                )
            summary = row.get("summary") or ""
            description = row.get("description") or ""
            if not summary.strip() and not description.strip():
                continue
            seen.add(issue_id)
            out.append(
                Report(id=issue_id, text=f"{summary} {description}", label=int(security))
            )
    return out


def read_manifest(path: str | Path) -> dict[str, list[str]]:
    """Split name -> ordered id list."""
    path = Path(path)
    out: dict[str, list[str]] = {TRAIN: [], VALIDATION: [], TEST: []}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "issue_id" not in reader.fieldnames or "split" not in reader.fieldnames:
            raise ValueError(f"{path.name}: manifest needs issue_id and split columns")
        for row in reader:
            split = row["split"]
            if split not in out:
                raise ValueError(f"{path.name}: unknown split {split!r}")
            out[split].append(row["issue_id"])
    return out


def select_reports(
    reports: list[Report], manifest: dict[str, list[str]], split: str
) -> list[Report]:
    """The manifest's rows for one split, in manifest order.

    Every manifest id must exist in the dataset; training never sees
    test rows because selection is manifest-driven.
    """
    by_id = {r.id: r for r in reports}
    missing = [i for ids in manifest.values() for i in ids if i not in by_id]
    if missing:
        raise CoverageError(
            f"manifest ids absent from the dataset: {missing[:10]}"
            f"{'...' if len(missing) > 10 else ''} ({len(missing)} total)"
        )
    return [by_id[i] for i in manifest[split]]


class ReportDataset(Dataset):
    """Tokenized reports; padding happens per batch in the collator."""

    def __init__(self, reports: list[Report], tokenizer, max_length: int):
        self.reports = reports
        self.tokenizer = tokenizer
        self.max_length = max_length

    def __len__(self) -> int:
        return len(self.reports)

    def __getitem__(self, idx: int) -> dict:
        report = self.reports[idx]
        encoded = self.tokenizer(
            report.text,
            truncation=True,
            max_length=self.max_length,
        )
        item = {k: v for k, v in encoded.items()}
        item["labels"] = report.label
        return item


def write_predictions(path: str | Path, rows: list[tuple[str, float]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "probability"])
        for issue_id, p in rows:
            writer.writerow([issue_id, repr(float(p))])


def resolve_device() -> torch.device:
    return torch.device("cuda" if torch.cuda.is_available() else "cpu")
