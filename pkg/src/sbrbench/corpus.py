"""Bug-report corpus: loading, chronological ordering, and splitting.

A dataset is an immutable, ordered collection of bug reports. The text of
a report is the summary and description merged with a single space; the
label is SBR when the security column is 1, NSBR otherwise. Chronological
order defaults to ascending issue id because the replication datasets
carry no timestamp column; an explicit numeric order column can override.
"""
from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateIdError, RowError, SchemaError, SizeError
from .metrics import NSBR, SBR

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("issue_id", "summary", "description", "security")

TRAIN = "train"
VALIDATION = "validation"
TEST = "test"


@dataclass(frozen=True, slots=True)
class BugReport:
    id: str
    text: str
    label: str
    rank: int
    order_value: float | None = None

    @property
    def is_sbr(self) -> bool:
        return self.label == SBR


@dataclass(frozen=True)
class Dataset:
    name: str
    reports: tuple[BugReport, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        prev_rank = -1
        for r in self.reports:
            if r.id in seen:
                raise DuplicateIdError(f"duplicate issue id {r.id!r} in dataset {self.name!r}")
            seen.add(r.id)
            if r.rank <= prev_rank:
                raise ValueError(
                    f"ranks must be strictly increasing in dataset {self.name!r}"
                )
            prev_rank = r.rank

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    @property
    def n_sbr(self) -> int:
        return sum(1 for r in self.reports if r.is_sbr)

    @property
    def n_nsbr(self) -> int:
        return len(self.reports) - self.n_sbr

    def class_counts(self) -> tuple[int, int]:
        """(SBR count, NSBR count)."""
        s = self.n_sbr
        return s, len(self.reports) - s

    def ids(self) -> list[str]:
        return [r.id for r in self.reports]

    def replace_reports(self, reports: Iterable[BugReport]) -> "Dataset":
        return Dataset(name=self.name, reports=tuple(reports))


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    validation_fraction: float = 0.1

    def __post_init__(self) -> None:
        train_ids = set(self.train.ids())
        test_ids = set(self.test.ids())
        if train_ids & test_ids:
            raise ValueError("train and test overlap by id")
        if self.train.reports and self.test.reports:
            if max(r.rank for r in self.train) >= min(r.rank for r in self.test):
                raise ValueError("every train rank must precede every test rank")
        if not 0.0 <= self.validation_fraction <= 1.0:
            raise ValueError("validation_fraction must lie in [0, 1]")


def load_dataset(path: str | Path, name: str, order_column: str | None = None) -> Dataset:
    """Load a bug-report CSV (issue_id, summary, description, security).

    Row order is preserved as the provisional rank. Rows where both text
    fields are empty are skipped and counted, not fatal. ``order_column``
    names an optional extra column holding a numeric chronological key.
    """
    path = Path(path)
    reports: list[BugReport] = []
    seen: set[str] = set()
    skipped_empty = 0
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path.name}: missing required column {col!r}")
        if order_column is not None and order_column not in header:
            raise SchemaError(f"{path.name}: missing order column {order_column!r}")
        for row in reader:
            line = reader.line_num
            issue_id = (row.get("issue_id") or "").strip()
            if not issue_id:
                raise RowError(f"{path.name}: row {line}: empty issue_id")
            if issue_id in seen:
                raise DuplicateIdError(f"{path.name}: row {line}: duplicate issue id {issue_id!r}")
            security = (row.get("security") or "").strip()
            if security not in ("0", "1"):
                raise RowError(
                    f"{path.name}: row {line}: security must be 0 or 1, got {security!r}"
                )
            summary = row.get("summary") or ""
            description = row.get("description") or ""
            if not summary.strip() and not description.strip():
                skipped_empty += 1
                continue
            order_value: float | None = None
            if order_column is not None:
                raw = (row.get(order_column) or "").strip()
                try:
                    order_value = float(raw)
                except ValueError:
                    raise RowError(
                        f"{path.name}: row {line}: unparseable order key {raw!r}"
                    ) from None
            seen.add(issue_id)
            reports.append(
                BugReport(
                    id=issue_id,
                    text=f"{summary} {description}",
                    label=SBR if security == "1" else NSBR,
                    rank=len(reports),
                    order_value=order_value,
                )
            )
    if skipped_empty:
        logger.warning(
            "%s: skipped %d rows with empty summary and description", path.name, skipped_empty
        )
    return Dataset(name=name, reports=tuple(reports))


def _id_sort_key(dataset: Dataset):
    ids = [r.id for r in dataset]
    try:
        numeric = {i: int(i) for i in ids}
    except ValueError:
        return lambda r: r.id
    return lambda r: numeric[r.id]


def sort_chronological(dataset: Dataset, order_key: str = "id") -> Dataset:
    """Reorder reports by the chronological key and reassign ranks 0..n-1.

    ``order_key`` is ``"id"`` (ascending issue id, numeric when every id
    parses as an integer) or ``"column"`` (the order column captured at
    load time). Sorting is stable: equal keys keep their original order.
    """
    if order_key == "id":
        key = _id_sort_key(dataset)
    elif order_key == "column":
        missing = [r.id for r in dataset if r.order_value is None]
        if missing:
            raise RowError(
                f"dataset {dataset.name!r}: no order value for ids {missing[:5]}"
            )
        key = lambda r: r.order_value  # noqa: E731
    else:
        raise ValueError(f"unknown order_key {order_key!r}")
    ordered = sorted(dataset.reports, key=key)
    reranked = tuple(
        BugReport(id=r.id, text=r.text, label=r.label, rank=i, order_value=r.order_value)
        for i, r in enumerate(ordered)
    )
    return Dataset(name=dataset.name, reports=reranked)


def split_half(dataset: Dataset) -> SplitPair:
    """First floor(n/2) reports train, the rest test.

    The dataset must already be in chronological order.
    """
    n = len(dataset)
    if n < 2:
        raise SizeError(f"dataset {dataset.name!r} has {n} reports; need at least 2 to split")
    cut = n // 2
    train = Dataset(name=dataset.name, reports=dataset.reports[:cut])
    test = Dataset(name=dataset.name, reports=dataset.reports[cut:])
    return SplitPair(train=train, test=test)


def validation_split_mode(train: Dataset, fraction: float) -> str:
    """"stratified" when both classes can fill a proportional quota,
    "random" otherwise."""
    s, ns = train.class_counts()
    return "stratified" if s >= 1.0 / fraction and ns >= 1.0 / fraction else "random"


def split_train_validation(
    train: Dataset, fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Random (training, validation) partition with exactly round(fraction*n)
    validation reports.

    Stratified by class when both classes have at least 1/fraction members,
    plain random otherwise; the fallback is logged. Deterministic for a
    given seed; both outputs preserve the input order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n = len(train)
    n_val = round(fraction * n)
    rng = random.Random(seed)
    if validation_split_mode(train, fraction) == "stratified":
        chosen: set[int] = set()
        by_class: dict[str, list[int]] = {NSBR: [], SBR: []}
        for i, r in enumerate(train.reports):
            by_class[r.label].append(i)
        quotas = {}
        remainders = []
        base_total = 0
        for label in sorted(by_class):
            exact = fraction * len(by_class[label])
            quotas[label] = int(exact)
            base_total += quotas[label]
            remainders.append((-(exact - int(exact)), label))
        for _, label in sorted(remainders)[: n_val - base_total]:
            quotas[label] += 1
        for label in sorted(by_class):
            chosen.update(rng.sample(by_class[label], quotas[label]))
    else:
        logger.info(
            "dataset %r: class too small for stratified validation split, using plain random",
            train.name,
        )
        chosen = set(rng.sample(range(n), n_val))
    val_reports = tuple(r for i, r in enumerate(train.reports) if i in chosen)
    fit_reports = tuple(r for i, r in enumerate(train.reports) if i not in chosen)
    return (
        Dataset(name=train.name, reports=fit_reports),
        Dataset(name=train.name, reports=val_reports),
    )


def write_split_manifest(path: str | Path, assignments: Sequence[tuple[str, str]]) -> None:
    """Write one (issue_id, split) row per report for audit and reuse."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "split"])
        for issue_id, split in assignments:
            if split not in (TRAIN, VALIDATION, TEST):
                raise ValueError(f"unknown split {split!r} for id {issue_id!r}")
            writer.writerow([issue_id, split])


def read_split_manifest(path: str | Path) -> list[tuple[str, str]]:
    path = Path(path)
    out: list[tuple[str, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "issue_id" not in reader.fieldnames or "split" not in reader.fieldnames:
            raise SchemaError(f"{path.name}: manifest needs issue_id and split columns")
        for row in reader:
            out.append((row["issue_id"], row["split"]))
    return out
