"""Experiment orchestration: WPP, FARSEC-WPP, augmentation, and CPP.

Every family shares one pipeline: build the training collection, carve a
stratified 10% validation slice, tune forest hyperparameters with
differential evolution on validation G-measure, retrain on the full
training collection with the winning parameters, and score the target's
canonical test half. The test half of a target is byte-identical across
families, which the recorded test-split hash makes checkable.

A run directory, when given, receives deterministic artifacts (result
JSON, split manifest, predictions, vocabulary and tuning logs); wall
clock duration is reported separately so result files stay byte-stable
under a fixed seed.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .corpus import (
    BugReport,
    Dataset,
    SplitPair,
    TEST,
    TRAIN,
    VALIDATION,
    sort_chronological,
    split_half,
    split_train_validation,
    validation_split_mode,
    write_split_manifest,
)
from .errors import CoverageError, RowError, SchemaError
from .farsec import FarsecConfig, build_keyword_table, filter_nsbrs, removed_ids
from .features import DEFAULT_VOCAB_CAP, TfidfFeaturizer, labels_to_array
from .forest import HyperParams, RandomForestSbrClassifier, train_forest
from .metrics import NSBR, SBR, MetricsReport, compute_metrics, confusion
from .tune import INT, REAL, Bound, DeConfig, TuneResult, optimize

logger = logging.getLogger(__name__)

WPP = "wpp"
WPP_FARSEC = "wpp_farsec"
AUGMENT_SBR = "augment_sbr"
AUGMENT_ALL = "augment_all"
CPP = "cpp"
FAMILIES = (WPP, WPP_FARSEC, AUGMENT_SBR, AUGMENT_ALL, CPP)

MODE_SBRS = "sbrs"
MODE_ALL = "all"

LEARNER_FOREST = "forest"
LEARNER_EXTERNAL = "external_predictions"
LEARNERS = (LEARNER_FOREST, LEARNER_EXTERNAL)

VALIDATION_FRACTION = 0.1
CLASSIFY_THRESHOLD = 0.5

# tuning ranges bracket the conventional forest defaults; max_depth 0
# encodes "unlimited"
HYPERPARAM_BOUNDS = (
    Bound(50, 150, INT),
    Bound(0, 30, INT),
    Bound(2, 20, INT),
    Bound(1, 12, INT),
    Bound(0.01, 1.0, REAL),
)


def derive_seed(seed: int, tag: str) -> int:
    """Stable sub-seed for one pipeline stage."""
    digest = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def decode_hyperparams(vector: Sequence[float]) -> HyperParams:
    n_trees, depth, split, leaf, max_features = vector
    return HyperParams(
        n_trees=int(n_trees),
        max_depth=None if int(depth) == 0 else int(depth),
        min_samples_split=int(split),
        min_samples_leaf=int(leaf),
        max_features=float(max_features),
    )


def default_vector(n_features: int) -> tuple[float, ...]:
    frac = math.sqrt(n_features) / n_features if n_features else 1.0
    return (100.0, 0.0, 2.0, 1.0, max(0.01, min(1.0, frac)))


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    target: str
    sources: tuple[str, ...] = ()
    learner: str = LEARNER_FOREST
    seed: int = 0
    farsec: FarsecConfig = field(default_factory=FarsecConfig)
    vocab_cap: int = DEFAULT_VOCAB_CAP
    validation_fraction: float = VALIDATION_FRACTION
    de_population: int = 20
    de_generations: int = 10

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.learner not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner!r}")
        if self.target in self.sources:
            raise ValueError(f"target {self.target!r} cannot be one of its sources")
        if self.family == CPP and not self.sources:
            raise ValueError("cpp requires at least one source dataset")
        if self.family in (WPP, WPP_FARSEC) and self.sources:
            raise ValueError(f"{self.family} takes no sources")

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "target": self.target,
            "sources": list(self.sources),
            "learner": self.learner,
            "seed": self.seed,
            "farsec_keywords": self.farsec.keyword_count,
            "farsec_threshold": self.farsec.threshold,
            "farsec_variant": self.farsec.variant,
            "vocab_cap": self.vocab_cap,
            "validation_fraction": self.validation_fraction,
            "de_population": self.de_population,
            "de_generations": self.de_generations,
        }

    def run_id(self) -> str:
        parts = [self.family, self.target]
        if self.sources:
            parts.append("src-" + "-".join(self.sources))
        parts.append(self.learner)
        parts.append(f"seed{self.seed}")
        return "_".join(parts)


@dataclass(frozen=True)
class TuningSummary:
    best_params: dict
    best_fitness: float
    history: tuple[float, ...]
    evaluations: int
    validation_mode: str

    @classmethod
    def from_result(cls, result: TuneResult, mode: str) -> "TuningSummary":
        return cls(
            best_params=decode_hyperparams(result.best_params).as_dict(),
            best_fitness=result.best_fitness,
            history=result.history,
            evaluations=result.evaluations,
            validation_mode=mode,
        )


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    train_sbr: int
    train_nsbr: int
    test_sbr: int
    test_nsbr: int
    metrics: MetricsReport
    duration_s: float
    test_split_sha256: str
    tuning: TuningSummary | None
    predictions: tuple[tuple[str, float], ...]
    manifest: tuple[tuple[str, str], ...]

    def record(self, include_duration: bool = True) -> dict:
        rec = {
            "spec": self.spec.as_dict(),
            "train_sbr": self.train_sbr,
            "train_nsbr": self.train_nsbr,
            "test_sbr": self.test_sbr,
            "test_nsbr": self.test_nsbr,
            "metrics": self.metrics.as_dict(),
            "test_split_sha256": self.test_split_sha256,
            "tool_version": __version__,
        }
        if self.tuning is not None:
            rec["tuning"] = {
                "best_params": self.tuning.best_params,
                "best_fitness": self.tuning.best_fitness,
                "history": list(self.tuning.history),
                "evaluations": self.tuning.evaluations,
                "validation_mode": self.tuning.validation_mode,
            }
        if include_duration:
            rec["duration_s"] = self.duration_s
        return rec


def canonical_split(dataset: Dataset) -> SplitPair:
    """Chronological order then halve; identical for every family."""
    return split_half(sort_chronological(dataset))


def fingerprint_test_split(test: Dataset) -> str:
    payload = test.name + "\n" + "\n".join(test.ids())
    return hashlib.sha256(payload.encode()).hexdigest()


def _namespaced(report: BugReport, source: str, rank: int) -> BugReport:
    return BugReport(
        id=f"{source}/{report.id}",
        text=report.text,
        label=report.label,
        rank=rank,
        order_value=report.order_value,
    )


def augment(train: Dataset, sources: Sequence[Dataset], mode: str) -> Dataset:
    """Append each source's SBRs (mode "sbrs") or all reports (mode "all").

    Sources contribute their complete datasets, both halves. Ids are
    namespaced by source name; ranks are reassigned over the combined
    sequence.
    """
    if mode not in (MODE_SBRS, MODE_ALL):
        raise ValueError(f"unknown augmentation mode {mode!r}")
    names = [train.name] + [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ValueError(f"overlapping dataset names in augmentation: {names}")
    merged: list[BugReport] = []
    for r in train.reports:
        merged.append(
            BugReport(id=r.id, text=r.text, label=r.label, rank=len(merged), order_value=r.order_value)
        )
    for source in sources:
        for r in source.reports:
            if mode == MODE_SBRS and not r.is_sbr:
                continue
            merged.append(_namespaced(r, source.name, len(merged)))
    return Dataset(name=train.name, reports=tuple(merged))


def cpp_training_set(sources: Sequence[Dataset]) -> Dataset:
    """Union of the full source datasets; the target contributes nothing."""
    if not sources:
        raise ValueError("cpp requires at least one source dataset")
    names = [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate source datasets: {names}")
    merged: list[BugReport] = []
    for source in sources:
        for r in source.reports:
            merged.append(_namespaced(r, source.name, len(merged)))
    return Dataset(name="+".join(names), reports=tuple(merged))


@dataclass(frozen=True)
class _FittedPipeline:
    featurizer: TfidfFeaturizer
    model: RandomForestSbrClassifier
    tuning: TuningSummary | None
    manifest_rows: tuple[tuple[str, str], ...]


def _tune_and_fit(
    train: Dataset,
    spec: ExperimentSpec,
    jobs: int,
    run_dir: Path | None,
) -> _FittedPipeline:
    fit_ds, val_ds = split_train_validation(
        train, spec.validation_fraction, derive_seed(spec.seed, "validation")
    )
    tuning: TuningSummary | None = None
    if len(fit_ds) > 0 and len(val_ds) > 0 and fit_ds.n_sbr + fit_ds.n_nsbr >= 2:
        tune_feat = TfidfFeaturizer(cap=spec.vocab_cap).fit(fit_ds)
        X_fit = tune_feat.transform(fit_ds)
        X_val = tune_feat.transform(val_ds)
        y_fit = labels_to_array(fit_ds)
        val_actual = [r.label for r in val_ds]
        model_seed = derive_seed(spec.seed, "tune-model")

        def objective(vector: tuple[float, ...]) -> float:
            params = decode_hyperparams(vector)
            model = train_forest(X_fit, y_fit, params, seed=model_seed, n_jobs=1)
            probs = model.sbr_probability(X_val)
            predicted = [SBR if p >= CLASSIFY_THRESHOLD else NSBR for p in probs]
            return compute_metrics(confusion(predicted, val_actual)).g_measure

        de_cfg = DeConfig(
            population=spec.de_population,
            generations=spec.de_generations,
            bounds=HYPERPARAM_BOUNDS,
            seed=derive_seed(spec.seed, "tune"),
        )
        log_path = run_dir / "tuning_log.txt" if run_dir else None
        result = optimize(
            objective,
            de_cfg,
            x0=default_vector(len(tune_feat.vocabulary_)),
            jobs=jobs,
            log_path=log_path,
        )
        tuning = TuningSummary.from_result(
            result, validation_split_mode(train, spec.validation_fraction)
        )
        best = decode_hyperparams(result.best_params)
    else:
        logger.info(
            "training set %r too small to tune; using default hyperparameters", train.name
        )
        best = HyperParams()

    featurizer = TfidfFeaturizer(cap=spec.vocab_cap).fit(train)
    model = train_forest(
        featurizer.transform(train),
        labels_to_array(train),
        best,
        seed=derive_seed(spec.seed, "model"),
        n_jobs=jobs,
    )
    val_ids = {v.id for v in val_ds}
    manifest = [(r.id, VALIDATION if r.id in val_ids else TRAIN) for r in train]
    if run_dir:
        featurizer.vocabulary_.dump(run_dir / "vocabulary.tsv")
    return _FittedPipeline(featurizer, model, tuning, tuple(manifest))


def _score_test(
    pipeline: _FittedPipeline, test: Dataset
) -> tuple[MetricsReport, tuple[tuple[str, float], ...]]:
    probs = pipeline.model.sbr_probability(pipeline.featurizer.transform(test))
    predicted = [SBR if p >= CLASSIFY_THRESHOLD else NSBR for p in probs]
    actual = [r.label for r in test]
    metrics = compute_metrics(confusion(predicted, actual))
    predictions = tuple((r.id, float(p)) for r, p in zip(test, probs))
    return metrics, predictions


def _build_training_set(
    spec: ExperimentSpec, datasets: dict[str, Dataset], run_dir: Path | None
) -> tuple[Dataset, Dataset]:
    """Returns (training collection, canonical test half of the target)."""
    if spec.target not in datasets:
        raise KeyError(f"unknown target dataset {spec.target!r}")
    missing = [s for s in spec.sources if s not in datasets]
    if missing:
        raise KeyError(f"unknown source datasets {missing}")
    pair = canonical_split(datasets[spec.target])
    if spec.family == WPP:
        train = pair.train
    elif spec.family == WPP_FARSEC:
        table = build_keyword_table(pair.train, spec.farsec)
        if run_dir:
            table.dump(run_dir / "farsec_keywords.csv")
            dropped = removed_ids(pair.train, spec.farsec, table)
            (run_dir / "farsec_removed_ids.txt").write_text(
                "\n".join(dropped) + ("\n" if dropped else ""), encoding="utf-8"
            )
        train = filter_nsbrs(pair.train, spec.farsec, table)
    elif spec.family in (AUGMENT_SBR, AUGMENT_ALL):
        mode = MODE_SBRS if spec.family == AUGMENT_SBR else MODE_ALL
        train = augment(pair.train, [datasets[s] for s in spec.sources], mode)
    elif spec.family == CPP:
        train = cpp_training_set([datasets[s] for s in spec.sources])
    else:  # pragma: no cover
        raise ValueError(spec.family)
    return train, pair.test


def run_experiment(
    spec: ExperimentSpec,
    datasets: dict[str, Dataset],
    jobs: int = 1,
    run_dir: str | Path | None = None,
    dataset_hashes: dict[str, str] | None = None,
    config_hash: str | None = None,
) -> ExperimentResult:
    """Run one forest experiment end to end."""
    if spec.learner != LEARNER_FOREST:
        raise ValueError(
            "run_experiment trains the forest learner; use evaluate_external_predictions "
            "for external prediction files"
        )
    run_dir = Path(run_dir) if run_dir is not None else None
    if run_dir:
        run_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    train, test = _build_training_set(spec, datasets, run_dir)
    pipeline = _tune_and_fit(train, spec, jobs, run_dir)
    metrics, predictions = _score_test(pipeline, test)
    duration = time.monotonic() - started
    manifest = pipeline.manifest_rows + tuple((r.id, TEST) for r in test)
    result = ExperimentResult(
        spec=spec,
        train_sbr=train.n_sbr,
        train_nsbr=train.n_nsbr,
        test_sbr=test.n_sbr,
        test_nsbr=test.n_nsbr,
        metrics=metrics,
        duration_s=duration,
        test_split_sha256=fingerprint_test_split(test),
        tuning=pipeline.tuning,
        predictions=predictions,
        manifest=manifest,
    )
    if run_dir:
        write_run_artifacts(
            run_dir, result, datasets, dataset_hashes=dataset_hashes, config_hash=config_hash
        )
    return result


def run_wpp(spec: ExperimentSpec, datasets: dict[str, Dataset], jobs: int = 1, run_dir=None) -> ExperimentResult:
    if spec.family not in (WPP, WPP_FARSEC):
        raise ValueError(f"run_wpp expects a wpp family, got {spec.family!r}")
    return run_experiment(spec, datasets, jobs=jobs, run_dir=run_dir)


def run_cpp(spec: ExperimentSpec, datasets: dict[str, Dataset], jobs: int = 1, run_dir=None) -> ExperimentResult:
    if spec.family != CPP:
        raise ValueError(f"run_cpp expects family cpp, got {spec.family!r}")
    return run_experiment(spec, datasets, jobs=jobs, run_dir=run_dir)


@dataclass(frozen=True)
class CppModelSpec:
    """One CPP training subset; a single trained model covers every
    dataset outside the subset as an evaluation target."""

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    learner: str = LEARNER_FOREST
    seed: int = 0

    def experiment_specs(self, **overrides) -> list[ExperimentSpec]:
        return [
            ExperimentSpec(
                family=CPP,
                target=t,
                sources=self.sources,
                learner=self.learner,
                seed=self.seed,
                **overrides,
            )
            for t in self.targets
        ]


def enumerate_augment_specs(
    names: Sequence[str],
    mode: str,
    learner: str = LEARNER_FOREST,
    seed: int = 0,
    all_subsets: bool = True,
    **overrides,
) -> list[ExperimentSpec]:
    """One spec per (target, nonempty subset of the other datasets).

    With five datasets this yields 75 specs per (learner, mode); with
    ``all_subsets`` off only the all-sources endpoint per target remains.
    """
    if mode not in (MODE_SBRS, MODE_ALL):
        raise ValueError(f"unknown augmentation mode {mode!r}")
    family = AUGMENT_SBR if mode == MODE_SBRS else AUGMENT_ALL
    specs = []
    for target in names:
        others = [n for n in names if n != target]
        sizes = range(1, len(others) + 1) if all_subsets else [len(others)]
        for size in sizes:
            for subset in combinations(others, size):
                specs.append(
                    ExperimentSpec(
                        family=family,
                        target=target,
                        sources=subset,
                        learner=learner,
                        seed=seed,
                        **overrides,
                    )
                )
    return specs


def enumerate_cpp_model_specs(
    names: Sequence[str],
    learner: str = LEARNER_FOREST,
    seed: int = 0,
    all_subsets: bool = True,
) -> list[CppModelSpec]:
    """One model spec per training subset of size 1..n-1.

    A trained model is counted once even though it is evaluated on every
    dataset outside its training subset; with five datasets this yields
    30 models per learner. With ``all_subsets`` off only the five
    leave-one-out endpoints remain.
    """
    specs = []
    if all_subsets:
        for size in range(1, len(names)):
            for subset in combinations(names, size):
                targets = tuple(n for n in names if n not in subset)
                specs.append(CppModelSpec(sources=subset, targets=targets, learner=learner, seed=seed))
    else:
        for target in names:
            sources = tuple(n for n in names if n != target)
            specs.append(CppModelSpec(sources=sources, targets=(target,), learner=learner, seed=seed))
    return specs


def run_augmentation_suite(
    datasets: dict[str, Dataset],
    mode: str,
    learner: str = LEARNER_FOREST,
    seed: int = 0,
    all_subsets: bool = True,
    jobs: int = 1,
    run_dir: str | Path | None = None,
    **overrides,
) -> list[ExperimentResult]:
    """Every target crossed with source subsets, trained and scored.

    With ``all_subsets`` every nonempty subset of the other datasets runs
    (the full incremental enumeration); otherwise only the mandatory
    all-sources endpoint per target.
    """
    if len(datasets) < 2:
        raise ValueError("augmentation needs at least two datasets")
    if learner != LEARNER_FOREST:
        raise ValueError("only the forest learner trains in-process")
    names = list(datasets)
    base_dir = Path(run_dir) if run_dir is not None else None
    results = []
    for spec in enumerate_augment_specs(
        names, mode, learner=learner, seed=seed, all_subsets=all_subsets, **overrides
    ):
        results.append(
            run_experiment(
                spec,
                datasets,
                jobs=jobs,
                run_dir=base_dir / spec.run_id() if base_dir else None,
            )
        )
    return results


def run_cpp_model(
    model_spec: CppModelSpec,
    datasets: dict[str, Dataset],
    jobs: int = 1,
    run_dir: str | Path | None = None,
    **overrides,
) -> list[ExperimentResult]:
    """Train once on the source union, evaluate every eligible target."""
    specs = model_spec.experiment_specs(**overrides)
    train = cpp_training_set([datasets[s] for s in model_spec.sources])
    base_dir = Path(run_dir) if run_dir is not None else None
    results = []
    pipeline = None
    for spec in specs:
        target_dir = base_dir / spec.run_id() if base_dir else None
        if target_dir:
            target_dir.mkdir(parents=True, exist_ok=True)
        started = time.monotonic()
        if pipeline is None:
            pipeline = _tune_and_fit(train, specs[0], jobs, target_dir)
        test = canonical_split(datasets[spec.target]).test
        metrics, predictions = _score_test(pipeline, test)
        manifest = pipeline.manifest_rows + tuple((r.id, TEST) for r in test)
        result = ExperimentResult(
            spec=spec,
            train_sbr=train.n_sbr,
            train_nsbr=train.n_nsbr,
            test_sbr=test.n_sbr,
            test_nsbr=test.n_nsbr,
            metrics=metrics,
            duration_s=time.monotonic() - started,
            test_split_sha256=fingerprint_test_split(test),
            tuning=pipeline.tuning,
            predictions=predictions,
            manifest=manifest,
        )
        if target_dir:
            write_run_artifacts(target_dir, result, datasets)
        results.append(result)
    return results


# -- external predictions ----------------------------------------------


def read_predictions(path: str | Path) -> dict[str, float]:
    path = Path(path)
    out: dict[str, float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "issue_id" not in reader.fieldnames or "probability" not in reader.fieldnames:
            raise SchemaError(f"{path.name}: predictions need issue_id and probability columns")
        for row in reader:
            issue_id = row["issue_id"]
            try:
                p = float(row["probability"])
            except (TypeError, ValueError):
                raise RowError(
                    f"{path.name}: row {reader.line_num}: bad probability {row['probability']!r}"
                ) from None
            if not 0.0 <= p <= 1.0:
                raise RowError(
                    f"{path.name}: row {reader.line_num}: probability {p} outside [0, 1]"
                )
            if issue_id in out:
                raise RowError(f"{path.name}: duplicate prediction for id {issue_id!r}")
            out[issue_id] = p
    return out


def evaluate_external_predictions(
    predictions_path: str | Path,
    dataset: Dataset,
    family: str = WPP,
    sources: tuple[str, ...] = (),
    seed: int = 0,
    run_dir: str | Path | None = None,
) -> ExperimentResult:
    """Score an external (id, probability) file against the canonical test half.

    The file must cover exactly the test-split ids; classification and
    metrics match the forest path bit for bit.
    """
    started = time.monotonic()
    pair = canonical_split(dataset)
    preds = read_predictions(predictions_path)
    test_ids = pair.test.ids()
    missing = sorted(set(test_ids) - preds.keys())
    extra = sorted(preds.keys() - set(test_ids))
    if missing or extra:
        raise CoverageError(
            f"{Path(predictions_path).name}: predictions do not cover the test split exactly; "
            f"missing={missing[:10]}{'...' if len(missing) > 10 else ''} "
            f"extra={extra[:10]}{'...' if len(extra) > 10 else ''} "
            f"({len(missing)} missing, {len(extra)} extra)"
        )
    probs = [preds[i] for i in test_ids]
    predicted = [SBR if p >= CLASSIFY_THRESHOLD else NSBR for p in probs]
    actual = [r.label for r in pair.test]
    metrics = compute_metrics(confusion(predicted, actual))
    spec = ExperimentSpec(
        family=family,
        target=dataset.name,
        sources=sources,
        learner=LEARNER_EXTERNAL,
        seed=seed,
    )
    result = ExperimentResult(
        spec=spec,
        train_sbr=pair.train.n_sbr,
        train_nsbr=pair.train.n_nsbr,
        test_sbr=pair.test.n_sbr,
        test_nsbr=pair.test.n_nsbr,
        metrics=metrics,
        duration_s=time.monotonic() - started,
        test_split_sha256=fingerprint_test_split(pair.test),
        tuning=None,
        predictions=tuple(zip(test_ids, probs)),
        manifest=tuple((r.id, TRAIN) for r in pair.train)
        + tuple((r.id, TEST) for r in pair.test),
    )
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        write_run_artifacts(run_dir, result, None)
    return result


# -- artifacts -----------------------------------------------------------


def write_predictions(path: str | Path, predictions: Iterable[tuple[str, float]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "probability"])
        for issue_id, p in predictions:
            writer.writerow([issue_id, repr(float(p))])


def write_run_artifacts(
    run_dir: str | Path,
    result: ExperimentResult,
    datasets: dict[str, Dataset] | None,
    dataset_hashes: dict[str, str] | None = None,
    config_hash: str | None = None,
) -> None:
    """Deterministic per-run files: result.json, manifest, predictions,
    and the experiment rows the secondary learner consumes."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    record = result.record(include_duration=False)
    record["reproducibility"] = {
        "seed": result.spec.seed,
        "config_sha256": config_hash,
        "dataset_sha256": dataset_hashes or {},
    }
    (run_dir / "result.json").write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_split_manifest(run_dir / "split_manifest.csv", result.manifest)
    write_predictions(run_dir / "predictions.csv", result.predictions)
    if datasets is not None:
        _write_experiment_rows(run_dir / "experiment_data.csv", result, datasets)


def _experiment_reports(result: ExperimentResult, datasets: dict[str, Dataset]):
    train, test = _build_training_set(result.spec, datasets, None)
    by_id = {r.id: r for r in train.reports}
    by_id.update({r.id: r for r in test.reports})
    return by_id


def _write_experiment_rows(path: Path, result: ExperimentResult, datasets: dict[str, Dataset]) -> None:
    by_id = _experiment_reports(result, datasets)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "summary", "description", "security"])
        for issue_id, _split in result.manifest:
            report = by_id[issue_id]
            writer.writerow([issue_id, report.text, "", "1" if report.is_sbr else "0"])


def append_record(path: str | Path, record: dict) -> None:
    with Path(path).open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


RECORD_CSV_COLUMNS = [
    "family",
    "target",
    "sources",
    "learner",
    "seed",
    "train_sbr",
    "train_nsbr",
    "test_sbr",
    "test_nsbr",
    "precision",
    "recall",
    "f1",
    "fpr",
    "g_measure",
]


def records_to_csv(records: Iterable[dict], path: str | Path) -> int:
    """Aggregate JSON-lines records into one CSV row per experiment."""
    n = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_CSV_COLUMNS)
        for rec in records:
            spec = rec["spec"]
            metrics = rec["metrics"]
            writer.writerow(
                [
                    spec["family"],
                    spec["target"],
                    "+".join(spec["sources"]),
                    spec["learner"],
                    spec["seed"],
                    rec["train_sbr"],
                    rec["train_nsbr"],
                    rec["test_sbr"],
                    rec["test_nsbr"],
                    f"{metrics['precision']:.2f}",
                    f"{metrics['recall']:.2f}",
                    f"{metrics['f1']:.2f}",
                    f"{metrics['fpr']:.2f}",
                    f"{metrics['g_measure']:.2f}",
                ]
            )
            n += 1
    return n
