"""Command line entry point.

Subcommands: ingest, wpp, farsec-wpp, augment, cpp, suite, report,
eval-external, and synth (write the bundled synthetic replica corpus).
A flat key=value config file can predefine any flag; explicit flags win.
Every experiment run prints a reproducibility stanza (seed, config hash,
dataset content hashes) and appends one JSON record per experiment to
<out>/results.jsonl.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, datagen
from .corpus import Dataset, load_dataset
from .errors import SbrBenchError
from .farsec import FarsecConfig
from .features import DEFAULT_VOCAB_CAP
from .harness import (
    AUGMENT_ALL,
    AUGMENT_SBR,
    CPP,
    LEARNER_FOREST,
    MODE_ALL,
    MODE_SBRS,
    WPP,
    WPP_FARSEC,
    ExperimentSpec,
    append_record,
    enumerate_augment_specs,
    enumerate_cpp_model_specs,
    evaluate_external_predictions,
    records_to_csv,
    run_cpp_model,
    run_experiment,
)

DEFAULT_SEED = 42


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_data_args(values: list[str]) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for value in values:
        if "=" in value:
            name, _, path = value.partition("=")
        else:
            path = value
            name = Path(value).stem
        if name in out:
            raise SbrBenchError(f"dataset name {name!r} given twice")
        out[name] = Path(path)
    return out


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    conf: dict[str, str] = {}
    for line_num, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SbrBenchError(f"{path}: line {line_num}: expected key=value")
        key, _, value = line.partition("=")
        conf[key.strip()] = value.strip()
    return conf


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbrbench",
        description="Security bug report prediction workbench",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--data",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="dataset CSV, repeatable; bare paths use the file stem as name",
    )
    common.add_argument("--config", help="flat key=value config file; flags win")
    common.add_argument("--seed", type=int, default=None, help="master seed (default 42)")
    common.add_argument("--jobs", type=int, default=None, help="worker pool size (default 1)")
    common.add_argument("--out", default=None, metavar="DIR", help="output directory (default ./out)")
    common.add_argument("--farsec-threshold", type=float, default=None)
    common.add_argument("--keywords", type=int, default=None, help="FARSEC keyword count")
    common.add_argument("--vocab-cap", type=int, default=None)
    common.add_argument(
        "--farsec-variant", choices=["plain", "farsectwo"], default=None
    )

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common], help="validate datasets and print their statistics")

    p = sub.add_parser("wpp", parents=[common], help="within-project run on the target")
    p.add_argument("--target", required=True)

    p = sub.add_parser("farsec-wpp", parents=[common], help="within-project run with FARSEC filtering")
    p.add_argument("--target", required=True)

    p = sub.add_parser("augment", parents=[common], help="augmented within-project run")
    p.add_argument("--target", required=True)
    p.add_argument("--sources", default=None, help="comma-separated source names (default: all others)")
    p.add_argument("--mode", choices=[MODE_SBRS, MODE_ALL], default=MODE_SBRS)

    p = sub.add_parser("cpp", parents=[common], help="cross-project run on the target")
    p.add_argument("--target", required=True)
    p.add_argument("--sources", default=None, help="comma-separated source names (default: all others)")

    p = sub.add_parser("suite", parents=[common], help="run every experiment family")
    p.add_argument(
        "--subsets",
        action="store_true",
        help="enumerate every incremental source subset instead of endpoints only",
    )

    p = sub.add_parser("report", parents=[common], help="aggregate results.jsonl into a CSV")
    p.add_argument("--results", default=None, help="JSON-lines file (default <out>/results.jsonl)")
    p.add_argument("--csv", default=None, help="output CSV path (default <out>/results.csv)")

    p = sub.add_parser("eval-external", parents=[common], help="score an external predictions file")
    p.add_argument("--target", required=True)
    p.add_argument("--predictions", required=True)

    p = sub.add_parser("synth", parents=[common], help="write the synthetic replica corpus")
    p.add_argument("--dir", default=None, help="destination directory (default <out>/data)")

    return parser


def _resolve(args, conf: dict[str, str]):
    def pick(flag_value, key, cast, default):
        if flag_value is not None:
            return flag_value
        if key in conf:
            return cast(conf[key])
        return default

    args.seed = pick(args.seed, "seed", int, DEFAULT_SEED)
    args.jobs = pick(args.jobs, "jobs", int, 1)
    args.out = Path(pick(args.out, "out", str, "out"))
    args.farsec_threshold = pick(args.farsec_threshold, "farsec_threshold", float, 0.75)
    args.keywords = pick(args.keywords, "keywords", int, 100)
    args.vocab_cap = pick(args.vocab_cap, "vocab_cap", int, DEFAULT_VOCAB_CAP)
    args.farsec_variant = pick(args.farsec_variant, "farsec_variant", str, "farsectwo")
    # config-file-only knobs for the tuner budget
    args.de_population = pick(None, "de_population", int, 20)
    args.de_generations = pick(None, "de_generations", int, 10)
    if not args.data and "data" in conf:
        args.data = conf["data"].split()
    return args


def _load_datasets(args) -> tuple[dict[str, Dataset], dict[str, str]]:
    paths = _parse_data_args(args.data)
    if not paths:
        raise SbrBenchError("no datasets given; use --data name=path")
    datasets = {}
    hashes = {}
    for name, path in paths.items():
        if not path.exists():
            raise SbrBenchError(f"dataset file not found: {path}")
        datasets[name] = load_dataset(path, name)
        hashes[name] = _sha256_file(path)
    return datasets, hashes


def _spec_for(args, family: str, target: str, sources: tuple[str, ...] = ()) -> ExperimentSpec:
    return ExperimentSpec(
        family=family,
        target=target,
        sources=sources,
        learner=LEARNER_FOREST,
        seed=args.seed,
        farsec=FarsecConfig(
            keyword_count=args.keywords,
            threshold=args.farsec_threshold,
            variant=args.farsec_variant,
        ),
        vocab_cap=args.vocab_cap,
        de_population=args.de_population,
        de_generations=args.de_generations,
    )


def _config_hash(args) -> str:
    payload = {
        "seed": args.seed,
        "farsec_threshold": args.farsec_threshold,
        "keywords": args.keywords,
        "vocab_cap": args.vocab_cap,
        "farsec_variant": args.farsec_variant,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _print_stanza(args, hashes: dict[str, str]) -> None:
    stanza = {
        "seed": args.seed,
        "config_sha256": _config_hash(args),
        "dataset_sha256": hashes,
        "tool_version": __version__,
    }
    print(json.dumps({"reproducibility": stanza}, sort_keys=True))


def _report_result(args, result, hashes) -> None:
    m = result.metrics
    print(
        f"{result.spec.run_id()}: recall={m.recall:.2f} precision={m.precision:.2f} "
        f"f1={m.f1:.2f} fpr={m.fpr:.2f} g={m.g_measure:.2f} "
        f"(train {result.train_sbr}/{result.train_nsbr}, test {result.test_sbr}/{result.test_nsbr})"
    )
    record = result.record()
    record["reproducibility"] = {
        "seed": args.seed,
        "config_sha256": _config_hash(args),
        "dataset_sha256": hashes,
    }
    append_record(args.out / "results.jsonl", record)


def _sources_for(args, datasets) -> tuple[str, ...]:
    if getattr(args, "sources", None):
        sources = tuple(s.strip() for s in args.sources.split(",") if s.strip())
    else:
        sources = tuple(n for n in datasets if n != args.target)
    return sources


def _cmd_ingest(args) -> int:
    datasets, hashes = _load_datasets(args)
    for name, ds in datasets.items():
        sbr, nsbr = ds.class_counts()
        pct = 100.0 * sbr / len(ds) if len(ds) else 0.0
        print(f"{name}: {len(ds)} reports, {sbr} SBR ({pct:.1f}%), {nsbr} NSBR")
    _print_stanza(args, hashes)
    return 0


def _run_single(args, family: str) -> int:
    datasets, hashes = _load_datasets(args)
    if args.target not in datasets:
        raise SbrBenchError(f"unknown target {args.target!r}")
    sources: tuple[str, ...] = ()
    if family in (AUGMENT_SBR, AUGMENT_ALL, CPP):
        sources = _sources_for(args, datasets)
    spec = _spec_for(args, family, args.target, sources)
    args.out.mkdir(parents=True, exist_ok=True)
    result = run_experiment(
        spec,
        datasets,
        jobs=args.jobs,
        run_dir=args.out / spec.run_id(),
        dataset_hashes=hashes,
        config_hash=_config_hash(args),
    )
    _print_stanza(args, hashes)
    _report_result(args, result, hashes)
    return 0


def _cmd_suite(args) -> int:
    datasets, hashes = _load_datasets(args)
    names = list(datasets)
    args.out.mkdir(parents=True, exist_ok=True)
    _print_stanza(args, hashes)
    specs: list[ExperimentSpec] = []
    for target in names:
        specs.append(_spec_for(args, WPP, target))
        specs.append(_spec_for(args, WPP_FARSEC, target))
    for mode in (MODE_SBRS, MODE_ALL):
        for s in enumerate_augment_specs(
            names, mode, seed=args.seed, all_subsets=args.subsets
        ):
            specs.append(
                _spec_for(args, s.family, s.target, s.sources)
            )

    def run_one(spec: ExperimentSpec):
        return run_experiment(spec, datasets, jobs=1, run_dir=args.out / spec.run_id())

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, specs))
    else:
        results = [run_one(s) for s in specs]
    for result in results:
        _report_result(args, result, hashes)

    for model_spec in enumerate_cpp_model_specs(names, seed=args.seed, all_subsets=args.subsets):
        for result in run_cpp_model(
            model_spec,
            datasets,
            jobs=args.jobs,
            run_dir=args.out,
            farsec=FarsecConfig(
                keyword_count=args.keywords,
                threshold=args.farsec_threshold,
                variant=args.farsec_variant,
            ),
            vocab_cap=args.vocab_cap,
            de_population=args.de_population,
            de_generations=args.de_generations,
        ):
            _report_result(args, result, hashes)
    return 0


def _cmd_report(args) -> int:
    results_path = Path(args.results) if args.results else args.out / "results.jsonl"
    csv_path = Path(args.csv) if args.csv else args.out / "results.csv"
    if not results_path.exists():
        raise SbrBenchError(f"results file not found: {results_path}")
    records = [
        json.loads(line)
        for line in results_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    n = records_to_csv(records, csv_path)
    print(f"wrote {n} rows to {csv_path}")
    return 0


def _cmd_eval_external(args) -> int:
    datasets, hashes = _load_datasets(args)
    if args.target not in datasets:
        raise SbrBenchError(f"unknown target {args.target!r}")
    args.out.mkdir(parents=True, exist_ok=True)
    result = evaluate_external_predictions(
        args.predictions,
        datasets[args.target],
        seed=args.seed,
        run_dir=args.out / f"external_{args.target}_seed{args.seed}",
    )
    _print_stanza(args, hashes)
    _report_result(args, result, hashes)
    return 0


def _cmd_synth(args) -> int:
    dest = Path(args.dir) if args.dir else args.out / "data"
    paths = datagen.write_corpus(dest, seed=args.seed if args.seed is not None else datagen.DEFAULT_SEED)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        conf = _load_config_file(getattr(args, "config", None))
        args = _resolve(args, conf)
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "wpp":
            return _run_single(args, WPP)
        if args.command == "farsec-wpp":
            return _run_single(args, WPP_FARSEC)
        if args.command == "augment":
            family = AUGMENT_SBR if args.mode == MODE_SBRS else AUGMENT_ALL
            return _run_single(args, family)
        if args.command == "cpp":
            return _run_single(args, CPP)
        if args.command == "suite":
            return _cmd_suite(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "eval-external":
            return _cmd_eval_external(args)
        if args.command == "synth":
            return _cmd_synth(args)
        parser.error(f"unknown command {args.command!r}")
    except SbrBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
