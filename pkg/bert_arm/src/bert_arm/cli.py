"""Command line entry point: fine-tune and predict."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import BertRunConfig
from .predict import evaluate_split, predict
from .train import fine_tune


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bert-arm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fine-tune", help="train on the manifest's train/validation rows")
    p.add_argument("--data", required=True, help="bug-report CSV")
    p.add_argument("--manifest", required=True, help="split manifest CSV")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--encoder", default="bert-base-uncased")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--max-length", type=int, default=256)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("predict", help="write probabilities for a manifest split")
    p.add_argument("--model", required=True, help="fine-tuned model directory")
    p.add_argument("--data", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.add_argument("--split", default="test", choices=["train", "validation", "test"])
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("evaluate", help="score a manifest split with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=["train", "validation", "test"])
    p.add_argument("--batch-size", type=int, default=32)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "fine-tune":
            cfg = BertRunConfig(
                encoder=args.encoder,
                batch_size=args.batch_size,
                epochs=args.epochs,
                learning_rate=args.learning_rate,
                max_length=args.max_length,
                seed=args.seed,
            )
            out = fine_tune(args.data, args.manifest, cfg, args.out)
            print(f"saved best checkpoint to {out}")
            return 0
        if args.command == "predict":
            out = predict(
                args.model, args.data, args.manifest, args.out,
                split=args.split, batch_size=args.batch_size,
            )
            print(f"wrote predictions to {out}")
            return 0
        if args.command == "evaluate":
            metrics = evaluate_split(
                args.model, args.data, args.manifest,
                split=args.split, batch_size=args.batch_size,
            )
            print(json.dumps(metrics, sort_keys=True))
            return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
