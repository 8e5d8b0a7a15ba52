import csv

import pytest

from bert_arm.config import BertRunConfig
from bert_arm.data import CoverageError
from bert_arm.predict import evaluate_split
from bert_arm.train import fine_tune


def memorize_cfg(encoder, epochs=40):
    # high learning rate and many epochs: the miniature encoder must
    # overfit the toy corpus outright
    return BertRunConfig(
        encoder=str(encoder),
        batch_size=32,
        epochs=epochs,
        learning_rate=5e-3,
        max_length=64,
        seed=7,
    )


@pytest.fixture(scope="session")
def memorized_model(toy_csv, toy_manifest, tiny_encoder, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    return fine_tune(toy_csv, toy_manifest, memorize_cfg(tiny_encoder), out)


def test_memorization_reaches_perfect_training_accuracy(
    memorized_model, toy_csv, toy_manifest
):
    metrics = evaluate_split(memorized_model, toy_csv, toy_manifest, split="train")
    assert metrics["accuracy"] == 1.0


def test_meta_records_best_checkpoint(memorized_model, tiny_encoder):
    import json

    meta = json.loads((memorized_model / "meta.json").read_text(encoding="utf-8"))
    assert meta["best"]["epoch"] >= 1
    assert len(meta["history"]) == 40
    assert meta["encoder"] == str(tiny_encoder)


def test_config_validation():
    with pytest.raises(ValueError):
        BertRunConfig(batch_size=0)
    with pytest.raises(ValueError):
        BertRunConfig(epochs=0)
    with pytest.raises(ValueError):
        BertRunConfig(learning_rate=0)
    with pytest.raises(ValueError):
        BertRunConfig(warmup_fraction=1.0)


def test_empty_validation_rejected(toy_csv, tiny_encoder, tmp_path):
    manifest = tmp_path / "manifest.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "split"])
        for i in range(1, 13):
            writer.writerow([str(i), "train"])
        for i in range(13, 25):
            writer.writerow([str(i), "test"])
    with pytest.raises(ValueError, match="validation"):
        fine_tune(toy_csv, manifest, memorize_cfg(tiny_encoder, epochs=1), tmp_path / "m")


def test_manifest_id_mismatch_is_coverage_error(toy_csv, tiny_encoder, tmp_path):
    manifest = tmp_path / "manifest.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "split"])
        writer.writerow(["1", "train"])
        writer.writerow(["999", "validation"])
    with pytest.raises(CoverageError, match="999"):
        fine_tune(toy_csv, manifest, memorize_cfg(tiny_encoder, epochs=1), tmp_path / "m")


def test_repeated_run_is_stable(toy_csv, toy_manifest, tiny_encoder, tmp_path):
    cfg = memorize_cfg(tiny_encoder, epochs=6)
    a = fine_tune(toy_csv, toy_manifest, cfg, tmp_path / "a")
    b = fine_tune(toy_csv, toy_manifest, cfg, tmp_path / "b")
    ga = evaluate_split(a, toy_csv, toy_manifest, split="validation")["g_measure"]
    gb = evaluate_split(b, toy_csv, toy_manifest, split="validation")["g_measure"]
    assert abs(ga - gb) <= 0.02
