import csv

import pytest

from bert_arm.tiny import build_tiny_encoder

SECURITY_TEXTS = [
    "Exploit overflow lets an attacker escalate privilege",
    "Injection attack bypasses authentication token checks",
    "Malicious payload triggers heap corruption exploit",
    "Unsafe deserialization enables remote shellcode attack",
    "Credential leakage through spoofed certificate handshake",
    "Bypass of sanitizer causes script injection exploit",
]
PLAIN_TEXTS = [
    "Menu layout breaks after window resize",
    "Button spacing wrong in settings dialog",
    "Scroll position resets when reloading page",
    "Font color too light in dark theme",
    "Toolbar icon missing on first startup",
    "Tooltip text truncated in the sidebar",
]


def toy_rows(total=24):
    """Alternating classes so both split halves carry both labels."""
    rows = []
    for i in range(1, total + 1):
        if i % 2 == 0:
            text = SECURITY_TEXTS[(i // 2) % len(SECURITY_TEXTS)]
            label = "1"
        else:
            text = PLAIN_TEXTS[(i // 2) % len(PLAIN_TEXTS)]
            label = "0"
        summary, _, description = text.partition(" ")
        rows.append((str(i), summary, description + f" r{i}", label))
    return rows


@pytest.fixture(scope="session")
def toy_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "summary", "description", "security"])
        writer.writerows(toy_rows())
    return path


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory):
    """Mirrors the harness's chronological halving of ids 1..24: the
    first half trains (with two validation rows), the second half tests."""
    path = tmp_path_factory.mktemp("data") / "manifest.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["issue_id", "split"])
        for i in range(1, 25):
            if i <= 10:
                split = "train"
            elif i <= 12:
                split = "validation"
            else:
                split = "test"
            writer.writerow([str(i), split])
    return path


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    texts = [f"{s} {d}" for _, s, d, _ in toy_rows()]
    return build_tiny_encoder(tmp_path_factory.mktemp("encoder"), texts, seed=3)
