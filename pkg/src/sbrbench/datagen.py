"""Deterministic synthetic replicas of the five benchmark bug-report corpora.

The real Chromium/Derby/Camel/Ambari/Wicket exports are not shipped with
this workbench, so it can bootstrap stand-in CSVs whose class counts match
the published dataset and split statistics row for row, and whose text
carries a calibrated security signal:

- "hard" security reports are dense in terms from a shared security
  vocabulary,
- "vague" security reports and a per-project share of non-security
  reports draw from one identical ambiguous text distribution, which
  caps achievable recall near the hard fraction and gives the keyword
  filter a realistic population of removable non-security reports,
- the remaining text mixes common development words, per-project jargon,
  and a long tail of identifier-like tokens.

Everything is generated from one seed; the same seed always produces
byte-identical files.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path

DEFAULT_SEED = 7

SECURITY_TERMS = (
    "overflow underflow injection xss csrf ssrf exploit exploitable "
    "vulnerability vulnerable attack attacker malicious sanitize sanitizer "
    "unsanitized escaping authentication authorization unauthorized "
    "privilege escalation spoofing spoofed tampering disclosure leakage "
    "hijacking bypass forgery forged cipher ciphertext plaintext encryption "
    "decryption cryptographic certificate x509 ssl tls handshake keystore "
    "passphrase password credential credentials token session cookie replay "
    "bruteforce hashed salted nonce entropy randomness padding oracle heap "
    "smashing bounds offbyone signedness truncation deserialization unsafe "
    "shellcode traversal symlink toctou dos denial amplification botnet "
    "malware trojan rootkit backdoor keylogger spyware ransomware phishing "
    "cve cwe advisory mitigation mitigations hardening sandboxing fuzzing "
    "fuzzer overread overwrite corruption dangling spraying canary aslr "
    "exfiltration"
).split()

GENERAL_TERMS = (
    "crash error fails failure broken freeze hang slow sluggish regression "
    "memory cpu button click scroll drag drop render layout style font "
    "color theme window dialog menu toolbar icon image screenshot resize "
    "restore minimize maximize focus blur keyboard shortcut mouse pointer "
    "hover tooltip label caption heading paragraph alignment margin border "
    "spacing wrap truncated ellipsis overlap flicker artifact glitch blurry "
    "pixelated load save open close import export file folder path filename "
    "subdir drive disk network offline online timeout latency bandwidth "
    "retry reconnect refresh reload update upgrade install uninstall setup "
    "wizard version release build compile link warning deprecated log "
    "logging debug verbose trace stacktrace breakpoint profiler test unit "
    "integration smoke flaky coverage assertion mock fixture documentation "
    "docs readme changelog typo grammar wording text translation locale "
    "language spanish german french japanese date time timezone clock "
    "calendar format number decimal rounding parse config configuration "
    "setting option preference flag default missing incorrect wrong "
    "unexpected expected actual result output input field form checkbox "
    "radio dropdown listbox textbox placeholder submit cancel apply reset "
    "undo redo copy paste cut clipboard print preview page footer sidebar "
    "navigation breadcrumb pagination sorting filtering searching "
    "autocomplete suggestion spellcheck highlight selection caret viewport "
    "responsive portrait landscape resolution dpi monitor display graphics "
    "firmware battery power sleep hibernate resume startup shutdown "
    "starvation priority scheduler worker handle descriptor localhost "
    "gateway dns http ftp smtp imap websocket api request response status "
    "code payload json xml yaml binary encoding decoding charset utf8 "
    "ascii unicode emoji whitespace newline indent outdent comment "
    "annotation metadata attribute property getter setter constructor "
    "destructor inheritance abstract concrete static dynamic runtime "
    "dependency module library framework addon gadget applet servlet "
    "listener event callback promise await blocking nonblocking parallel "
    "concurrent atomic volatile transient immutable mutable nullable "
    "optional generic macro recursion iteration loop branch condition "
    "expression statement declaration definition initialization assignment "
    "operator operand precedence"
).split()

PROJECT_JARGON = {
    "chromium": (
        "tabstrip browser chrome webpage html css dom javascript v8 "
        "renderer gpu webgl canvas bookmark omnibox extensions devtools "
        "incognito syncservice profile downloads webhistory diskcache "
        "webkit blink pdfviewer flashplayer autofill favicon zoomlevel "
        "fullscreen notification popup newtab useragent prerender"
    ).split(),
    "derby": (
        "database sql jdbc dbtable rowset column indexing query select "
        "insert upsert schema transaction commit rollback isolation cursor "
        "resultset sqlstatement preparedstmt trigger constraint foreignkey "
        "primarykey blob clob varchar derbyclient datasource connection "
        "sqlstate optimizer tablescan checkpoint tablespace bootpassword"
    ).split(),
    "camel": (
        "route endpoint exchange processor bean camelcontext component "
        "consumer producer headers body marshalling unmarshalling jms "
        "activemq cxf splitter aggregator throttler multicast wiretap dsl "
        "osgi karaf blueprint uri dataformat errorhandler onexception seda "
        "quartz timerroute ftpconsumer fileconsumer xpath simplelang"
    ).split(),
    "ambari": (
        "cluster hadoop hdfs yarn hive hbase zookeeper namenode datanode "
        "ambariserver hostgroup agent heartbeat alertdef metricsink "
        "dashboard hostname services decommission rollingrestart "
        "stackversion mpack upgradepack oozie sqoop flume kafka storm "
        "ranger atlas knox tez sparkjob slider mapreduce jobtracker"
    ).split(),
    "wicket": (
        "wicketpage markup panel ajaxlink behavior imodel listview "
        "dataview propertymodel pageparameters wizardstep feedbackpanel "
        "formcomponent textfield ajaxbutton repeater borderlayout "
        "wicketfilter wicketsession pagestore urlmapping mountpage "
        "statelesspage detachable loadabledetachable onconfigure onrender "
        "wicketajax requestcycle componenttag wickettester modalwindow "
        "palette"
    ).split(),
}

_RARE_PREFIXES = (
    "data file net mem proc buf str obj ctx init temp node tree list map "
    "queue job task item elem attr prop conf sys env usr grp dir doc img "
    "vid aud txt bin hex dec oct num int flt dbl chr arr vec dict tbl col "
    "row idx key val ptr ref cnt pos len cap seg reg blk"
).split()

_RARE_SUFFIXES = (
    "mgr impl util holder loader writer reader builder factory adapter "
    "wrapper helper checker walker visitor mapper reducer merger sorter "
    "hasher packer tracer prober scanner emitter binder broker keeper "
    "seeker feeder limiter resolver collector dispatcher notifier recycler "
    "allocator registrar inspector formatter"
).split()

RARE_TERMS = tuple(f"{p}{s}" for s in _RARE_SUFFIXES for p in _RARE_PREFIXES)

_GENERAL_WEIGHTS = [1.0 / (i + 3) for i in range(len(GENERAL_TERMS))]


@dataclass(frozen=True)
class ProjectRecipe:
    name: str
    train_sbr: int
    train_nsbr: int
    test_sbr: int
    test_nsbr: int
    hard_sbr_frac: float
    nsbr_sec_frac: float
    hard_sec: tuple[int, int]
    ambiguous_sec: tuple[int, int]
    # whether non-hard SBRs read like security-flavored NSBRs or like
    # plain ones; either way they blend into a much larger NSBR
    # population, which is what caps recall near the hard fraction
    vague_flavor: str = "plain"

    @property
    def total(self) -> int:
        return self.train_sbr + self.train_nsbr + self.test_sbr + self.test_nsbr


# class counts reproduce the published dataset and split statistics; the
# fractions and keyword-density ranges are calibrated against the
# reported filter and forest behavior
RECIPES = {
    "chromium": ProjectRecipe("chromium", 371, 20599, 437, 20533, 0.62, 0.005, (12, 16), (3, 5)),
    "derby": ProjectRecipe("derby", 82, 418, 97, 403, 0.47, 0.90, (32, 44), (3, 4), "ambiguous"),
    "camel": ProjectRecipe("camel", 28, 472, 46, 454, 0.34, 0.35, (40, 55), (3, 4)),
    "ambari": ProjectRecipe("ambari", 40, 460, 16, 484, 0.46, 0.35, (40, 55), (3, 4)),
    "wicket": ProjectRecipe("wicket", 24, 476, 23, 477, 0.54, 0.35, (40, 55), (3, 4)),
}

PROJECT_NAMES = tuple(RECIPES)


class _TermRing:
    """Deals terms from a reshuffled ring so usage stays near-uniform.

    Uniform per-term usage keeps every security term's keyword score well
    clear of the general vocabulary, which pins the mined top-100 list to
    the security pool.
    """

    def __init__(self, rng: random.Random, terms):
        self._rng = rng
        self._terms = list(terms)
        rng.shuffle(self._terms)
        self._pos = 0

    def take(self, k: int) -> list[str]:
        out = []
        for _ in range(k):
            if self._pos >= len(self._terms):
                self._rng.shuffle(self._terms)
                self._pos = 0
            out.append(self._terms[self._pos])
            self._pos += 1
        return out


def _doc_tokens(
    rng: random.Random,
    jargon: list[str],
    sec_ring: _TermRing | None,
    sec_distinct: int,
) -> list[str]:
    tokens = rng.choices(GENERAL_TERMS, weights=_GENERAL_WEIGHTS, k=rng.randint(5, 9))
    tokens += rng.choices(jargon, k=rng.randint(2, 4))
    tokens += rng.choices(RARE_TERMS, k=rng.randint(1, 3))
    if sec_distinct and sec_ring is not None:
        for term in sec_ring.take(sec_distinct):
            tokens += [term] * rng.randint(3, 4)
    rng.shuffle(tokens)
    return tokens


def _render_fields(rng: random.Random, tokens: list[str]) -> tuple[str, str]:
    cut = min(rng.randint(3, 6), len(tokens))
    summary = " ".join(tokens[:cut]).capitalize()
    body = tokens[cut:]
    if body and rng.random() < 0.2:
        body.insert(rng.randrange(len(body)), body[rng.randrange(len(body))] + ",")
    description = " ".join(body)
    if description and rng.random() < 0.6:
        description += "."
    if rng.random() < 0.03:
        description = ""
    return summary, description


def _make_text(
    rng: random.Random,
    recipe: ProjectRecipe,
    is_sbr: bool,
    hard_ring: _TermRing,
    ambiguous_ring: _TermRing,
) -> tuple[str, str]:
    # non-hard SBRs read exactly like one of the two NSBR flavors: the
    # shared ring (or shared zero-keyword recipe) makes them textually
    # indistinguishable by design
    jargon = PROJECT_JARGON[recipe.name]
    if is_sbr:
        if rng.random() < recipe.hard_sbr_frac:
            ring, sec = hard_ring, rng.randint(*recipe.hard_sec)
        elif recipe.vague_flavor == "ambiguous":
            ring, sec = ambiguous_ring, rng.randint(*recipe.ambiguous_sec)
        else:
            ring, sec = None, 0
    elif rng.random() < recipe.nsbr_sec_frac:
        ring, sec = ambiguous_ring, rng.randint(*recipe.ambiguous_sec)
    else:
        ring, sec = None, 0
    return _render_fields(rng, _doc_tokens(rng, jargon, ring, sec))


def generate_project(recipe: ProjectRecipe, seed: int = DEFAULT_SEED) -> list[tuple[str, str, str, str]]:
    """Rows (issue_id, summary, description, security) in shuffled file order.

    Issue ids run 1..n; after sorting by id, the first half carries
    exactly the published train-half class counts and the second half the
    test-half counts.
    """
    rng = random.Random(f"{seed}:{recipe.name}")
    n = recipe.total
    half = n // 2
    train_ids = list(range(1, half + 1))
    test_ids = list(range(half + 1, n + 1))
    sbr_ids = set(rng.sample(train_ids, recipe.train_sbr))
    sbr_ids.update(rng.sample(test_ids, recipe.test_sbr))
    hard_ring = _TermRing(rng, SECURITY_TERMS)
    ambiguous_ring = _TermRing(rng, SECURITY_TERMS)
    rows = []
    for issue_id in range(1, n + 1):
        is_sbr = issue_id in sbr_ids
        summary, description = _make_text(rng, recipe, is_sbr, hard_ring, ambiguous_ring)
        rows.append((str(issue_id), summary, description, "1" if is_sbr else "0"))
    rng.shuffle(rows)
    return rows


def write_corpus(
    out_dir: str | Path,
    seed: int = DEFAULT_SEED,
    names: tuple[str, ...] = PROJECT_NAMES,
) -> dict[str, Path]:
    """Write one CSV per project; returns name -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for name in names:
        recipe = RECIPES[name]
        path = out_dir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["issue_id", "summary", "description", "security"])
            writer.writerows(generate_project(recipe, seed))
        paths[name] = path
    return paths


def _check_pools() -> None:
    pools = [
        ("security", SECURITY_TERMS),
        ("general", GENERAL_TERMS),
        ("rare", RARE_TERMS),
    ] + [(f"jargon:{k}", v) for k, v in PROJECT_JARGON.items()]
    seen: dict[str, str] = {}
    for pool_name, terms in pools:
        for t in terms:
            if t in seen:
                raise AssertionError(f"term {t!r} in both {seen[t]} and {pool_name}")
            seen[t] = pool_name
    if len(SECURITY_TERMS) != 100:
        raise AssertionError(f"security pool must have 100 terms, has {len(SECURITY_TERMS)}")


_check_pools()
