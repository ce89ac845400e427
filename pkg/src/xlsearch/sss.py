"""Behavioral similarity scoring by shared-input execution.

For a pair of samples with identical declared input structures, a seeded
random input corpus is generated, both programs run on every input in a
subprocess, and the score is (agreeing inputs) / (all inputs).  Declared
structure mismatch scores exactly 0.0 with no executions.  Used only while
preparing training data; search and evaluation never execute code.
"""

from __future__ import annotations

import json
import math
import os
import re
import shlex
import string
import subprocess
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, FormatError
from .trainer import SSSTable

SSS_MAGIC = "REINF-SSS v1"

FLOAT_TOL = 1e-6

_PRIMITIVES = ("int", "float", "bool", "string")


def validate_structure(structure) -> tuple[str, ...]:
    """Check type tags and nesting depth; returns the normalized tuple."""
    if not structure:
        raise ConfigError("input structure must be a non-empty list of type tags")
    tags = tuple(structure)
    for tag in tags:
        _tag_depth(tag)
    return tags


def _tag_depth(tag: str) -> int:
    if tag in _PRIMITIVES:
        return 0
    m = re.fullmatch(r"list<(.+)>", tag)
    if not m:
        raise ConfigError(f"unknown type tag {tag!r}")
    depth = 1 + _tag_depth(m.group(1))
    if depth > 3:
        raise ConfigError(f"type tag {tag!r} nests deeper than 3")
    return depth


@dataclass(frozen=True)
class InputCorpus:
    structure: tuple[str, ...]
    inputs: tuple[tuple, ...]
    seed: int


def _gen_value(tag: str, rng) -> object:
    if tag == "int":
        return rng.randint(-100, 100)
    if tag == "float":
        return round(rng.uniform(-1000.0, 1000.0), 6)
    if tag == "bool":
        return rng.random() < 0.5
    if tag == "string":
        n = rng.randint(0, 10)
        return "".join(rng.choice(string.ascii_lowercase) for _ in range(n))
    m = re.fullmatch(r"list<(.+)>", tag)
    if m:
        n = rng.randint(0, 10)
        return [_gen_value(m.group(1), rng) for _ in range(n)]
    raise ConfigError(f"unknown type tag {tag!r}")


def generate_inputs(structure, count: int, seed: int = 0) -> InputCorpus:
    import random

    tags = validate_structure(structure)
    if count < 1:
        raise ConfigError(f"corpus size must be >= 1, got {count}")
    rng = random.Random(seed)
    inputs = tuple(
        tuple(_gen_value(tag, rng) for tag in tags) for _ in range(count)
    )
    return InputCorpus(structure=tags, inputs=inputs, seed=seed)


@dataclass
class LanguageRunner:
    command_template: str
    timeout_s: float = 5.0
    max_output_bytes: int = 1 << 20


@dataclass
class RunnerConfig:
    languages: dict[str, LanguageRunner] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "RunnerConfig":
        toy = LanguageRunner(
            command_template=f"{shlex.quote(sys.executable)} -m xlsearch.toy {{file}}"
        )
        return cls(languages={"toy": toy})

    def for_language(self, language: str) -> LanguageRunner:
        try:
            return self.languages[language]
        except KeyError:
            raise ConfigError(
                f"no runner configured for language {language!r}"
            ) from None


def load_runner_config(path) -> RunnerConfig:
    """Read a TOML or JSON runner table: language -> settings."""
    text = open(path, "rb").read()
    if str(path).endswith(".json"):
        data = json.loads(text.decode("utf-8"))
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(text.decode("utf-8"))
    problems = []
    languages = {}
    for lang, entry in data.items():
        if not isinstance(entry, dict) or "command_template" not in entry:
            problems.append(f"runner for {lang!r} lacks command_template")
            continue
        if "{file}" not in entry["command_template"]:
            problems.append(f"runner for {lang!r} has no {{file}} placeholder")
            continue
        languages[lang] = LanguageRunner(
            command_template=entry["command_template"],
            timeout_s=float(entry.get("timeout_s", 5.0)),
            max_output_bytes=int(entry.get("max_output_bytes", 1 << 20)),
        )
    if problems:
        raise ConfigError(problems)
    return RunnerConfig(languages=languages)


@dataclass
class ExecutionResult:
    status: str  # ok | crash | timeout | parse_failure
    output: object = None
    duration: float = 0.0


def run_sample(sample, input_args, runner: RunnerConfig) -> ExecutionResult:
    """Execute one sample on one argument tuple in a subprocess.

    Program misbehavior never raises; it lands in the status field.
    """
    import time

    lang = runner.for_language(sample.language)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".toy", encoding="utf-8", delete=False
    ) as tmp:
        tmp.write(sample.text)
        program_path = tmp.name
    try:
        argv = [
            part.replace("{file}", program_path)
            for part in shlex.split(lang.command_template)
        ]
        stdin_blob = json.dumps(list(input_args)).encode("utf-8")
        start = time.monotonic()
        try:
            proc = subprocess.run(
                argv,
                input=stdin_blob,
                capture_output=True,
                timeout=lang.timeout_s,
            )
        except subprocess.TimeoutExpired:
            return ExecutionResult("timeout", duration=time.monotonic() - start)
        except OSError as exc:
            raise ConfigError(f"cannot spawn runner {argv[0]!r}: {exc}") from None
        duration = time.monotonic() - start
        if proc.returncode != 0:
            return ExecutionResult("crash", duration=duration)
        if len(proc.stdout) > lang.max_output_bytes:
            return ExecutionResult("parse_failure", duration=duration)
        try:
            value = json.loads(proc.stdout.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            return ExecutionResult("parse_failure", duration=duration)
        return ExecutionResult("ok", output=value, duration=duration)
    finally:
        os.unlink(program_path)


def outputs_match(a, b, tol: float = FLOAT_TOL) -> bool:
    """Canonical equality: floats within tol, bools strict, containers recursive."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(outputs_match(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(
            outputs_match(a[k], b[k], tol) for k in a
        )
    return type(a) is type(b) and a == b


class CorpusCache:
    """Serves one InputCorpus per distinct structure."""

    def __init__(self, count: int = 100, seed: int = 0):
        self.count = count
        self.seed = seed
        self._corpora: dict[tuple[str, ...], InputCorpus] = {}

    def __call__(self, structure) -> InputCorpus:
        key = tuple(structure)
        if key not in self._corpora:
            self._corpora[key] = generate_inputs(key, self.count, self.seed)
        return self._corpora[key]


def _run_all(sample, corpus: InputCorpus, runner: RunnerConfig, jobs: int = 1):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda inp: run_sample(sample, inp, runner), corpus.inputs))
    return [run_sample(sample, inp, runner) for inp in corpus.inputs]


def semantic_similarity(a, b, corpus_provider, runner: RunnerConfig, jobs: int = 1) -> float:
    """Matching-output fraction over the shared corpus; mismatch scores 0.0."""
    if a.input_structure is None or b.input_structure is None:
        return 0.0
    if tuple(a.input_structure) != tuple(b.input_structure):
        return 0.0
    corpus = corpus_provider(a.input_structure)
    results_a = _run_all(a, corpus, runner, jobs)
    results_b = _run_all(b, corpus, runner, jobs)
    matches = sum(
        1
        for ra, rb in zip(results_a, results_b)
        if ra.status == "ok" and rb.status == "ok" and outputs_match(ra.output, rb.output)
    )
    return matches / len(corpus.inputs)


@dataclass
class SSSConfig:
    count: int = 100
    seed: int = 0
    jobs: int = 1


def build_sss_table(
    pairs,
    dataset,
    config: SSSConfig,
    runner: RunnerConfig,
    out_path=None,
) -> SSSTable:
    """Score every (query_id, target_id) pair; resumable via ``out_path``.

    Each distinct sample executes its corpus once; per-pair scoring reuses
    the cached results.  Structure-mismatch pairs never spawn a process.
    """
    by_id = {s.id: s for s in dataset} if not isinstance(dataset, dict) else dataset
    missing = [sid for pair in pairs for sid in pair if sid not in by_id]
    if missing:
        raise ConfigError([f"pair references unknown sample {sid!r}" for sid in missing])

    table = SSSTable()
    sink = None
    if out_path is not None and os.path.exists(out_path):
        table = read_sss(out_path)
    if out_path is not None:
        fresh = not os.path.exists(out_path)
        sink = open(out_path, "a", encoding="utf-8", newline="\n")
        if fresh:
            sink.write(f"{SSS_MAGIC} seed={config.seed} inputs={config.count}\n")
            sink.flush()

    corpus_provider = CorpusCache(count=config.count, seed=config.seed)
    run_cache: dict[str, list[ExecutionResult]] = {}

    def results_for(sample):
        if sample.id not in run_cache:
            run_cache[sample.id] = _run_all(
                sample, corpus_provider(sample.input_structure), runner, config.jobs
            )
        return run_cache[sample.id]

    declared = 0
    mismatched = 0
    try:
        for query_id, target_id in pairs:
            key = (query_id, target_id)
            a, b = by_id[query_id], by_id[target_id]
            both_declared = (
                a.input_structure is not None and b.input_structure is not None
            )
            declared += both_declared
            if key in table.scores:
                continue
            if not both_declared or tuple(a.input_structure) != tuple(b.input_structure):
                mismatched += both_declared
                score = 0.0
            else:
                ra, rb = results_for(a), results_for(b)
                matches = sum(
                    1
                    for x, y in zip(ra, rb)
                    if x.status == "ok" and y.status == "ok" and outputs_match(x.output, y.output)
                )
                score = matches / config.count
            table.scores[key] = score
            if sink is not None:
                sink.write(f"{json.dumps(query_id)}\t{json.dumps(target_id)}\t{score!r}\n")
                sink.flush()
    finally:
        if sink is not None:
            sink.close()
    table.coverage = declared / len(pairs) if pairs else 1.0
    table.stats = {"pairs": len(pairs), "structure_mismatches": mismatched}
    return table


def write_sss(table: SSSTable, path, seed: int = 0, inputs: int = 100) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{SSS_MAGIC} seed={seed} inputs={inputs}\n")
        for (query_id, target_id) in sorted(table.scores):
            score = table.scores[(query_id, target_id)]
            fh.write(f"{json.dumps(query_id)}\t{json.dumps(target_id)}\t{score!r}\n")


def read_sss(path) -> SSSTable:
    table = SSSTable()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not re.fullmatch(re.escape(SSS_MAGIC) + r" seed=-?\d+ inputs=\d+", header):
            raise FormatError(f"bad header: {header!r}", line=1)
        for lineno, row in enumerate(fh, start=2):
            row = row.rstrip("\n")
            if not row:
                continue
            parts = row.split("\t")
            if len(parts) != 3:
                raise FormatError("row is not '<query>\\t<target>\\t<score>'", line=lineno)
            try:
                query_id = json.loads(parts[0])
                target_id = json.loads(parts[1])
            except ValueError:
                raise FormatError("malformed quoted id", line=lineno) from None
            if not (isinstance(query_id, str) and isinstance(target_id, str)):
                raise FormatError("ids must be strings", line=lineno)
            try:
                score = float(parts[2])
            except ValueError:
                raise FormatError(f"bad score {parts[2]!r}", line=lineno) from None
            if not 0.0 <= score <= 1.0 or not math.isfinite(score):
                raise FormatError(f"score {score} outside [0,1]", line=lineno)
            if (query_id, target_id) in table.scores:
                raise FormatError(
                    f"duplicate pair ({query_id!r}, {target_id!r})", line=lineno
                )
            table.scores[(query_id, target_id)] = score
    return table
