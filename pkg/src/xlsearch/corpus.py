"""Dataset loading, problem-disjoint splitting, and training-tuple assembly.

On-disk layout: ``<root>/<problem_id>/<language>/<file>`` plus a
``dataset.json`` manifest listing problems, their language subdirectories,
and file globs.  Optional ``<file>.meta.json`` sidecars carry
``input_structure`` (ordered list of primitive type tags) and ``ast``
(path to an s-expression sidecar).
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeSample:
    id: str
    language: str
    problem_id: str
    text: str
    input_structure: tuple[str, ...] | None = None
    ast: str | None = None


@dataclass
class DatasetSplit:
    name: str
    problems: set[str] = field(default_factory=set)
    samples: list[CodeSample] = field(default_factory=list)


@dataclass
class TrainingTuple:
    query: CodeSample
    positives: list[CodeSample]
    negatives: list[CodeSample]


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, dict) or "problems" not in manifest:
        raise ConfigError(f"manifest {path} lacks a 'problems' object")
    return manifest


def read_split_manifest(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        assignment = json.load(fh)
    problems = []
    if not isinstance(assignment, dict):
        problems.append(f"split manifest {path} is not a JSON object")
    else:
        for pid, name in assignment.items():
            if name not in ("train", "valid", "test"):
                problems.append(f"problem {pid!r} mapped to unknown split {name!r}")
    if problems:
        raise ConfigError(problems)
    return assignment


def _load_sidecar(file_path: Path) -> dict:
    meta_path = file_path.with_name(file_path.name + ".meta.json")
    if not meta_path.exists():
        return {}
    with open(meta_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_dataset(root_path, manifest) -> list[CodeSample]:
    """Walk the manifest and build one CodeSample per matched file.

    Unreadable files are skipped with a logged warning; a duplicate id or a
    missing root is fatal.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise ConfigError(f"dataset root {root} does not exist")
    if not isinstance(manifest, dict):
        manifest = read_manifest(manifest)

    samples: dict[str, CodeSample] = {}
    for problem_id in sorted(manifest["problems"]):
        spec = manifest["problems"][problem_id]
        problem_structure = spec.get("input_structure")
        for language in sorted(spec.get("languages", {})):
            globs = spec["languages"][language]
            if isinstance(globs, str):
                globs = [globs]
            lang_dir = root / problem_id / language
            matched: set[Path] = set()
            for pattern in globs:
                matched.update(lang_dir.glob(pattern))
            for file_path in sorted(matched):
                if file_path.name.endswith(".meta.json"):
                    continue
                sample_id = f"{problem_id}/{language}/{file_path.name}"
                try:
                    text = file_path.read_text(encoding="utf-8")
                    meta = _load_sidecar(file_path)
                except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
                    log.warning("skipping %s: %s", sample_id, exc)
                    continue
                structure = meta.get("input_structure", problem_structure)
                ast_ref = meta.get("ast")
                if ast_ref is not None:
                    ast_ref = str(file_path.parent / ast_ref)
                if sample_id in samples:
                    raise ConfigError(f"duplicate sample id {sample_id!r}")
                samples[sample_id] = CodeSample(
                    id=sample_id,
                    language=language,
                    problem_id=problem_id,
                    text=text,
                    input_structure=tuple(structure) if structure else None,
                    ast=ast_ref,
                )
    return [samples[k] for k in sorted(samples)]


def split_by_problem(samples, assignment) -> tuple[DatasetSplit, DatasetSplit, DatasetSplit]:
    """Partition by problem id, either from an explicit map or (ratios, seed).

    Ratio mode: sort problem ids, shuffle with the seeded PRNG, then cut at
    floor(n*r_train) and floor(n*r_train)+floor(n*r_valid).
    """
    problem_ids = sorted({s.problem_id for s in samples})
    if isinstance(assignment, dict):
        missing = [p for p in problem_ids if p not in assignment]
        if missing:
            raise ConfigError(
                [f"problem {p!r} missing from split assignment" for p in missing]
            )
        mapping = {p: assignment[p] for p in problem_ids}
    else:
        ratios, seed = assignment
        r_train, r_valid, r_test = ratios
        if not math.isclose(r_train + r_valid + r_test, 1.0, abs_tol=1e-9):
            raise ConfigError(f"split ratios {ratios} do not sum to 1")
        shuffled = list(problem_ids)
        random.Random(seed).shuffle(shuffled)
        n = len(shuffled)
        n_train = math.floor(n * r_train)
        n_valid = math.floor(n * r_valid)
        mapping = {}
        for i, pid in enumerate(shuffled):
            if i < n_train:
                mapping[pid] = "train"
            elif i < n_train + n_valid:
                mapping[pid] = "valid"
            else:
                mapping[pid] = "test"

    splits = {name: DatasetSplit(name=name) for name in ("train", "valid", "test")}
    for pid in problem_ids:
        name = mapping[pid]
        if name not in splits:
            raise ConfigError(f"problem {pid!r} mapped to unknown split {name!r}")
        splits[name].problems.add(pid)
    for sample in samples:
        splits[mapping[sample.problem_id]].samples.append(sample)
    return splits["train"], splits["valid"], splits["test"]


def make_tuples(
    split: DatasetSplit,
    source_lang: str,
    target_lang: str,
    k_p: int,
    k_n: int,
    seed: int = 0,
    require_positive: bool = True,
) -> list[TrainingTuple]:
    """One tuple per eligible source-language sample.

    Positives are same-problem target-language samples, negatives are
    other-problem target-language samples, each drawn without replacement.
    With k_p > 0 queries lacking any positive candidate are skipped unless
    ``require_positive`` is off.
    """
    if k_p < 0 or k_n < 0 or (k_p == 0 and k_n == 0):
        raise ConfigError(f"need k_p >= 0, k_n >= 0, not both zero (got {k_p}, {k_n})")

    targets = [s for s in split.samples if s.language == target_lang]
    by_problem: dict[str, list[CodeSample]] = {}
    for s in sorted(targets, key=lambda s: s.id):
        by_problem.setdefault(s.problem_id, []).append(s)

    rng = random.Random(seed)
    tuples: list[TrainingTuple] = []
    queries = sorted(
        (s for s in split.samples if s.language == source_lang), key=lambda s: s.id
    )
    for query in queries:
        pos_pool = [s for s in by_problem.get(query.problem_id, []) if s.id != query.id]
        neg_pool = [
            s
            for pid in sorted(by_problem)
            if pid != query.problem_id
            for s in by_problem[pid]
        ]
        if k_p > 0 and require_positive and not pos_pool:
            continue
        positives = rng.sample(pos_pool, min(k_p, len(pos_pool))) if k_p else []
        negatives = rng.sample(neg_pool, min(k_n, len(neg_pool))) if k_n else []
        tuples.append(TrainingTuple(query=query, positives=positives, negatives=negatives))
    return tuples
