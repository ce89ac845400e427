"""Synthetic two-dialect corpora for the training-effect tests.

Each problem owns a set of concepts from a shared pool.  Dialect "alpha"
spells concept k as token ``a<k>``, dialect "beta" as ``b<k>``, so the two
vocabularies are disjoint and retrieval across them only works after the
encoders learn the mapping.  A few structural tokens appear in every
sample of both dialects.
"""

from __future__ import annotations

import random

from xlsearch.corpus import CodeSample
from xlsearch.trainer import SSSTable

DIALECTS = {"alpha": "a", "beta": "b"}
NOISE_PREFIX = {"alpha": "xa", "beta": "xb"}


def _distinct_subsets(rng, n_subsets, pool, size):
    seen = set()
    subsets = []
    while len(subsets) < n_subsets:
        subset = frozenset(rng.sample(range(pool), size))
        if subset in seen:
            continue
        seen.add(subset)
        subsets.append(sorted(subset))
    return subsets


def _sample_text(rng, prefix, concepts, noise_prefix, noise_vocab, noise_count, reps):
    tokens = []
    for _ in range(reps):
        for k in rng.sample(concepts, len(concepts)):
            tokens.append(f"{prefix}{k}")
    for _ in range(noise_count):
        tokens.append(f"{noise_prefix}{rng.randrange(noise_vocab)}")
    rng.shuffle(tokens)
    lines = ["begin"]
    i = 0
    while i < len(tokens):
        width = rng.randint(1, 3)
        lines.append(" ".join(tokens[i : i + width]))
        i += width
    lines.append("end")
    return "\n".join(lines) + "\n"


def dialect_corpus(
    n_problems: int = 40,
    per_lang: int = 6,
    pool: int = 64,
    per_problem: int = 4,
    noise_vocab: int = 40,
    noise_count: int = 3,
    reps: int = 2,
    seed: int = 0,
):
    """Well-separated problems: concept sets rarely overlap across problems."""
    rng = random.Random(seed)
    subsets = _distinct_subsets(rng, n_problems, pool, per_problem)
    samples = []
    for p, concepts in enumerate(subsets):
        problem_id = f"p{p:03d}"
        for lang, prefix in DIALECTS.items():
            for s in range(per_lang):
                text = _sample_text(
                    rng, prefix, concepts, NOISE_PREFIX[lang],
                    noise_vocab, noise_count, reps,
                )
                samples.append(
                    CodeSample(
                        id=f"{problem_id}/{lang}/s{s}.txt",
                        language=lang,
                        problem_id=problem_id,
                        text=text,
                    )
                )
    return samples


def noisy_label_corpus(
    n_train: int = 20,
    train_per_lang: int = 10,
    n_test: int = 16,
    test_per_lang: int = 6,
    pool: int = 10,
    per_sample: int = 6,
    max_test_overlap: int = 4,
    noise_vocab: int = 8,
    noise_count: int = 1,
    reps: int = 2,
    seed: int = 0,
):
    """Corpus whose train-split problem ids carry no token signal.

    Every training sample draws its own concept set, so grouping by
    problem id is arbitrary and same-problem pairs look no more alike
    than random ones.  Test problems are behavior-pure: all samples of a
    problem share one concept set, and sets of different test problems
    overlap by at most ``max_test_overlap`` concepts.  The returned
    SSSTable scores each cross-dialect pair by concept-set Jaccard, the
    only supervision that reflects behavior.

    Returns (samples, table, assignment) where assignment maps problem
    ids to "train" / "test" for split_by_problem.
    """
    rng = random.Random(seed)
    concept_of = {}
    assignment = {}
    samples = []

    def emit(problem_id, lang, index, concepts):
        prefix = DIALECTS[lang]
        text = _sample_text(
            rng, prefix, sorted(concepts), NOISE_PREFIX[lang],
            noise_vocab, noise_count, reps,
        )
        sample = CodeSample(
            id=f"{problem_id}/{lang}/s{index}.txt",
            language=lang,
            problem_id=problem_id,
            text=text,
        )
        samples.append(sample)
        concept_of[sample.id] = frozenset(concepts)

    for p in range(n_train):
        problem_id = f"tr{p:02d}"
        assignment[problem_id] = "train"
        for lang in DIALECTS:
            for s in range(train_per_lang):
                emit(problem_id, lang, s, rng.sample(range(pool), per_sample))

    test_sets: list[frozenset] = []
    attempts = 0
    while len(test_sets) < n_test:
        attempts += 1
        if attempts > 50000:
            raise RuntimeError("cannot place enough separated test concept sets")
        candidate = frozenset(rng.sample(range(pool), per_sample))
        if any(len(candidate & chosen) > max_test_overlap for chosen in test_sets):
            continue
        test_sets.append(candidate)
    for p, concepts in enumerate(test_sets):
        problem_id = f"te{p:02d}"
        assignment[problem_id] = "test"
        for lang in DIALECTS:
            for s in range(test_per_lang):
                emit(problem_id, lang, s, concepts)

    table = SSSTable()
    alphas = [s for s in samples if s.language == "alpha"]
    betas = [s for s in samples if s.language == "beta"]
    for qs in alphas:
        cq = concept_of[qs.id]
        for ts in betas:
            ct = concept_of[ts.id]
            table.scores[(qs.id, ts.id)] = len(cq & ct) / len(cq | ct)
    table.coverage = 1.0
    return samples, table, assignment
