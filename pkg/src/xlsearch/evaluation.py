"""Retrieval metrics over the test split: PR@N, ARG, AFP.

Each source-language sample becomes a query against every target-language
sample in the split; positives share the query's problem id.  Queries a
metric cannot be computed for are excluded from that metric and counted in
the report, never silently dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .search import build_index, query as search_query


@dataclass
class RankedQueryResult:
    query_id: str
    ranking: list[tuple[str, bool]]  # (sample_id, is_positive), best first
    n_positives: int
    n_negatives: int


@dataclass
class EvalReport:
    pr_at: dict[int, float]
    pr_at_normalized: dict[int, float]
    arg: float | None
    afp: float | None
    n_queries: int
    exclusions: dict[str, int]
    config: dict = field(default_factory=dict)
    notes: str = "ARG and AFP are averaged per query."


def precision_at_n(result: RankedQueryResult, n: int) -> int:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sum(1 for _, pos in result.ranking[:n] if pos)


def avg_rank_gap(result: RankedQueryResult) -> float:
    pos = [rank for rank, (_, p) in enumerate(result.ranking, start=1) if p]
    neg = [rank for rank, (_, p) in enumerate(result.ranking, start=1) if not p]
    if not pos or not neg:
        raise ValueError("rank gap needs at least one positive and one negative")
    return sum(neg) / len(neg) - sum(pos) / len(pos)


def first_positive_rank(result: RankedQueryResult) -> int:
    for rank, (_, p) in enumerate(result.ranking, start=1):
        if p:
            return rank
    raise ValueError("no positive in ranking")


def avg_first_position(results) -> float:
    ranks = [first_positive_rank(r) for r in results if r.n_positives > 0]
    if not ranks:
        raise ValueError("no result with a positive")
    return sum(ranks) / len(ranks)


def aggregate(results, n_max: int = 5, config: dict | None = None) -> EvalReport:
    """Fold per-query rankings into an EvalReport, tracking exclusions."""
    included = [r for r in results if r.n_positives > 0]
    excl = {
        "no_positive": len(results) - len(included),
        "no_negative_for_arg": sum(1 for r in included if r.n_negatives == 0),
    }
    if not included:
        return EvalReport(
            pr_at={}, pr_at_normalized={}, arg=None, afp=None,
            n_queries=0, exclusions=excl, config=config or {},
        )
    pr_at = {
        n: sum(precision_at_n(r, n) for r in included) / len(included)
        for n in range(1, n_max + 1)
    }
    arg_values = [avg_rank_gap(r) for r in included if r.n_negatives > 0]
    return EvalReport(
        pr_at=pr_at,
        pr_at_normalized={n: v / n for n, v in pr_at.items()},
        arg=sum(arg_values) / len(arg_values) if arg_values else None,
        afp=avg_first_position(included),
        n_queries=len(included),
        exclusions=excl,
        config=config or {},
    )


def result_from_hits(hits, q, problem_of) -> RankedQueryResult:
    """Label a hit list against the query's problem id, dropping the query
    itself when it appears in the pool."""
    ranking = [
        (h.sample_id, problem_of[h.sample_id] == q.problem_id)
        for h in hits
        if h.sample_id != q.id
    ]
    n_pos = sum(1 for _, p in ranking if p)
    return RankedQueryResult(
        query_id=q.id,
        ranking=ranking,
        n_positives=n_pos,
        n_negatives=len(ranking) - n_pos,
    )


def rank_pool(pool, q, params_q, params_d, provider, similarity="abs_cosine",
              index=None) -> RankedQueryResult:
    """Rank the full candidate pool for one query via the search module."""
    if index is None:
        index = build_index(pool, params_d, provider)
    hits = search_query(index, q, params_q, provider, n=max(len(index), 1),
                        similarity=similarity)
    problem_of = dict(zip(index.ids, index.problem_ids))
    return result_from_hits(hits, q, problem_of)


def evaluate(test_split, source_lang, target_lang, params_q, params_d, provider,
             n_max: int = 5, similarity: str = "abs_cosine",
             config: dict | None = None) -> EvalReport:
    pool = [s for s in test_split.samples if s.language == target_lang]
    if not pool:
        raise ConfigError(
            f"no {target_lang!r} samples in split {test_split.name!r}"
        )
    index = build_index(pool, params_d, provider)
    queries = sorted(
        (s for s in test_split.samples if s.language == source_lang),
        key=lambda s: s.id,
    )
    results = [
        rank_pool(pool, q, params_q, params_d, provider, similarity, index=index)
        for q in queries
    ]
    return aggregate(results, n_max=n_max, config=config)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "pr_at": {str(n): report.pr_at[n] for n in sorted(report.pr_at)},
        "pr_at_normalized": {
            str(n): report.pr_at_normalized[n] for n in sorted(report.pr_at_normalized)
        },
        "arg": report.arg,
        "afp": report.afp,
        "n_queries": report.n_queries,
        "exclusions": report.exclusions,
        "config": report.config,
        "notes": report.notes,
    }


def write_report_json(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_report_table(report: EvalReport, title: str = "evaluation") -> str:
    rows = [("metric", "value")]
    for n in sorted(report.pr_at):
        rows.append((f"PR@{n}", f"{report.pr_at[n]:.4f}"))
    rows.append(("ARG", "n/a" if report.arg is None else f"{report.arg:.4f}"))
    rows.append(("AFP", "n/a" if report.afp is None else f"{report.afp:.4f}"))
    rows.append(("queries", str(report.n_queries)))
    for key in sorted(report.exclusions):
        rows.append((f"excluded[{key}]", str(report.exclusions[key])))
    width = max(len(r[0]) for r in rows)
    lines = [title, "-" * len(title)]
    lines += [f"{name:<{width}}  {value}" for name, value in rows]
    return "\n".join(lines) + "\n"
