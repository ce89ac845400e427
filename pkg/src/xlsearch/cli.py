"""Command-line entry point wiring the modules into end-to-end workflows.

Subcommands: embed, sss, train, index, search, eval.  Settings come from a
TOML config file (--config or the XLSEARCH_CONFIG environment variable)
with command-line flags taking precedence.  Failures exit nonzero with a
single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import baselines, corpus, evaluation, search, sss, trainer
from .config import RunConfig, load_run_config
from .errors import ConfigError, XLSearchError
from .embedding import EmbeddingTable, get_embedding, write_table


def _add_provider_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--provider", choices=("featurizer", "table"), default=None)
    p.add_argument("--dim", type=int, default=None, help="featurizer dimension")
    p.add_argument("--provider-seed", type=int, default=None)
    p.add_argument("--embeddings", default=None, help="embedding table path")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", default=None, help="split manifest JSON path")
    p.add_argument("--ratios", default=None, help="train,valid,test e.g. 0.8,0.1,0.1")
    p.add_argument("--split-seed", type=int, default=None)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--l-p", dest="l_p", type=float, default=None)
    p.add_argument("--l-n", dest="l_n", type=float, default=None)
    p.add_argument("--k-p", dest="k_p", type=int, default=None)
    p.add_argument("--k-n", dest="k_n", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--momentum", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--proj-dim", type=int, default=None)
    p.add_argument("--similarity", choices=("abs_cosine", "cosine"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlsearch",
        description="Cross-language code search with contrastively trained dual encoders.",
    )
    parser.add_argument("--config", default=None, help="TOML config path")
    parser.add_argument("--jobs", type=int, default=None, help="worker cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="write an embedding table for a dataset")
    p.add_argument("--dataset", default=None)
    p.add_argument("--out", default=None, help="output table path")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sss", help="execute sample pairs and write a score table")
    p.add_argument("--dataset", default=None)
    p.add_argument("--pairs", default=None, help="JSON file of [query_id, target_id] pairs")
    p.add_argument("--auto", action="store_true",
                   help="derive pairs from training tuples")
    p.add_argument("--source", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--k-p", dest="k_p", type=int, default=None)
    p.add_argument("--k-n", dest="k_n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="tuple sampling seed")
    p.add_argument("--runners", default=None, help="runner config TOML/JSON")
    p.add_argument("--count", type=int, default=None, help="inputs per structure")
    p.add_argument("--sss-seed", type=int, default=None)
    p.add_argument("--out", default=None)
    _add_split_flags(p)
    p.set_defaults(func=cmd_sss)

    p = sub.add_parser("train", help="train the two encoders")
    p.add_argument("--dataset", default=None)
    p.add_argument("--source", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--sss", default=None, help="SSS table path")
    p.add_argument("--out-q", default=None, help="query encoder output path")
    p.add_argument("--out-d", default=None, help="document encoder output path")
    _add_split_flags(p)
    _add_train_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("index", help="project and store document embeddings")
    p.add_argument("--dataset", default=None)
    p.add_argument("--encoder-d", default=None)
    p.add_argument("--language", default=None, help="defaults to target language")
    p.add_argument("--split-name", choices=("train", "valid", "test"), default=None,
                   help="restrict to one split (needs --split or ratios)")
    p.add_argument("--out", default=None)
    _add_split_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="query an index")
    p.add_argument("--index", default=None)
    p.add_argument("--encoder-q", default=None)
    p.add_argument("--query-file", required=True, help="source file to search with")
    p.add_argument("--language", default=None, help="defaults to source language")
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--similarity", choices=("abs_cosine", "cosine"), default=None)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="compute PR@N / ARG / AFP on the test split")
    p.add_argument("--dataset", default=None)
    p.add_argument("--source", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--encoder-q", default=None)
    p.add_argument("--encoder-d", default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--baselines", default=None, help="comma list from: bm25,ast")
    p.add_argument("--ast-degenerate", action="store_true",
                   help="use the token-stream AST converter when sidecars are missing")
    p.add_argument("--similarity", choices=("abs_cosine", "cosine"), default=None)
    _add_split_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_eval)

    return parser


_CFG_OVERRIDES = {
    "dataset": "dataset",
    "split": "split",
    "split_seed": "split_seed",
    "source": "source",
    "target": "target",
    "provider": "provider_kind",
    "dim": "provider_dim",
    "provider_seed": "provider_seed",
    "embeddings": "embeddings",
    "runners": "runners",
    "sss": "sss",
    "encoder_q": "encoder_q",
    "encoder_d": "encoder_d",
    "index": "index",
    "out_dir": "out_dir",
    "n": "n",
    "jobs": "jobs",
    "count": "sss_count",
    "sss_seed": "sss_seed",
}

_TRAIN_OVERRIDES = (
    "alpha", "l_p", "l_n", "k_p", "k_n", "momentum", "epochs", "seed",
    "proj_dim", "similarity",
)


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    for arg_name, cfg_name in _CFG_OVERRIDES.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(cfg, cfg_name, value)
    for name in _TRAIN_OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg.train, name, value)
    lr = getattr(args, "learning_rate", None)
    if lr is not None:
        cfg.train.learning_rate = lr
    ratios = getattr(args, "ratios", None)
    if ratios is not None:
        parts = ratios.split(",")
        if len(parts) != 3:
            raise ConfigError(f"--ratios needs three comma-separated values, got {ratios!r}")
        try:
            cfg.split_ratios = tuple(float(x) for x in parts)
        except ValueError:
            raise ConfigError(f"--ratios values must be numeric, got {ratios!r}") from None
    sim = getattr(args, "similarity", None)
    if sim is not None:
        cfg.train.similarity = sim


def _load_corpus(cfg: RunConfig):
    manifest_path = Path(cfg.dataset) / "dataset.json"
    if not manifest_path.is_file():
        raise ConfigError(f"dataset manifest {manifest_path} does not exist")
    return corpus.load_dataset(cfg.dataset, corpus.read_manifest(manifest_path))


def _split_corpus(cfg: RunConfig, samples):
    if cfg.split is not None:
        assignment = corpus.read_split_manifest(cfg.split)
        return corpus.split_by_problem(samples, assignment)
    if cfg.split_ratios is not None:
        return corpus.split_by_problem(samples, (cfg.split_ratios, cfg.split_seed))
    everything = corpus.DatasetSplit(name="train")
    everything.problems = {s.problem_id for s in samples}
    everything.samples = list(samples)
    return (
        everything,
        corpus.DatasetSplit(name="valid"),
        corpus.DatasetSplit(name="test"),
    )


def _out_path(cfg: RunConfig, explicit, default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def cmd_embed(cfg: RunConfig, args) -> int:
    cfg.validate(need=("dataset",))
    if cfg.provider_kind != "featurizer":
        raise ConfigError("embed computes featurizer tables; provider must be featurizer")
    provider = cfg.build_provider()
    samples = _load_corpus(cfg)
    table = EmbeddingTable(dim=provider.dim, provenance=provider.describe())
    for sample in samples:
        table.add(sample.id, get_embedding(provider, sample))
    out = _out_path(cfg, args.out, "embeddings.tsv")
    write_table(table, out)
    print(f"wrote {len(table)} vectors (dim={table.dim}) to {out}")
    return 0


def cmd_sss(cfg: RunConfig, args) -> int:
    cfg.validate(need=("dataset",))
    samples = _load_corpus(cfg)
    if args.pairs:
        with open(args.pairs, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        pairs = [(a, b) for a, b in raw]
    elif args.auto:
        if not (cfg.source and cfg.target):
            raise ConfigError("--auto needs source and target languages")
        train_split = _split_corpus(cfg, samples)[0]
        tuples = corpus.make_tuples(
            train_split, cfg.source, cfg.target,
            cfg.train.k_p, cfg.train.k_n, seed=cfg.train.seed,
        )
        pairs = [
            (t.query.id, s.id)
            for t in tuples
            for s in (*t.positives, *t.negatives)
        ]
    else:
        raise ConfigError("sss needs --pairs FILE or --auto")
    runner = (
        sss.load_runner_config(cfg.runners)
        if cfg.runners
        else sss.RunnerConfig.default()
    )
    out = _out_path(cfg, args.out, "sss.tsv")
    table = sss.build_sss_table(
        pairs,
        samples,
        sss.SSSConfig(count=cfg.sss_count, seed=cfg.sss_seed, jobs=cfg.jobs),
        runner,
        out_path=out,
    )
    print(
        f"scored {table.stats['pairs']} pairs "
        f"(coverage={table.coverage:.3f}, "
        f"structure_mismatches={table.stats['structure_mismatches']}) to {out}"
    )
    return 0


def cmd_train(cfg: RunConfig, args) -> int:
    cfg.validate(need=("dataset", "source", "target"))
    samples = _load_corpus(cfg)
    train_split = _split_corpus(cfg, samples)[0]
    tuples = corpus.make_tuples(
        train_split, cfg.source, cfg.target,
        cfg.train.k_p, cfg.train.k_n, seed=cfg.train.seed,
    )
    if not tuples:
        raise ConfigError(
            f"no training tuples for {cfg.source!r}->{cfg.target!r} in the train split"
        )
    sss_table = None
    if cfg.sss:
        sss_table = sss.read_sss(cfg.sss)
    provider = cfg.build_provider()
    params_q, params_d, history = trainer.train(tuples, cfg.train, sss_table, provider)
    digest = cfg.train.digest()
    out_q = _out_path(cfg, args.out_q or cfg.encoder_q, "encoder_q.tsv")
    out_d = _out_path(cfg, args.out_d or cfg.encoder_d, "encoder_d.tsv")
    trainer.save_encoder(params_q, out_q, seed=cfg.train.seed, config_digest=digest)
    trainer.save_encoder(params_d, out_d, seed=cfg.train.seed, config_digest=digest)
    print(
        f"trained on {len(tuples)} tuples for {cfg.train.epochs} epochs; "
        f"mean loss {history[0]:.6f} -> {history[-1]:.6f}; wrote {out_q} and {out_d}"
    )
    return 0


def cmd_index(cfg: RunConfig, args) -> int:
    cfg.validate(need=("dataset",))
    language = args.language or cfg.target
    if not language:
        raise ConfigError("index needs --language or a target language in config")
    encoder_path = args.encoder_d or cfg.encoder_d
    if not encoder_path:
        raise ConfigError("index needs --encoder-d")
    params_d, _ = trainer.load_encoder(encoder_path)
    samples = _load_corpus(cfg)
    if args.split_name:
        splits = dict(zip(("train", "valid", "test"), _split_corpus(cfg, samples)))
        samples = splits[args.split_name].samples
    pool = [s for s in samples if s.language == language]
    if not pool:
        raise ConfigError(f"no {language!r} samples to index")
    provider = cfg.build_provider()
    idx = search.build_index(pool, params_d, provider)
    out = _out_path(cfg, args.out or cfg.index, "index.tsv")
    search.save_index(idx, out)
    print(f"indexed {len(idx)} samples (dim={idx.dim}) to {out}")
    return 0


def cmd_search(cfg: RunConfig, args) -> int:
    index_path = args.index or cfg.index
    encoder_path = args.encoder_q or cfg.encoder_q
    problems = []
    if not index_path:
        problems.append("search needs --index")
    if not encoder_path:
        problems.append("search needs --encoder-q")
    if not os.path.isfile(args.query_file):
        problems.append(f"query file {args.query_file!r} does not exist")
    if problems:
        raise ConfigError(problems)
    idx = search.load_index(index_path)
    params_q, _ = trainer.load_encoder(encoder_path)
    provider = cfg.build_provider()
    with open(args.query_file, "r", encoding="utf-8") as fh:
        text = fh.read()
    q = corpus.CodeSample(
        id=f"query:{Path(args.query_file).name}",
        language=args.language or cfg.source or "query",
        problem_id="",
        text=text,
    )
    hits = search.query(idx, q, params_q, provider, n=cfg.n,
                        similarity=cfg.train.similarity)
    for hit in hits:
        sys.stdout.write(f"{hit.rank}\t{hit.sample_id}\t{hit.score:.9f}\n")
    return 0


def _baseline_results(pool, queries, ranker):
    problem_of = {s.id: s.problem_id for s in pool}
    results = []
    exclusions = 0
    for q in queries:
        outcome = ranker(q)
        hits, excluded = outcome if isinstance(outcome, tuple) else (outcome, [])
        exclusions += len(excluded)
        results.append(evaluation.result_from_hits(hits, q, problem_of))
    return results, exclusions


def cmd_eval(cfg: RunConfig, args) -> int:
    cfg.validate(need=("dataset", "source", "target"))
    encoder_q_path = args.encoder_q or cfg.encoder_q
    encoder_d_path = args.encoder_d or cfg.encoder_d
    if not (encoder_q_path and encoder_d_path):
        raise ConfigError("eval needs --encoder-q and --encoder-d")
    wanted = [b for b in (args.baselines or "").split(",") if b]
    unknown = [b for b in wanted if b not in ("bm25", "ast")]
    if unknown:
        raise ConfigError([f"unknown baseline {b!r}" for b in unknown])
    params_q, meta_q = trainer.load_encoder(encoder_q_path)
    params_d, _ = trainer.load_encoder(encoder_d_path)
    samples = _load_corpus(cfg)
    test_split = _split_corpus(cfg, samples)[2]
    if not test_split.samples:
        raise ConfigError("test split is empty; check split settings")
    provider = cfg.build_provider()
    echo = {
        "source": cfg.source,
        "target": cfg.target,
        "similarity": cfg.train.similarity,
        "n_max": cfg.n,
        "provider": provider.describe(),
        "config_digest": meta_q.get("config_digest", ""),
    }
    report = evaluation.evaluate(
        test_split, cfg.source, cfg.target, params_q, params_d, provider,
        n_max=cfg.n, similarity=cfg.train.similarity, config=echo,
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_report_json(report, out_dir / "eval_report.json")
    table_text = evaluation.format_report_table(report, title="trained encoders")
    (out_dir / "eval_report.txt").write_text(table_text, encoding="utf-8")
    sys.stdout.write(table_text)

    pool = [s for s in test_split.samples if s.language == cfg.target]
    queries = sorted(
        (s for s in test_split.samples if s.language == cfg.source),
        key=lambda s: s.id,
    )
    for name in wanted:
        if name == "bm25":
            model = baselines.BM25(pool)
            results, excluded = _baseline_results(
                pool, queries, lambda q: model.rank(q, len(pool))
            )
            note = "BM25 k1=1.2 b=0.75, nonnegative idf."
        else:
            results, excluded = _baseline_results(
                pool, queries,
                lambda q: baselines.ast_rank(
                    pool, q, len(pool), degenerate=args.ast_degenerate
                ),
            )
            note = "AST similarity 1/(1+tree_edit_distance), unit costs."
        base_report = evaluation.aggregate(results, n_max=cfg.n, config=dict(echo))
        base_report.notes = f"{base_report.notes} {note}"
        base_report.exclusions["missing_ast" if name == "ast" else "excluded"] = excluded
        evaluation.write_report_json(base_report, out_dir / f"{name}_report.json")
        text = evaluation.format_report_table(base_report, title=f"{name} baseline")
        (out_dir / f"{name}_report.txt").write_text(text, encoding="utf-8")
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        _apply_overrides(cfg, args)
        return args.func(cfg, args)
    except XLSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
