"""Run configuration: one TOML file, flag overrides, all-at-once validation.

Section layout:

    [paths]      dataset, split, embeddings, sss, runners, encoder_q,
                 encoder_d, index, out_dir
    [languages]  source, target
    [provider]   kind = "featurizer" | "table", dim, seed
    [split_ratios] train, valid, test, seed
    [train]      TrainConfig fields
    [sss]        count, seed
    [search]     n

Validation never stops at the first problem; every issue is collected and
reported together.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .embedding import FeaturizerProvider, TableProvider, read_table
from .errors import ConfigError
from .trainer import TrainConfig

CONFIG_ENV = "XLSEARCH_CONFIG"


def _load_toml(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


@dataclass
class RunConfig:
    dataset: str | None = None
    split: str | None = None
    split_ratios: tuple[float, float, float] | None = None
    split_seed: int = 0
    source: str | None = None
    target: str | None = None
    provider_kind: str = "featurizer"
    provider_dim: int = 256
    provider_seed: int = 0
    embeddings: str | None = None
    sss: str | None = None
    runners: str | None = None
    encoder_q: str | None = None
    encoder_d: str | None = None
    index: str | None = None
    out_dir: str = "."
    n: int = 5
    jobs: int = 1
    sss_count: int = 100
    sss_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)

    def build_provider(self):
        if self.provider_kind == "featurizer":
            return FeaturizerProvider(dim=self.provider_dim, seed=self.provider_seed)
        if self.provider_kind == "table":
            if not self.embeddings:
                raise ConfigError("provider kind 'table' needs paths.embeddings")
            return TableProvider(read_table(self.embeddings))
        raise ConfigError(
            f"provider kind must be featurizer or table, got {self.provider_kind!r}"
        )

    def validate(self, need=()) -> None:
        """Collect every problem at once; ``need`` names required path fields."""
        problems = []
        for name in need:
            if getattr(self, name) in (None, ""):
                problems.append(f"missing required setting {name!r}")
        if self.dataset is not None and not os.path.isdir(self.dataset):
            problems.append(f"dataset root {self.dataset!r} is not a directory")
        for attr in ("split", "embeddings", "sss", "runners"):
            value = getattr(self, attr)
            if value is not None and not os.path.isfile(value):
                problems.append(f"{attr} file {value!r} does not exist")
        if self.split_ratios is not None:
            if len(self.split_ratios) != 3 or abs(sum(self.split_ratios) - 1.0) > 1e-9:
                problems.append(f"split ratios {self.split_ratios} do not sum to 1")
        if self.provider_kind not in ("featurizer", "table"):
            problems.append(
                f"provider kind must be featurizer or table, got {self.provider_kind!r}"
            )
        if self.provider_kind == "featurizer" and self.provider_dim < 8:
            problems.append(f"provider dim must be >= 8, got {self.provider_dim}")
        if self.provider_kind == "table" and not self.embeddings:
            problems.append("provider kind 'table' needs paths.embeddings")
        if self.n < 1:
            problems.append(f"search n must be >= 1, got {self.n}")
        if self.jobs < 1:
            problems.append(f"jobs must be >= 1, got {self.jobs}")
        if self.sss_count < 1:
            problems.append(f"sss count must be >= 1, got {self.sss_count}")
        try:
            self.train.validate()
        except ConfigError as exc:
            problems.extend(exc.problems)
        if problems:
            raise ConfigError(problems)


_SECTION_KEYS = {
    "paths": {
        "dataset": "dataset",
        "split": "split",
        "embeddings": "embeddings",
        "sss": "sss",
        "runners": "runners",
        "encoder_q": "encoder_q",
        "encoder_d": "encoder_d",
        "index": "index",
        "out_dir": "out_dir",
    },
    "languages": {"source": "source", "target": "target"},
    "provider": {
        "kind": "provider_kind",
        "dim": "provider_dim",
        "seed": "provider_seed",
    },
    "sss": {"count": "sss_count", "seed": "sss_seed"},
    "search": {"n": "n"},
}

_TRAIN_FIELDS = {f.name for f in fields(TrainConfig)}


def load_run_config(path=None) -> RunConfig:
    """Build a RunConfig from a TOML file (or XLSEARCH_CONFIG, or defaults)."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    cfg = RunConfig()
    if path is None:
        return cfg
    if not os.path.isfile(path):
        raise ConfigError(f"config file {path!r} does not exist")
    data = _load_toml(path)
    problems = []
    for section, keys in _SECTION_KEYS.items():
        table = data.get(section, {})
        if not isinstance(table, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key, value in table.items():
            if key not in keys:
                problems.append(f"unknown key {section}.{key}")
                continue
            setattr(cfg, keys[key], value)
    ratios = data.get("split_ratios")
    if ratios is not None:
        try:
            cfg.split_ratios = (
                float(ratios["train"]),
                float(ratios["valid"]),
                float(ratios["test"]),
            )
        except (KeyError, TypeError, ValueError):
            problems.append("split_ratios needs numeric train/valid/test keys")
        if isinstance(ratios, dict) and "seed" in ratios:
            cfg.split_seed = int(ratios["seed"])
    train_table = data.get("train", {})
    for key, value in train_table.items():
        if key not in _TRAIN_FIELDS:
            problems.append(f"unknown key train.{key}")
            continue
        setattr(cfg.train, key, value)
    known = set(_SECTION_KEYS) | {"split_ratios", "train"}
    for section in data:
        if section not in known:
            problems.append(f"unknown section [{section}]")
    if problems:
        raise ConfigError(problems)
    return cfg
