"""Frozen base embeddings: a deterministic token-hash featurizer and the
``REINF-EMB v1`` table format for vectors produced elsewhere.

Every vector handed to downstream modules is a 1-D float numpy array.
Vectors must be finite and nonzero; the table reader enforces this.
"""

from __future__ import annotations

import base64
import hashlib
import io
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FormatError, MissingEmbeddingError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

EMB_MAGIC = "REINF-EMB v1"


def tokenize(text: str) -> list[str]:
    """Lower-case and split on non-alphanumeric boundaries."""
    return _TOKEN_RE.findall(text.lower())


def _token_hash(token: str, seed: int) -> int:
    # Keyed blake2b: stable across runs and platforms, unlike hash().
    h = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little", signed=False)
    )
    return int.from_bytes(h.digest(), "little")


def featurize(sample, dim: int, seed: int = 0) -> np.ndarray:
    """Signed token-hash bag-of-tokens embedding of ``sample.text``.

    Each token is hashed to a bucket in [0, dim) with a hash-derived sign;
    the accumulated vector is L2-normalized.  An empty token stream yields
    the unit vector e_0, so the result is never zero.
    """
    if dim < 8:
        raise DimensionError(f"featurizer dim must be >= 8, got {dim}")
    acc = np.zeros(dim, dtype=np.float64)
    for tok in tokenize(sample.text):
        h = _token_hash(tok, seed)
        bucket = h % dim
        sign = 1.0 if (h >> 63) & 1 else -1.0
        acc[bucket] += sign
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        acc[0] = 1.0
        return acc
    return acc / norm


@dataclass
class EmbeddingTable:
    """Immutable-after-load map from sample id to a fixed-dimension vector."""

    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    provenance: str = ""

    def add(self, sample_id: str, vec: np.ndarray) -> None:
        if sample_id in self.entries:
            raise FormatError(f"duplicate sample id {sample_id!r}")
        v = np.asarray(vec, dtype=np.float32)
        if v.shape != (self.dim,):
            raise DimensionError(
                f"vector for {sample_id!r} has dim {v.shape}, table dim is {self.dim}"
            )
        self.entries[sample_id] = v

    def __len__(self) -> int:
        return len(self.entries)


def _quote(sample_id: str) -> str:
    import json

    return json.dumps(sample_id, ensure_ascii=True)


def _unquote(quoted: str, line: int) -> str:
    import json

    try:
        value = json.loads(quoted)
    except ValueError:
        raise FormatError(f"malformed quoted id {quoted!r}", line=line) from None
    if not isinstance(value, str):
        raise FormatError(f"id field is not a string: {quoted!r}", line=line)
    return value


def encode_f32(vec: np.ndarray) -> str:
    return base64.b64encode(np.asarray(vec, dtype="<f4").tobytes()).decode("ascii")


def decode_f32(data: str, expect_dim: int, line: int) -> np.ndarray:
    try:
        raw = base64.b64decode(data.encode("ascii"), validate=True)
    except Exception:
        raise FormatError("invalid base64 payload", line=line) from None
    if len(raw) != 4 * expect_dim:
        raise FormatError(
            f"payload holds {len(raw) // 4} floats, expected {expect_dim}", line=line
        )
    vec = np.frombuffer(raw, dtype="<f4").copy()
    if not np.all(np.isfinite(vec)):
        raise FormatError("non-finite vector entry", line=line)
    return vec


def write_table(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _write_table_stream(table, fh)


def _write_table_stream(table: EmbeddingTable, fh) -> None:
    fh.write(
        f"{EMB_MAGIC} dim={table.dim} count={len(table.entries)} "
        f"provenance={table.provenance}\n"
    )
    for sample_id in sorted(table.entries):
        fh.write(f"{_quote(sample_id)}\t{encode_f32(table.entries[sample_id])}\n")


def read_table(path_or_stream) -> EmbeddingTable:
    if hasattr(path_or_stream, "read"):
        return _read_table_stream(path_or_stream)
    with open(path_or_stream, "r", encoding="utf-8") as fh:
        return _read_table_stream(fh)


def _read_table_stream(fh: io.TextIOBase) -> EmbeddingTable:
    header = fh.readline().rstrip("\n")
    m = re.fullmatch(
        re.escape(EMB_MAGIC) + r" dim=(\d+) count=(\d+) provenance=(.*)", header
    )
    if not m:
        raise FormatError(f"bad header: {header!r}", line=1)
    dim, count, provenance = int(m.group(1)), int(m.group(2)), m.group(3)
    if dim < 1:
        raise FormatError("dim must be >= 1", line=1)
    table = EmbeddingTable(dim=dim, provenance=provenance)
    for i in range(count):
        lineno = i + 2
        row = fh.readline()
        if not row:
            raise FormatError(
                f"truncated: expected {count} rows, got {i}", line=lineno
            )
        row = row.rstrip("\n")
        parts = row.split("\t")
        if len(parts) != 2:
            raise FormatError("row is not '<id>\\t<base64>'", line=lineno)
        sample_id = _unquote(parts[0], lineno)
        vec = decode_f32(parts[1], dim, lineno)
        if not np.any(vec):
            raise FormatError(f"zero vector for {sample_id!r}", line=lineno)
        if sample_id in table.entries:
            raise FormatError(f"duplicate sample id {sample_id!r}", line=lineno)
        table.entries[sample_id] = vec
    trailing = fh.readline()
    if trailing.strip():
        raise FormatError("trailing data after declared row count", line=count + 2)
    return table


class FeaturizerProvider:
    """Computes embeddings on demand with the built-in featurizer."""

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 8:
            raise DimensionError(f"featurizer dim must be >= 8, got {dim}")
        self.dim = dim
        self.seed = seed

    def get(self, sample) -> np.ndarray:
        return featurize(sample, self.dim, self.seed)

    def describe(self) -> str:
        return f"featurizer:dim={self.dim},seed={self.seed}"


class TableProvider:
    """Serves precomputed vectors from an EmbeddingTable."""

    def __init__(self, table: EmbeddingTable):
        self.table = table
        self.dim = table.dim

    def get(self, sample) -> np.ndarray:
        sample_id = sample if isinstance(sample, str) else sample.id
        try:
            return np.asarray(self.table.entries[sample_id], dtype=np.float64)
        except KeyError:
            raise MissingEmbeddingError(sample_id) from None

    def describe(self) -> str:
        return f"table:provenance={self.table.provenance}"


def get_embedding(provider, sample) -> np.ndarray:
    """Uniform lookup across provider kinds."""
    return np.asarray(provider.get(sample), dtype=np.float64)
