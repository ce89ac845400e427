"""Exact flat-scan retrieval over projected document embeddings.

The index stores one contiguous float64 matrix; a query is projected,
scored against every row in a single pass, and the top hits come back
sorted by descending score with ties broken by ascending sample id.
No approximation anywhere.
"""

from __future__ import annotations

import base64
import re
from dataclasses import dataclass, field

import numpy as np

from .embedding import get_embedding
from .errors import DimensionError, FormatError
from .kernels import scan_scores
from .trainer import EncoderParams, params_digest, project

IDX_MAGIC = "REINF-IDX v1"


@dataclass
class SearchHit:
    sample_id: str
    score: float
    rank: int


@dataclass
class SearchIndex:
    dim: int
    encoder_digest: str
    ids: list[str] = field(default_factory=list)
    problem_ids: list[str] = field(default_factory=list)
    matrix: np.ndarray = None  # (n, dim) float64, C-contiguous
    norms: np.ndarray = None

    def __post_init__(self):
        if self.matrix is None:
            self.matrix = np.zeros((0, self.dim), dtype=np.float64)
        if self.norms is None:
            self.norms = np.linalg.norm(self.matrix, axis=1)
        if not self.encoder_digest:
            raise FormatError("encoder digest must be non-empty")
        if len(self.ids) != len(set(self.ids)):
            raise FormatError("duplicate sample ids in index")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def entries(self):
        return list(zip(self.ids, self.problem_ids, self.matrix))


def build_index(samples, params_d: EncoderParams, provider) -> SearchIndex:
    """Project every sample through the document encoder."""
    ordered = sorted(samples, key=lambda s: s.id)
    vectors = np.zeros((len(ordered), params_d.out_dim), dtype=np.float64)
    for i, sample in enumerate(ordered):
        vec = project(params_d, get_embedding(provider, sample))
        if not np.any(vec):
            raise ValueError(f"projection of {sample.id!r} has zero norm")
        vectors[i] = vec
    return SearchIndex(
        dim=params_d.out_dim,
        encoder_digest=params_digest(params_d),
        ids=[s.id for s in ordered],
        problem_ids=[s.problem_id for s in ordered],
        matrix=np.ascontiguousarray(vectors),
    )


def query(index: SearchIndex, q, params_q: EncoderParams, provider, n: int,
          similarity: str = "abs_cosine") -> list[SearchHit]:
    """Score the whole index and return the top min(n, |index|) hits."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if params_q.out_dim != index.dim:
        raise DimensionError(
            f"query encoder outputs dim {params_q.out_dim}, index dim is {index.dim}"
        )
    if len(index) == 0:
        return []
    rq = project(params_q, get_embedding(provider, q))
    scores = scan_scores(index.matrix, index.norms, rq, similarity == "abs_cosine")
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.ids[i]))
    return [
        SearchHit(sample_id=index.ids[i], score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order[: min(n, len(order))], start=1)
    ]


def save_index(index: SearchIndex, path) -> None:
    with open(path, "wb") as fh:
        header = (
            f"{IDX_MAGIC} dim={index.dim} count={len(index)} "
            f"encoder_digest={index.encoder_digest}\n"
        )
        fh.write(header.encode("utf-8"))
        import json

        for i, sample_id in enumerate(index.ids):
            payload = base64.b64encode(
                np.asarray(index.matrix[i], dtype="<f4").tobytes()
            ).decode("ascii")
            row = f"{json.dumps(sample_id)}\t{json.dumps(index.problem_ids[i])}\t{payload}\n"
            fh.write(row.encode("utf-8"))


def load_index(path) -> SearchIndex:
    """Parse a REINF-IDX file; errors report the byte offset of the bad line."""
    import json

    with open(path, "rb") as fh:
        data = fh.read()

    offset = 0
    end = data.find(b"\n")
    if end < 0:
        raise FormatError("missing header line", offset=0)
    header = data[:end].decode("utf-8", errors="replace")
    m = re.fullmatch(
        re.escape(IDX_MAGIC) + r" dim=(\d+) count=(\d+) encoder_digest=(\S+)", header
    )
    if not m:
        raise FormatError(f"bad header: {header!r}", offset=0)
    dim, count, digest = int(m.group(1)), int(m.group(2)), m.group(3)
    if dim < 1:
        raise FormatError("dim must be >= 1", offset=0)
    offset = end + 1

    ids, problem_ids, rows = [], [], []
    seen = set()
    for _ in range(count):
        if offset >= len(data):
            raise FormatError(
                f"truncated: expected {count} rows, got {len(ids)}", offset=offset
            )
        end = data.find(b"\n", offset)
        if end < 0:
            raise FormatError("row without trailing newline", offset=offset)
        try:
            row = data[offset:end].decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("row is not valid UTF-8", offset=offset) from None
        parts = row.split("\t")
        if len(parts) != 3:
            raise FormatError("row is not '<id>\\t<problem>\\t<base64>'", offset=offset)
        try:
            sample_id = json.loads(parts[0])
            problem_id = json.loads(parts[1])
        except ValueError:
            raise FormatError("malformed quoted field", offset=offset) from None
        if not (isinstance(sample_id, str) and isinstance(problem_id, str)):
            raise FormatError("id fields must be strings", offset=offset)
        if sample_id in seen:
            raise FormatError(f"duplicate sample id {sample_id!r}", offset=offset)
        try:
            raw = base64.b64decode(parts[2].encode("ascii"), validate=True)
        except Exception:
            raise FormatError("invalid base64 payload", offset=offset) from None
        if len(raw) != 4 * dim:
            raise FormatError(
                f"payload holds {len(raw) // 4} floats, expected {dim}", offset=offset
            )
        vec = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(vec)):
            raise FormatError("non-finite vector entry", offset=offset)
        seen.add(sample_id)
        ids.append(sample_id)
        problem_ids.append(problem_id)
        rows.append(vec)
        offset = end + 1
    if offset != len(data):
        raise FormatError("trailing data after declared row count", offset=offset)

    matrix = (
        np.ascontiguousarray(np.vstack(rows))
        if rows
        else np.zeros((0, dim), dtype=np.float64)
    )
    return SearchIndex(
        dim=dim,
        encoder_digest=digest,
        ids=ids,
        problem_ids=problem_ids,
        matrix=matrix,
    )
