"""Dual-encoder contrastive training over frozen base embeddings.

Two independent projection heads (query encoder and document encoder) are
trained by SGD with momentum to pull same-problem cross-language pairs
toward a target similarity and push other-problem pairs toward a low one.
Targets can be interpolated with behavioral similarity scores.

All internal math is float64; serialization is float32.
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
import re
from dataclasses import dataclass, field

import numpy as np

from .embedding import get_embedding
from .errors import ConfigError, DimensionError, FormatError, TrainingError

ENC_MAGIC = "REINF-ENC v1"

_ACTIVATIONS = ("tanh", "linear")


@dataclass
class EncoderParams:
    """A small MLP: list of (weight, bias) with a per-layer activation tag.

    Weights are (out, in) row-major float64 arrays.
    """

    layers: list[tuple[np.ndarray, np.ndarray]]
    activations: list[str]

    @property
    def in_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    def validate(self) -> None:
        if not self.layers or len(self.layers) != len(self.activations):
            raise DimensionError("layer/activation lists empty or mismatched")
        prev_out = None
        for i, ((w, b), act) in enumerate(zip(self.layers, self.activations)):
            if act not in _ACTIVATIONS:
                raise ConfigError(f"layer {i}: unknown activation {act!r}")
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimensionError(f"layer {i}: weight/bias shapes do not pair")
            if prev_out is not None and w.shape[1] != prev_out:
                raise DimensionError(
                    f"layer {i}: input dim {w.shape[1]} != previous output {prev_out}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise TrainingError(f"layer {i}: non-finite parameters")
            prev_out = w.shape[0]

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            layers=[(w.copy(), b.copy()) for w, b in self.layers],
            activations=list(self.activations),
        )


@dataclass
class TrainConfig:
    alpha: float = 0.2
    l_p: float = 1.0
    l_n: float = 0.0
    k_p: int = 5
    k_n: int = 5
    learning_rate: float = 1e-2
    momentum: float = 0.9
    epochs: int = 50
    seed: int = 0
    proj_dim: int = 256
    similarity: str = "abs_cosine"

    def validate(self) -> None:
        problems = []
        if not 0.0 <= self.alpha <= 1.0:
            problems.append(f"alpha must be in [0,1], got {self.alpha}")
        if not self.l_n < self.l_p:
            problems.append(f"l_n must be < l_p, got {self.l_n} >= {self.l_p}")
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            problems.append(f"momentum must be in [0,1), got {self.momentum}")
        if self.epochs < 0:
            problems.append(f"epochs must be >= 0, got {self.epochs}")
        if self.k_p < 0 or self.k_n < 0 or (self.k_p == 0 and self.k_n == 0):
            problems.append(
                f"k_p/k_n must be >= 0 and not both zero, got {self.k_p}/{self.k_n}"
            )
        if self.proj_dim < 1:
            problems.append(f"proj_dim must be >= 1, got {self.proj_dim}")
        if self.similarity not in ("abs_cosine", "cosine"):
            problems.append(f"similarity must be abs_cosine or cosine, got {self.similarity!r}")
        if problems:
            raise ConfigError(problems)

    def digest(self) -> str:
        blob = json.dumps(vars(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class SSSTable:
    """Behavioral similarity lookup keyed by (query_id, target_id)."""

    scores: dict[tuple[str, str], float] = field(default_factory=dict)
    coverage: float = 0.0

    def get(self, query_id: str, target_id: str) -> float | None:
        return self.scores.get((query_id, target_id))


def cosine_sim(a: np.ndarray, b: np.ndarray, mode: str = "abs_cosine") -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine_sim undefined for zero-norm vector")
    dot = float(a @ b)
    if mode == "abs_cosine":
        return abs(dot) / (na * nb)
    if mode == "cosine":
        return dot / (na * nb)
    raise ConfigError(f"unknown similarity mode {mode!r}")


def target_label(
    kind: str,
    s_io: float | None,
    alpha: float,
    l_p: float = 1.0,
    l_n: float = 0.0,
) -> float:
    if kind == "positive":
        label = l_p
    elif kind == "negative":
        label = l_n
    else:
        raise ConfigError(f"kind must be positive or negative, got {kind!r}")
    if s_io is None:
        return label
    if not 0.0 <= s_io <= 1.0:
        raise ValueError(f"s_io must be in [0,1], got {s_io}")
    return (1.0 - alpha) * label + alpha * s_io


def init_params(in_dim: int, out_dim: int, rng: np.random.Generator) -> EncoderParams:
    # Single affine layer + tanh, uniform +-1/sqrt(fan_in).
    bound = 1.0 / np.sqrt(in_dim)
    w = rng.uniform(-bound, bound, size=(out_dim, in_dim))
    b = rng.uniform(-bound, bound, size=out_dim)
    return EncoderParams(layers=[(w, b)], activations=["tanh"])


def _forward(params: EncoderParams, x: np.ndarray):
    h = np.asarray(x, dtype=np.float64)
    if h.shape != (params.in_dim,):
        raise DimensionError(
            f"input dim {h.shape} does not match encoder in_dim {params.in_dim}"
        )
    pre, post = [], [h]
    for (w, b), act in zip(params.layers, params.activations):
        z = w @ h + b
        h = np.tanh(z) if act == "tanh" else z
        pre.append(z)
        post.append(h)
    return pre, post


def project(params: EncoderParams, base: np.ndarray) -> np.ndarray:
    return _forward(params, base)[1][-1]


def _backward(params: EncoderParams, pre, post, grad_out):
    """Gradient of a scalar through the MLP given d(scalar)/d(output)."""
    grads = [None] * len(params.layers)
    g = grad_out
    for i in reversed(range(len(params.layers))):
        w, _ = params.layers[i]
        if params.activations[i] == "tanh":
            g = g * (1.0 - np.tanh(pre[i]) ** 2)
        grads[i] = (np.outer(g, post[i]), g.copy())
        g = w.T @ g
    return grads


def _zero_grads(params: EncoderParams):
    return [(np.zeros_like(w), np.zeros_like(b)) for w, b in params.layers]


def _accumulate(acc, grads):
    for (aw, ab), (gw, gb) in zip(acc, grads):
        aw += gw
        ab += gb


def _pair_targets(tupl, config: TrainConfig, sss: SSSTable | None):
    out = []
    for kind, group in (("positive", tupl.positives), ("negative", tupl.negatives)):
        for sample in group:
            s_io = sss.get(tupl.query.id, sample.id) if sss is not None else None
            out.append(
                (sample, target_label(kind, s_io, config.alpha, config.l_p, config.l_n))
            )
    return out


def _loss_and_grad(tupl, params_q, params_d, config, sss, getvec, want_grad=True):
    pre_q, post_q = _forward(params_q, getvec(tupl.query))
    rq = post_q[-1]
    nq = float(np.linalg.norm(rq))
    if nq == 0.0:
        raise ValueError("query projection has zero norm")

    loss = 0.0
    grad_rq = np.zeros_like(rq)
    grads_d = _zero_grads(params_d) if want_grad else None

    for sample, target in _pair_targets(tupl, config, sss):
        pre_t, post_t = _forward(params_d, getvec(sample))
        rt = post_t[-1]
        nt = float(np.linalg.norm(rt))
        if nt == 0.0:
            raise ValueError(f"projection of {sample.id!r} has zero norm")
        dot = float(rq @ rt)
        if config.similarity == "abs_cosine":
            sim = abs(dot) / (nq * nt)
            sgn = float(np.sign(dot))
        else:
            sim = dot / (nq * nt)
            sgn = 1.0
        diff = target - sim
        loss += diff * diff
        if not want_grad:
            continue
        coef = -2.0 * diff
        dsim_drq = sgn * rt / (nq * nt) - sim * rq / (nq * nq)
        dsim_drt = sgn * rq / (nq * nt) - sim * rt / (nt * nt)
        grad_rq += coef * dsim_drq
        _accumulate(grads_d, _backward(params_d, pre_t, post_t, coef * dsim_drt))

    grads_q = _backward(params_q, pre_q, post_q, grad_rq) if want_grad else None
    return loss, grads_q, grads_d


def tuple_loss(tupl, params_q, params_d, config, sss=None, provider=None) -> float:
    getvec = lambda s: get_embedding(provider, s)
    loss, _, _ = _loss_and_grad(
        tupl, params_q, params_d, config, sss, getvec, want_grad=False
    )
    return loss


def loss_gradient(tupl, params_q, params_d, config, sss=None, provider=None):
    getvec = lambda s: get_embedding(provider, s)
    _, gq, gd = _loss_and_grad(tupl, params_q, params_d, config, sss, getvec)
    return gq, gd


def _finite(grads) -> bool:
    return all(
        np.all(np.isfinite(gw)) and np.all(np.isfinite(gb)) for gw, gb in grads
    )


def train(tuples, config: TrainConfig, sss=None, provider=None, init=None):
    """Run the SGD loop and return (params_q, params_d, per-epoch mean loss).

    ``init`` optionally supplies starting (params_q, params_d); otherwise both
    encoders are initialized from config.seed.  Fully deterministic.
    """
    config.validate()
    if not tuples:
        raise ConfigError("cannot train on an empty tuple list")

    cache: dict[str, np.ndarray] = {}

    def getvec(sample):
        v = cache.get(sample.id)
        if v is None:
            v = get_embedding(provider, sample)
            cache[sample.id] = v
        return v

    base_dim = getvec(tuples[0].query).shape[0]
    if init is not None:
        params_q, params_d = init[0].copy(), init[1].copy()
    else:
        rng = np.random.default_rng(config.seed)
        params_q = init_params(base_dim, config.proj_dim, rng)
        params_d = init_params(base_dim, config.proj_dim, rng)
    params_q.validate()
    params_d.validate()

    vel_q = _zero_grads(params_q)
    vel_d = _zero_grads(params_d)
    order = list(range(len(tuples)))
    shuffler = random.Random(config.seed)
    history: list[float] = []

    for epoch in range(config.epochs):
        shuffler.shuffle(order)
        total = 0.0
        for idx in order:
            tupl = tuples[idx]
            loss, gq, gd = _loss_and_grad(tupl, params_q, params_d, config, sss, getvec)
            if not (np.isfinite(loss) and _finite(gq) and _finite(gd)):
                raise TrainingError(
                    f"non-finite loss or gradient at epoch {epoch}, "
                    f"tuple {tupl.query.id!r}"
                )
            total += loss
            for params, vel, grads in (
                (params_q, vel_q, gq),
                (params_d, vel_d, gd),
            ):
                for (w, b), (vw, vb), (gw, gb) in zip(params.layers, vel, grads):
                    vw *= config.momentum
                    vw -= config.learning_rate * gw
                    w += vw
                    vb *= config.momentum
                    vb -= config.learning_rate * gb
                    b += vb
        history.append(total / len(tuples))
    return params_q, params_d, history


def params_digest(params: EncoderParams) -> str:
    """Stable checksum of the float32 canonical serialization."""
    h = hashlib.sha256()
    h.update(_layer_spec(params).encode("ascii"))
    for w, b in params.layers:
        h.update(np.asarray(w, dtype="<f4").tobytes())
        h.update(np.asarray(b, dtype="<f4").tobytes())
    return h.hexdigest()


def _layer_spec(params: EncoderParams) -> str:
    return ",".join(
        f"{w.shape[1]}x{w.shape[0]}:{act}"
        for (w, _), act in zip(params.layers, params.activations)
    )


def save_encoder(params: EncoderParams, path, seed: int = 0, config_digest: str = "") -> None:
    params.validate()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{ENC_MAGIC} in_dim={params.in_dim} out_dim={params.out_dim} "
            f"layers={_layer_spec(params)} seed={seed} config_digest={config_digest}\n"
        )
        for w, b in params.layers:
            wq = base64.b64encode(np.asarray(w, dtype="<f4").tobytes()).decode("ascii")
            bq = base64.b64encode(np.asarray(b, dtype="<f4").tobytes()).decode("ascii")
            fh.write(f"{wq}\t{bq}\n")


def load_encoder(path):
    """Read a REINF-ENC file; returns (EncoderParams, header metadata)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        m = re.fullmatch(
            re.escape(ENC_MAGIC)
            + r" in_dim=(\d+) out_dim=(\d+) layers=(\S+) seed=(-?\d+) config_digest=(\S*)",
            header,
        )
        if not m:
            raise FormatError(f"bad header: {header!r}", line=1)
        in_dim, out_dim = int(m.group(1)), int(m.group(2))
        meta = {"seed": int(m.group(4)), "config_digest": m.group(5)}
        layers, activations = [], []
        specs = m.group(3).split(",")
        for i, spec in enumerate(specs):
            lineno = i + 2
            sm = re.fullmatch(r"(\d+)x(\d+):(\w+)", spec)
            if not sm or sm.group(3) not in _ACTIVATIONS:
                raise FormatError(f"bad layer spec {spec!r}", line=1)
            d_in, d_out, act = int(sm.group(1)), int(sm.group(2)), sm.group(3)
            row = fh.readline()
            if not row:
                raise FormatError(f"truncated: expected {len(specs)} layers", line=lineno)
            parts = row.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise FormatError("layer row is not '<weights>\\t<bias>'", line=lineno)
            try:
                wraw = base64.b64decode(parts[0].encode("ascii"), validate=True)
                braw = base64.b64decode(parts[1].encode("ascii"), validate=True)
            except Exception:
                raise FormatError("invalid base64 payload", line=lineno) from None
            if len(wraw) != 4 * d_in * d_out or len(braw) != 4 * d_out:
                raise FormatError("payload size does not match layer spec", line=lineno)
            w = np.frombuffer(wraw, dtype="<f4").astype(np.float64).reshape(d_out, d_in)
            b = np.frombuffer(braw, dtype="<f4").astype(np.float64)
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise FormatError("non-finite parameter", line=lineno)
            layers.append((w, b))
            activations.append(act)
        trailing = fh.readline()
        if trailing.strip():
            raise FormatError("trailing data after declared layers", line=len(specs) + 2)
    params = EncoderParams(layers=layers, activations=activations)
    params.validate()
    if params.in_dim != in_dim or params.out_dim != out_dim:
        raise FormatError("header dims do not match layer spec", line=1)
    return params, meta
