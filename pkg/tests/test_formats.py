"""Randomized round-trips for the four file formats with hostile ids."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xlsearch.embedding import EmbeddingTable, read_table, write_table
from xlsearch.errors import FormatError
from xlsearch.search import SearchIndex, load_index, save_index
from xlsearch.sss import read_sss, write_sss
from xlsearch.trainer import EncoderParams, SSSTable, load_encoder, save_encoder


def _f32(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=np.float32).astype(np.float64)


# ids may contain tabs, newlines, quotes, and non-ascii; surrogates cannot
# survive utf-8 file io so they stay out of the alphabet
ids_strategy = st.lists(
    st.text(
        alphabet=st.characters(blacklist_categories=("Cs",)),
        min_size=1,
        max_size=12,
    ),
    min_size=1,
    max_size=6,
    unique=True,
)

finite = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


@given(ids_strategy, st.integers(min_value=1, max_value=8), st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_embedding_table_round_trip(ids, dim, seed):
    import io

    from xlsearch.embedding import _read_table_stream, _write_table_stream

    rng = np.random.default_rng(seed)
    table = EmbeddingTable(dim=dim)
    for sid in ids:
        vec = rng.normal(size=dim)
        vec[rng.integers(dim)] = 1.0  # keep every row nonzero after f32
        table.add(sid, vec)

    buf = io.StringIO()
    _write_table_stream(table, buf)
    back = _read_table_stream(io.StringIO(buf.getvalue()))
    assert back.dim == dim
    assert set(back.entries) == set(ids)
    for sid in ids:
        assert np.array_equal(back.entries[sid], table.entries[sid])

    # writing the parsed table again is byte-identical
    buf2 = io.StringIO()
    _write_table_stream(back, buf2)
    assert buf.getvalue() == buf2.getvalue()


@st.composite
def encoder_strategy(draw):
    n_layers = draw(st.integers(min_value=1, max_value=3))
    dims = [draw(st.integers(min_value=1, max_value=6)) for _ in range(n_layers + 1)]
    rng = np.random.default_rng(draw(st.integers(0, 2**16)))
    layers = [
        (rng.normal(size=(dims[i + 1], dims[i])), rng.normal(size=dims[i + 1]))
        for i in range(n_layers)
    ]
    acts = [draw(st.sampled_from(["tanh", "linear"])) for _ in range(n_layers)]
    return EncoderParams(layers=layers, activations=acts)


@given(encoder_strategy(), st.integers(-5, 5))
@settings(max_examples=40, deadline=None)
def test_encoder_round_trip(tmp_path_factory, params, seed):
    tmp = tmp_path_factory.mktemp("enc")
    path = tmp / "e.enc"
    save_encoder(params, path, seed=seed, config_digest="cafe01")
    back, meta = load_encoder(path)
    assert meta == {"seed": seed, "config_digest": "cafe01"}
    assert back.activations == params.activations
    for (w, b), (w0, b0) in zip(back.layers, params.layers):
        assert np.array_equal(w, _f32(w0))
        assert np.array_equal(b, _f32(b0))
    again = tmp / "f.enc"
    save_encoder(back, again, seed=seed, config_digest="cafe01")
    assert path.read_bytes() == again.read_bytes()


@given(ids_strategy, st.integers(min_value=1, max_value=6), st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_index_round_trip(tmp_path_factory, ids, dim, seed):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(size=(len(ids), dim))
    index = SearchIndex(
        dim=dim,
        encoder_digest="feed02",
        ids=sorted(ids),
        problem_ids=[f"p{i}" for i in range(len(ids))],
        matrix=np.ascontiguousarray(matrix),
    )
    tmp = tmp_path_factory.mktemp("idx")
    path = tmp / "a.idx"
    save_index(index, path)
    back = load_index(path)
    assert back.ids == index.ids
    assert back.problem_ids == index.problem_ids
    assert np.array_equal(back.matrix, _f32(index.matrix))
    again = tmp / "b.idx"
    save_index(back, again)
    assert path.read_bytes() == again.read_bytes()


@given(
    st.dictionaries(
        st.tuples(
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs",)),
                min_size=1, max_size=8,
            ),
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs",)),
                min_size=1, max_size=8,
            ),
        ),
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        min_size=1,
        max_size=10,
    ),
    st.integers(-3, 3),
)
@settings(max_examples=40, deadline=None)
def test_sss_round_trip(tmp_path_factory, scores, seed):
    table = SSSTable()
    table.scores.update(scores)
    tmp = tmp_path_factory.mktemp("sss")
    path = tmp / "a.sss"
    write_sss(table, path, seed=seed, inputs=5)
    back = read_sss(path)
    assert back.scores == scores  # repr round-trips float64 exactly
    again = tmp / "b.sss"
    write_sss(back, again, seed=seed, inputs=5)
    assert path.read_bytes() == again.read_bytes()


def test_all_formats_reject_wrong_magic(tmp_path):
    table = EmbeddingTable(dim=2)
    table.add("a", np.array([1.0, 2.0]))
    emb = tmp_path / "t.emb"
    write_table(table, emb)

    params = EncoderParams(
        layers=[(np.eye(2), np.zeros(2))], activations=["tanh"]
    )
    enc = tmp_path / "t.enc"
    save_encoder(params, enc)

    index = SearchIndex(dim=2, encoder_digest="d", ids=["a"],
                        problem_ids=["p"], matrix=np.ones((1, 2)))
    idx = tmp_path / "t.idx"
    save_index(index, idx)

    sss_table = SSSTable()
    sss_table.scores[("a", "b")] = 0.5
    sss = tmp_path / "t.sss"
    write_sss(sss_table, sss)

    readers = {
        emb: read_table,
        enc: load_encoder,
        idx: load_index,
        sss: read_sss,
    }
    for path, reader in readers.items():
        original = path.read_bytes()
        reader(path)  # sanity: the pristine file parses
        path.write_bytes(b"REINF-XXX v1" + original[12:])
        with pytest.raises(FormatError):
            reader(path)
        path.write_bytes(original)

    # swapping magics across formats must also fail: a file for one reader
    # is never accepted by another
    blobs = {p: p.read_bytes() for p in readers}
    for path, reader in readers.items():
        for other, blob in blobs.items():
            if other == path:
                continue
            path.write_bytes(blob)
            with pytest.raises(FormatError):
                reader(path)
        path.write_bytes(blobs[path])


def test_empty_payloads_round_trip(tmp_path):
    empty_idx = SearchIndex(dim=3, encoder_digest="d")
    p = tmp_path / "e.idx"
    save_index(empty_idx, p)
    assert len(load_index(p)) == 0

    empty_sss = SSSTable()
    q = tmp_path / "e.sss"
    write_sss(empty_sss, q)
    assert read_sss(q).scores == {}
