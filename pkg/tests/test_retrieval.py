from importlib import resources

import pytest

from sigagent.errors import EmptyIndex
from sigagent.provider import HashingEmbedder
from sigagent.retrieval import HopContext, VectorIndex, retrieve, retrieve_with_context

FIVE = {
    "d1": "sea clutter is spiky at low grazing angles",
    "d2": "the stft gives a spectrogram of the signal",
    "d3": "doppler entropy separates targets from clutter",
    "d4": "differential evolution mutates three parents",
    "d5": "sea clutter texture follows a gamma law",
}


def _index(docs):
    idx = VectorIndex(HashingEmbedder(dim=64, seed=3))
    for k, v in docs.items():
        idx.add(k, v)
    return idx.seal()


def test_verbatim_document_ranks_first():
    idx = _index(FIVE)
    assert retrieve(FIVE["d3"], idx, top_k=1)[0].doc_id == "d3"


def test_top_k_larger_than_index_returns_everything_sorted():
    idx = _index(FIVE)
    hits = retrieve("sea clutter", idx, top_k=50)
    assert len(hits) == 5
    scores = [h.score for h in hits]
    assert scores == sorted(scores, reverse=True)


def test_order_matches_brute_force_oracle():
    emb = HashingEmbedder(dim=64, seed=3)
    idx = _index(FIVE)
    q = emb.embed("sea clutter doppler")
    oracle = sorted(FIVE, key=lambda k: (-sum(a * b for a, b in zip(q, emb.embed(FIVE[k]))), k))
    assert [h.doc_id for h in retrieve("sea clutter doppler", idx, top_k=5)] == oracle


def test_ties_break_by_doc_id():
    idx = _index({"b": "same text", "a": "same text", "c": "same text"})
    assert [h.doc_id for h in retrieve("same text", idx, 3)] == ["a", "b", "c"]


def test_empty_index_raises():
    with pytest.raises(EmptyIndex):
        retrieve("x", VectorIndex().seal(), 1)


def test_sealed_index_is_immutable():
    idx = _index(FIVE)
    with pytest.raises(RuntimeError):
        idx.add("d6", "late")


def test_duplicate_doc_id_rejected():
    idx = VectorIndex()
    idx.add("a", "x")
    with pytest.raises(ValueError):
        idx.add("a", "y")


def test_empty_context_equals_plain_retrieve():
    idx = _index(FIVE)
    plain = retrieve("gamma texture", idx, 3)
    assert retrieve_with_context("gamma texture", HopContext(), idx, 3) == plain
    assert retrieve_with_context("gamma texture", "", idx, 3) == plain


def test_context_excludes_known_documents():
    idx = _index(FIVE)
    ctx = HopContext(documents=[idx.get(k) for k in FIVE])
    assert retrieve_with_context("sea clutter", ctx, idx, 3) == []
    partial = HopContext(documents=[idx.get("d1"), idx.get("d5")])
    hits = retrieve_with_context("sea clutter", partial, idx, 5)
    assert {"d1", "d5"}.isdisjoint(h.doc_id for h in hits)


def test_second_hop_reaches_document_hidden_from_bare_query():
    docs = {
        "a-cal": "antenna array calibration relies on a reference source",
        "b-far": "reference source placement needs far field range geometry",
        "c-x": "modulation recognition uses convolutional networks",
        "d-y": "human activity recognition reads inertial sensors",
    }
    emb = HashingEmbedder(dim=256, seed=0)
    idx = VectorIndex(emb)
    for k, v in docs.items():
        idx.add(k, v)
    idx.seal()
    query = "how do I calibrate the antenna array"
    # the bare query shares no words with b-far
    assert float(emb.embed(query) @ emb.embed(docs["b-far"])) < 0.1
    assert retrieve(query, idx, 1)[0].doc_id == "a-cal"
    ctx = HopContext(documents=[idx.get("a-cal")], answers=["place a reference source in the far field"])
    assert retrieve_with_context(query, ctx, idx, 1)[0].doc_id == "b-far"


def test_bundled_knowledge_base_loads():
    path = resources.files("sigagent.data").joinpath("knowledge.jsonl")
    idx = VectorIndex.from_jsonl(path)
    assert len(idx) == 24
    assert retrieve("doppler spectral entropy of clutter", idx, 1)[0].doc_id == "kb-dsp-003"


def test_malformed_knowledge_line(tmp_path):
    p = tmp_path / "kb.jsonl"
    p.write_text('{"doc_id": "a", "text": "x"}\nnot json\n')
    with pytest.raises(ValueError, match=":2:"):
        VectorIndex.from_jsonl(p)
