from __future__ import annotations

import itertools
import json
import math
import random

import pytest

from bibcoupling import (
    NetworkError,
    build_network,
    build_reference_network,
    build_text_network,
    build_token_stats,
    bm25_directed,
    compute_idf,
    idf_value,
    network_stats,
    reference_coupling_weight,
    symmetrize,
    tokenize,
)
from bibcoupling.networks import read_network, write_network

from conftest import make_record


# --- independent naive BM25 oracle (double loop, no package calls) -------

def oracle_tokenize(text):
    out = []
    for chunk in text.lower().split():
        cleaned = "".join(c for c in chunk if c.isalnum())
        if len(cleaned) >= 2:
            out.append(cleaned)
    return out


def oracle_bm25_matrix(records, k1=2.0, b=0.75):
    docs = {r.pub_id: oracle_tokenize((r.title + " " + r.abstract).strip()) for r in records}
    n = len(records)
    df = {}
    for tokens in docs.values():
        for t in set(tokens):
            df[t] = df.get(t, 0) + 1
    idf = {}
    for t, p in df.items():
        value = math.log((n - p + 0.5) / (p + 0.5))
        if value >= 0.0:
            idf[t] = value
    lengths = {pid: sum(1 for t in toks if t in idf) for pid, toks in docs.items()}
    avg = sum(lengths.values()) / n
    counts = {pid: {} for pid in docs}
    for pid, toks in docs.items():
        for t in toks:
            if t in idf:
                counts[pid][t] = counts[pid].get(t, 0) + 1

    def directed(i, j):
        score = 0.0
        norm = k1 * (1 - b + b * lengths[j] / avg) if avg else 0.0
        for t in set(docs[i]):
            if t not in idf:
                continue
            tf = counts[j].get(t, 0)
            if tf:
                score += idf[t] * tf * (k1 + 1) / (tf + norm)
        return score

    ids = sorted(docs)
    sym = {}
    for a, c in itertools.combinations(ids, 2):
        sym[(a, c)] = (directed(a, c) + directed(c, a)) / 2
    return sym


# --- reference coupling weight -------------------------------------------

def test_identical_sets_weight_one():
    refs = frozenset(f"c{i}" for i in range(5))
    assert reference_coupling_weight(refs, refs) == 1.0


def test_disjoint_sets_weight_zero():
    assert reference_coupling_weight(frozenset("ab"), frozenset("cd")) == 0.0


def test_partial_overlap_direct_evaluation():
    refs_i = frozenset(f"c{i}" for i in range(4))
    refs_j = frozenset(f"c{i}" for i in range(2, 11))
    assert reference_coupling_weight(refs_i, refs_j) == pytest.approx(2 / 6, abs=1e-15)


def test_empty_set_is_a_precondition_violation():
    with pytest.raises(ValueError):
        reference_coupling_weight(frozenset(), frozenset("a"))


def test_weight_properties_random_sets():
    rng = random.Random(6)
    universe = [f"c{i}" for i in range(30)]
    for _ in range(300):
        a = frozenset(rng.sample(universe, rng.randrange(1, 15)))
        b = frozenset(rng.sample(universe, rng.randrange(1, 15)))
        w = reference_coupling_weight(a, b)
        assert 0.0 <= w <= 1.0
        assert w == reference_coupling_weight(b, a)
        assert (w == 1.0) == (a == b)
        assert (w == 0.0) == (not a & b)


# --- tokenize -------------------------------------------------------------

def test_tokenize_spec_examples():
    assert tokenize("A B2 cat!") == ["b2", "cat"]
    assert tokenize("") == []


def test_tokenize_hand_labeled_fixture(data_dir):
    cases = json.loads((data_dir / "tokenize_cases.json").read_text(encoding="utf-8"))
    assert len(cases) == 20
    for case in cases:
        assert tokenize(case["text"]) == case["tokens"], case["text"]


# --- IDF ------------------------------------------------------------------

def test_idf_excluded_when_token_everywhere():
    assert idf_value(2, 2) is None
    stats = build_token_stats(_text_corpus(["shared words", "shared words"]))
    assert compute_idf(stats, "shared") is None


def test_idf_direct_evaluation():
    assert idf_value(3, 1) == pytest.approx(math.log(2.5 / 1.5), abs=1e-12)
    stats = build_token_stats(_text_corpus(["apple pear", "pear plum", "plum fig"]))
    assert compute_idf(stats, "apple") == pytest.approx(math.log(2.5 / 1.5), abs=1e-12)


def test_idf_negative_boundary():
    # N = 2p - 1: log((p - 0.5)/(p + 0.5)) < 0, excluded
    assert idf_value(3, 2) is None
    # exactly zero is kept
    assert idf_value(4, 2) == 0.0


def test_idf_unknown_token_rejected():
    stats = build_token_stats(_text_corpus(["apple pear"]))
    with pytest.raises(KeyError):
        compute_idf(stats, "missing")


# --- BM25 -----------------------------------------------------------------

def _text_corpus(texts):
    return [make_record(f"d{i}", title=text, abstract="") for i, text in enumerate(texts)]


def test_no_shared_tokens_scores_zero():
    corpus = _text_corpus(["alpha beta gamma", "delta epsilon zeta", "eta theta iota"])
    stats = build_token_stats(corpus)
    assert bm25_directed(corpus[0], corpus[1], stats) == 0.0


def test_identical_pair_in_two_doc_corpus_scores_zero():
    corpus = _text_corpus(["same words here", "same words here"])
    stats = build_token_stats(corpus)
    assert bm25_directed(corpus[0], corpus[1], stats) == 0.0
    net = build_text_network(corpus, (2012, 2012))
    assert net.n_edges == 0


def test_bm25_matches_naive_oracle_on_small_corpus():
    rng = random.Random(13)
    vocab = [f"w{i}" for i in range(25)]
    texts = [" ".join(rng.choice(vocab) for _ in range(rng.randrange(5, 40)))
             for _ in range(5)]
    corpus = _text_corpus(texts)
    stats = build_token_stats(corpus)
    oracle = oracle_bm25_matrix(corpus)
    for a, b in itertools.combinations(sorted(r.pub_id for r in corpus), 2):
        rec = {r.pub_id: r for r in corpus}
        mine = symmetrize(bm25_directed(rec[a], rec[b], stats),
                          bm25_directed(rec[b], rec[a], stats))
        assert mine == pytest.approx(oracle[(a, b)], abs=1e-9)


def test_network_bulk_path_equals_per_pair_path():
    rng = random.Random(29)
    vocab = [f"w{i}" for i in range(40)]
    corpus = _text_corpus([" ".join(rng.choice(vocab) for _ in range(30))
                           for _ in range(30)])
    stats = build_token_stats(corpus)
    net = build_text_network(corpus, (2012, 2012))
    rec = {r.pub_id: r for r in corpus}
    from_edges = {(u, v): w for u, v, w in net.edges}
    for a, b in itertools.combinations(sorted(rec), 2):
        expected = symmetrize(bm25_directed(rec[a], rec[b], stats),
                              bm25_directed(rec[b], rec[a], stats))
        assert from_edges.get((a, b), 0.0) == pytest.approx(expected, abs=1e-9)


def test_symmetrize_examples_and_matrix_property():
    assert symmetrize(0.0, 0.0) == 0.0
    assert symmetrize(4.0, 6.0) == 5.0
    rng = random.Random(1)
    raw = [[rng.random() for _ in range(6)] for _ in range(6)]
    sym = [[symmetrize(raw[i][j], raw[j][i]) for j in range(6)] for i in range(6)]
    for i in range(6):
        for j in range(6):
            assert sym[i][j] == sym[j][i]


def test_removing_excluded_token_changes_nothing():
    # "stop" appears in every document, so its IDF is negative and excluded;
    # deleting it from every text must leave all pairwise scores unchanged.
    rng = random.Random(41)
    vocab = [f"w{i}" for i in range(15)]
    texts = ["stop " + " ".join(rng.choice(vocab) for _ in range(12)) + " stop"
             for _ in range(8)]
    with_stop = _text_corpus(texts)
    without_stop = _text_corpus([t.replace("stop ", "").replace(" stop", "")
                                 for t in texts])
    net_a = build_text_network(with_stop, (2012, 2012))
    net_b = build_text_network(without_stop, (2012, 2012))
    assert net_a.edges == net_b.edges


# --- build_network ---------------------------------------------------------

def test_disjoint_reference_sets_are_isolated():
    corpus = [make_record(f"p{i}") for i in range(3)]
    sets = {"p0": frozenset(["a"]), "p1": frozenset(["b"]), "p2": frozenset(["c"])}
    net = build_reference_network(corpus, sets, (2012, 2012))
    assert net.n_nodes == 3
    assert net.n_edges == 0


def test_reference_network_matches_bruteforce_all_pairs():
    rng = random.Random(53)
    clusters = [f"c{i}" for i in range(40)]
    corpus = [make_record(f"p{i:02d}") for i in range(50)]
    sets = {rec.pub_id: frozenset(rng.sample(clusters, rng.randrange(1, 12)))
            for rec in corpus}
    net = build_reference_network(corpus, sets, (2012, 2012))
    got = {(u, v): w for u, v, w in net.edges}
    expected = {}
    for a, b in itertools.combinations(sorted(sets), 2):
        w = reference_coupling_weight(sets[a], sets[b])
        if w > 0:
            expected[(a, b)] = w
    assert set(got) == set(expected)
    for pair, w in expected.items():
        assert got[pair] == pytest.approx(w, abs=1e-12)


def test_build_network_dispatch_and_determinism():
    rng = random.Random(3)
    clusters = [f"c{i}" for i in range(20)]
    corpus = [make_record(f"p{i}", title=f"title {i} words shared",
                          year=2010 + i % 4) for i in range(20)]
    sets = {r.pub_id: frozenset(rng.sample(clusters, 5)) for r in corpus}
    ref_a = build_network(corpus, "reference", (2010, 2013), reference_sets=sets)
    ref_b = build_network(corpus, "reference", (2010, 2013), reference_sets=sets)
    assert ref_a == ref_b
    text_a = build_network(corpus, "text", (2010, 2013))
    text_b = build_network(corpus, "text", (2010, 2013))
    assert text_a == text_b
    with pytest.raises(NetworkError):
        build_network(corpus, "cocitation", (2010, 2013))
    with pytest.raises(NetworkError):
        build_network(corpus, "reference", (2010, 2013))


def test_year_window_excludes_outside_publications():
    corpus = [make_record(f"p{i}", year=2010 + i) for i in range(6)]
    sets = {r.pub_id: frozenset(["x"]) for r in corpus}
    net = build_reference_network(corpus, sets, (2011, 2013))
    assert net.nodes == ("p1", "p2", "p3")
    assert net.year_window == (2011, 2013)


def test_empty_year_window_rejected():
    corpus = [make_record("p0", year=2012)]
    with pytest.raises(NetworkError):
        build_text_network(corpus, (2013, 2012))
    with pytest.raises(NetworkError):
        build_text_network(corpus, (2000, 2001))


def test_all_weights_strictly_positive_no_self_loops():
    rng = random.Random(19)
    clusters = [f"c{i}" for i in range(10)]
    corpus = [make_record(f"p{i}") for i in range(25)]
    sets = {r.pub_id: frozenset(rng.sample(clusters, rng.randrange(1, 6)))
            for r in corpus}
    net = build_reference_network(corpus, sets, (2012, 2012))
    for u, v, w in net.edges:
        assert u < v
        assert w > 0.0
    assert len({(u, v) for u, v, _ in net.edges}) == net.n_edges


# --- network_stats ----------------------------------------------------------

def _net_from_edges(n, weighted_edges):
    nodes = tuple(f"p{i}" for i in range(n))
    edges = tuple(sorted((f"p{u}", f"p{v}", w) for u, v, w in weighted_edges))
    from bibcoupling import CouplingNetwork
    return CouplingNetwork(kind="reference", nodes=nodes, edges=edges,
                           year_window=(2011, 2015))


def test_triangle_graph_stats():
    net = _net_from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    stats = network_stats(net)
    assert stats.density == 1.0
    assert stats.diameter == 1
    assert stats.global_clustering == 1.0
    assert stats.n_isolated == 0


def test_path_graph_stats():
    net = _net_from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    stats = network_stats(net)
    assert stats.diameter == 3
    assert stats.global_clustering == 0.0


def test_isolated_nodes_counted_and_diameter_on_giant():
    net = _net_from_edges(5, [(0, 1, 0.5), (1, 2, 0.5)])
    stats = network_stats(net)
    assert stats.n_isolated == 2
    assert stats.diameter == 2  # giant component is the path 0-1-2
    assert stats.density == pytest.approx(2 * 2 / (5 * 4))


def test_stats_json_shape():
    net = _net_from_edges(3, [(0, 1, 1.0)])
    doc = network_stats(net).to_json_dict()
    assert set(doc) == {"n_nodes", "n_isolated", "n_edges", "density",
                        "diameter", "global_clustering", "modularity"}


# --- artifact round trip ------------------------------------------------------

def test_network_write_read_round_trip(tmp_path):
    rng = random.Random(59)
    clusters = [f"c{i}" for i in range(12)]
    corpus = [make_record(f"p{i}") for i in range(15)]
    sets = {r.pub_id: frozenset(rng.sample(clusters, 4)) for r in corpus}
    net = build_reference_network(corpus, sets, (2012, 2012))
    write_network(net, tmp_path / "n.csv", tmp_path / "n.json")
    back = read_network(tmp_path / "n.csv", tmp_path / "n.json")
    assert back == net
