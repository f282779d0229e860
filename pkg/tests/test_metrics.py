"""Coherence, diversity, NMI and document clustering, each against
independent brute-force oracles."""

import math
from itertools import combinations

import numpy as np
import pytest

from vmftopics.attention import init_attention
from vmftopics.errors import ParameterError
from vmftopics.latent import LatentModel, Mlp, normalize_rows
from vmftopics.metrics import build_cooc_counts, cluster_documents, nmi, \
    topic_diversity, umass, uci

from conftest import make_corpus, word_corpus


# --- independent oracles ----------------------------------------------------

def brute_force_umass(docs_words, topics, m):
    doc_sets = [set(doc) for doc in docs_words]
    scores = []
    for topic in topics:
        words = topic[:m]
        terms = []
        for i in range(1, len(words)):
            for j in range(i):
                d_j = sum(words[j] in s for s in doc_sets)
                if d_j == 0:
                    continue
                if words[i] == words[j]:
                    d_ij = d_j
                else:
                    d_ij = sum(words[i] in s and words[j] in s
                               for s in doc_sets)
                terms.append(math.log((d_ij + 1.0) / d_j))
        if terms:
            scores.append(sum(terms) / len(terms))
    return sum(scores) / len(scores)


def brute_force_windows(docs_words, size):
    windows = []
    for doc in docs_words:
        n = len(doc)
        for start in range(max(n - size + 1, 1)):
            windows.append(set(doc[start:start + size]))
    return windows


def brute_force_uci(docs_words, topics, m, size):
    windows = brute_force_windows(docs_words, size)
    n = len(windows)
    scores = []
    for topic in topics:
        words = topic[:m]
        terms = []
        for a, b in combinations(words, 2):
            c_a = sum(a in w for w in windows)
            c_b = sum(b in w for w in windows)
            if c_a == 0 or c_b == 0:
                continue
            c_ab = c_a if a == b else sum(a in w and b in w for w in windows)
            terms.append(math.log((c_ab / n + 1e-12) / ((c_a / n) * (c_b / n))))
        if terms:
            scores.append(sum(terms) / len(terms))
    return sum(scores) / len(scores)


# --- counts -----------------------------------------------------------------

def test_doc_counts_basic():
    corpus = word_corpus([["a", "b"], ["a"], ["b"]])
    counts = build_cooc_counts(corpus)
    assert counts.doc_freq["a"] == 2
    assert counts.doc_freq["b"] == 2
    assert counts.pair_doc("a", "b") == 1
    assert counts.pair_doc("b", "a") == 1


def test_window_counts_short_doc_is_one_window():
    corpus = word_corpus([["a", "b", "c"]])
    counts = build_cooc_counts(corpus, window_size=10)
    assert counts.n_windows == 1
    assert counts.window_freq["a"] == 1
    assert counts.pair_window("a", "c") == 1


def test_window_counts_sliding():
    corpus = word_corpus([["a", "b", "c", "d"]])
    counts = build_cooc_counts(corpus, window_size=2)
    assert counts.n_windows == 3
    assert counts.pair_window("a", "b") == 1
    assert counts.pair_window("b", "c") == 1
    assert counts.pair_window("a", "c") == 0


def test_pair_counts_bounded_and_symmetric():
    rng = np.random.default_rng(0)
    words = ["u", "v", "w", "x", "y"]
    docs = [[words[int(rng.integers(0, 5))]
             for _ in range(int(rng.integers(1, 12)))] for _ in range(8)]
    corpus = word_corpus(docs)
    counts = build_cooc_counts(corpus, window_size=4)
    for a, b in combinations(words, 2):
        assert counts.pair_doc(a, b) == counts.pair_doc(b, a)
        assert counts.pair_doc(a, b) <= min(counts.doc_freq[a],
                                            counts.doc_freq[b])
        assert counts.pair_window(a, b) == counts.pair_window(b, a)
        assert counts.pair_window(a, b) <= min(counts.window_freq[a],
                                               counts.window_freq[b])


def test_restrict_to_drops_other_words():
    corpus = word_corpus([["a", "b", "c"]])
    counts = build_cooc_counts(corpus, restrict_to={"a", "b"})
    assert counts.doc_freq["c"] == 0
    assert counts.doc_freq["a"] == 1


# --- UMass ------------------------------------------------------------------

def test_umass_shared_and_solo_docs_zero():
    docs = [["a", "b"], ["a"], ["b"]]
    counts = build_cooc_counts(word_corpus(docs))
    assert umass([["a", "b"]], counts, 2) == pytest.approx(0.0, abs=1e-12)


def test_umass_never_cooccurring():
    d = 2
    docs = [["a"], ["a"], ["b"], ["b"]]
    counts = build_cooc_counts(word_corpus(docs))
    assert umass([["a", "b"]], counts, 2) == \
        pytest.approx(math.log(1.0 / d), abs=1e-12)


def test_umass_duplicated_word_pair():
    docs = [["w"], ["w"], ["w"]]
    counts = build_cooc_counts(word_corpus(docs))
    value = umass([["w", "w"]], counts, 2)
    assert value == pytest.approx(math.log(4.0 / 3.0), abs=1e-12)
    assert value > 0


def test_umass_matches_brute_force():
    rng = np.random.default_rng(1)
    words = [f"w{i}" for i in range(8)]
    docs = [[words[int(rng.integers(0, 8))]
             for _ in range(int(rng.integers(2, 9)))] for _ in range(10)]
    corpus = word_corpus(docs)
    counts = build_cooc_counts(corpus)
    topics = [["w0", "w1", "w2", "w3"], ["w4", "w5", "w6", "w7"]]
    assert umass(topics, counts, 4) == \
        pytest.approx(brute_force_umass(docs, topics, 4), abs=1e-12)


def test_umass_skips_absent_words(caplog):
    import logging
    docs = [["a", "b"], ["a", "b"]]
    counts = build_cooc_counts(word_corpus(docs))
    with caplog.at_level(logging.WARNING):
        value = umass([["a", "b", "ghost"]], counts, 3)
    assert "absent" in caplog.text
    assert np.isfinite(value)


def test_umass_needs_m_at_least_two():
    counts = build_cooc_counts(word_corpus([["a"]]))
    with pytest.raises(ParameterError):
        umass([["a"]], counts, 1)


# --- UCI --------------------------------------------------------------------

def test_uci_always_sharing_words():
    # both words in every window of half the documents
    docs = [["a", "b"], ["a", "b"], ["c"], ["d"]]
    counts = build_cooc_counts(word_corpus(docs), window_size=10)
    q = 0.5
    assert uci([["a", "b"]], counts, 2) == \
        pytest.approx(math.log((q + 1e-12) / (q * q)), abs=1e-9)


def test_uci_independent_words_near_zero():
    rng = np.random.default_rng(2)
    stream = [["x" if rng.uniform() < 0.5 else "y"
               for _ in range(6)] for _ in range(3000)]
    counts = build_cooc_counts(word_corpus(stream), window_size=10)
    assert abs(uci([["x", "y"]], counts, 2)) < 0.05


def test_uci_small_doc_matches_enumeration():
    docs = [["a", "b", "c", "a", "d"]]
    corpus = word_corpus(docs)
    counts = build_cooc_counts(corpus, window_size=10)
    topics = [["a", "b", "c", "d"]]
    assert uci(topics, counts, 4) == \
        pytest.approx(brute_force_uci(docs, topics, 4, 10), abs=1e-12)


def test_uci_sliding_matches_enumeration():
    rng = np.random.default_rng(3)
    words = ["p", "q", "r", "s"]
    docs = [[words[int(rng.integers(0, 4))]
             for _ in range(int(rng.integers(1, 15)))] for _ in range(6)]
    corpus = word_corpus(docs)
    counts = build_cooc_counts(corpus, window_size=5)
    topics = [["p", "q"], ["r", "s"]]
    assert uci(topics, counts, 2) == \
        pytest.approx(brute_force_uci(docs, topics, 2, 5), abs=1e-12)


def test_uci_zero_count_pair_skipped():
    docs = [["a", "b"], ["a", "b"]]
    counts = build_cooc_counts(word_corpus(docs), window_size=10)
    value = uci([["a", "b", "ghost"]], counts, 3)
    assert value == pytest.approx(uci([["a", "b"]], counts, 2), abs=1e-12)


# --- diversity ----------------------------------------------------------------

def test_diversity_identical_lists():
    topics = [["a", "b", "c"]] * 4
    assert topic_diversity(topics, 3) == pytest.approx(1.0 / 4.0)


def test_diversity_disjoint():
    topics = [["a", "b"], ["c", "d"], ["e", "f"]]
    assert topic_diversity(topics, 2) == 1.0


def test_diversity_partial_overlap():
    topics = [["a", "b", "c"], ["a", "d", "e"]]
    assert topic_diversity(topics, 3) == pytest.approx(5.0 / 6.0)


def test_diversity_bounds():
    rng = np.random.default_rng(4)
    words = [f"w{i}" for i in range(20)]
    for _ in range(20):
        k, m = int(rng.integers(2, 5)), 3
        topics = [list(rng.choice(words, size=m, replace=False))
                  for _ in range(k)]
        value = topic_diversity(topics, m)
        assert 1.0 / k - 1e-12 <= value <= 1.0 + 1e-12


# --- NMI ----------------------------------------------------------------------

def test_nmi_identical():
    assert nmi([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == pytest.approx(1.0)


def test_nmi_label_permutation():
    assert nmi([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)


def test_nmi_one_trivial_side_zero():
    assert nmi([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0
    assert nmi([0, 1, 0, 1], [7, 7, 7, 7]) == 0.0


def test_nmi_both_single_cluster():
    assert nmi([3, 3, 3], [9, 9, 9]) == 1.0


def test_nmi_symmetry_and_invariance():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 40))
        a = rng.integers(0, 4, size=n).tolist()
        b = rng.integers(0, 3, size=n).tolist()
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)
        remap = {0: 13, 1: -2, 2: 99, 3: 7}
        assert nmi([remap[x] for x in a], b) == pytest.approx(nmi(a, b),
                                                              abs=1e-12)
        assert 0.0 <= nmi(a, b) <= 1.0


def test_nmi_against_known_value():
    # I(A;B) and entropies computed by hand for a 2x2 contingency table
    a = [0, 0, 0, 1]
    b = [0, 0, 1, 1]
    n = 4.0
    h_a = -(3 / n) * math.log(3 / n) - (1 / n) * math.log(1 / n)
    h_b = math.log(2.0)
    mutual = (2 / n) * math.log(n * 2 / (3 * 2)) + \
        (1 / n) * math.log(n * 1 / (3 * 2)) + \
        (1 / n) * math.log(n * 1 / (1 * 2))
    assert nmi(a, b) == pytest.approx(mutual / ((h_a + h_b) / 2), abs=1e-12)


def test_nmi_length_mismatch():
    with pytest.raises(ParameterError):
        nmi([0, 1], [0, 1, 2])


# --- document clustering --------------------------------------------------

def blob_model():
    W_enc = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    return LatentModel(Mlp([W_enc], [np.zeros(2)]),
                       Mlp([W_enc.T], [np.zeros(3)]),
                       np.eye(2), 10.0)


def test_cluster_documents_two_blobs():
    rng = np.random.default_rng(6)
    docs = []
    truth = []
    for i in range(12):
        center = np.array([1.0, 0.0, 0.0]) if i % 2 else np.array([0.0, 1.0, 0.0])
        docs.append(center + 0.01 * rng.standard_normal((2, 3)))
        truth.append(i % 2)
    corpus = make_corpus(docs, dim=3)
    attention = init_attention(2, 3, rng)
    labels = cluster_documents(blob_model(), attention, corpus, 2, seed=0)
    assert nmi(labels.tolist(), truth) == pytest.approx(1.0)


def test_cluster_documents_k_equals_docs():
    rng = np.random.default_rng(7)
    docs = [normalize_rows(rng.standard_normal((1, 3))) for _ in range(5)]
    corpus = make_corpus(docs, dim=3)
    attention = init_attention(2, 3, rng)
    labels = cluster_documents(blob_model(), attention, corpus, 5, seed=1)
    assert len(set(labels.tolist())) == 5


def test_cluster_documents_deterministic():
    rng = np.random.default_rng(8)
    docs = [rng.standard_normal((3, 3)) for _ in range(8)]
    corpus = make_corpus(docs, dim=3)
    attention = init_attention(2, 3, rng)
    a = cluster_documents(blob_model(), attention, corpus, 3, seed=5)
    b = cluster_documents(blob_model(), attention, corpus, 3, seed=5)
    np.testing.assert_array_equal(a, b)


def test_cluster_documents_preconditions():
    rng = np.random.default_rng(9)
    corpus = make_corpus([rng.standard_normal((1, 3))], dim=3)
    attention = init_attention(2, 3, rng)
    with pytest.raises(ParameterError):
        cluster_documents(blob_model(), attention, corpus, 1, seed=0)
    with pytest.raises(ParameterError):
        cluster_documents(blob_model(), attention, corpus, 2, seed=0)
