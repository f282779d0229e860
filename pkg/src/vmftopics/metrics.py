"""Topic-quality and clustering-quality metrics: UMass and UCI coherence,
topic diversity, normalized mutual information and document clustering.

UMass uses document-level co-occurrence with +1 smoothing in the numerator
only. UCI uses boolean sliding windows of a fixed size (default 10, step 1,
never crossing document boundaries; a document shorter than the window is
a single window) and epsilon 1e-12 inside the log.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .attention import AttentionParams, pool_document
from .corpus import Corpus
from .errors import ParameterError
from .latent import LatentModel, encode
from .seeding import substream

log = logging.getLogger(__name__)

PMI_EPS = 1e-12


@dataclass
class CoocCounts:
    """Document and sliding-window co-occurrence statistics keyed by
    surface string; pair keys are sorted 2-tuples."""

    doc_freq: Counter
    doc_pair_freq: Counter
    window_freq: Counter
    window_pair_freq: Counter
    n_windows: int
    window_size: int

    def pair_doc(self, a: str, b: str) -> int:
        if a == b:
            return self.doc_freq[a]
        return self.doc_pair_freq[tuple(sorted((a, b)))]

    def pair_window(self, a: str, b: str) -> int:
        if a == b:
            return self.window_freq[a]
        return self.window_pair_freq[tuple(sorted((a, b)))]


def build_cooc_counts(corpus: Corpus, window_size: int = 10,
                      restrict_to=None) -> CoocCounts:
    """Count document and window (co-)occurrences over the corpus.

    restrict_to limits counting to a set of surfaces (the usual case:
    the union of all topics' top words), keeping pair tables small.
    """
    if window_size < 1:
        raise ParameterError("window size must be >= 1")
    surfaces = corpus.vocabulary.surfaces
    doc_freq, doc_pairs = Counter(), Counter()
    win_freq, win_pairs = Counter(), Counter()
    n_windows = 0
    for d in range(corpus.n_docs):
        sl = corpus.doc_slice(d)
        words = [surfaces[w] for w in corpus.word_ids[sl]]
        if restrict_to is not None:
            kept = [w for w in words if w in restrict_to]
        else:
            kept = words
        present = sorted(set(kept))
        doc_freq.update(present)
        doc_pairs.update(combinations(present, 2))

        length = len(words)
        starts = range(max(length - window_size + 1, 1))
        for start in starts:
            window = words[start:start + window_size]
            if restrict_to is not None:
                window = [w for w in window if w in restrict_to]
            seen = sorted(set(window))
            win_freq.update(seen)
            win_pairs.update(combinations(seen, 2))
            n_windows += 1
    return CoocCounts(doc_freq=doc_freq, doc_pair_freq=doc_pairs,
                      window_freq=win_freq, window_pair_freq=win_pairs,
                      n_windows=n_windows, window_size=window_size)


def _topic_surfaces(topic) -> list:
    """Accept either plain surfaces or (surface, score) pairs."""
    return [w[0] if isinstance(w, tuple) else w for w in topic]


def umass(topics, counts: CoocCounts, m: int) -> float:
    """Mean over topics of the per-topic mean of
    log((D(w_i, w_j) + 1) / D(w_j)) over ranked pairs j < i."""
    if m < 2:
        raise ParameterError("UMass needs m >= 2")
    topic_scores = []
    skipped_pairs = 0
    for topic in topics:
        words = _topic_surfaces(topic)[:m]
        present = [w for w in words if counts.doc_freq[w] > 0]
        if len(present) < len(words):
            log.warning("UMass skipped %d word(s) absent from the corpus",
                        len(words) - len(present))
        terms = []
        for i in range(1, len(present)):
            for j in range(i):
                denom = counts.doc_freq[present[j]]
                if denom == 0:
                    skipped_pairs += 1
                    continue
                terms.append(math.log((counts.pair_doc(present[i], present[j])
                                       + 1.0) / denom))
        if terms:
            topic_scores.append(sum(terms) / len(terms))
        else:
            log.warning("UMass: a topic has no scoreable pair; skipped")
    if skipped_pairs:
        log.warning("UMass skipped %d pair(s) with zero denominator",
                    skipped_pairs)
    if not topic_scores:
        raise ParameterError("no topic produced a UMass score")
    return float(np.mean(topic_scores))


def uci(topics, counts: CoocCounts, m: int) -> float:
    """Mean over topics of the mean pointwise mutual information
    log((p(w_i, w_j) + eps) / (p(w_i) p(w_j))) over unordered top-word
    pairs, probabilities taken over sliding windows."""
    if m < 2:
        raise ParameterError("UCI needs m >= 2")
    if counts.n_windows < 1:
        raise ParameterError("counts contain no windows")
    n = float(counts.n_windows)
    topic_scores = []
    skipped_pairs = 0
    for topic in topics:
        words = _topic_surfaces(topic)[:m]
        terms = []
        for a, b in combinations(words, 2):
            if counts.window_freq[a] == 0 or counts.window_freq[b] == 0:
                skipped_pairs += 1
                continue
            p_a = counts.window_freq[a] / n
            p_b = counts.window_freq[b] / n
            p_ab = counts.pair_window(a, b) / n
            terms.append(math.log((p_ab + PMI_EPS) / (p_a * p_b)))
        if terms:
            topic_scores.append(sum(terms) / len(terms))
        else:
            log.warning("UCI: a topic has no scoreable pair; skipped")
    if skipped_pairs:
        log.warning("UCI skipped %d pair(s) with zero window count",
                    skipped_pairs)
    if not topic_scores:
        raise ParameterError("no topic produced a UCI score")
    return float(np.mean(topic_scores))


def topic_diversity(topics, m: int) -> float:
    """Fraction of unique words across all topics' top-m lists."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    if not topics:
        raise ParameterError("no topics given")
    unique = set()
    for topic in topics:
        unique.update(_topic_surfaces(topic)[:m])
    return len(unique) / (len(topics) * m)


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information with arithmetic-mean normalization.

    Returns 1.0 when both sides are single-cluster, 0.0 when exactly one
    marginal entropy is zero.
    """
    labels_a, labels_b = list(labels_a), list(labels_b)
    if len(labels_a) != len(labels_b):
        raise ParameterError("label sequences differ in length")
    n = len(labels_a)
    if n < 1:
        raise ParameterError("label sequences are empty")
    count_a = Counter(labels_a)
    count_b = Counter(labels_b)

    def entropy(counts):
        return -sum((c / n) * math.log(c / n) for c in counts.values())

    h_a, h_b = entropy(count_a), entropy(count_b)
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    joint = Counter(zip(labels_a, labels_b))
    mutual = 0.0
    for (a, b), c in joint.items():
        mutual += (c / n) * math.log(n * c / (count_a[a] * count_b[b]))
    value = mutual / ((h_a + h_b) / 2.0)
    return float(min(max(value, 0.0), 1.0))


def cluster_documents(model: LatentModel, attention: AttentionParams,
                      corpus: Corpus, k_eval: int, seed: int = 0) -> np.ndarray:
    """Euclidean k-means over unit-normalized latent document embeddings.

    Initialization is greedy farthest-point from a seeded random first
    centroid; an emptied cluster is reseeded with the point farthest from
    its stale centroid. Returns one label per document.
    """
    if k_eval < 2:
        raise ParameterError("k_eval must be >= 2")
    if corpus.n_docs < k_eval:
        raise ParameterError("fewer documents than clusters")
    feats = np.stack([
        encode(model, pool_document(attention, corpus.doc_embeddings(d)))
        for d in range(corpus.n_docs)])
    rng = substream(seed, "document-kmeans")

    def dists_to(center):
        return np.linalg.norm(feats - center, axis=1)

    centroids = np.empty((k_eval, feats.shape[1]))
    centroids[0] = feats[int(rng.integers(corpus.n_docs))]
    best = dists_to(centroids[0])
    for j in range(1, k_eval):
        centroids[j] = feats[int(np.argmax(best))]
        best = np.minimum(best, dists_to(centroids[j]))

    assign = None
    for _ in range(100):
        d2 = ((feats[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k_eval):
            members = feats[assign == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
            else:
                centroids[j] = feats[int(np.argmax(dists_to(centroids[j])))]
    return assign
