"""Shared fixture builders and independent oracles.

The byte-level writers here are deliberately separate from the package's
serializers so format tests compare two independent routes.
"""

import struct

import numpy as np
import pytest

from vmftopics.corpus import Corpus, Vocabulary


def write_embedding_bytes(docs, dim):
    """Independent binary writer. docs: list of (doc_id, tokens) where each
    token is (word_id, pos_class, vector)."""
    n_tokens = sum(len(toks) for _, toks in docs)
    out = [struct.pack("<4sIIQQ", b"TPCL", 1, dim, len(docs), n_tokens)]
    for doc_id, toks in docs:
        out.append(struct.pack("<QI", doc_id, len(toks)))
        for wid, pos, vec in toks:
            out.append(struct.pack("<IB", wid, pos))
            out.append(np.asarray(vec, dtype="<f4").tobytes())
    return b"".join(out)


def write_vocab_text(rows):
    """rows: list of (word_id, surface, frequency)."""
    return "".join(f"{w}\t{s}\t{f}\n" for w, s, f in rows)


def make_corpus(doc_tokens, dim, surfaces=None, pos=None):
    """In-memory corpus from a list of per-document embedding matrices.

    doc_tokens: list of (n_i, dim) arrays. Word ids cycle through the
    vocabulary; pos defaults to all-noun.
    """
    mats = [np.atleast_2d(np.asarray(m, dtype=np.float64)) for m in doc_tokens]
    n = sum(len(m) for m in mats)
    if surfaces is None:
        surfaces = tuple(f"w{i}" for i in range(n))
    wids = np.arange(n, dtype=np.int64) % len(surfaces)
    freqs = np.bincount(wids, minlength=len(surfaces)).astype(np.int64)
    freqs = np.maximum(freqs, 1)
    lengths = [len(m) for m in mats]
    offsets = np.zeros(len(mats) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    if pos is None:
        pos_arr = np.ones(n, dtype=np.uint8)
    else:
        pos_arr = np.asarray(pos, dtype=np.uint8)
    return Corpus(
        doc_ids=np.arange(len(mats), dtype=np.uint64),
        doc_offsets=offsets,
        word_ids=wids,
        pos_classes=pos_arr,
        embeddings=np.vstack(mats).astype(np.float32).astype(np.float64),
        vocabulary=Vocabulary(tuple(surfaces), freqs),
        dim=dim,
    )


def word_corpus(docs, dim=4, seed=0, pos_for=None):
    """Corpus from documents given as lists of surface strings; embeddings
    are random but deterministic per word."""
    rng = np.random.default_rng(seed)
    surfaces = sorted({w for doc in docs for w in doc})
    word_vec = {w: rng.standard_normal(dim) for w in surfaces}
    index = {w: i for i, w in enumerate(surfaces)}
    wids, pos, vecs, lengths = [], [], [], []
    for doc in docs:
        lengths.append(len(doc))
        for w in doc:
            wids.append(index[w])
            pos.append(pos_for[w] if pos_for else 1)
            vecs.append(word_vec[w])
    offsets = np.zeros(len(docs) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    wids = np.array(wids, dtype=np.int64)
    freqs = np.bincount(wids, minlength=len(surfaces)).astype(np.int64)
    return Corpus(
        doc_ids=np.arange(len(docs), dtype=np.uint64),
        doc_offsets=offsets,
        word_ids=wids,
        pos_classes=np.array(pos, dtype=np.uint8),
        embeddings=np.vstack(vecs).astype(np.float32).astype(np.float64),
        vocabulary=Vocabulary(tuple(surfaces), freqs),
        dim=dim,
    )


def sample_vmf(rng, mu, kappa, n):
    """Wood (1994) rejection sampler for the von Mises-Fisher distribution."""
    p = mu.shape[0]
    b = (-2.0 * kappa + np.sqrt(4.0 * kappa ** 2 + (p - 1) ** 2)) / (p - 1)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + (p - 1) * np.log(1.0 - x0 ** 2)
    ws = np.empty(n)
    filled = 0
    while filled < n:
        z = rng.beta((p - 1) / 2.0, (p - 1) / 2.0)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        if kappa * w + (p - 1) * np.log(1.0 - x0 * w) - c >= np.log(rng.uniform()):
            ws[filled] = w
            filled += 1
    v = rng.standard_normal((n, p - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    samples = np.concatenate([ws[:, None], np.sqrt(1.0 - ws ** 2)[:, None] * v],
                             axis=1)
    e1 = np.zeros(p)
    e1[0] = 1.0
    u = e1 - mu
    norm = np.linalg.norm(u)
    if norm < 1e-12:
        return samples
    u /= norm
    return samples - 2.0 * (samples @ u)[:, None] * u[None, :]


def planted_vmf_corpus(seed, k=5, latent_dim=8, dim=32, n_tokens=2000,
                       tokens_per_doc=20, kappa_gen=50.0, vocab_size=200):
    """Synthetic corpus: documents drawn from planted vMF clusters on the
    latent sphere, pushed through a random orthonormal linear map.

    Returns (corpus, token_labels, doc_labels).
    """
    rng = np.random.default_rng(seed)
    while True:
        centers = rng.standard_normal((k, latent_dim))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        sims = centers @ centers.T
        np.fill_diagonal(sims, -1.0)
        if sims.max() < 0.5:
            break
    n_docs = n_tokens // tokens_per_doc
    doc_labels = rng.integers(0, k, size=n_docs)
    latents, token_labels = [], []
    for d in range(n_docs):
        c = int(doc_labels[d])
        latents.append(sample_vmf(rng, centers[c], kappa_gen, tokens_per_doc))
        token_labels.extend([c] * tokens_per_doc)
    Z = np.vstack(latents)
    lift = np.linalg.qr(rng.standard_normal((dim, latent_dim)))[0]
    H = (Z @ lift.T).astype(np.float32).astype(np.float64)

    n = len(token_labels)
    wids = rng.integers(0, vocab_size, size=n)
    used = np.unique(wids)
    remap = {int(w): i for i, w in enumerate(used)}
    wids = np.array([remap[int(w)] for w in wids], dtype=np.int64)
    freqs = np.bincount(wids).astype(np.int64)
    vocab = Vocabulary(tuple(f"w{i:04d}" for i in range(len(used))), freqs)
    corpus = Corpus(
        doc_ids=np.arange(n_docs, dtype=np.uint64),
        doc_offsets=np.arange(0, n + 1, tokens_per_doc, dtype=np.int64),
        word_ids=wids,
        pos_classes=rng.choice([0, 1, 2, 3], size=n,
                               p=[0.3, 0.4, 0.15, 0.15]).astype(np.uint8),
        embeddings=H,
        vocabulary=vocab,
        dim=dim,
    )
    return corpus, np.array(token_labels), doc_labels


def rank2_corpus(seed=0, n_docs=30, tokens_per_doc=4, dim=8, radius=2.0):
    """Constant-radius points on a planted 2-plane inside R^dim."""
    rng = np.random.default_rng(seed)
    n = n_docs * tokens_per_doc
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1) * radius
    plane = np.linalg.qr(rng.standard_normal((dim, 2)))[0]
    H = (u @ plane.T).astype(np.float32).astype(np.float64)
    wids = (np.arange(n) % 50).astype(np.int64)
    vocab = Vocabulary(tuple(f"w{i}" for i in range(50)),
                       np.bincount(wids, minlength=50).astype(np.int64))
    return Corpus(
        doc_ids=np.arange(n_docs, dtype=np.uint64),
        doc_offsets=np.arange(0, n + 1, tokens_per_doc, dtype=np.int64),
        word_ids=wids,
        pos_classes=np.ones(n, dtype=np.uint8),
        embeddings=H,
        vocabulary=vocab,
        dim=dim,
    )


def naive_target_distribution(P):
    """Literal double-loop evaluation of the sharpened target assignment."""
    P = np.asarray(P, dtype=np.float64)
    n, k = P.shape
    s = [max(sum(P[i][j] for i in range(n)), 1e-12) for j in range(k)]
    Q = np.zeros_like(P)
    for i in range(n):
        weights = [P[i][j] ** 2 / s[j] for j in range(k)]
        total = sum(weights)
        for j in range(k):
            Q[i][j] = weights[j] / total
    return Q


@pytest.fixture
def tiny_corpus():
    """2 docs, 5 tokens, 4 words, r=4; loads with nothing filtered at
    min_count=1."""
    rng = np.random.default_rng(11)
    return word_corpus([["alpha", "beta", "alpha"], ["gamma", "delta"]],
                       dim=4, seed=11)
