"""Synthetic corpus generator: documents drawn from planted von
Mises-Fisher clusters on the latent sphere, lifted into the ambient space
by a random orthonormal linear map. Emits the binary embedding file, the
vocabulary and the ground-truth document labels (each document is drawn
from a single cluster, so token labels equal their document's label).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import write_embedding_file, write_labels, write_vocabulary


@dataclass
class SynthSpec:
    k: int = 5
    dim: int = 32
    n_tokens: int = 2000
    latent_dim: int = 8
    tokens_per_doc: int = 20
    kappa: float = 50.0
    vocab_size: int = 200
    seed: int = 0
    max_center_cosine: float = 0.5  # planted centers at least this separated


def sample_vmf(rng: np.random.Generator, mu: np.ndarray, kappa: float,
               n: int) -> np.ndarray:
    """Wood (1994) rejection sampler, exact for any dimension >= 2."""
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
    samples = np.concatenate(
        [ws[:, None], np.sqrt(1.0 - ws ** 2)[:, None] * v], axis=1)
    pole = np.zeros(p)
    pole[0] = 1.0
    mirror = pole - mu
    norm = np.linalg.norm(mirror)
    if norm < 1e-12:
        return samples
    mirror /= norm
    return samples - 2.0 * (samples @ mirror)[:, None] * mirror[None, :]


def _planted_centers(rng, k, dim, max_cosine):
    while True:
        centers = rng.standard_normal((k, dim))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        sims = centers @ centers.T
        np.fill_diagonal(sims, -1.0)
        if sims.max() < max_cosine:
            return centers


def export_synthetic(spec: SynthSpec, out_embeddings, out_vocab,
                     out_labels) -> dict:
    """Write the corpus, vocabulary and label files; returns counts."""
    if spec.k < 1 or spec.latent_dim < 2 or spec.dim <= spec.latent_dim:
        raise ValueError("need k >= 1 and 2 <= latent_dim < dim")
    if spec.tokens_per_doc < 1 or spec.n_tokens < spec.tokens_per_doc:
        raise ValueError("n_tokens must cover at least one document")
    rng = np.random.default_rng(spec.seed)
    centers = (_planted_centers(rng, spec.k, spec.latent_dim,
                                spec.max_center_cosine)
               if spec.k > 1 else
               _planted_centers(rng, 1, spec.latent_dim, 2.0))
    n_docs = spec.n_tokens // spec.tokens_per_doc
    doc_labels = rng.integers(0, spec.k, size=n_docs)
    lift = np.linalg.qr(rng.standard_normal((spec.dim, spec.latent_dim)))[0]

    word_ids = rng.integers(0, spec.vocab_size, size=n_docs * spec.tokens_per_doc)
    used = np.unique(word_ids)
    remap = {int(w): i for i, w in enumerate(used)}
    pos_classes = rng.choice([0, 1, 2, 3], size=word_ids.shape[0],
                             p=[0.3, 0.4, 0.15, 0.15])

    documents = []
    cursor = 0
    for d in range(n_docs):
        latent = sample_vmf(rng, centers[int(doc_labels[d])], spec.kappa,
                            spec.tokens_per_doc)
        ambient = (latent @ lift.T).astype(np.float32)
        records = []
        for row in ambient:
            records.append((remap[int(word_ids[cursor])],
                            int(pos_classes[cursor]), row))
            cursor += 1
        documents.append((d, records))

    n_tokens = write_embedding_file(out_embeddings, documents, spec.dim)
    counts = np.bincount([remap[int(w)] for w in word_ids],
                         minlength=len(used))
    write_vocabulary(out_vocab,
                     [(f"w{i:04d}", int(counts[i])) for i in range(len(used))])
    write_labels(out_labels,
                 [(d, f"cluster{int(doc_labels[d])}") for d in range(n_docs)])
    return {"documents": n_docs, "tokens": n_tokens, "words": len(used),
            "dim": spec.dim, "clusters": spec.k}
