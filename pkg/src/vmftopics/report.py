"""Topic-word rankings and document-topic distributions from a trained
model, plus the exported report files (topics.json, doc_topics.tsv,
latent_words.tsv).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attention import AttentionParams, pool_document
from .corpus import Corpus
from .errors import ParameterError
from .latent import EPS, LatentModel, encode, topic_posterior

log = logging.getLogger(__name__)


@dataclass
class TopicReport:
    """Per-topic ranked (surface, cosine score) lists and per-document
    topic distributions."""

    topics: list                 # K lists of (surface, score), score desc
    doc_topics: np.ndarray       # (D, K), rows sum to 1
    doc_ids: np.ndarray          # (D,)
    word_latents: dict = field(default_factory=dict)  # surface -> unit (r',)

    def __post_init__(self):
        if len(self.topics) < 1:
            raise ParameterError("a report needs at least one topic")
        if self.doc_topics.shape[1] != len(self.topics):
            raise ParameterError("doc_topics width disagrees with topic count")
        sums = self.doc_topics.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise ParameterError("doc_topics rows must sum to 1")
        for words in self.topics:
            scores = [s for _, s in words]
            if any(a < b for a, b in zip(scores, scores[1:])):
                raise ParameterError("topic word lists must be sorted by score")


def word_type_latents(model: LatentModel, corpus: Corpus) -> dict:
    """Mean encoded latent of each word type's occurrences, renormalized.

    Words whose occurrence mean has (near-)zero norm are excluded with a
    warning. Returns word_id -> unit vector, ascending word_id order.
    """
    Z = encode(model, corpus.embeddings)
    sums = np.zeros((len(corpus.vocabulary), model.dim_latent))
    np.add.at(sums, corpus.word_ids, Z)
    counts = np.bincount(corpus.word_ids, minlength=len(corpus.vocabulary))
    latents = {}
    for wid in range(len(corpus.vocabulary)):
        if counts[wid] == 0:
            continue
        mean = sums[wid] / counts[wid]
        norm = np.linalg.norm(mean)
        if norm < EPS:
            log.warning("word %r has a zero-norm mean latent; excluded",
                        corpus.vocabulary.surfaces[wid])
            continue
        latents[wid] = mean / norm
    return latents


def top_words(model: LatentModel, corpus: Corpus, topic_index: int, m: int,
              latents: dict | None = None) -> list:
    """The m word types with the highest cosine to topic topic_index;
    ties broken by ascending word_id."""
    if not 0 <= topic_index < model.n_topics:
        raise ParameterError(f"topic index {topic_index} out of range")
    if m < 1 or m > len(corpus.vocabulary):
        raise ParameterError("m must be in 1..|V|")
    if latents is None:
        latents = word_type_latents(model, corpus)
    if len(latents) < m:
        log.warning("only %d of the requested %d words have latents",
                    len(latents), m)
    t = model.topics[topic_index]
    t = t / np.linalg.norm(t)
    wids = np.fromiter(latents.keys(), dtype=np.int64)
    mat = np.stack([latents[int(w)] for w in wids])
    mat = mat / np.linalg.norm(mat, axis=1, keepdims=True)
    scores = mat @ t
    order = np.lexsort((wids, -scores))[:m]
    return [(corpus.vocabulary.surfaces[int(wids[i])], float(scores[i]))
            for i in order]


def doc_topic_distribution(model: LatentModel, attention: AttentionParams,
                           corpus: Corpus, doc_index: int) -> np.ndarray:
    """Posterior over topics of the attention-pooled document embedding."""
    h_d = pool_document(attention, corpus.doc_embeddings(doc_index))
    z_d = encode(model, h_d)
    return topic_posterior(z_d[None, :], model.topics, model.kappa)[0]


def build_report(model: LatentModel, attention: AttentionParams,
                 corpus: Corpus, m: int = 25) -> TopicReport:
    latents = word_type_latents(model, corpus)
    topics = [top_words(model, corpus, k, min(m, len(corpus.vocabulary)),
                        latents=latents)
              for k in range(model.n_topics)]
    doc_rows = np.stack([doc_topic_distribution(model, attention, corpus, d)
                         for d in range(corpus.n_docs)])
    word_latents = {corpus.vocabulary.surfaces[wid]: vec
                    for wid, vec in latents.items()}
    return TopicReport(topics=topics, doc_topics=doc_rows,
                       doc_ids=corpus.doc_ids.copy(),
                       word_latents=word_latents)


def export_report(report: TopicReport, out_dir) -> list:
    """Write topics.json, doc_topics.tsv and latent_words.tsv (scores and
    coordinates with 6 decimals); returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    topics_path = out_dir / "topics.json"
    payload = [{"topic_id": k,
                "words": [{"surface": s, "score": round(score, 6)}
                          for s, score in words]}
               for k, words in enumerate(report.topics)]
    with open(topics_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    doc_path = out_dir / "doc_topics.tsv"
    with open(doc_path, "w", encoding="utf-8") as fh:
        for doc_id, row in zip(report.doc_ids, report.doc_topics):
            cells = "\t".join(f"{p:.6f}" for p in row)
            fh.write(f"{int(doc_id)}\t{cells}\n")

    words_path = out_dir / "latent_words.tsv"
    with open(words_path, "w", encoding="utf-8") as fh:
        for surface in sorted(report.word_latents):
            coords = "\t".join(f"{c:.6f}" for c in report.word_latents[surface])
            fh.write(f"{surface}\t{coords}\n")

    return [topics_path, doc_path, words_path]
