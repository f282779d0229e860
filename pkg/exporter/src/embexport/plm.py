"""Run a masked language model over raw text and emit one embedding per
whole word: subword piece vectors are averaged, special tokens are never
exported, and long documents are chunked at word boundaries (each chunk is
encoded independently and the per-word records are concatenated in order).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .formats import write_embedding_file, write_vocabulary
from .tagging import coarse_pos

log = logging.getLogger(__name__)

WORD_RE = re.compile(r"[a-z]+(?:'[a-z]+)?")


@dataclass
class ExportJob:
    input_path: str          # one document per line
    model: str               # model name or local path
    out_embeddings: str
    out_vocab: str
    max_seq_length: int = 128
    layer: int = -1          # hidden-state layer to export; -1 = last


def extract_words(line: str) -> list:
    return WORD_RE.findall(line.lower())


def _chunk_words(words, piece_counts, budget):
    """Greedy packing of whole words into chunks of at most budget pieces;
    a word never straddles a chunk so piece merging stays local."""
    chunks, current, used = [], [], 0
    for word, n_pieces in zip(words, piece_counts):
        n = max(n_pieces, 1)
        if current and used + n > budget:
            chunks.append(current)
            current, used = [], 0
        current.append(word)
        used += n
    if current:
        chunks.append(current)
    return chunks


def _encode_chunk(model, tokenizer, words, layer, device):
    enc = tokenizer(words, is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        out = model(**{k: v.to(device) for k, v in enc.items()},
                    output_hidden_states=True)
    hidden = out.hidden_states[layer][0].double().cpu().numpy()
    word_ids = enc.word_ids(0)
    sums = {}
    counts = {}
    for position, wid in enumerate(word_ids):
        if wid is None:
            continue  # [CLS] / [SEP] / padding are never exported
        sums[wid] = sums.get(wid, 0.0) + hidden[position]
        counts[wid] = counts.get(wid, 0) + 1
    vectors = []
    for wid in range(len(words)):
        if wid not in sums:
            # every piece was truncated away; should not happen within budget
            raise RuntimeError(f"word {words[wid]!r} lost all pieces")
        vectors.append((sums[wid] / counts[wid]).astype(np.float32))
    return vectors


def export(job: ExportJob) -> dict:
    """Write the embedding and vocabulary files; returns summary counts."""
    tokenizer = AutoTokenizer.from_pretrained(job.model)
    model = AutoModel.from_pretrained(job.model)
    model.eval()
    device = "cpu"
    budget = job.max_seq_length - 2  # room for [CLS] and [SEP]
    if budget < 1:
        raise ValueError("max_seq_length leaves no room for word pieces")

    lines = Path(job.input_path).read_text(encoding="utf-8").splitlines()
    doc_words = []
    doc_vectors = []
    skipped = 0
    for lineno, line in enumerate(lines):
        words = extract_words(line)
        if not words:
            skipped += 1
            log.warning("line %d produced no tokens; document skipped",
                        lineno + 1)
            continue
        probe = tokenizer(words, is_split_into_words=True,
                          add_special_tokens=False)
        piece_counts = np.bincount(
            [w for w in probe.word_ids(0) if w is not None],
            minlength=len(words))
        vectors = []
        for chunk in _chunk_words(words, piece_counts, budget):
            vectors.extend(_encode_chunk(model, tokenizer, chunk,
                                         job.layer, device))
        doc_words.append(words)
        doc_vectors.append(vectors)
    if not doc_words:
        raise ValueError("no document survived tokenization")

    freq = {}
    for words in doc_words:
        for w in words:
            freq[w] = freq.get(w, 0) + 1
    ordered = sorted(freq, key=lambda w: (-freq[w], w))
    word_id = {w: i for i, w in enumerate(ordered)}
    pos_class = {w: coarse_pos(w) for w in ordered}

    dim = len(doc_vectors[0][0])
    documents = []
    for doc_index, (words, vectors) in enumerate(zip(doc_words, doc_vectors)):
        records = [(word_id[w], pos_class[w], vec)
                   for w, vec in zip(words, vectors)]
        documents.append((doc_index, records))
    n_tokens = write_embedding_file(job.out_embeddings, documents, dim)
    write_vocabulary(job.out_vocab, [(w, freq[w]) for w in ordered])
    return {"documents": len(documents), "tokens": n_tokens,
            "words": len(ordered), "dim": dim, "skipped": skipped}
