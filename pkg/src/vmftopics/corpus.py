"""Token-embedding corpus: binary ingestion, vocabulary filtering and
generic (content-word mean) document embeddings.

Embedding file layout (little-endian):
    magic "TPCL", version u32 = 1, r u32, doc_count u64, token_count u64,
    then per document: doc_id u64, n_tokens u32,
    then per token: word_id u32, pos_class u8, r IEEE-754 float32 values.

Vocabulary file: UTF-8 TSV rows ``word_id<TAB>surface<TAB>frequency`` with
dense word ids 0..|V|-1. Label file: UTF-8 TSV rows ``doc_id<TAB>label``.

Token records are held as parallel arrays (word id, pos class, embedding
row) rather than one object per token; embeddings are promoted to float64
on load. All corpus arrays are frozen after construction so a loaded corpus
is safe to share between readers.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpusError, FormatError, ParameterError

log = logging.getLogger(__name__)

MAGIC = b"TPCL"
FORMAT_VERSION = 1

POS_OTHER = 0
POS_NOUN = 1
POS_VERB = 2
POS_ADJECTIVE = 3
CONTENT_POS = (POS_NOUN, POS_VERB, POS_ADJECTIVE)

_HEADER = struct.Struct("<4sIIQQ")
_DOC_HEADER = struct.Struct("<QI")


def _token_dtype(dim: int) -> np.dtype:
    return np.dtype([("word_id", "<u4"), ("pos", "u1"), ("vec", "<f4", (dim,))])


@dataclass(frozen=True)
class Vocabulary:
    """Dense word-id table: surface strings and corpus frequencies."""

    surfaces: tuple
    frequencies: np.ndarray  # (|V|,) int64, every entry >= 1

    def __len__(self):
        return len(self.surfaces)

    def __post_init__(self):
        if len(self.surfaces) != len(self.frequencies):
            raise ParameterError("surface/frequency length mismatch")
        if len(set(self.surfaces)) != len(self.surfaces):
            raise ParameterError("vocabulary surfaces are not unique")
        if len(self.frequencies) and self.frequencies.min() < 1:
            raise ParameterError("vocabulary frequencies must be >= 1")
        self.frequencies.setflags(write=False)


@dataclass(frozen=True)
class Corpus:
    """Immutable token-embedding corpus.

    Documents are index ranges into the flat token arrays:
    document i owns tokens doc_offsets[i]:doc_offsets[i + 1].
    """

    doc_ids: np.ndarray       # (D,) uint64
    doc_offsets: np.ndarray   # (D + 1,) int64
    word_ids: np.ndarray      # (N,) int64
    pos_classes: np.ndarray   # (N,) uint8
    embeddings: np.ndarray    # (N, r) float64, promoted from float32
    vocabulary: Vocabulary
    dim: int
    dropped_doc_ids: tuple = field(default=())

    def __post_init__(self):
        for arr in (self.doc_ids, self.doc_offsets, self.word_ids,
                    self.pos_classes, self.embeddings):
            arr.setflags(write=False)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_tokens(self) -> int:
        return len(self.word_ids)

    def doc_slice(self, doc_index: int) -> slice:
        if not 0 <= doc_index < self.n_docs:
            raise IndexError(f"document index {doc_index} out of range")
        return slice(int(self.doc_offsets[doc_index]),
                     int(self.doc_offsets[doc_index + 1]))

    def doc_embeddings(self, doc_index: int) -> np.ndarray:
        return self.embeddings[self.doc_slice(doc_index)]


def load_vocabulary(path) -> Vocabulary:
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError("vocabulary row needs 3 tab-separated fields",
                                  line=lineno)
            try:
                word_id = int(parts[0])
                freq = int(parts[2])
            except ValueError:
                raise FormatError("non-integer word_id or frequency", line=lineno)
            if word_id in rows:
                raise FormatError(f"duplicate word_id {word_id}", line=lineno)
            if freq < 1:
                raise FormatError(f"frequency {freq} < 1", line=lineno)
            rows[word_id] = (parts[1], freq)
    if not rows:
        raise FormatError("empty vocabulary file", line=1)
    size = len(rows)
    if set(rows) != set(range(size)):
        raise FormatError(f"word_ids are not dense 0..{size - 1}", line=1)
    surfaces = tuple(rows[i][0] for i in range(size))
    freqs = np.array([rows[i][1] for i in range(size)], dtype=np.int64)
    if len(set(surfaces)) != size:
        raise FormatError("duplicate surface string", line=1)
    return Vocabulary(surfaces, freqs)


def load_labels(path) -> dict:
    """Read a doc_id -> label table for clustering evaluation."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("label row needs 2 tab-separated fields",
                                  line=lineno)
            try:
                doc_id = int(parts[0])
            except ValueError:
                raise FormatError("non-integer doc_id", line=lineno)
            labels[doc_id] = parts[1]
    return labels


def load_corpus(embedding_path, vocab_path) -> Corpus:
    """Parse and validate an embedding file against its vocabulary."""
    vocabulary = load_vocabulary(vocab_path)
    with open(embedding_path, "rb") as fh:
        blob = fh.read()

    if len(blob) < _HEADER.size:
        raise FormatError("truncated header", offset=len(blob))
    magic, version, dim, doc_count, token_count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError("bad magic", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if dim < 1:
        raise FormatError("embedding dimension must be >= 1", offset=8)
    if doc_count < 1 or token_count < 1:
        raise FormatError("corpus declares no documents or no tokens", offset=12)

    dtype = _token_dtype(dim)
    offset = _HEADER.size
    doc_ids = np.empty(doc_count, dtype=np.uint64)
    lengths = np.empty(doc_count, dtype=np.int64)
    wid_parts, pos_parts, vec_parts = [], [], []
    vocab_size = len(vocabulary)

    for d in range(doc_count):
        if offset + _DOC_HEADER.size > len(blob):
            raise FormatError("truncated document header", offset=offset)
        doc_id, n_tok = _DOC_HEADER.unpack_from(blob, offset)
        if n_tok == 0:
            raise FormatError(f"document {doc_id} declares zero tokens",
                              offset=offset + 8)
        offset += _DOC_HEADER.size
        nbytes = n_tok * dtype.itemsize
        if offset + nbytes > len(blob):
            raise FormatError("truncated token record", offset=offset)
        recs = np.frombuffer(blob, dtype=dtype, count=n_tok, offset=offset)

        bad = np.nonzero(recs["word_id"] >= vocab_size)[0]
        if bad.size:
            raise FormatError(
                f"word_id {int(recs['word_id'][bad[0]])} out of range",
                offset=offset + int(bad[0]) * dtype.itemsize)
        bad = np.nonzero(recs["pos"] > POS_ADJECTIVE)[0]
        if bad.size:
            raise FormatError(
                f"pos_class {int(recs['pos'][bad[0]])} out of range",
                offset=offset + int(bad[0]) * dtype.itemsize + 4)
        vecs = recs["vec"].astype(np.float64)
        bad = np.nonzero(~np.isfinite(vecs).all(axis=1))[0]
        if bad.size:
            raise FormatError("non-finite embedding value",
                              offset=offset + int(bad[0]) * dtype.itemsize + 5)

        doc_ids[d] = doc_id
        lengths[d] = n_tok
        wid_parts.append(recs["word_id"].astype(np.int64))
        pos_parts.append(recs["pos"].copy())
        vec_parts.append(vecs)
        offset += nbytes

    if offset != len(blob):
        raise FormatError("trailing bytes after last document", offset=offset)
    total = int(lengths.sum())
    if total != token_count:
        raise FormatError(
            f"header declares {token_count} tokens but file contains {total}",
            offset=20)

    doc_offsets = np.zeros(doc_count + 1, dtype=np.int64)
    np.cumsum(lengths, out=doc_offsets[1:])
    return Corpus(
        doc_ids=doc_ids,
        doc_offsets=doc_offsets,
        word_ids=np.concatenate(wid_parts),
        pos_classes=np.concatenate(pos_parts),
        embeddings=np.vstack(vec_parts),
        vocabulary=vocabulary,
        dim=int(dim),
    )


def write_corpus(corpus: Corpus, path) -> None:
    """Serialize a corpus back to the binary embedding format.

    Loading then writing reproduces the original byte stream exactly
    (embeddings were promoted from float32, so the demotion is lossless).
    """
    dtype = _token_dtype(corpus.dim)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, corpus.dim,
                              corpus.n_docs, corpus.n_tokens))
        for d in range(corpus.n_docs):
            sl = corpus.doc_slice(d)
            n_tok = sl.stop - sl.start
            fh.write(_DOC_HEADER.pack(int(corpus.doc_ids[d]), n_tok))
            recs = np.empty(n_tok, dtype=dtype)
            recs["word_id"] = corpus.word_ids[sl].astype(np.uint32)
            recs["pos"] = corpus.pos_classes[sl]
            recs["vec"] = corpus.embeddings[sl].astype(np.float32)
            fh.write(recs.tobytes())


def write_vocabulary(vocabulary: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for wid, surface in enumerate(vocabulary.surfaces):
            fh.write(f"{wid}\t{surface}\t{int(vocabulary.frequencies[wid])}\n")


def filter_vocabulary(corpus: Corpus, min_count: int) -> Corpus:
    """Drop every token whose word occurs fewer than min_count times.

    Occurrence counts are recomputed from the token stream (the vocabulary
    file's frequencies are not trusted). Documents emptied by the filter are
    dropped and logged; word ids are re-densified preserving their order and
    frequencies are recomputed over the retained tokens.
    """
    if min_count < 1:
        raise ParameterError("min_count must be >= 1")
    counts = np.bincount(corpus.word_ids, minlength=len(corpus.vocabulary))
    keep_word = counts >= min_count
    keep_token = keep_word[corpus.word_ids]
    if not keep_token.any():
        raise EmptyCorpusError(
            f"no token survives min_count={min_count} filtering")

    remap = np.cumsum(keep_word) - 1
    new_wids = remap[corpus.word_ids[keep_token]]
    new_pos = corpus.pos_classes[keep_token].copy()
    new_vecs = corpus.embeddings[keep_token].copy()

    kept_doc_ids, new_lengths, dropped = [], [], []
    for d in range(corpus.n_docs):
        sl = corpus.doc_slice(d)
        n_kept = int(keep_token[sl].sum())
        if n_kept == 0:
            dropped.append(int(corpus.doc_ids[d]))
        else:
            kept_doc_ids.append(corpus.doc_ids[d])
            new_lengths.append(n_kept)
    if dropped:
        log.warning("filter_vocabulary dropped %d empty document(s): %s",
                    len(dropped), dropped)

    offsets = np.zeros(len(kept_doc_ids) + 1, dtype=np.int64)
    np.cumsum(new_lengths, out=offsets[1:])
    surfaces = tuple(s for s, k in zip(corpus.vocabulary.surfaces, keep_word) if k)
    vocabulary = Vocabulary(surfaces, counts[keep_word].astype(np.int64))
    return Corpus(
        doc_ids=np.array(kept_doc_ids, dtype=np.uint64),
        doc_offsets=offsets,
        word_ids=new_wids,
        pos_classes=new_pos,
        embeddings=new_vecs,
        vocabulary=vocabulary,
        dim=corpus.dim,
        dropped_doc_ids=tuple(dropped),
    )


def generic_document_embedding(corpus: Corpus, doc_index: int) -> np.ndarray:
    """Unweighted mean of the document's noun/verb/adjective embeddings.

    Falls back to the all-token mean (with a warning) when the document has
    no content-word token, which happens for short reviews.
    """
    sl = corpus.doc_slice(doc_index)
    pos = corpus.pos_classes[sl]
    vecs = corpus.embeddings[sl]
    mask = (pos >= POS_NOUN) & (pos <= POS_ADJECTIVE)
    if not mask.any():
        log.warning("document %d has no content word; using all-token mean",
                    doc_index)
        return vecs.mean(axis=0)
    return vecs[mask].mean(axis=0)
