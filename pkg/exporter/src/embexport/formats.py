"""Writers for the topic-engine corpus interchange formats.

Embedding file (little-endian): magic "TPCL", version u32 = 1, r u32,
doc_count u64, token_count u64; per document: doc_id u64, n_tokens u32;
per token: word_id u32, pos_class u8, r float32 values.

Vocabulary: UTF-8 TSV ``word_id<TAB>surface<TAB>frequency`` with dense ids.
Labels: UTF-8 TSV ``doc_id<TAB>label``.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"TPCL"
VERSION = 1

POS_OTHER = 0
POS_NOUN = 1
POS_VERB = 2
POS_ADJECTIVE = 3

_HEADER = struct.Struct("<4sIIQQ")
_DOC_HEADER = struct.Struct("<QI")
_TOKEN_HEAD = struct.Struct("<IB")


def write_embedding_file(path, documents, dim: int) -> int:
    """documents: iterable of (doc_id, records) with records a list of
    (word_id, pos_class, vector). Returns the number of records written;
    the header token count always equals that number."""
    documents = [(doc_id, list(records)) for doc_id, records in documents]
    n_tokens = sum(len(records) for _, records in documents)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, len(documents), n_tokens))
        for doc_id, records in documents:
            if not records:
                raise ValueError(f"document {doc_id} has no records")
            fh.write(_DOC_HEADER.pack(doc_id, len(records)))
            for word_id, pos_class, vector in records:
                vec = np.asarray(vector, dtype="<f4")
                if vec.shape != (dim,):
                    raise ValueError(
                        f"vector of shape {vec.shape} does not match r={dim}")
                fh.write(_TOKEN_HEAD.pack(word_id, pos_class))
                fh.write(vec.tobytes())
    return n_tokens


def write_vocabulary(path, entries) -> None:
    """entries: list of (surface, frequency); the row index is the word id."""
    with open(path, "w", encoding="utf-8") as fh:
        for word_id, (surface, freq) in enumerate(entries):
            fh.write(f"{word_id}\t{surface}\t{freq}\n")


def write_labels(path, rows) -> None:
    """rows: iterable of (doc_id, label)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, label in rows:
            fh.write(f"{doc_id}\t{label}\n")
