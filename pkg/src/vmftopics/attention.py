"""Learnable attention over a document's tokens.

Each token embedding h_i is scored by tanh(W h_i + b) . v; the softmax of
the scores weights the tokens into one document embedding that lives in the
same space as the word embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError


@dataclass
class AttentionParams:
    W: np.ndarray  # (d_a, r)
    b: np.ndarray  # (d_a,)
    v: np.ndarray  # (d_a,)

    @property
    def dim(self) -> int:
        return self.W.shape[0]


def init_attention(dim_attention: int, dim_embedding: int,
                   rng: np.random.Generator) -> AttentionParams:
    """Random init, uniform in [-1/sqrt(r), 1/sqrt(r)]."""
    if dim_attention < 1:
        raise ParameterError("attention dimension must be >= 1")
    bound = 1.0 / np.sqrt(dim_embedding)
    return AttentionParams(
        W=rng.uniform(-bound, bound, size=(dim_attention, dim_embedding)),
        b=rng.uniform(-bound, bound, size=dim_attention),
        v=rng.uniform(-bound, bound, size=dim_attention),
    )


def attention_logits(params: AttentionParams, H: np.ndarray) -> np.ndarray:
    return np.tanh(H @ params.W.T + params.b) @ params.v


def attention_weights(params: AttentionParams, H: np.ndarray) -> np.ndarray:
    """Softmax attention over the rows of H (one document's tokens).

    Computed with max-logit subtraction; entries are strictly positive and
    sum to 1.
    """
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    if H.shape[0] < 1:
        raise ParameterError("attention needs at least one token")
    logits = attention_logits(params, H)
    bad = np.nonzero(~np.isfinite(logits))[0]
    if bad.size:
        raise NumericError(f"non-finite attention logit at token {int(bad[0])}")
    e = np.exp(logits - logits.max())
    return e / e.sum()


def pool_document(params: AttentionParams, H: np.ndarray) -> np.ndarray:
    """Attention-weighted average of the token embeddings; lies in the
    convex hull of the rows of H."""
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    return attention_weights(params, H) @ H
