"""Spherical latent space: encoder/decoder MLPs, vMF topic posteriors,
target-distribution sharpening and spherical k-means topic initialization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEncodingError, ParameterError
from .seeding import substream

EPS = 1e-12


@dataclass
class Mlp:
    """Plain feed-forward net: ReLU hidden layers, identity output.

    weights[i] has shape (n_in, n_out); the forward pass is
    x -> relu(x W0 + b0) -> ... -> x W_last + b_last.
    """

    weights: list
    biases: list

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> tuple:
        return tuple([self.weights[0].shape[0]] +
                     [w.shape[1] for w in self.weights])


def init_mlp(dims, rng: np.random.Generator) -> Mlp:
    """Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
    if len(dims) < 2:
        raise ParameterError("an MLP needs at least input and output dims")
    weights, biases = [], []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return Mlp(weights, biases)


def mlp_forward(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    out = np.atleast_2d(np.asarray(x, dtype=np.float64))
    last = mlp.n_layers - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        out = out @ w + b
        if i < last:
            out = np.maximum(out, 0.0)
    return out


@dataclass
class LatentModel:
    """Encoder f, decoder g, unit-norm topic matrix and shared concentration."""

    encoder: Mlp            # r -> ... -> r'
    decoder: Mlp            # r' -> ... -> r
    topics: np.ndarray      # (K, r'), rows unit-norm
    kappa: float

    @property
    def dim_in(self) -> int:
        return self.encoder.dims[0]

    @property
    def dim_latent(self) -> int:
        return self.encoder.dims[-1]

    @property
    def n_topics(self) -> int:
        return self.topics.shape[0]


def normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    bad = np.nonzero(norms[:, 0] < EPS)[0]
    if bad.size:
        raise DegenerateEncodingError(
            f"row {int(bad[0])} has near-zero norm and cannot be normalized")
    return x / norms


def encode(model: LatentModel, h: np.ndarray) -> np.ndarray:
    """Project onto the unit sphere of the latent space:
    z = f_raw(h) / ||f_raw(h)||."""
    h = np.asarray(h, dtype=np.float64)
    single = h.ndim == 1
    z = normalize_rows(mlp_forward(model.encoder, h))
    return z[0] if single else z


def decode(model: LatentModel, z: np.ndarray) -> np.ndarray:
    """Plain forward pass back to the embedding space; no normalization."""
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    out = mlp_forward(model.decoder, z)
    return out[0] if single else out


def topic_posterior(Z: np.ndarray, topics: np.ndarray,
                    kappa: float) -> np.ndarray:
    """Row-wise posterior over topics under the shared-kappa vMF mixture:
    P[i, k] = exp(kappa cos(z_i, t_k)) / sum_k' exp(kappa cos(z_i, t_k')).

    The vMF normalization constant cancels between numerator and denominator
    and is never computed. Cosines are taken on explicitly renormalized rows,
    so the result is invariant to positive rescaling of either side.
    """
    if kappa < 0:
        raise ParameterError("kappa must be nonnegative")
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    logits = kappa * (normalize_rows(Z) @ normalize_rows(topics).T)
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / np.maximum(e.sum(axis=1, keepdims=True), EPS)


def target_distribution(P: np.ndarray) -> np.ndarray:
    """Squared-and-frequency-normalized sharpening of a posterior matrix:
    Q[i, k] = (P[i, k]^2 / s_k) / sum_k' (P[i, k']^2 / s_k'),
    s_k = sum_i P[i, k].

    Column sums are floored at 1e-12 so empty columns never divide by zero.
    """
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    if P.shape[0] < 1:
        raise ParameterError("target_distribution needs at least one row")
    s = np.maximum(P.sum(axis=0), EPS)
    w = P * P / s
    return w / w.sum(axis=1, keepdims=True)


def init_topics_spherical_kmeans(Z: np.ndarray, k: int, seed: int = 0,
                                 max_iters: int = 100) -> np.ndarray:
    """Spherical k-means on unit-normalized rows of Z.

    Centroids start from greedy farthest-point selection (seeded random
    first pick), assignment is by maximum cosine, centroids are normalized
    means of their members, and iteration stops at an assignment fixpoint
    or after max_iters. An emptied cluster is reseeded with the point
    farthest (in cosine) from its stale centroid.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    n = Z.shape[0]
    if k < 1:
        raise ParameterError("k must be >= 1")
    if n < k:
        raise ParameterError(f"need at least k={k} points, got {n}")
    Zn = normalize_rows(Z)
    rng = substream(seed, "spherical-kmeans")

    centroids = np.empty((k, Z.shape[1]))
    centroids[0] = Zn[int(rng.integers(n))]
    best_sim = Zn @ centroids[0]
    for j in range(1, k):
        centroids[j] = Zn[int(np.argmin(best_sim))]
        best_sim = np.maximum(best_sim, Zn @ centroids[j])

    assign = None
    for _ in range(max_iters):
        sims = Zn @ centroids.T
        new_assign = np.argmax(sims, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = Zn[assign == j]
            mean = members.mean(axis=0) if len(members) else np.zeros(Z.shape[1])
            norm = np.linalg.norm(mean)
            if norm < EPS:
                # empty (or perfectly antipodal) cluster: grab the point
                # farthest in cosine from the stale centroid
                centroids[j] = Zn[int(np.argmin(Zn @ centroids[j]))]
            else:
                centroids[j] = mean / norm
    return centroids


def spherical_kmeans_objective(Z: np.ndarray, centroids: np.ndarray) -> float:
    """Sum of cosine similarities of each point to its assigned centroid."""
    sims = normalize_rows(np.atleast_2d(Z)) @ centroids.T
    return float(sims.max(axis=1).sum())
