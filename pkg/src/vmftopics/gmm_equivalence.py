"""Numeric check that a masked-LM softmax over token logits equals the
Bayes posterior of a particular |V|-component Gaussian mixture with shared
covariance: means mu_i = Sigma e_i and mixture weights
pi_i = softmax(0.5 e_i' Sigma e_i + b_i).

Everything is computed in the log domain (Cholesky factor of Sigma,
log-sum-exp normalization) so the identity holds to tight tolerance in
double precision at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, VerificationError
from .seeding import substream


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


@dataclass
class GmmSpec:
    token_embeddings: np.ndarray   # (V, r)
    biases: np.ndarray             # (V,)
    covariance: np.ndarray         # (r, r) symmetric positive definite
    chol: np.ndarray               # lower Cholesky factor of covariance
    means: np.ndarray              # (V, r), mu_i = covariance @ e_i
    log_weights: np.ndarray        # (V,), log pi

    @property
    def vocab_size(self) -> int:
        return self.token_embeddings.shape[0]


def build_gmm(e: np.ndarray, b: np.ndarray, sigma: np.ndarray) -> GmmSpec:
    e = np.atleast_2d(np.asarray(e, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    sigma = np.asarray(sigma, dtype=np.float64)
    if e.shape[0] != b.shape[0]:
        raise ParameterError("embedding rows and bias length disagree")
    if sigma.shape != (e.shape[1], e.shape[1]):
        raise ParameterError("covariance shape disagrees with embeddings")
    if np.abs(sigma - sigma.T).max() > 1e-12:
        raise ParameterError("covariance must be symmetric")
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ParameterError("covariance is not positive definite")
    means = e @ sigma.T
    weight_logits = 0.5 * np.einsum("ij,jk,ik->i", e, sigma, e) + b
    return GmmSpec(token_embeddings=e, biases=b, covariance=sigma, chol=chol,
                   means=means, log_weights=_log_softmax(weight_logits))


def gmm_posterior(gmm: GmmSpec, h: np.ndarray) -> np.ndarray:
    """p(w_i | h) via Bayes rule on Gaussian log densities."""
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    r = h.shape[0]
    diff = h - gmm.means                                   # (V, r)
    solved = np.linalg.solve(gmm.chol, diff.T)             # (r, V)
    quad = (solved * solved).sum(axis=0)
    log_det = 2.0 * np.log(np.diag(gmm.chol)).sum()
    log_dens = -0.5 * (quad + r * np.log(2.0 * np.pi) + log_det)
    log_post = _log_softmax(log_dens + gmm.log_weights)
    return np.exp(log_post)


def mlm_softmax(e: np.ndarray, b: np.ndarray, h: np.ndarray) -> np.ndarray:
    """softmax over i of (e_i . h + b_i)."""
    e = np.atleast_2d(np.asarray(e, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if e.shape[0] != b.shape[0] or e.shape[1] != h.shape[0]:
        raise ParameterError("shape mismatch between e, b and h")
    return np.exp(_log_softmax(e @ h + b))


def verify_equivalence(seed: int = 0, r: int = 8, vocab_size: int = 32,
                       trials: int = 100,
                       tolerance: float = 1e-9) -> float:
    """Draw random (e, b, Sigma, h) instances and return the maximum
    absolute deviation between the two posterior routes across all trials
    and components. Raises VerificationError above tolerance.
    """
    if r > 16 or vocab_size > 64:
        raise ParameterError("verify_equivalence expects desk-scale dims")
    if r < 1 or vocab_size < 1 or trials < 1:
        raise ParameterError("r, vocab_size and trials must be >= 1")
    rng = substream(seed, "gmm-equivalence")
    worst = 0.0
    for _ in range(trials):
        e = rng.standard_normal((vocab_size, r))
        b = rng.standard_normal(vocab_size)
        a = rng.standard_normal((r, r))
        sigma = a.T @ a + np.eye(r)
        h = rng.standard_normal(r)
        gmm = build_gmm(e, b, sigma)
        deviation = np.abs(gmm_posterior(gmm, h) - mlm_softmax(e, b, h)).max()
        worst = max(worst, float(deviation))
    if worst > tolerance:
        raise VerificationError(
            f"posterior routes deviate by {worst:.3e} (seed {seed})",
            deviation=worst, seed=seed)
    return worst
