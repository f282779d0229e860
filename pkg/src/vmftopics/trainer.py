"""Training loop: autoencoder pretraining, per-epoch E-step, minibatch
M-step of the joint objective lambda * L_clus + L_rec + L_pre under Adam.

A batch is batch_size documents; L_rec sums over the batch's documents
while L_pre and L_clus sum over all tokens of those documents using the
epoch's stored target distribution Q (a fixed target, never backpropagated
through). Topic rows are renormalized to unit norm after every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .attention import AttentionParams, init_attention, pool_document
from .autodiff import Adam, Tensor
from .corpus import POS_NOUN, POS_ADJECTIVE, Corpus, \
    generic_document_embedding
from .errors import DegenerateEncodingError, GradientCheckError, \
    ParameterError, TrainingError
from .latent import EPS, LatentModel, Mlp, decode, encode, init_mlp, \
    init_topics_spherical_kmeans, normalize_rows, target_distribution, \
    topic_posterior
from .seeding import substream

log = logging.getLogger(__name__)

ALL_PARTS = ("clus", "rec", "pre")


@dataclass
class TrainConfig:
    """All training hyperparameters plus the run seed.

    attention_content_only restricts the training-time document pooling to
    noun/verb/adjective tokens (reporting always pools over all retained
    tokens); hidden_dims describes the encoder, the decoder mirrors it.
    """

    k: int = 100
    r_prime: int = 100
    kappa: float = 10.0
    lambda_: float = 0.1
    epochs: int = 20
    pretrain_epochs: int = 10
    learning_rate: float = 5e-4
    batch_size: int = 32
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    grad_check_tolerance: float = 1e-4
    hidden_dims: tuple = (500, 500, 1000)
    attention_dim: int = 100
    attention_content_only: bool = False
    kmeans_max_iters: int = 100

    def validate(self, dim_in: int | None = None) -> None:
        if self.k < 2:
            raise ParameterError("k must be >= 2")
        if self.r_prime < 1:
            raise ParameterError("r_prime must be >= 1")
        if dim_in is not None and self.r_prime >= dim_in:
            raise ParameterError("r_prime must be smaller than the input dim")
        if self.kappa < 0:
            raise ParameterError("kappa must be nonnegative")
        if self.lambda_ < 0:
            raise ParameterError("lambda must be nonnegative")
        if self.epochs < 0 or self.pretrain_epochs < 0:
            raise ParameterError("epoch counts must be nonnegative")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if self.attention_dim < 1:
            raise ParameterError("attention_dim must be >= 1")
        if any(h < 1 for h in self.hidden_dims):
            raise ParameterError("hidden dims must be positive")
        if self.seed < 0:
            raise ParameterError("seed must be nonnegative")


@dataclass(frozen=True)
class LossBreakdown:
    clus: float
    rec: float
    pre: float
    total: float

    @classmethod
    def build(cls, clus: float, rec: float, pre: float,
              weight: float) -> "LossBreakdown":
        return cls(clus=clus, rec=rec, pre=pre,
                   total=weight * clus + rec + pre)

    def is_finite(self) -> bool:
        return all(np.isfinite(v) for v in (self.clus, self.rec, self.pre,
                                            self.total))


@dataclass
class TrainResult:
    model: LatentModel
    attention: AttentionParams
    history: list = field(default_factory=list)


def format_log_line(epoch: int, bd: LossBreakdown) -> str:
    """One training-log line: epoch, clus, rec, pre, total, tab-separated
    with 9 significant digits."""
    return (f"{epoch}\t{bd.clus:.9g}\t{bd.rec:.9g}\t{bd.pre:.9g}"
            f"\t{bd.total:.9g}")


# --- graph construction -------------------------------------------------

def _param_store(model: LatentModel, attention: AttentionParams | None):
    store = {}
    for prefix, mlp in (("encoder", model.encoder), ("decoder", model.decoder)):
        for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
            store[f"{prefix}.w{i}"] = Tensor(w, requires_grad=True)
            store[f"{prefix}.b{i}"] = Tensor(b, requires_grad=True)
    store["topics"] = Tensor(model.topics, requires_grad=True)
    if attention is not None:
        store["attention.W"] = Tensor(attention.W, requires_grad=True)
        store["attention.b"] = Tensor(attention.b, requires_grad=True)
        # column view so 2-D matmul applies; updates flow back to the vector
        store["attention.v"] = Tensor(attention.v.reshape(-1, 1),
                                      requires_grad=True)
    return store


def _mlp_graph(store, prefix: str, n_layers: int, x: Tensor) -> Tensor:
    out = x
    for i in range(n_layers):
        out = out @ store[f"{prefix}.w{i}"] + store[f"{prefix}.b{i}"]
        if i < n_layers - 1:
            out = out.relu()
    return out


def _normalize_rows_graph(x: Tensor) -> Tensor:
    sq = (x * x).sum(axis=1, keepdims=True)
    if (sq.data < EPS * EPS).any():
        raise DegenerateEncodingError("near-zero norm inside training graph")
    return x / sq.sqrt()


def _row_softmax_graph(logits: Tensor) -> Tensor:
    shift = Tensor(logits.data.max(axis=1, keepdims=True))
    e = (logits - shift).exp()
    return e / e.sum(axis=1, keepdims=True)


def _log_row_softmax_graph(logits: Tensor) -> Tensor:
    shift = Tensor(logits.data.max(axis=1, keepdims=True))
    z = logits - shift
    return z - z.exp().sum(axis=1, keepdims=True).log()


def _batch_token_indices(corpus: Corpus, doc_indices) -> np.ndarray:
    spans = [np.arange(corpus.doc_offsets[d], corpus.doc_offsets[d + 1])
             for d in doc_indices]
    return np.concatenate(spans)


def _attention_doc_rows(corpus: Corpus, doc_index: int,
                        content_only: bool) -> np.ndarray:
    sl = corpus.doc_slice(doc_index)
    vecs = corpus.embeddings[sl]
    if content_only:
        pos = corpus.pos_classes[sl]
        mask = (pos >= POS_NOUN) & (pos <= POS_ADJECTIVE)
        if mask.any():
            return vecs[mask]
    return vecs


def _objective_graph(store, model: LatentModel, corpus: Corpus, doc_indices,
                     Q: np.ndarray | None, config: TrainConfig,
                     parts=ALL_PARTS):
    """Build the loss graph for one batch of documents.

    Returns a dict with per-term scalar tensors and "total". When
    config.lambda_ is zero the clustering term is still evaluated for the
    log but excluded from the total.
    """
    n_enc = model.encoder.n_layers
    n_dec = model.decoder.n_layers
    token_idx = _batch_token_indices(corpus, doc_indices)
    H = Tensor(corpus.embeddings[token_idx])

    out = {}
    f_out = _mlp_graph(store, "encoder", n_enc, H)
    Zn = _normalize_rows_graph(f_out)

    if "pre" in parts:
        recon = _mlp_graph(store, "decoder", n_dec, Zn)
        diff = H - recon
        out["pre"] = (diff * diff).sum()

    needs_topics = "clus" in parts or "rec" in parts
    Tn = _normalize_rows_graph(store["topics"]) if needs_topics else None

    if "clus" in parts:
        if Q is None:
            raise ParameterError("clustering term needs the E-step targets")
        logits = (Zn @ Tn.transpose()) * model.kappa
        logp = _log_row_softmax_graph(logits)
        Qb = Tensor(Q[token_idx])
        out["clus"] = -(Qb * logp).sum()

    if "rec" in parts:
        g_topics = _mlp_graph(store, "decoder", n_dec, Tn)
        rec = None
        for d in doc_indices:
            Hd = Tensor(_attention_doc_rows(corpus, int(d),
                                            config.attention_content_only))
            scored = (Hd @ store["attention.W"].transpose()
                      + store["attention.b"]).tanh()
            a_logits = scored @ store["attention.v"]
            a_shift = Tensor(a_logits.data.max(axis=0, keepdims=True))
            a_exp = (a_logits - a_shift).exp()
            alpha = a_exp / a_exp.sum(axis=0, keepdims=True)
            h_d = alpha.transpose() @ Hd
            z_d = _normalize_rows_graph(_mlp_graph(store, "encoder", n_enc, h_d))
            p_d = _row_softmax_graph((z_d @ Tn.transpose()) * model.kappa)
            h_hat = p_d @ g_topics
            target = Tensor(generic_document_embedding(corpus, int(d))[None, :])
            diff = h_hat - target
            term = (diff * diff).sum()
            rec = term if rec is None else rec + term
        out["rec"] = rec

    terms = []
    if "clus" in parts and config.lambda_ != 0.0:
        terms.append(out["clus"] * config.lambda_)
    if "rec" in parts:
        terms.append(out["rec"])
    if "pre" in parts:
        terms.append(out["pre"])
    if not terms:
        raise ParameterError("objective needs at least one active term")
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    out["total"] = total
    return out


def _breakdown_from_graph(graph, config: TrainConfig) -> LossBreakdown:
    clus = float(graph["clus"].data) if "clus" in graph else 0.0
    rec = float(graph["rec"].data) if "rec" in graph else 0.0
    pre = float(graph["pre"].data) if "pre" in graph else 0.0
    return LossBreakdown.build(clus, rec, pre, config.lambda_)


def _renormalize_topics(model: LatentModel) -> None:
    norms = np.linalg.norm(model.topics, axis=1, keepdims=True)
    if (norms < EPS).any():
        raise TrainingError("a topic vector collapsed to zero norm")
    model.topics /= norms


def _doc_batches(order: np.ndarray, batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


# --- public losses (reference evaluation path) --------------------------

def clustering_loss(P: np.ndarray, Q: np.ndarray) -> float:
    """Cross entropy -sum_i sum_k Q[i,k] log P[i,k]; Q is a fixed target.

    Zero P entries under positive Q mass are floored at 1e-12 and counted
    in a warning.
    """
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if P.shape != Q.shape:
        raise ParameterError("P and Q must have the same shape")
    floored = np.maximum(P, EPS)
    n_floored = int(((P < EPS) & (Q > 0)).sum())
    if n_floored:
        log.warning("clustering_loss floored %d zero-posterior entries",
                    n_floored)
    return float(-(Q * np.log(floored)).sum())


def preservation_loss(model: LatentModel, token_batch: np.ndarray) -> float:
    """sum ||h - g(f(h))||^2 over the batch tokens."""
    X = np.atleast_2d(np.asarray(token_batch, dtype=np.float64))
    if X.shape[0] < 1:
        raise ParameterError("token batch is empty")
    recon = decode(model, encode(model, X))
    return float(((X - recon) ** 2).sum())


def reconstruction_loss(model: LatentModel, attention: AttentionParams,
                        corpus: Corpus, doc_batch) -> float:
    """Topical document reconstruction: each pooled document embedding is
    rebuilt as the posterior-weighted sum of decoded topic vectors and
    compared against the constant content-word mean."""
    doc_batch = list(doc_batch)
    if not doc_batch:
        raise ParameterError("document batch is empty")
    g_topics = decode(model, normalize_rows(model.topics))
    total = 0.0
    for d in doc_batch:
        h_d = pool_document(attention, corpus.doc_embeddings(d))
        z_d = encode(model, h_d)
        p_d = topic_posterior(z_d[None, :], model.topics, model.kappa)
        h_hat = (p_d @ g_topics)[0]
        target = generic_document_embedding(corpus, d)
        total += float(((h_hat - target) ** 2).sum())
    return total


# --- training -----------------------------------------------------------

def e_step(model: LatentModel, corpus: Corpus) -> np.ndarray:
    """Encode every token, take the vMF posterior and sharpen it with
    corpus-global column sums. The result is read-only for the epoch."""
    Z = encode(model, corpus.embeddings)
    P = topic_posterior(Z, model.topics, model.kappa)
    Q = target_distribution(P)
    Q.setflags(write=False)
    return Q


def pretrain(corpus: Corpus, config: TrainConfig) -> LatentModel:
    """Train f and g on the preservation loss alone, then place the topic
    matrix with spherical k-means over the encoded tokens."""
    config.validate(corpus.dim)
    if corpus.n_tokens < config.k:
        raise ParameterError("corpus has fewer tokens than topics")
    rng = substream(config.seed, "model-init")
    f_dims = (corpus.dim, *config.hidden_dims, config.r_prime)
    g_dims = (config.r_prime, *tuple(reversed(config.hidden_dims)), corpus.dim)
    encoder = init_mlp(f_dims, rng)
    decoder = init_mlp(g_dims, rng)

    stub = LatentModel(encoder, decoder,
                       topics=np.eye(1, config.r_prime), kappa=config.kappa)
    store = _param_store(stub, attention=None)
    adam = Adam(store.values(), lr=config.learning_rate,
                beta1=config.adam_beta1, beta2=config.adam_beta2,
                eps=config.adam_epsilon)
    shuffle_rng = substream(config.seed, "pretrain-shuffle")
    for epoch in range(config.pretrain_epochs):
        order = shuffle_rng.permutation(corpus.n_docs)
        for bi, batch in enumerate(_doc_batches(order, config.batch_size)):
            graph = _objective_graph(store, stub, corpus, batch, None,
                                     config, parts=("pre",))
            value = float(graph["total"].data)
            if not np.isfinite(value):
                raise TrainingError("pretraining loss is non-finite",
                                    epoch=epoch, batch=bi)
            adam.zero_grad()
            graph["total"].backward()
            adam.step()

    Z = encode(stub, corpus.embeddings)
    topics = init_topics_spherical_kmeans(Z, config.k, seed=config.seed,
                                          max_iters=config.kmeans_max_iters)
    return LatentModel(encoder, decoder, topics=topics, kappa=config.kappa)


def train(corpus: Corpus, config: TrainConfig,
          epoch_callback=None) -> TrainResult:
    """Full training per the joint objective; returns the final model,
    attention parameters and the per-epoch loss history."""
    model = pretrain(corpus, config)
    attention = init_attention(config.attention_dim, corpus.dim,
                               substream(config.seed, "attention-init"))
    store = _param_store(model, attention)
    adam = Adam(store.values(), lr=config.learning_rate,
                beta1=config.adam_beta1, beta2=config.adam_beta2,
                eps=config.adam_epsilon)
    shuffle_rng = substream(config.seed, "epoch-shuffle")
    history = []
    for epoch in range(config.epochs):
        Q = e_step(model, corpus)
        order = shuffle_rng.permutation(corpus.n_docs)
        acc = np.zeros(3)
        for bi, batch in enumerate(_doc_batches(order, config.batch_size)):
            graph = _objective_graph(store, model, corpus, batch, Q, config)
            bd = _breakdown_from_graph(graph, config)
            if not bd.is_finite():
                raise TrainingError("non-finite training loss",
                                    epoch=epoch, batch=bi, state=bd)
            adam.zero_grad()
            graph["total"].backward()
            adam.step()
            _renormalize_topics(model)
            acc += (bd.clus, bd.rec, bd.pre)
        epoch_bd = LossBreakdown.build(acc[0], acc[1], acc[2], config.lambda_)
        history.append(epoch_bd)
        if epoch_callback is not None:
            epoch_callback(epoch, epoch_bd)
    return TrainResult(model=model, attention=attention, history=history)


def gradient_check(model: LatentModel, attention: AttentionParams,
                   corpus: Corpus, config: TrainConfig,
                   parts=ALL_PARTS, step: float = 1e-5) -> float:
    """Compare analytic gradients of the batch objective against central
    finite differences for every parameter entry; returns the max relative
    error (absolute error where both gradients are near zero).

    Only meant for toy dimensions (r <= 8, r' <= 4, K <= 3).
    """
    if model.dim_in > 8 or model.dim_latent > 4 or model.n_topics > 3:
        raise ParameterError("gradient_check expects toy dimensions")
    Q = e_step(model, corpus) if "clus" in parts else None
    doc_indices = np.arange(corpus.n_docs)
    store = _param_store(model, attention)

    graph = _objective_graph(store, model, corpus, doc_indices, Q, config,
                             parts=parts)
    for t in store.values():
        t.grad = None
    graph["total"].backward()
    analytic = {name: (t.grad.copy() if t.grad is not None
                       else np.zeros_like(t.data))
                for name, t in store.items()}

    def total_value() -> float:
        g = _objective_graph(store, model, corpus, doc_indices, Q, config,
                             parts=parts)
        return float(g["total"].data)

    worst, worst_param = 0.0, None
    for name, t in store.items():
        flat = t.data.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = total_value()
            flat[i] = orig - step
            down = total_value()
            flat[i] = orig
            fd = (up - down) / (2.0 * step)
            a = grad_flat[i]
            denom = max(abs(a), abs(fd))
            err = abs(a - fd) if denom < 1e-6 else abs(a - fd) / denom
            if err > worst:
                worst, worst_param = err, f"{name}[{i}]"
    if worst > config.grad_check_tolerance:
        raise GradientCheckError(
            f"gradient mismatch {worst:.3e} at {worst_param}",
            parameter=worst_param, error=worst)
    return worst
