"""Topic discovery by joint latent-space learning and vMF-mixture
clustering over pretrained-language-model token embeddings."""

__version__ = "0.1.0"

from .attention import AttentionParams, attention_weights, init_attention, \
    pool_document
from .corpus import Corpus, Vocabulary, filter_vocabulary, \
    generic_document_embedding, load_corpus, write_corpus
from .latent import LatentModel, Mlp, decode, encode, \
    init_topics_spherical_kmeans, target_distribution, topic_posterior
from .trainer import LossBreakdown, TrainConfig, TrainResult, \
    clustering_loss, e_step, gradient_check, pretrain, preservation_loss, \
    reconstruction_loss, train
