"""Corpus exporter: masked-LM token embeddings and synthetic planted
clusters, written in the topic engine's interchange formats."""

__version__ = "0.1.0"

from .formats import write_embedding_file, write_labels, write_vocabulary
from .plm import ExportJob, export, extract_words
from .synth import SynthSpec, export_synthetic, sample_vmf
from .tagging import coarse_pos
