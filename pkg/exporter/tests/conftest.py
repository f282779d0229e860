"""Builds a tiny deterministic BERT (random weights, handwritten WordPiece
vocabulary) on disk, so export tests run without any network or model hub."""

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, \
    processors
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

PIECES = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "good", "food", "the", "was", "really", "service", "bad", "great",
    "price", "friendly", "staff", "pizza", "crust", "crispy", "salad",
    "fresh", "tast", "##y", "##iness", "delicious", "cozy", "place",
    "atmosphere", "un", "##friend", "##ly", "organic", "greens", "with",
]


@pytest.fixture(scope="session")
def tiny_bert(tmp_path_factory):
    """Save a 2-layer, 32-dim BERT plus WordPiece tokenizer to a directory
    and return the path."""
    out = tmp_path_factory.mktemp("tinybert")
    vocab = {piece: i for i, piece in enumerate(PIECES)}
    tok = Tokenizer(models.WordPiece(vocab, unk_token="[UNK]",
                                     max_input_chars_per_word=100))
    tok.normalizer = normalizers.BertNormalizer(lowercase=True)
    tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])])
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        model_max_length=64)
    fast.save_pretrained(out)

    torch.manual_seed(1234)
    config = BertConfig(vocab_size=len(PIECES), hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=64)
    model = BertModel(config)
    model.eval()
    model.save_pretrained(out)
    return str(out)
