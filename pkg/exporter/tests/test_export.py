"""Masked-LM export against a tiny local model: record structure, subword
merging, chunking, determinism."""

import struct

import numpy as np
import pytest
import torch
from transformers import AutoModel, AutoTokenizer

from embexport.plm import ExportJob, export, extract_words


def run_export(tmp_path, tiny_bert, text, tag="out", **kw):
    src = tmp_path / f"{tag}.txt"
    src.write_text(text, encoding="utf-8")
    out_dir = tmp_path / tag
    out_dir.mkdir()
    job = ExportJob(input_path=str(src), model=tiny_bert,
                    out_embeddings=str(out_dir / "embeddings.bin"),
                    out_vocab=str(out_dir / "vocab.tsv"), **kw)
    stats = export(job)
    return out_dir, stats


def read_header(path):
    return struct.unpack("<4sIIQQ", path.read_bytes()[:28])


def test_extract_words():
    assert extract_words("Good food, really!") == ["good", "food", "really"]
    assert extract_words("it's fine") == ["it's", "fine"]
    assert extract_words("123 !!") == []


def test_two_word_line(tmp_path, tiny_bert):
    out_dir, stats = run_export(tmp_path, tiny_bert, "good food\n")
    assert stats == {"documents": 1, "tokens": 2, "words": 2, "dim": 32,
                     "skipped": 0}
    magic, version, dim, docs, tokens = read_header(out_dir / "embeddings.bin")
    assert (magic, version, dim, docs, tokens) == (b"TPCL", 1, 32, 1, 2)


def test_rerun_byte_identical(tmp_path, tiny_bert):
    text = "good food was really great\nthe service was friendly\n"
    a, _ = run_export(tmp_path, tiny_bert, text, tag="a")
    b, _ = run_export(tmp_path, tiny_bert, text, tag="b")
    assert (a / "embeddings.bin").read_bytes() == \
        (b / "embeddings.bin").read_bytes()
    assert (a / "vocab.tsv").read_bytes() == (b / "vocab.tsv").read_bytes()


def test_subword_merge_is_piece_mean(tmp_path, tiny_bert):
    # "tasty" splits into "tast" + "##y"; its record must equal the mean of
    # the two piece vectors from a manual forward pass
    out_dir, stats = run_export(tmp_path, tiny_bert, "tasty\n")
    assert stats["tokens"] == 1

    tokenizer = AutoTokenizer.from_pretrained(tiny_bert)
    model = AutoModel.from_pretrained(tiny_bert)
    model.eval()
    enc = tokenizer(["tasty"], is_split_into_words=True, return_tensors="pt")
    assert enc["input_ids"].shape[1] == 4  # CLS + 2 pieces + SEP
    with torch.no_grad():
        hidden = model(**enc, output_hidden_states=True).hidden_states[-1][0]
    expected = hidden[1:3].double().mean(axis=0).numpy().astype(np.float32)

    blob = (out_dir / "embeddings.bin").read_bytes()
    vec = np.frombuffer(blob, dtype="<f4", count=32, offset=28 + 12 + 5)
    np.testing.assert_allclose(vec, expected, atol=1e-6)


def test_three_piece_word_single_record(tmp_path, tiny_bert):
    # "unfriendly" splits into "un" + "##friend" + "##ly"; one record whose
    # vector is the mean of the three piece vectors
    out_dir, stats = run_export(tmp_path, tiny_bert, "unfriendly\n")
    assert stats["tokens"] == 1

    tokenizer = AutoTokenizer.from_pretrained(tiny_bert)
    model = AutoModel.from_pretrained(tiny_bert)
    model.eval()
    enc = tokenizer(["unfriendly"], is_split_into_words=True,
                    return_tensors="pt")
    assert enc["input_ids"].shape[1] == 5  # CLS + 3 pieces + SEP
    with torch.no_grad():
        hidden = model(**enc, output_hidden_states=True).hidden_states[-1][0]
    expected = hidden[1:4].double().mean(axis=0).numpy().astype(np.float32)
    blob = (out_dir / "embeddings.bin").read_bytes()
    vec = np.frombuffer(blob, dtype="<f4", count=32, offset=28 + 12 + 5)
    np.testing.assert_allclose(vec, expected, atol=1e-6)


def test_special_tokens_never_exported(tmp_path, tiny_bert):
    text = "the staff was friendly\n"
    out_dir, stats = run_export(tmp_path, tiny_bert, text)
    assert stats["tokens"] == len(extract_words(text))


def test_empty_line_skipped_with_log(tmp_path, tiny_bert, caplog):
    import logging
    with caplog.at_level(logging.WARNING):
        out_dir, stats = run_export(tmp_path, tiny_bert,
                                    "good food\n...\nfresh salad\n")
    assert stats["documents"] == 2
    assert stats["skipped"] == 1
    assert "skipped" in caplog.text


def test_long_document_chunked_without_loss(tmp_path, tiny_bert):
    words = ["good", "food", "pizza", "salad", "fresh", "crispy"] * 20
    out_chunked, stats = run_export(tmp_path, tiny_bert, " ".join(words) + "\n",
                                    tag="chunked", max_seq_length=16)
    assert stats["documents"] == 1
    assert stats["tokens"] == len(words)


def test_chunk_boundaries_respect_words(tmp_path, tiny_bert):
    # a multi-piece word near the budget boundary must move whole to the
    # next chunk; every word still yields exactly one record
    words = ["good"] * 12 + ["tasty"] + ["food"] * 5
    _, stats = run_export(tmp_path, tiny_bert, " ".join(words) + "\n",
                          tag="boundary", max_seq_length=16)
    assert stats["tokens"] == len(words)


def test_vocabulary_frequencies_match_counts(tmp_path, tiny_bert):
    out_dir, _ = run_export(tmp_path, tiny_bert,
                            "good good food\nfood good\n")
    rows = (out_dir / "vocab.tsv").read_text().splitlines()
    table = {line.split("\t")[1]: int(line.split("\t")[2]) for line in rows}
    assert table == {"good": 3, "food": 2}


def test_all_lines_empty_is_error(tmp_path, tiny_bert):
    with pytest.raises(ValueError):
        run_export(tmp_path, tiny_bert, "???\n!!!\n")
