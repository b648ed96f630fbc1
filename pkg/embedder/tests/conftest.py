"""Fixtures: a tiny local BERT checkpoint so tests never touch a model hub."""

from __future__ import annotations

import json

import pytest


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-bert")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list("abcdefghijklmnopqrstuvwxyz")
    vocab += ["##" + letter for letter in "abcdefghijklmnopqrstuvwxyz"]
    vocab += [".", ",", "!", "?", "the", "cat", "sat", "dog", "ran",
              "##s", "##ing", "##ed"]
    (directory / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(
        vocab_file=str(directory / "vocab.txt"), do_lower_case=True
    )
    tokenizer.save_pretrained(directory)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=48,
    )
    torch.manual_seed(7)
    BertModel(config).save_pretrained(directory)
    return str(directory)


@pytest.fixture()
def chunk_file(tmp_path) -> str:
    rows = [
        {"chunk_id": "c-0", "text": "The cat sat on the mat.", "span": [0, 23]},
        {"chunk_id": "c-1", "text": "A dog ran fast, chasing the red ball!",
         "span": [24, 62]},
        {"chunk_id": "c-2", "text": "Rain fell quietly over the green hills.",
         "span": [63, 102]},
    ]
    path = tmp_path / "chunks.jsonl"
    path.write_text(
        "".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8"
    )
    return str(path)
