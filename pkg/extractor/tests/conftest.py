import warnings

import pytest
import torch

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "he", "him", "his", "man", "boy",
    "she", "her", "hers", "woman", "girl",
    "career", "office", "salary", "business",
    "home", "family", "children", "wedding",
    "ing", "##ing", "##ed",
    ".", ",", "!",
    "work", "day", "people",
]


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory):
    """Tiny encoder-decoder translation-style checkpoint built offline."""
    from transformers import (
        BertConfig,
        BertTokenizer,
        EncoderDecoderConfig,
        EncoderDecoderModel,
    )

    base = tmp_path_factory.mktemp("toy_model")
    vocab_file = base / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))

    def bert_cfg(**kw):
        return BertConfig(
            vocab_size=len(VOCAB),
            hidden_size=8,
            num_hidden_layers=1,
            num_attention_heads=2,
            intermediate_size=16,
            max_position_embeddings=16,
            **kw,
        )

    config = EncoderDecoderConfig.from_encoder_decoder_configs(
        bert_cfg(), bert_cfg(is_decoder=True, add_cross_attention=True)
    )
    torch.manual_seed(1234)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = EncoderDecoderModel(config=config)
        checkpoint = base / "checkpoint"
        model.save_pretrained(checkpoint)
        tokenizer.save_pretrained(checkpoint)
    return checkpoint


@pytest.fixture(scope="session")
def encoder_only_checkpoint(tmp_path_factory):
    from transformers import BertConfig, BertModel, BertTokenizer

    base = tmp_path_factory.mktemp("toy_encoder")
    vocab_file = base / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))
    torch.manual_seed(99)
    model = BertModel(
        BertConfig(
            vocab_size=len(VOCAB),
            hidden_size=4,
            num_hidden_layers=1,
            num_attention_heads=2,
            intermediate_size=8,
            max_position_embeddings=16,
        )
    )
    checkpoint = base / "checkpoint"
    model.save_pretrained(checkpoint)
    tokenizer.save_pretrained(checkpoint)
    return checkpoint
