"""Miniature randomly-initialized encoder for offline smoke runs.

Builds a whole-word WordPiece vocabulary from a corpus and pairs it with
a small randomly initialized encoder saved in the standard layout, so
the training and prediction paths run unchanged where the full-size
pretrained weights are unavailable (air-gapped machines, CI).
"""
from __future__ import annotations

import re
from pathlib import Path

from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import BertConfig, BertForSequenceClassification, PreTrainedTokenizerFast

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def build_tiny_encoder(
    out_dir: str | Path,
    texts: list[str],
    hidden_size: int = 48,
    num_layers: int = 2,
    num_heads: int = 2,
    max_position: int = 128,
    seed: int = 0,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    words = sorted({w.lower() for text in texts for w in _WORD_RE.findall(text)})
    vocab = {t: i for i, t in enumerate(list(SPECIAL_TOKENS) + words)}
    wordpiece = models.WordPiece(vocab, unk_token="[UNK]")
    tk = Tokenizer(wordpiece)
    tk.normalizer = normalizers.BertNormalizer(lowercase=True)
    tk.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tk.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=tk,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=max_position,
    )
    tokenizer.save_pretrained(out_dir)

    import torch

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 4,
        max_position_embeddings=max_position,
        num_labels=2,
        pad_token_id=vocab["[PAD]"],
    )
    BertForSequenceClassification(config).save_pretrained(out_dir)
    return out_dir
