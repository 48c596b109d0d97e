"""Dump a pretrained model's static input-embedding table to word2vec text.

The static table (not contextual encoder states) is extracted because
word-level bias metrics consume one vector per word, and static tables
are deterministic and cheap to produce.  Subword marker characters are
stripped from tokens; fragments are kept verbatim after stripping and
counted in the manifest so downstream out-of-vocabulary drops are
explainable.  Contextual extraction is possible future work.

Output format (consumed by the bias toolkit and common vector tools):
line 1 is ``<V> <m>``; each following line is ``<token> <c1> ... <cm>``,
single-space separated, UTF-8, LF endings, shortest round-trip decimal
components.  A JSON manifest is written next to the output file.
"""

from __future__ import annotations

import argparse
import json
import sys
import unicodedata
from dataclasses import asdict, dataclass, field
from pathlib import Path

SIDES = ("source_language", "target_language")
TOKEN_FILTERS = ("all", "word_like_only")

# wordpiece continuation, sentencepiece word-start, byte-BPE space/newline
_MARKER_PREFIXES = ("##", "▁", "Ġ", "Ċ")
_MARKER_SUFFIXES = ("</w>",)


@dataclass
class ExtractionManifest:
    model_reference: str
    side: str
    vocabulary_size: int
    dimension: int
    token_filter: str
    output_path: str
    coverage: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(asdict(self), sort_keys=True, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def manifest_path(output_path: str | Path) -> Path:
    return Path(str(output_path) + ".manifest.json")


def _strip_markers(token: str) -> tuple[str, bool]:
    stripped = token
    for prefix in _MARKER_PREFIXES:
        if stripped.startswith(prefix):
            stripped = stripped[len(prefix):]
    for suffix in _MARKER_SUFFIXES:
        if stripped.endswith(suffix):
            stripped = stripped[: -len(suffix)]
    return stripped, stripped != token


def _is_special(token: str, special_tokens: set[str]) -> bool:
    if token in special_tokens:
        return True
    return (token.startswith("<") and token.endswith(">")) or (
        token.startswith("[") and token.endswith("]")
    )


def _is_pure_punctuation(token: str) -> bool:
    return all(unicodedata.category(ch)[0] in ("P", "S") for ch in token)


def _load_model_and_tokenizer(model_reference: str):
    from transformers import AutoModel, AutoModelForSeq2SeqLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_reference)
    except Exception as exc:
        raise RuntimeError(f"cannot load tokenizer from {model_reference!r}: {exc}") from exc
    model = None
    errors = []
    for loader in (AutoModelForSeq2SeqLM, AutoModel):
        try:
            model = loader.from_pretrained(model_reference)
            break
        except Exception as exc:  # try the next loader
            errors.append(f"{loader.__name__}: {exc}")
    if model is None:
        raise RuntimeError(
            f"cannot load model from {model_reference!r}: " + "; ".join(errors)
        )
    return model, tokenizer


def _embedding_matrix(model, side: str):
    is_encoder_decoder = bool(getattr(model.config, "is_encoder_decoder", False))
    if side == "source_language":
        if is_encoder_decoder:
            return model.get_encoder().get_input_embeddings().weight
        return model.get_input_embeddings().weight
    if is_encoder_decoder:
        return model.get_decoder().get_input_embeddings().weight
    raise RuntimeError(
        "model has no decoder: target_language side is unavailable for "
        f"{type(model).__name__}"
    )


def extract_static_embeddings(
    model_reference: str,
    side: str = "source_language",
    token_filter: str = "word_like_only",
    output_path: str | Path = "embeddings.vec",
) -> ExtractionManifest:
    """Write one vector per retained vocabulary entry; return the manifest.

    Duplicate tokens after marker stripping keep the lowest-id (highest
    frequency) entry.  ``word_like_only`` drops special tokens and
    pure-punctuation entries; ``all`` keeps everything representable in
    the output format.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    if token_filter not in TOKEN_FILTERS:
        raise ValueError(f"token_filter must be one of {TOKEN_FILTERS}, got {token_filter!r}")

    model, tokenizer = _load_model_and_tokenizer(model_reference)
    weight = _embedding_matrix(model, side).detach().cpu()
    vocab = tokenizer.get_vocab()
    max_id = max(vocab.values())
    if max_id >= weight.shape[0]:
        raise RuntimeError(
            f"tokenizer/embedding size mismatch: vocabulary id {max_id} but "
            f"embedding table has {weight.shape[0]} rows"
        )
    special_tokens = set(getattr(tokenizer, "all_special_tokens", []))

    coverage = {
        "model_vocabulary_size": len(vocab),
        "marker_stripped_fragments": 0,
        "dropped_special": 0,
        "dropped_punctuation": 0,
        "dropped_unrepresentable": 0,
        "duplicates_collapsed": 0,
    }
    kept: dict[str, int] = {}
    for token, token_id in sorted(vocab.items(), key=lambda kv: kv[1]):
        stripped, was_fragment = _strip_markers(token)
        if token_filter == "word_like_only":
            if _is_special(token, special_tokens):
                coverage["dropped_special"] += 1
                continue
            if stripped and _is_pure_punctuation(stripped):
                coverage["dropped_punctuation"] += 1
                continue
        if not stripped or any(ch.isspace() for ch in stripped):
            coverage["dropped_unrepresentable"] += 1
            continue
        if was_fragment:
            coverage["marker_stripped_fragments"] += 1
        if stripped in kept:
            coverage["duplicates_collapsed"] += 1
            continue  # lowest id wins; iteration is in ascending id order
        kept[stripped] = token_id

    if not kept:
        raise RuntimeError("no tokens left to write after filtering")

    output_path = Path(output_path)
    dimension = int(weight.shape[1])
    try:
        with open(output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(kept)} {dimension}\n")
            for token, token_id in kept.items():
                row = weight[token_id]
                comps = " ".join(repr(float(c)) for c in row)
                fh.write(f"{token} {comps}\n")
    except OSError as exc:
        raise RuntimeError(f"cannot write output {output_path}: {exc}") from exc

    manifest = ExtractionManifest(
        model_reference=str(model_reference),
        side=side,
        vocabulary_size=len(kept),
        dimension=dimension,
        token_filter=token_filter,
        output_path=str(output_path),
        coverage=coverage,
    )
    manifest.save(manifest_path(output_path))
    return manifest


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed-extractor",
        description="Dump a pretrained model's static embedding table to word2vec text.",
    )
    parser.add_argument(
        "--model-reference", required=True,
        help="checkpoint directory or model hub id",
    )
    parser.add_argument("--side", choices=SIDES, default="source_language")
    parser.add_argument("--token-filter", choices=TOKEN_FILTERS, default="word_like_only")
    parser.add_argument("--output-path", required=True)
    args = parser.parse_args(argv)
    try:
        manifest = extract_static_embeddings(
            model_reference=args.model_reference,
            side=args.side,
            token_filter=args.token_filter,
            output_path=args.output_path,
        )
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    json.dump(asdict(manifest), sys.stdout, sort_keys=True, indent=2, ensure_ascii=False)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
