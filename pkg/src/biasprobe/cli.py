"""Command-line interface: one subcommand per pipeline stage.

Subcommands: ingest, split, train-sgns, weat, tgbi, neighbors, compare,
report.  Every subcommand accepts ``--config FILE`` (JSON whose keys
mirror the long flag names, hyphens or underscores); explicit flags
override the file, the file overrides defaults.  Primary results go to
stdout or ``--out``; diagnostics go to stderr.  All outputs embed the
effective configuration and its SHA-256 digest so runs can be compared
and reproduced.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, analysis, corpus, embed, lexicon, sgns, tgbi, weat
from .tokenization import tokenize

log = logging.getLogger("biasprobe")

# keys that never influence computed content
_DIGEST_EXCLUDE = {"config", "out", "out_train", "out_test"}


def _digest(effective: dict) -> str:
    canonical = json.dumps(
        {k: v for k, v in effective.items() if k not in _DIGEST_EXCLUDE},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _effective_config(args: argparse.Namespace, defaults: dict) -> dict:
    file_values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config file must be a JSON object")
        file_values = {k.replace("-", "_"): v for k, v in raw.items()}
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise ValueError(
                f"{path}: unknown config keys: {', '.join(sorted(unknown))}"
            )
    effective = dict(defaults)
    effective.update(file_values)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            effective[key] = value
    return effective


def _emit(payload: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)


def _emit_json(obj: dict, out: str | None) -> None:
    _emit(
        (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode(
            "utf-8"
        ),
        out,
    )


def _load_set(name_or_path: str, language: str) -> lexicon.WordSetSpec:
    return lexicon.load_wordset(lexicon.resolve_name(name_or_path), language=language)


def _require(args: argparse.Namespace, effective: dict, *keys: str) -> None:
    """Usage error (exit 2 with usage text) when required values are absent
    from both the command line and the config file."""
    missing = [k for k in keys if effective.get(k) is None]
    if missing:
        args.parser.error(
            "missing required option(s): "
            + ", ".join(f"--{k.replace('_', '-')}" for k in missing)
        )


# ---------------------------------------------------------------- subcommands


_INGEST_DEFAULTS = {"input": None, "column": None, "domain": None, "out": None}


def _cmd_ingest(args) -> int:
    eff = _effective_config(args, _INGEST_DEFAULTS)
    _require(args, eff, "input", "column", "domain", "out")
    dc = corpus.load_table(eff["input"], eff["column"], eff["domain"])
    digest = _digest(eff)
    corpus.write_corpus(
        dc, eff["out"], extra_meta={"config": eff, "config_digest": digest}
    )
    log.info("ingested %d documents from %s", dc.record_count, eff["input"])
    _emit_json(
        {
            "domain_id": dc.domain_id.value,
            "record_count": dc.record_count,
            "out": eff["out"],
            "config": eff,
            "config_digest": digest,
        },
        None,
    )
    return 0


_SPLIT_DEFAULTS = {
    "corpus": None,
    "ratio": 0.8,
    "seed": 0,
    "domain": None,
    "out_train": None,
    "out_test": None,
}


def _cmd_split(args) -> int:
    eff = _effective_config(args, _SPLIT_DEFAULTS)
    _require(args, eff, "corpus", "out_train", "out_test")
    dc = corpus.read_corpus(eff["corpus"], domain=eff["domain"])
    result = corpus.split(dc, eff["ratio"], eff["seed"])
    digest = _digest(eff)
    meta = {"config": eff, "config_digest": digest}
    corpus.write_corpus(
        result.train, eff["out_train"], seed=eff["seed"], ratio=eff["ratio"], extra_meta=meta
    )
    corpus.write_corpus(
        result.test, eff["out_test"], seed=eff["seed"], ratio=eff["ratio"], extra_meta=meta
    )
    log.info(
        "split %d documents into %d train / %d test",
        dc.record_count,
        result.train.record_count,
        result.test.record_count,
    )
    _emit_json(
        {
            "train_count": result.train.record_count,
            "test_count": result.test.record_count,
            "ratio": eff["ratio"],
            "seed": eff["seed"],
            "config": eff,
            "config_digest": digest,
        },
        None,
    )
    return 0


_TRAIN_DEFAULTS = {
    "corpus": None,
    "out": None,
    "dimension": 100,
    "window": 5,
    "negatives": 5,
    "epochs": 5,
    "learning_rate": 0.025,
    "min_learning_rate": 1e-4,
    "subsample": 1e-4,
    "min_count": 5,
    "seed": 0,
    "language": "en",
    "domain": None,
    "workers": 1,
    "keep_digit_tokens": False,
}


def _cmd_train_sgns(args) -> int:
    eff = _effective_config(args, _TRAIN_DEFAULTS)
    _require(args, eff, "corpus", "out")
    dc = corpus.read_corpus(eff["corpus"], domain=eff["domain"] or "news")
    documents = [tokenize(doc).tokens for doc in dc.documents]
    config = sgns.SgnsConfig(
        dimension=eff["dimension"],
        window=eff["window"],
        negatives=eff["negatives"],
        epochs=eff["epochs"],
        initial_learning_rate=eff["learning_rate"],
        min_learning_rate=eff["min_learning_rate"],
        subsample_threshold=eff["subsample"],
        min_count=eff["min_count"],
        seed=eff["seed"],
        drop_digit_tokens=not eff["keep_digit_tokens"],
        workers=eff["workers"],
    )
    losses: list[float] = []
    space = sgns.train(
        documents,
        config,
        language=eff["language"],
        domain_id=eff["domain"],
        epoch_losses=losses,
    )
    embed.save_vectors(space, eff["out"])
    digest = _digest(eff)
    sidecar = Path(str(eff["out"]) + ".meta.json")
    sidecar.write_text(
        json.dumps(
            {
                "vocabulary_size": len(space),
                "dimension": space.dimension,
                "epoch_losses": losses,
                "provenance": space.source,
                "config": eff,
                "config_digest": digest,
            },
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
    log.info("trained %d vectors (dim %d) -> %s", len(space), space.dimension, eff["out"])
    _emit_json(
        {
            "vocabulary_size": len(space),
            "dimension": space.dimension,
            "epoch_losses": losses,
            "out": eff["out"],
            "config": eff,
            "config_digest": digest,
        },
        None,
    )
    return 0


_WEAT_DEFAULTS = {
    "embeddings": None,
    "embeddings_format": "word2vec_text",
    "targets_x": None,
    "targets_y": None,
    "attrs_a": None,
    "attrs_b": None,
    "permutations": 10_000,
    "max_exact": 200_000,
    "seed": 0,
    "balance": False,
    "method": "auto",
    "min_size": 2,
    "language": "en",
    "out": None,
}


def _cmd_weat(args) -> int:
    eff = _effective_config(args, _WEAT_DEFAULTS)
    _require(args, eff, "embeddings", "targets_x", "targets_y", "attrs_a", "attrs_b")
    space = embed.load_vectors(
        eff["embeddings"], format=eff["embeddings_format"], language=eff["language"]
    )
    config = weat.WeatConfig(
        method=eff["method"],
        max_exact=eff["max_exact"],
        iterations=eff["permutations"],
        seed=eff["seed"],
        balance=eff["balance"],
        min_size=eff["min_size"],
    )
    result = weat.run_weat(
        space,
        _load_set(eff["targets_x"], eff["language"]),
        _load_set(eff["targets_y"], eff["language"]),
        _load_set(eff["attrs_a"], eff["language"]),
        _load_set(eff["attrs_b"], eff["language"]),
        config,
    )
    for set_name, dropped in result.dropped_tokens.items():
        if dropped:
            log.info("set %s dropped OOV tokens: %s", set_name, ", ".join(dropped))
    payload = result.to_dict()
    payload["config"] = eff
    payload["config_digest"] = _digest(eff)
    _emit_json(payload, eff["out"])
    return 0


_TGBI_DEFAULTS = {
    "counts": None,
    "sentences": None,
    "manifest": None,
    "he_lexicon": "en/tgbi_he",
    "she_lexicon": "en/tgbi_she",
    "language": "en",
    "out": None,
}


def _cmd_tgbi(args) -> int:
    eff = _effective_config(args, _TGBI_DEFAULTS)
    if eff["counts"] is None and eff["sentences"] is None:
        args.parser.error("provide either --counts or --sentences with --manifest")
    if eff["counts"] is not None:
        result = tgbi.tgbi(tgbi.load_counts(eff["counts"]))
    else:
        _require(args, eff, "manifest")
        classifier = tgbi.SentenceClassifier(
            _load_set(eff["he_lexicon"], eff["language"]),
            _load_set(eff["she_lexicon"], eff["language"]),
        )
        sets = tgbi.load_sentence_sets(eff["sentences"], eff["manifest"])
        result = tgbi.tgbi_from_sentences(sets, classifier)
    payload = result.to_dict()
    payload["config"] = eff
    payload["config_digest"] = _digest(eff)
    _emit_json(payload, eff["out"])
    return 0


_NEIGHBORS_DEFAULTS = {
    "embeddings": None,
    "embeddings_format": "word2vec_text",
    "pairs": "en/gender_pairs",
    "method": "mean_difference",
    "k": 10,
    "language": "en",
    "out": None,
}


def _cmd_neighbors(args) -> int:
    eff = _effective_config(args, _NEIGHBORS_DEFAULTS)
    _require(args, eff, "embeddings")
    space = embed.load_vectors(
        eff["embeddings"], format=eff["embeddings_format"], language=eff["language"]
    )
    pairs = lexicon.load_pairs(lexicon.resolve_name(eff["pairs"]), language=eff["language"])
    direction = analysis.gender_direction(space, pairs, method=eff["method"])
    masculine, feminine = analysis.gendered_neighbors(space, direction, eff["k"])
    if direction.pairs_dropped:
        log.info(
            "dropped unresolvable pairs: %s",
            ", ".join(f"{m}/{f}" for m, f in direction.pairs_dropped),
        )
    _emit_json(
        {
            "method": direction.method,
            "pairs_used": [[m, f] for m, f in direction.pairs_used],
            "pairs_dropped": [[m, f] for m, f in direction.pairs_dropped],
            "masculine_top": [[t, s] for t, s in masculine],
            "feminine_top": [[t, s] for t, s in feminine],
            "k": eff["k"],
            "config": eff,
            "config_digest": _digest(eff),
        },
        eff["out"],
    )
    return 0


_REPORT_DEFAULTS = {
    "domain": None,
    "weat": None,  # dict metric name -> result path, or list of name=path
    "tgbi": None,
    "neighbors": None,
    "provenance": "",
    "out": None,
}


def _parse_weat_refs(value) -> dict[str, str]:
    if isinstance(value, dict):
        return dict(value)
    refs = {}
    for item in value:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise ValueError(f"--weat expects NAME=PATH, got {item!r}")
        refs[name] = path
    return refs


def _cmd_report(args) -> int:
    eff = _effective_config(args, _REPORT_DEFAULTS)
    _require(args, eff, "domain", "weat")
    weat_results = {}
    for name, path in sorted(_parse_weat_refs(eff["weat"]).items()):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        weat_results[name] = weat.WeatResult.from_dict(data)
    tgbi_result = None
    if eff["tgbi"]:
        tgbi_result = tgbi.TgbiResult.from_dict(
            json.loads(Path(eff["tgbi"]).read_text(encoding="utf-8"))
        )
    masculine_top, feminine_top = [], []
    if eff["neighbors"]:
        data = json.loads(Path(eff["neighbors"]).read_text(encoding="utf-8"))
        masculine_top = [(t, s) for t, s in data["masculine_top"]]
        feminine_top = [(t, s) for t, s in data["feminine_top"]]
    report = analysis.DomainReport(
        domain_id=eff["domain"],
        weat_results=weat_results,
        tgbi_result=tgbi_result,
        masculine_top=masculine_top,
        feminine_top=feminine_top,
        embedding_provenance=eff["provenance"],
    )
    payload = report.to_dict()
    payload["config"] = eff
    payload["config_digest"] = _digest(eff)
    _emit_json(payload, eff["out"])
    return 0


_COMPARE_DEFAULTS = {
    "reports": None,
    "format": "json",
    "generated_at": None,
    "out": None,
}


def _cmd_compare(args) -> int:
    eff = _effective_config(args, _COMPARE_DEFAULTS)
    _require(args, eff, "reports")
    reports = [
        analysis.DomainReport.from_dict(json.loads(Path(p).read_text(encoding="utf-8")))
        for p in eff["reports"]
    ]
    cross = analysis.compare_domains(
        reports,
        generated_at=eff["generated_at"],
        config_digest=_digest(eff),
    )
    _emit(analysis.emit_report(cross, format=eff["format"]), eff["out"])
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biasprobe",
        description="Measure gender bias in domain word embeddings (WEAT, TGBI).",
    )
    parser.add_argument("--version", action="version", version=f"biasprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    bool_action = argparse.BooleanOptionalAction

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; keys mirror flag names")
        p.set_defaults(parser=p)
        return p

    p = add("ingest", "extract and clean one column of a delimited file")
    p.add_argument("--input", help="delimited UTF-8 file with header row")
    p.add_argument("--column", help="name of the text column")
    p.add_argument("--domain", choices=[d.value for d in corpus.Domain])
    p.add_argument("--out", help="corpus interchange file to write")
    p.set_defaults(func=_cmd_ingest)

    p = add("split", "deterministic seeded train/test split")
    p.add_argument("--corpus", help="corpus interchange file")
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--domain", choices=[d.value for d in corpus.Domain])
    p.add_argument("--out-train", dest="out_train")
    p.add_argument("--out-test", dest="out_test")
    p.set_defaults(func=_cmd_split)

    p = add("train-sgns", "train skip-gram negative-sampling embeddings")
    p.add_argument("--corpus", help="corpus interchange file")
    p.add_argument("--out", help="vector file to write (word2vec text)")
    p.add_argument("--dimension", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--min-learning-rate", dest="min_learning_rate", type=float)
    p.add_argument("--subsample", type=float, help="subsampling threshold")
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--language")
    p.add_argument("--domain", choices=[d.value for d in corpus.Domain])
    p.add_argument("--workers", type=int, help="more than 1 is nondeterministic")
    p.add_argument("--keep-digit-tokens", dest="keep_digit_tokens", action=bool_action)
    p.set_defaults(func=_cmd_train_sgns)

    p = add("weat", "run the word embedding association test")
    p.add_argument("--embeddings", help="vector file")
    p.add_argument(
        "--embeddings-format", dest="embeddings_format",
        choices=["word2vec_text", "glove_text"],
    )
    p.add_argument("--targets-x", dest="targets_x", help="word set path or data name")
    p.add_argument("--targets-y", dest="targets_y")
    p.add_argument("--attrs-a", dest="attrs_a")
    p.add_argument("--attrs-b", dest="attrs_b")
    p.add_argument("--permutations", type=int, help="monte-carlo iterations")
    p.add_argument("--max-exact", dest="max_exact", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--balance", action=bool_action, help="equalize target set sizes")
    p.add_argument("--method", choices=["auto", "exact", "monte_carlo"])
    p.add_argument("--min-size", dest="min_size", type=int)
    p.add_argument("--language")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_weat)

    p = add("tgbi", "translation gender bias index")
    p.add_argument("--counts", help="csv with set_id,n_he,n_she,n_neutral")
    p.add_argument("--sentences", help="one sentence per line")
    p.add_argument("--manifest", help="JSON set_id -> [start, end] line ranges")
    p.add_argument("--he-lexicon", dest="he_lexicon")
    p.add_argument("--she-lexicon", dest="she_lexicon")
    p.add_argument("--language")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tgbi)

    p = add("neighbors", "most gender-associated vocabulary words")
    p.add_argument("--embeddings")
    p.add_argument(
        "--embeddings-format", dest="embeddings_format",
        choices=["word2vec_text", "glove_text"],
    )
    p.add_argument("--pairs", help="gender pair list path or data name")
    p.add_argument(
        "--method", choices=["mean_difference", "first_principal_component"]
    )
    p.add_argument("--k", type=int)
    p.add_argument("--language")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_neighbors)

    p = add("report", "assemble one domain's metric bundle")
    p.add_argument("--domain", choices=[d.value for d in corpus.Domain])
    p.add_argument(
        "--weat",
        action="append",
        metavar="NAME=PATH",
        help="named weat result JSON (repeatable)",
    )
    p.add_argument("--tgbi", help="tgbi result JSON")
    p.add_argument("--neighbors", help="neighbors result JSON")
    p.add_argument("--provenance", help="embedding provenance string")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    p = add("compare", "cross-domain comparison report")
    p.add_argument("--reports", nargs="+", help="domain report JSON files")
    p.add_argument("--format", choices=["json", "csv", "markdown"])
    p.add_argument("--generated-at", dest="generated_at", help="ISO-8601 timestamp")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    return parser


def dispatch(argv: list[str]) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        # parser.error raised from inside a subcommand
        return int(exc.code or 0)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001  (CLI boundary: no raw tracebacks)
        if os.environ.get("BIASPROBE_DEBUG"):
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
