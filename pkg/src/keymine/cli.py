"""Command-line interface.

Subcommands wire corpora, indexes, hit-count providers, models, and reports
together.  Standard output stays machine-parseable (tab-separated lines);
progress and provider query counts go to standard error.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unreadable corpus, bad model file), 3 provider failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .assoc import SynonymQuestion, choose_synonym, format_score_table
from .evaluation import (
    SynthConfig,
    agreement_table,
    author_key_set,
    author_key_union,
    build_curve,
    build_phrase_vocab,
    compare_curves,
    overlap_report,
    overlap_table,
    pseudoword_vocabulary,
    search_eval,
    search_stats,
    search_table,
    synth_corpus,
    ttest_table,
    zipf_weights,
)
from .hitindex import (
    HitProvider,
    IndexHitProvider,
    ProviderError,
    RemoteHitProvider,
    build_index,
    cached,
    load_index,
    save_index,
)
from .model import (
    PASS_ONE_OF,
    ExtractorConfig,
    NBModel,
    extract_onepass,
    extract_twopass,
    load_model,
    save_model,
    train_pipeline,
)
from .textprep import (
    Document,
    StopList,
    default_stoplist,
    generate_candidates,
    load_document,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class UsageError(Exception):
    """Configuration problems that should exit with code 1."""


# ---------------------------------------------------------------------------
# Run configuration: config file keys, overridden by command-line flags.

CONFIG_KEYS = {
    "feature_set", "provider", "cache", "stops", "seed",
    "K", "N", "M", "search_top_k", "workers",
}


@dataclass
class RunConfig:
    feature_set: str = "baseline"
    k: int = 4
    n: int = 100
    m: int = 7
    provider: str | None = None
    cache: str | None = None
    stops: str | None = None
    seed: int = 0
    search_top_k: int = 20
    workers: int = 1


def read_config_file(path: str | Path) -> dict[str, str]:
    """Line-oriented ``key = value`` settings; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_values = (
        read_config_file(args.config) if getattr(args, "config", None) else {}
    )

    def pick(flag: str, key: str, default, cast=str):
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            return flag_value
        if key in file_values:
            try:
                return cast(file_values[key])
            except ValueError as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
        return default

    run = RunConfig(
        feature_set=pick("feature_set", "feature_set", "baseline"),
        k=pick("top_k", "K", 4, int),
        n=pick("top_n", "N", 100, int),
        m=pick("output_count", "M", 7, int),
        provider=pick("provider", "provider", None),
        cache=pick("cache", "cache", None),
        stops=pick("stops", "stops", None),
        seed=pick("seed", "seed", 0, int),
        search_top_k=pick("search_top_k", "search_top_k", 20, int),
        workers=pick("workers", "workers", 1, int),
    )
    if run.workers < 1:
        raise UsageError("workers must be at least 1")
    if run.search_top_k < 1:
        raise UsageError("search_top_k must be at least 1")
    extractor_config(run)  # validate K, N, M, and the feature set eagerly
    return run


def extractor_config(run: RunConfig, feature_set: str | None = None) -> ExtractorConfig:
    stops = None
    if run.stops is not None:
        try:
            stops = StopList.from_file(run.stops)
        except OSError as exc:
            raise UsageError(f"cannot read stop list {run.stops}: {exc}") from exc
    try:
        return ExtractorConfig(
            top_k=run.k,
            top_n=run.n,
            output_count=run.m,
            feature_set=feature_set or run.feature_set,
            stops=stops,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def make_provider(spec: str | None, cache_path: str | None) -> HitProvider:
    if spec is None:
        raise UsageError("this operation needs --provider local:<index> or remote:<url>")
    try:
        if spec.startswith("local:"):
            provider: HitProvider = IndexHitProvider(load_index(spec[len("local:"):]))
        elif spec.startswith("remote:"):
            provider = RemoteHitProvider(spec[len("remote:"):])
        else:
            raise UsageError(f"unknown provider {spec!r} (use local: or remote:)")
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot set up provider {spec!r}: {exc}") from exc
    if cache_path is not None:
        provider = cached(provider, cache_path)
    return provider


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _query_count(provider: HitProvider | None) -> int | None:
    if provider is None:
        return None
    backend = getattr(provider, "backend", provider)
    return getattr(backend, "query_count", None)


# ---------------------------------------------------------------------------
# Corpus loading with explicit failure accounting

def _iter_corpus(directory: Path):
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.txt"))
    docs: list[Document] = []
    failures: list[str] = []
    for path in paths:
        try:
            docs.append(load_document(path))
        except (OSError, ValueError) as exc:
            failures.append(f"{path}: {exc}")
    return docs, failures


def _load_corpus_or_abort(directory: str) -> list[Document] | int:
    docs, failures = _iter_corpus(Path(directory))
    if failures:
        _log("unreadable documents:")
        for failure in failures:
            _log(f"  {failure}")
        return EXIT_DATA
    if not docs:
        _log(f"no documents found in {directory}")
        return EXIT_DATA
    return docs


def _require_labels(docs: Sequence[Document]) -> int | None:
    missing = [doc.id for doc in docs if not author_key_set(doc.author_keyphrases)]
    if missing:
        _log("documents without author keyphrases (.key files):")
        for doc_id in missing:
            _log(f"  {doc_id}")
        return EXIT_DATA
    return None


def _map_docs(fn: Callable, docs: Sequence[Document], workers: int) -> list:
    if workers <= 1:
        return [fn(doc) for doc in docs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, docs))


# ---------------------------------------------------------------------------
# Subcommands

def cmd_index(args: argparse.Namespace) -> int:
    docs = _load_corpus_or_abort(args.corpus_dir)
    if isinstance(docs, int):
        return docs
    index = build_index(docs)
    save_index(index, args.out)
    print(f"documents\t{len(index.doc_sizes)}")
    print(f"terms\t{len(index.postings)}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    run = build_run_config(args)
    cfg = extractor_config(run)
    docs = _load_corpus_or_abort(args.corpus_dir)
    if isinstance(docs, int):
        return docs
    code = _require_labels(docs)
    if code is not None:
        return code

    provider = None
    if cfg.feature_set in PASS_ONE_OF:
        provider = make_provider(run.provider, run.cache)

    keyfreq_docs = None
    if args.keyfreq_dir:
        keyfreq_docs = _load_corpus_or_abort(args.keyfreq_dir)
        if isinstance(keyfreq_docs, int):
            return keyfreq_docs

    _log(f"training {cfg.feature_set} models on {len(docs)} documents")
    pass1, pass2 = train_pipeline(
        docs, cfg, provider=provider, keyfreq_corpus=keyfreq_docs
    )
    save_model(pass1, args.out)
    outputs = [args.out]
    if pass2 is not None:
        save_model(pass2, args.out + ".pass2")
        outputs.append(args.out + ".pass2")

    positives = negatives = 0
    for doc in docs:
        keys = author_key_set(doc.author_keyphrases)
        for cand in generate_candidates(doc, cfg.resolved_stops()):
            if cand.proper_noun:
                continue
            if cand.stem_key in keys:
                positives += 1
            else:
                negatives += 1
    print(f"documents\t{len(docs)}")
    print(f"positive\t{positives}")
    print(f"negative\t{negatives}")
    for model in (pass1, pass2):
        if model is None:
            continue
        for name in model.feature_names:
            cuts = model.discretizers[name].cuts
            print(f"discretizer\t{model.feature_set}\t{name}\t{len(cuts)}")
    queries = _query_count(provider)
    if queries is not None:
        _log(f"provider queries: {queries}")
    for path in outputs:
        print(f"wrote\t{path}")
    return EXIT_OK


def _load_models(path1: str, path2: str | None) -> tuple[NBModel, NBModel | None]:
    pass1 = load_model(path1)
    pass2 = load_model(path2) if path2 else None
    if pass2 is None:
        if pass1.feature_set in PASS_ONE_OF:
            raise UsageError(
                f"{pass1.feature_set} model needs its first-pass partner model"
            )
        return pass1, None
    if pass2.feature_set not in PASS_ONE_OF:
        raise UsageError(f"{pass2.feature_set} is not a second-pass feature set")
    if pass1.feature_set != PASS_ONE_OF[pass2.feature_set]:
        raise UsageError(
            f"{pass2.feature_set} needs a {PASS_ONE_OF[pass2.feature_set]} "
            f"first pass, got {pass1.feature_set}"
        )
    return pass1, pass2


def _make_extractor(
    pass1: NBModel,
    pass2: NBModel | None,
    cfg: ExtractorConfig,
    provider: HitProvider | None,
) -> Callable[[Document], list]:
    if pass2 is None:
        return lambda doc: extract_onepass(doc, pass1, cfg)
    if provider is None:
        raise UsageError("two-pass extraction needs --provider")
    return lambda doc: extract_twopass(doc, pass1, pass2, cfg, provider)


def cmd_extract(args: argparse.Namespace) -> int:
    run = build_run_config(args)
    pass1, pass2 = _load_models(args.model, args.pass2)
    cfg = extractor_config(run, feature_set=pass1.feature_set)
    provider = None
    if pass2 is not None:
        provider = make_provider(run.provider, run.cache)
    extractor = _make_extractor(pass1, pass2, cfg, provider)

    target = Path(args.input)
    if target.is_file():
        items = extractor(load_document(target))
        for item in items:
            print(f"{item.surface}\t{item.posterior:.6g}")
        return EXIT_OK

    if not target.is_dir():
        _log(f"no such file or directory: {target}")
        return EXIT_DATA
    docs, failures = _iter_corpus(target)
    for failure in failures:
        _log(f"skipping {failure}")
    if not docs:
        _log(f"no readable documents in {target}")
        return EXIT_DATA
    out_dir = Path(args.out_dir) if args.out_dir else target
    out_dir.mkdir(parents=True, exist_ok=True)

    results = _map_docs(extractor, docs, run.workers)
    for doc, items in zip(docs, results):
        out_path = out_dir / f"{doc.id}.phrases"
        lines = [f"{item.surface}\t{item.posterior:.6g}" for item in items]
        out_path.write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")
        _log(f"extracted {doc.id} ({len(items)} phrases)")
    queries = _query_count(provider)
    if queries is not None:
        _log(f"provider queries: {queries}")
    print(f"documents\t{len(docs)}")
    return EXIT_OK


def _parse_method(text: str) -> tuple[str, str, str | None]:
    name, sep, paths = text.partition("=")
    if not sep or not name or not paths:
        raise UsageError(f"--method wants name=model[:pass2], got {text!r}")
    path1, sep, path2 = paths.partition(":")
    return name, path1, (path2 if sep else None)


def cmd_eval(args: argparse.Namespace) -> int:
    run = build_run_config(args)
    docs = _load_corpus_or_abort(args.test_dir)
    if isinstance(docs, int):
        return docs
    code = _require_labels(docs)
    if code is not None:
        return code

    methods: dict[str, tuple[NBModel, NBModel | None]] = {}
    for spec in args.method:
        name, path1, path2 = _parse_method(spec)
        if name in methods:
            raise UsageError(f"duplicate method name {name!r}")
        methods[name] = _load_models(path1, path2)
    if not methods:
        raise UsageError("at least one --method is required")

    needs_provider = any(m2 is not None for _, m2 in methods.values())
    provider = make_provider(run.provider, run.cache) if needs_provider else None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    max_m = 20
    doc_keys = [author_key_set(doc.author_keyphrases) for doc in docs]
    union = author_key_union(docs)

    extractions: dict[str, list] = {}
    for name, (pass1, pass2) in methods.items():
        cfg = extractor_config(run, feature_set=pass1.feature_set)
        cfg = replace(cfg, output_count=max_m)
        extractor = _make_extractor(pass1, pass2, cfg, provider)
        _log(f"extracting with {name} on {len(docs)} documents")
        extractions[name] = _map_docs(extractor, docs, run.workers)

    agreement_curves = {
        name: build_curve(extractions[name], doc_keys, max_m) for name in methods
    }
    familiarity_curves = {
        name: build_curve(extractions[name], [union] * len(docs), max_m)
        for name in methods
    }

    outputs: list[Path] = []

    def emit(filename: str, lines: list[str]) -> Path:
        path = out_dir / filename
        path.write_text("\n".join(lines) + "\n", "utf-8")
        outputs.append(path)
        return path

    emit("agreement.tsv", agreement_table(agreement_curves))
    emit("familiarity.tsv", agreement_table(familiarity_curves))

    names = list(methods)
    pair_entries = {}
    if len(names) > 1:
        lines: list[str] = []
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                entries = compare_curves(
                    agreement_curves[names[i]], agreement_curves[names[j]]
                )
                pair_entries[(names[i], names[j])] = entries
                if lines:
                    lines.append("")
                lines.extend(ttest_table(names[i], names[j], entries))
        emit("ttests.tsv", lines)

    report = None
    if len(names) == 3:
        report = overlap_report(extractions, doc_keys)
        emit("overlap.tsv", overlap_table(report))
    elif len(names) != 1:
        _log("overlap report needs exactly three methods; skipping")

    index = (
        load_index(args.search_index)
        if args.search_index
        else build_index(docs)
    )
    stats_by_run = {}
    for name in names:
        for mode in ("words", "phrases"):
            outcomes = []
            skipped = 0
            for doc, items in zip(docs, extractions[name]):
                phrases = [item.surface for item in items[:3]]
                if not phrases:
                    skipped += 1
                    continue
                outcomes.append(
                    search_eval(doc, phrases, index, mode, run.search_top_k)
                )
            if skipped:
                _log(f"search {name}/{mode}: skipped {skipped} empty extractions")
            if outcomes:
                stats_by_run[f"{name}/{mode}"] = search_stats(outcomes)
    if stats_by_run:
        emit("search.tsv", search_table(stats_by_run))

    if not args.no_figures:
        from . import figures

        outputs.append(
            figures.save_curve_figure(
                agreement_curves, out_dir / "agreement.png",
                title="Agreement with author keyphrases",
            )
        )
        outputs.append(
            figures.save_curve_figure(
                familiarity_curves, out_dir / "familiarity.png",
                title="Familiarity against the test set",
            )
        )
        for (a, b), entries in pair_entries.items():
            outputs.append(
                figures.save_ttest_figure(
                    entries, f"{a} minus {b}", out_dir / f"ttest_{a}_vs_{b}.png"
                )
            )
        if report is not None:
            outputs.append(figures.save_overlap_figure(report, out_dir / "overlap.png"))
        if stats_by_run:
            outputs.append(
                figures.save_search_figure(stats_by_run, out_dir / "search.png")
            )

    queries = _query_count(provider)
    if queries is not None:
        _log(f"provider queries: {queries}")
    for path in outputs:
        print(f"wrote\t{path}")
    return EXIT_OK


def cmd_assoc(args: argparse.Namespace) -> int:
    run = build_run_config(args)
    provider = make_provider(run.provider, run.cache)
    try:
        question = SynonymQuestion(args.problem, tuple(args.choices))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(format_score_table(question.problem, question.choices, provider))
    try:
        best: str | None = choose_synonym(question, provider)
    except ValueError:
        best = None
    print(f"answer\t{best if best is not None else 'undefined'}")
    return EXIT_OK


def _document_text(doc: Document) -> str:
    parts: list[str] = []
    for token in doc.tokens:
        if token.boundary_before and parts:
            parts.append(".")
        parts.append(token.surface)
    return " ".join(parts)


def cmd_synth(args: argparse.Namespace) -> int:
    if args.domain_size < args.keyphrases:
        raise UsageError("domain-size must be at least keyphrases")
    rng = np.random.default_rng(args.seed)
    stops = default_stoplist()
    n_words = args.general_size * 2 + args.domain_size * 4
    words = pseudoword_vocabulary(n_words, rng, stops=stops)
    split1 = args.general_size * 2
    split2 = split1 + args.domain_size * 2
    general = build_phrase_vocab(words[:split1], args.general_size, rng)
    domain_a = build_phrase_vocab(words[split1:split2], args.domain_size, rng)
    domain_b = build_phrase_vocab(words[split2:], args.domain_size, rng)
    cfg = SynthConfig(
        general=tuple(general),
        domain_a=tuple(domain_a),
        domain_b=tuple(domain_b),
        general_weights=zipf_weights(args.general_size),
        domain_a_weights=zipf_weights(args.domain_size),
        domain_b_weights=zipf_weights(args.domain_size),
        docs_per_domain=args.docs_per_domain,
        phrases_per_doc=args.phrases_per_doc,
        domain_mix=args.domain_mix,
        keyphrases_per_doc=args.keyphrases,
        keyphrase_copies=args.copies,
        seed=args.seed,
    )
    corpus = synth_corpus(cfg, id_prefix=args.prefix)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc in corpus.all_docs:
        (out_dir / f"{doc.id}.txt").write_text(_document_text(doc) + "\n", "utf-8")
        (out_dir / f"{doc.id}.key").write_text(
            "\n".join(doc.author_keyphrases) + "\n", "utf-8"
        )
    print(f"documents\t{len(corpus.all_docs)}")
    print(f"domain_a\t{len(corpus.domain_a)}")
    print(f"domain_b\t{len(corpus.domain_b)}")
    print(f"out_dir\t{out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing

def _add_run_flags(parser: argparse.ArgumentParser, *, extraction: bool = True) -> None:
    parser.add_argument("--config", help="key = value settings file")
    parser.add_argument("--provider",
                        help="hit counts: local:<index file> or remote:<url template>")
    parser.add_argument("--cache", help="query cache file")
    parser.add_argument("--stops", help="stop word file (default built-in list)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--workers", type=int, help="parallel document workers")
    if extraction:
        parser.add_argument("-K", "--top-k", dest="top_k", type=int,
                            help="reference phrases for the second pass (default 4)")
        parser.add_argument("-N", "--top-n", dest="top_n", type=int,
                            help="candidates re-scored in the second pass (default 100)")
        parser.add_argument("-M", "--output-count", dest="output_count", type=int,
                            help="phrases to output (default 7)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keymine",
        description="Keyphrase extraction with corpus and co-occurrence features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a positional index from a corpus")
    p.add_argument("corpus_dir")
    p.add_argument("out")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("train", help="train extraction models")
    p.add_argument("corpus_dir")
    p.add_argument("out", help="model file to write (second pass adds .pass2)")
    p.add_argument("--feature-set", dest="feature_set",
                   choices=("baseline", "keyphrase", "query", "hybrid"))
    p.add_argument("--keyfreq-dir", dest="keyfreq_dir",
                   help="corpus for author-choice counts (default: training corpus)")
    _add_run_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extract", help="extract phrases from a file or directory")
    p.add_argument("input", help="document file or corpus directory")
    p.add_argument("--model", required=True, help="first-pass model file")
    p.add_argument("--pass2", help="second-pass model file")
    p.add_argument("--out-dir", dest="out_dir",
                   help="directory for <id>.phrases files (batch mode)")
    _add_run_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="evaluate methods on a labeled test corpus")
    p.add_argument("test_dir")
    p.add_argument("--method", action="append", default=[],
                   help="name=model[:pass2model]; repeatable")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--search-index", dest="search_index",
                   help="index for search evaluation (default: test corpus)")
    p.add_argument("--search-top-k", dest="search_top_k", type=int,
                   help="hits window for specificity (default 20)")
    p.add_argument("--no-figures", dest="no_figures", action="store_true",
                   help="write only the .tsv reports")
    _add_run_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("assoc", help="score candidate synonyms by co-occurrence")
    p.add_argument("problem")
    p.add_argument("choices", nargs="+")
    _add_run_flags(p, extraction=False)
    p.set_defaults(func=cmd_assoc)

    p = sub.add_parser("synth", help="generate a two-domain synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--docs-per-domain", type=int, default=30)
    p.add_argument("--phrases-per-doc", type=int, default=40)
    p.add_argument("--general-size", type=int, default=60)
    p.add_argument("--domain-size", type=int, default=12)
    p.add_argument("--keyphrases", type=int, default=4)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--domain-mix", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", default="")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    except ProviderError as exc:
        _log(f"provider error: {exc}")
        return EXIT_PROVIDER
    except (OSError, ValueError) as exc:
        _log(f"data error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
