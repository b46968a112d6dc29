"""Training and applying the keyphrase classifier.

Candidates are scored with a two-class naive Bayes model over discretized
features.  Which features depends on the feature set:

* ``baseline``: corpus statistics only (tfidf and first-occurrence distance);
* ``keyphrase``: baseline plus how often other documents' authors chose the
  phrase;
* ``query``: twelve features computed in a second pass, where candidates
  surviving the first pass are re-scored by their co-occurrence with the
  document's strongest first-pass phrases;
* ``hybrid``: the twelve second-pass features plus the author-choice count,
  with the first pass run under the ``keyphrase`` set.

Training fits the discretization cuts globally (one fit per feature over all
training documents pooled), estimates conditional probabilities per interval
with add-one smoothing, and takes class priors from the label frequencies.
Posterior evaluation multiplies in log space, so many small conditionals
cannot underflow to a hard zero.

Extraction drops proper-noun candidates, ranks by posterior (ties broken by
higher tfidf, then earlier first occurrence, then stem key), and reports the
top ``output_count`` phrases, each rendered with its most frequent original
spelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .features import (
    CorpusStats,
    Discretizer,
    KeyFreqTable,
    QueryVector,
    build_query_table,
    discretize_fit,
    distance,
    keyphrase_frequency,
    tfidf,
)
from .hitindex import HitProvider
from .textprep import (
    Candidate,
    Document,
    StopList,
    default_stoplist,
    generate_candidates,
    normalize_raw_phrase,
)

__all__ = [
    "FEATURE_SETS",
    "ExtractorConfig",
    "NBModel",
    "ExtractionItem",
    "ExtractionResult",
    "nb_train",
    "nb_posterior",
    "rank_candidates_onepass",
    "extract_onepass",
    "extract_twopass",
    "train_pipeline",
    "save_model",
    "load_model",
]

_QUERY_NAMES = QueryVector._fields
FEATURE_SETS: dict[str, tuple[str, ...]] = {
    "baseline": ("tfidf", "distance"),
    "keyphrase": ("tfidf", "distance", "keyphrase_freq"),
    "query": _QUERY_NAMES,
    "hybrid": tuple(
        {"baseline_rank": "keyphrase_rank", "baseline_probability": "keyphrase_probability"}.get(n, n)
        for n in _QUERY_NAMES
    )
    + ("keyphrase_freq",),
}

PASS_ONE_OF = {"query": "baseline", "hybrid": "keyphrase"}


@dataclass
class ExtractorConfig:
    top_k: int = 4
    top_n: int = 100
    output_count: int = 7
    feature_set: str = "baseline"
    stops: StopList | None = None

    def __post_init__(self):
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature set: {self.feature_set}")
        if not (1 <= self.top_k <= self.top_n):
            raise ValueError("need 1 <= top_k <= top_n")
        if self.output_count < 1:
            raise ValueError("output_count must be at least 1")

    def resolved_stops(self) -> StopList:
        return self.stops if self.stops is not None else default_stoplist()


@dataclass
class NBModel:
    feature_set: str
    prior_key: float
    prior_not: float
    discretizers: dict[str, Discretizer]
    cond_key: dict[str, tuple[float, ...]]
    cond_not: dict[str, tuple[float, ...]]
    stats: CorpusStats
    keyfreq: KeyFreqTable | None = None

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_SETS[self.feature_set]


class ExtractionItem(NamedTuple):
    surface: str
    stem_key: str
    posterior: float


ExtractionResult = list[ExtractionItem]


def nb_train(
    ivectors: Sequence[Sequence[int]],
    labels: Sequence[bool],
    discretizers: dict[str, Discretizer],
    feature_set: str,
    stats: CorpusStats | None = None,
    keyfreq: KeyFreqTable | None = None,
) -> NBModel:
    """Estimate priors and per-interval conditionals from discretized rows."""
    names = FEATURE_SETS[feature_set]
    if set(discretizers) != set(names):
        raise ValueError("discretizers do not match the feature set")
    if len(ivectors) != len(labels):
        raise ValueError("rows and labels differ in length")
    n_pos = sum(1 for l in labels if l)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("training needs at least one example of each class")

    cond_key: dict[str, tuple[float, ...]] = {}
    cond_not: dict[str, tuple[float, ...]] = {}
    for f, name in enumerate(names):
        n_intervals = discretizers[name].n_intervals
        pos_counts = [0] * n_intervals
        neg_counts = [0] * n_intervals
        for row, label in zip(ivectors, labels):
            if len(row) != len(names):
                raise ValueError("feature vector arity does not match the feature set")
            interval = row[f]
            if not (0 <= interval < n_intervals):
                raise ValueError(f"interval id {interval} out of range for {name}")
            (pos_counts if label else neg_counts)[interval] += 1
        cond_key[name] = tuple(
            (c + 1) / (n_pos + n_intervals) for c in pos_counts
        )
        cond_not[name] = tuple(
            (c + 1) / (n_neg + n_intervals) for c in neg_counts
        )

    total = n_pos + n_neg
    return NBModel(
        feature_set=feature_set,
        prior_key=n_pos / total,
        prior_not=n_neg / total,
        discretizers=dict(discretizers),
        cond_key=cond_key,
        cond_not=cond_not,
        stats=stats if stats is not None else CorpusStats(0, {}),
        keyfreq=keyfreq,
    )


def nb_posterior(model: NBModel, ivector: Sequence[int]) -> float:
    """P(keyphrase | features), evaluated in log space."""
    names = model.feature_names
    if len(ivector) != len(names):
        raise ValueError("feature vector arity does not match the model")
    log_key = math.log(model.prior_key)
    log_not = math.log(model.prior_not)
    for name, interval in zip(names, ivector):
        log_key += math.log(model.cond_key[name][interval])
        log_not += math.log(model.cond_not[name][interval])
    return 1.0 / (1.0 + math.exp(log_not - log_key))


@dataclass
class ScoredCandidate:
    candidate: Candidate
    tfidf: float
    distance: float
    keyfreq: int | None
    posterior: float


def _raw_pass_one(
    doc: Document,
    feature_set: str,
    stats: CorpusStats,
    keyfreq: KeyFreqTable | None,
    stops: StopList,
) -> tuple[list[Candidate], list[dict[str, float]]]:
    candidates = [
        c for c in generate_candidates(doc, stops) if not c.proper_noun
    ]
    rows = []
    for cand in candidates:
        row = {
            "tfidf": tfidf(cand.freq, doc.word_count, stats, cand.stem_key),
            "distance": distance(cand, doc),
        }
        if feature_set == "keyphrase":
            if keyfreq is None:
                raise ValueError("keyphrase feature set needs a keyphrase table")
            row["keyphrase_freq"] = float(
                keyphrase_frequency(cand.stem_key, doc, keyfreq)
            )
        rows.append(row)
    return candidates, rows


def _rank_order(scored: list[ScoredCandidate]) -> list[ScoredCandidate]:
    return sorted(
        scored,
        key=lambda s: (
            -s.posterior,
            -s.tfidf,
            s.candidate.first_occur,
            s.candidate.stem_key,
        ),
    )


def rank_candidates_onepass(
    doc: Document, model: NBModel, cfg: ExtractorConfig
) -> list[ScoredCandidate]:
    """All usable candidates, best first, scored by the one-pass model."""
    if model.feature_set not in ("baseline", "keyphrase"):
        raise ValueError("one-pass ranking needs a baseline or keyphrase model")
    stops = cfg.resolved_stops()
    candidates, rows = _raw_pass_one(
        doc, model.feature_set, model.stats, model.keyfreq, stops
    )
    scored = []
    for cand, row in zip(candidates, rows):
        ivector = [
            model.discretizers[name].apply(row[name]) for name in model.feature_names
        ]
        scored.append(
            ScoredCandidate(
                candidate=cand,
                tfidf=row["tfidf"],
                distance=row["distance"],
                keyfreq=int(row["keyphrase_freq"]) if "keyphrase_freq" in row else None,
                posterior=nb_posterior(model, ivector),
            )
        )
    return _rank_order(scored)


def _items(scored: Sequence[ScoredCandidate], limit: int) -> ExtractionResult:
    return [
        ExtractionItem(
            surface=s.candidate.modal_surface(),
            stem_key=s.candidate.stem_key,
            posterior=s.posterior,
        )
        for s in scored[:limit]
    ]


def extract_onepass(
    doc: Document, model: NBModel, cfg: ExtractorConfig
) -> ExtractionResult:
    return _items(rank_candidates_onepass(doc, model, cfg), cfg.output_count)


def _second_pass_rows(
    ranked: list[ScoredCandidate],
    feature_set: str,
    provider: HitProvider,
    cfg: ExtractorConfig,
) -> tuple[list[ScoredCandidate], list[dict[str, float]]]:
    pool = ranked[: cfg.top_n]
    reference = [s.candidate for s in ranked[: cfg.top_k]]
    table = build_query_table(
        [s.candidate for s in pool],
        reference,
        [s.posterior for s in pool],
        provider,
        [s.tfidf for s in pool],
        [s.distance for s in pool],
    )
    hybrid = feature_set == "hybrid"
    rows = []
    for s, vector in zip(pool, table.vectors):
        row = dict(zip(QueryVector._fields, vector))
        if hybrid:
            row["keyphrase_rank"] = row.pop("baseline_rank")
            row["keyphrase_probability"] = row.pop("baseline_probability")
            if s.keyfreq is None:
                raise ValueError("hybrid extraction needs keyphrase counts from pass one")
            row["keyphrase_freq"] = float(s.keyfreq)
        rows.append(row)
    return pool, rows


def extract_twopass(
    doc: Document,
    pass1: NBModel,
    pass2: NBModel,
    cfg: ExtractorConfig,
    provider: HitProvider,
) -> ExtractionResult:
    """Re-rank the first-pass pool with the co-occurrence features."""
    if pass2.feature_set not in PASS_ONE_OF:
        raise ValueError("second-pass model must use the query or hybrid feature set")
    expected = PASS_ONE_OF[pass2.feature_set]
    if pass1.feature_set != expected:
        raise ValueError(
            f"{pass2.feature_set} extraction needs a {expected} first-pass model"
        )
    ranked = rank_candidates_onepass(doc, pass1, cfg)
    if not ranked:
        return []
    pool, rows = _second_pass_rows(ranked, pass2.feature_set, provider, cfg)
    rescored = []
    for s, row in zip(pool, rows):
        ivector = [
            pass2.discretizers[name].apply(row[name]) for name in pass2.feature_names
        ]
        rescored.append(replace(s, posterior=nb_posterior(pass2, ivector)))
    return _items(_rank_order(rescored), cfg.output_count)


def _doc_label_keys(doc: Document) -> frozenset[str]:
    keys = set()
    for raw in doc.author_keyphrases:
        normalized = normalize_raw_phrase(raw)
        if normalized:
            keys.add(normalized)
    return frozenset(keys)


def train_pipeline(
    training_corpus: Sequence[Document],
    cfg: ExtractorConfig,
    provider: HitProvider | None = None,
    keyfreq_corpus: Sequence[Document] | None = None,
) -> tuple[NBModel, NBModel | None]:
    """Fit the models for ``cfg.feature_set`` on a labeled corpus.

    A candidate is a positive example exactly when its stem key matches one
    of its own document's normalized author keyphrases.  The author-choice
    table may be fitted from a separate (typically larger) corpus.  Feature
    sets with a second pass additionally need a hit-count provider; the
    second pass is trained on each document's first-pass pool.
    """
    if not training_corpus:
        raise ValueError("training corpus is empty")
    unlabeled = [d.id for d in training_corpus if not _doc_label_keys(d)]
    if unlabeled:
        raise ValueError(f"training documents without author keyphrases: {unlabeled}")

    stops = cfg.resolved_stops()
    stats = CorpusStats.fit(training_corpus, stops)
    pass1_set = PASS_ONE_OF.get(cfg.feature_set, cfg.feature_set)
    keyfreq = None
    if pass1_set == "keyphrase":
        keyfreq = KeyFreqTable.fit(
            keyfreq_corpus if keyfreq_corpus is not None else training_corpus
        )

    # First pass: pooled raw features over every usable candidate.
    pooled_rows: list[dict[str, float]] = []
    pooled_labels: list[bool] = []
    for doc in training_corpus:
        candidates, rows = _raw_pass_one(doc, pass1_set, stats, keyfreq, stops)
        labels = _doc_label_keys(doc)
        for cand, row in zip(candidates, rows):
            pooled_rows.append(row)
            pooled_labels.append(cand.stem_key in labels)

    names1 = FEATURE_SETS[pass1_set]
    discretizers1 = {
        name: _fit_feature(pooled_rows, pooled_labels, name) for name in names1
    }
    ivectors1 = [
        [discretizers1[name].apply(row[name]) for name in names1]
        for row in pooled_rows
    ]
    pass1 = nb_train(
        ivectors1,
        pooled_labels,
        discretizers1,
        pass1_set,
        stats=stats,
        keyfreq=keyfreq,
    )

    if cfg.feature_set not in PASS_ONE_OF:
        return pass1, None

    if provider is None:
        raise ValueError(f"{cfg.feature_set} training needs a hit-count provider")

    # Second pass: re-score each document's pool under the first-pass model.
    pooled_rows2: list[dict[str, float]] = []
    pooled_labels2: list[bool] = []
    for doc in training_corpus:
        ranked = rank_candidates_onepass(doc, pass1, cfg)
        if not ranked:
            continue
        pool, rows = _second_pass_rows(ranked, cfg.feature_set, provider, cfg)
        labels = _doc_label_keys(doc)
        for s, row in zip(pool, rows):
            pooled_rows2.append(row)
            pooled_labels2.append(s.candidate.stem_key in labels)

    names2 = FEATURE_SETS[cfg.feature_set]
    discretizers2 = {
        name: _fit_feature(pooled_rows2, pooled_labels2, name) for name in names2
    }
    ivectors2 = [
        [discretizers2[name].apply(row[name]) for name in names2]
        for row in pooled_rows2
    ]
    pass2 = nb_train(
        ivectors2,
        pooled_labels2,
        discretizers2,
        cfg.feature_set,
        stats=stats,
        keyfreq=keyfreq,
    )
    return pass1, pass2


def _fit_feature(
    rows: list[dict[str, float]], labels: list[bool], name: str
) -> Discretizer:
    return discretize_fit([row[name] for row in rows], labels)


# ---------------------------------------------------------------------------
# Model files: a version line, then flat sections of "name = value" entries
# and tab-separated tables.  Floats are written with repr so a load/save
# cycle reproduces the file byte for byte.

MODEL_FORMAT = "keymine-model v1"


def _format_floats(values: Iterable[float]) -> str:
    return " ".join(repr(float(v)) for v in values)


def save_model(model: NBModel, path: str | Path) -> None:
    lines = [MODEL_FORMAT, f"feature_set = {model.feature_set}"]
    lines.append("[stats]")
    lines.append(f"doc_count = {model.stats.doc_count}")
    for key in sorted(model.stats.doc_freq):
        lines.append(f"{key}\t{model.stats.doc_freq[key]}")
    for name in model.feature_names:
        lines.append(f"[discretizer:{name}]")
        lines.append(f"cuts = {_format_floats(model.discretizers[name].cuts)}".rstrip())
        lines.append(f"[conditional:{name}]")
        lines.append(f"key = {_format_floats(model.cond_key[name])}")
        lines.append(f"not = {_format_floats(model.cond_not[name])}")
    lines.append("[priors]")
    lines.append(f"key = {repr(model.prior_key)}")
    lines.append(f"not = {repr(model.prior_not)}")
    if model.keyfreq is not None:
        lines.append("[keyfreq]")
        for doc_id in sorted(model.keyfreq.doc_keys):
            if "\t" in doc_id:
                raise ValueError(f"document id contains a tab: {doc_id!r}")
            parts = [doc_id] + sorted(model.keyfreq.doc_keys[doc_id])
            lines.append("\t".join(parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> NBModel:
    try:
        return _parse_model(Path(path).read_text(encoding="utf-8"), path)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise ValueError(f"cannot load model from {path}: {exc}") from exc


def _parse_model(text: str, path) -> NBModel:
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_FORMAT:
        raise ValueError("missing or unsupported version line")
    if not lines[1].startswith("feature_set = "):
        raise ValueError("missing feature_set")
    feature_set = lines[1].split(" = ", 1)[1]
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")

    section = None
    doc_count = 0
    doc_freq: dict[str, int] = {}
    discretizers: dict[str, Discretizer] = {}
    cond_key: dict[str, tuple[float, ...]] = {}
    cond_not: dict[str, tuple[float, ...]] = {}
    priors: dict[str, float] = {}
    keyfreq_docs: dict[str, frozenset[str]] = {}
    saw_keyfreq = False

    for line in lines[2:]:
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ValueError(f"bad section header: {line!r}")
            section = line[1:-1]
            if section == "keyfreq":
                saw_keyfreq = True
            continue
        if section == "stats":
            if line.startswith("doc_count = "):
                doc_count = int(line.split(" = ", 1)[1])
            else:
                key, _, value = line.rpartition("\t")
                if not key:
                    raise ValueError(f"bad stats line: {line!r}")
                doc_freq[key] = int(value)
        elif section and section.startswith("discretizer:"):
            name = section.split(":", 1)[1]
            if not line.startswith("cuts ="):
                raise ValueError(f"bad discretizer line: {line!r}")
            text_values = line.split("=", 1)[1].split()
            discretizers[name] = Discretizer(tuple(float(v) for v in text_values))
        elif section and section.startswith("conditional:"):
            name = section.split(":", 1)[1]
            side, _, values = line.partition(" = ")
            table = tuple(float(v) for v in values.split())
            if side == "key":
                cond_key[name] = table
            elif side == "not":
                cond_not[name] = table
            else:
                raise ValueError(f"bad conditional line: {line!r}")
        elif section == "priors":
            side, _, value = line.partition(" = ")
            priors[side] = float(value)
        elif section == "keyfreq":
            parts = line.split("\t")
            keyfreq_docs[parts[0]] = frozenset(parts[1:])
        else:
            raise ValueError(f"content outside any section: {line!r}")

    names = FEATURE_SETS[feature_set]
    for name in names:
        if name not in discretizers:
            raise ValueError(f"missing discretizer for {name}")
        if name not in cond_key or name not in cond_not:
            raise ValueError(f"missing conditionals for {name}")
        expected = discretizers[name].n_intervals
        if len(cond_key[name]) != expected or len(cond_not[name]) != expected:
            raise ValueError(f"conditional width mismatch for {name}")
    if "key" not in priors or "not" not in priors:
        raise ValueError("missing priors")

    keyfreq = None
    if saw_keyfreq:
        counts: dict[str, int] = {}
        for keys in keyfreq_docs.values():
            for key in keys:
                counts[key] = counts.get(key, 0) + 1
        keyfreq = KeyFreqTable(counts=counts, doc_keys=keyfreq_docs)

    return NBModel(
        feature_set=feature_set,
        prior_key=priors["key"],
        prior_not=priors["not"],
        discretizers={name: discretizers[name] for name in names},
        cond_key={name: cond_key[name] for name in names},
        cond_not={name: cond_not[name] for name in names},
        stats=CorpusStats(doc_count=doc_count, doc_freq=doc_freq),
        keyfreq=keyfreq,
    )
