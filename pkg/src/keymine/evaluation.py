"""Evaluation protocols and a two-domain synthetic corpus generator.

Extractions are scored against author keyphrases in two ways: agreement
(matches against the input document's own author phrases) and familiarity
(matches against the author phrases of any document in the test set).  Both
are aggregated into per-output-size curves whose per-document columns feed a
paired t-test.  An overlap report partitions three methods' outputs into
shared and unique phrases, and a search evaluation measures how specific and
how general a document's top phrases are as a conjunctive query against a
document index.

The corpus generator writes documents as shuffled phrase slots separated by
periods: most slots are drawn from a shared general vocabulary and the rest
from the document's domain vocabulary, so phrases of a domain co-occur more
often than independence would predict.  Author keyphrases are drawn from the
domain distribution without replacement and injected into the body a fixed
number of times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as spstats

from .hitindex import AndQuery, PhraseQuery, PositionalIndex, matching_docs, phrase_occurrences
from .model import ExtractionResult
from .textprep import Document, StopList, normalize_raw_phrase, tokenize

__all__ = [
    "agreement",
    "familiarity",
    "author_key_set",
    "author_key_union",
    "AgreementCurve",
    "build_curve",
    "TTestEntry",
    "paired_ttest",
    "compare_curves",
    "OverlapBucket",
    "OverlapReport",
    "overlap_report",
    "search_eval",
    "MethodSearchStats",
    "search_stats",
    "SynthConfig",
    "SynthCorpus",
    "synth_corpus",
    "zipf_weights",
    "pseudoword_vocabulary",
    "build_phrase_vocab",
    "agreement_table",
    "ttest_table",
    "overlap_table",
    "search_table",
]


# ---------------------------------------------------------------------------
# Matching counts

def author_key_set(raw_phrases: Iterable[str]) -> frozenset[str]:
    """Normalized stem keys of a document's author keyphrases."""
    keys = set()
    for raw in raw_phrases:
        normalized = normalize_raw_phrase(raw)
        if normalized:
            keys.add(normalized)
    return frozenset(keys)


def author_key_union(corpus: Iterable[Document]) -> frozenset[str]:
    union: set[str] = set()
    for doc in corpus:
        union |= author_key_set(doc.author_keyphrases)
    return frozenset(union)


def agreement(extracted: ExtractionResult, author: Iterable[str]) -> int:
    """Extracted phrases matching the document's own author phrases.

    Matching is by stem key, so each author phrase can be matched at most
    once even when several extracted spellings collide on one key.
    """
    keys = author_key_set(author)
    return len({item.stem_key for item in extracted} & keys)


def familiarity(extracted: ExtractionResult, test_set_author_keys: Iterable[str]) -> int:
    """Extracted phrases matching any test-set document's author phrases.

    ``test_set_author_keys`` must already be normalized stem keys (see
    ``author_key_union``).
    """
    return len({item.stem_key for item in extracted} & set(test_set_author_keys))


def match_counts(
    items: ExtractionResult, keys: frozenset[str], max_m: int
) -> list[int]:
    """Matches within the top m for every m in 1..max_m."""
    counts = []
    seen: set[str] = set()
    matched = 0
    for m in range(1, max_m + 1):
        if m <= len(items):
            key = items[m - 1].stem_key
            if key in keys and key not in seen:
                matched += 1
            seen.add(key)
        counts.append(matched)
    return counts


@dataclass
class AgreementCurve:
    """Per-document match counts for output sizes 1..max_m.

    ``per_doc[i][m-1]`` is how many of document i's top m phrases matched.
    The same shape serves agreement and familiarity; only the key set used
    to build it differs.
    """

    per_doc: list[list[int]]

    def __post_init__(self):
        if not self.per_doc:
            raise ValueError("curve needs at least one document")
        width = len(self.per_doc[0])
        if width < 1 or any(len(row) != width for row in self.per_doc):
            raise ValueError("per-document rows must share a positive length")

    @property
    def max_m(self) -> int:
        return len(self.per_doc[0])

    @property
    def n_docs(self) -> int:
        return len(self.per_doc)

    def column(self, m: int) -> list[int]:
        if not (1 <= m <= self.max_m):
            raise ValueError(f"m out of range: {m}")
        return [row[m - 1] for row in self.per_doc]

    def mean(self, m: int) -> float:
        column = self.column(m)
        return sum(column) / len(column)

    @property
    def means(self) -> list[float]:
        return [self.mean(m) for m in range(1, self.max_m + 1)]


def build_curve(
    per_doc_items: Sequence[ExtractionResult],
    per_doc_keys: Sequence[frozenset[str]],
    max_m: int = 20,
) -> AgreementCurve:
    """Aggregate one extraction run (at output size >= max_m) into a curve."""
    if len(per_doc_items) != len(per_doc_keys):
        raise ValueError("extractions and key sets must align")
    rows = [
        match_counts(items, keys, max_m)
        for items, keys in zip(per_doc_items, per_doc_keys)
    ]
    return AgreementCurve(rows)


# ---------------------------------------------------------------------------
# Paired t-test

@dataclass(frozen=True)
class TTestEntry:
    mean: float
    t: float
    half_width: float
    significant: bool


def paired_ttest(diffs: Sequence[float]) -> TTestEntry:
    """Two-sided paired t-test at 95% on per-document differences.

    Zero-variance inputs use fixed conventions: all-zero differences give
    t = 0 and no significance; a constant nonzero difference is reported as
    significant with an infinite t.  In every case ``significant`` equals
    |mean| > half_width.
    """
    n = len(diffs)
    if n < 2:
        raise ValueError("paired t-test needs at least two documents")
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
        half_width = 0.0
    else:
        t_crit = float(spstats.t.ppf(0.975, n - 1))
        t = mean / (sd / math.sqrt(n))
        half_width = t_crit * sd / math.sqrt(n)
    return TTestEntry(
        mean=mean, t=t, half_width=half_width, significant=abs(mean) > half_width
    )


def compare_curves(a: AgreementCurve, b: AgreementCurve) -> list[TTestEntry]:
    """Per-m paired t-tests on matched documents (entry i is m = i + 1)."""
    if a.n_docs != b.n_docs or a.max_m != b.max_m:
        raise ValueError("curves must cover the same documents and sizes")
    entries = []
    for m in range(1, a.max_m + 1):
        diffs = [x - y for x, y in zip(a.column(m), b.column(m))]
        entries.append(paired_ttest(diffs))
    return entries


# ---------------------------------------------------------------------------
# Overlap between three methods' outputs

@dataclass
class OverlapBucket:
    """Mean per-document partition of one method's phrases."""

    shared_all: float
    shared_one: dict[str, float]
    unique: float
    total: float


@dataclass
class OverlapReport:
    methods: tuple[str, str, str]
    matched: dict[str, OverlapBucket]
    all_phrases: dict[str, OverlapBucket]


def _partition(
    own: set[str], others: dict[str, set[str]]
) -> tuple[int, dict[str, int], int]:
    names = list(others)
    shared_all = sum(1 for k in own if all(k in others[o] for o in names))
    shared_one = {}
    for name in names:
        rest = [o for o in names if o != name]
        shared_one[name] = sum(
            1
            for k in own
            if k in others[name] and all(k not in others[o] for o in rest)
        )
    unique = sum(1 for k in own if all(k not in others[o] for o in names))
    return shared_all, shared_one, unique


def overlap_report(
    methods: Mapping[str, Sequence[ExtractionResult]],
    author_keys: Sequence[frozenset[str]],
) -> OverlapReport:
    """Partition each method's phrases by how many other methods share them.

    For each document and method, every output phrase is either shared with
    both other methods, shared with exactly one (bucketed by which), or
    unique.  Counts are averaged over documents, once over all phrases and
    once restricted to phrases matching the document's author keys.
    """
    names = tuple(methods)
    if len(names) != 3:
        raise ValueError("overlap report compares exactly three methods")
    n_docs = len(author_keys)
    for name in names:
        if len(methods[name]) != n_docs:
            raise ValueError("every method needs one extraction per document")
    if n_docs == 0:
        raise ValueError("overlap report needs at least one document")

    def build(variant_matched: bool) -> dict[str, OverlapBucket]:
        sums = {
            name: [0.0, {o: 0.0 for o in names if o != name}, 0.0, 0.0]
            for name in names
        }
        for i in range(n_docs):
            sets = {
                name: {item.stem_key for item in methods[name][i]} for name in names
            }
            if variant_matched:
                sets = {name: s & author_keys[i] for name, s in sets.items()}
            for name in names:
                others = {o: sets[o] for o in names if o != name}
                shared_all, shared_one, unique = _partition(sets[name], others)
                sums[name][0] += shared_all
                for o, v in shared_one.items():
                    sums[name][1][o] += v
                sums[name][2] += unique
                sums[name][3] += len(sets[name])
        return {
            name: OverlapBucket(
                shared_all=sums[name][0] / n_docs,
                shared_one={o: v / n_docs for o, v in sums[name][1].items()},
                unique=sums[name][2] / n_docs,
                total=sums[name][3] / n_docs,
            )
            for name in names
        }

    return OverlapReport(
        methods=names, matched=build(True), all_phrases=build(False)
    )


# ---------------------------------------------------------------------------
# Search-based specificity and generality

def _and_all(parts: list[PhraseQuery]):
    query = parts[0]
    for part in parts[1:]:
        query = AndQuery(query, part)
    return query


def search_query(phrases: Sequence[str], mode: str):
    """Conjunctive query over the top phrases, as words or whole phrases."""
    texts = [p for p in phrases if p.strip()]
    if not texts:
        raise ValueError("search evaluation needs at least one phrase")
    if mode == "phrases":
        parts = [PhraseQuery(tuple(p.lower().split())) for p in texts]
    elif mode == "words":
        words: list[str] = []
        for p in texts:
            for w in p.lower().split():
                if w not in words:
                    words.append(w)
        parts = [PhraseQuery((w,)) for w in words]
    else:
        raise ValueError(f"unknown search mode: {mode}")
    return _and_all(parts), parts


def search_eval(
    doc: Document,
    phrases: Sequence[str],
    index: PositionalIndex,
    mode: str,
    top_k: int,
) -> tuple[bool, bool]:
    """Does a conjunction of the phrases retrieve ``doc``, and how widely.

    Returns (source document within the first ``top_k`` ranked matches,
    more than fifty documents matched).  Matches are ranked by the summed
    frequency-times-rarity of the query terms, ties broken by document id.
    """
    query, parts = search_query(phrases, mode)
    matched = matching_docs(index, query)
    over_50 = len(matched) > 50
    if not matched:
        return False, over_50

    doc_count = len(index.doc_sizes)
    scores = {doc_id: 0.0 for doc_id in matched}
    for part in parts:
        occurrences = phrase_occurrences(index, part)
        rarity = -math.log2((len(occurrences) + 1) / (doc_count + 1))
        for doc_id in matched:
            positions = occurrences.get(doc_id)
            if positions:
                scores[doc_id] += len(positions) / index.doc_sizes[doc_id] * rarity
    ranked = sorted(matched, key=lambda d: (-scores[d], d))
    in_top_k = doc.id in ranked[:top_k]
    return in_top_k, over_50


@dataclass(frozen=True)
class MethodSearchStats:
    """Aggregated search outcomes for one method and mode."""

    specificity: float
    specificity_half_width: float
    generality: float
    generality_half_width: float
    n: int


def _proportion_ci(hits: int, n: int) -> tuple[float, float]:
    p = hits / n
    z = float(spstats.norm.ppf(0.975))
    return p, z * math.sqrt(p * (1 - p) / n)


def search_stats(outcomes: Sequence[tuple[bool, bool]]) -> MethodSearchStats:
    """Specificity and generality rates with normal-approximation 95% CIs."""
    n = len(outcomes)
    if n == 0:
        raise ValueError("no search outcomes")
    spec, spec_hw = _proportion_ci(sum(1 for a, _ in outcomes if a), n)
    gen, gen_hw = _proportion_ci(sum(1 for _, b in outcomes if b), n)
    return MethodSearchStats(
        specificity=spec,
        specificity_half_width=spec_hw,
        generality=gen,
        generality_half_width=gen_hw,
        n=n,
    )


# ---------------------------------------------------------------------------
# Synthetic two-domain corpus

@dataclass
class SynthConfig:
    """Generative settings: a shared general vocabulary and one vocabulary
    per domain, each with sampling weights, plus document shape parameters.

    ``domain_mix`` is the fraction of body phrase slots drawn from the
    domain vocabulary rather than the general one.  Author keyphrases are
    sampled from the domain distribution without replacement; each is
    injected ``keyphrase_copies`` extra times into the body."""

    general: tuple[str, ...]
    domain_a: tuple[str, ...]
    domain_b: tuple[str, ...]
    general_weights: tuple[float, ...]
    domain_a_weights: tuple[float, ...]
    domain_b_weights: tuple[float, ...]
    docs_per_domain: int = 150
    phrases_per_doc: int = 60
    domain_mix: float = 0.2
    keyphrases_per_doc: int = 5
    keyphrase_copies: int = 2
    seed: int = 0

    def __post_init__(self):
        for label, vocab, weights in (
            ("general", self.general, self.general_weights),
            ("domain_a", self.domain_a, self.domain_a_weights),
            ("domain_b", self.domain_b, self.domain_b_weights),
        ):
            if not vocab:
                raise ValueError(f"{label} vocabulary is empty")
            if len(vocab) != len(weights):
                raise ValueError(f"{label} weights do not match the vocabulary")
            if any(w <= 0 for w in weights):
                raise ValueError(f"{label} weights must be positive")
            for phrase_text in vocab:
                if not (1 <= len(phrase_text.split()) <= 3):
                    raise ValueError(f"phrases must be 1-3 words: {phrase_text!r}")
        if self.docs_per_domain < 1 or self.phrases_per_doc < 1:
            raise ValueError("document counts must be positive")
        if not (0.0 < self.domain_mix < 1.0):
            raise ValueError("domain_mix must lie strictly between 0 and 1")
        if self.keyphrases_per_doc < 1 or self.keyphrase_copies < 0:
            raise ValueError("bad keyphrase settings")
        if self.keyphrases_per_doc > min(len(self.domain_a), len(self.domain_b)):
            raise ValueError("keyphrases_per_doc exceeds a domain vocabulary")


@dataclass
class SynthCorpus:
    domain_a: list[Document]
    domain_b: list[Document]

    @property
    def all_docs(self) -> list[Document]:
        return self.domain_a + self.domain_b


def _normalized(weights: Sequence[float]) -> np.ndarray:
    array = np.asarray(weights, dtype=float)
    return array / array.sum()


def synth_corpus(cfg: SynthConfig, id_prefix: str = "") -> SynthCorpus:
    """Generate both domains deterministically from the config seed."""
    rng = np.random.default_rng(cfg.seed)
    general_w = _normalized(cfg.general_weights)
    n_dom = max(1, round(cfg.phrases_per_doc * cfg.domain_mix))
    n_gen = cfg.phrases_per_doc - n_dom

    def generate(domain: str, vocab: tuple[str, ...], weights) -> list[Document]:
        dom_w = _normalized(weights)
        docs = []
        for i in range(cfg.docs_per_domain):
            key_idx = rng.choice(len(vocab), size=cfg.keyphrases_per_doc,
                                 replace=False, p=dom_w)
            keys = [vocab[j] for j in key_idx]
            slots = [vocab[j] for j in rng.choice(len(vocab), size=n_dom, p=dom_w)]
            slots += [
                cfg.general[j]
                for j in rng.choice(len(cfg.general), size=n_gen, p=general_w)
            ]
            for key in keys:
                slots += [key] * cfg.keyphrase_copies
            order = rng.permutation(len(slots))
            body = " . ".join(slots[j] for j in order)
            docs.append(
                Document(
                    id=f"{id_prefix}{domain}{i:04d}",
                    tokens=tokenize(body),
                    author_keyphrases=keys,
                )
            )
        return docs

    return SynthCorpus(
        domain_a=generate("a", cfg.domain_a, cfg.domain_a_weights),
        domain_b=generate("b", cfg.domain_b, cfg.domain_b_weights),
    )


def zipf_weights(n: int, exponent: float = 1.1) -> tuple[float, ...]:
    """Unnormalized 1/rank^exponent weights for an n-item vocabulary."""
    if n < 1:
        raise ValueError("need at least one item")
    return tuple(1.0 / (rank**exponent) for rank in range(1, n + 1))


_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


def pseudoword_vocabulary(
    count: int,
    rng: np.random.Generator,
    stops: StopList | None = None,
) -> list[str]:
    """Random pronounceable lowercase words with pairwise distinct stems.

    Words are consonant-vowel syllable strings, filtered so that no word is
    a stop word and no two words collapse to the same stem key.
    """
    words: list[str] = []
    seen_keys: set[str] = set()
    attempts = 0
    while len(words) < count:
        attempts += 1
        if attempts > 200 * count:
            raise ValueError("could not build enough distinct pseudowords")
        syllables = int(rng.integers(2, 4))
        word = "".join(
            _CONSONANTS[rng.integers(len(_CONSONANTS))]
            + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(syllables)
        )
        if stops is not None and word in stops:
            continue
        key = normalize_raw_phrase(word)
        if not key or key in seen_keys:
            continue
        seen_keys.add(key)
        words.append(word)
    return words


def build_phrase_vocab(
    words: Sequence[str],
    n_phrases: int,
    rng: np.random.Generator,
    max_words: int = 2,
) -> list[str]:
    """Distinct multi-word phrases over a word pool, distinct after stemming."""
    phrases: list[str] = []
    seen_keys: set[str] = set()
    attempts = 0
    while len(phrases) < n_phrases:
        attempts += 1
        if attempts > 200 * n_phrases:
            raise ValueError("could not build enough distinct phrases")
        length = int(rng.integers(1, max_words + 1))
        picked = rng.choice(len(words), size=length, replace=False)
        text = " ".join(words[j] for j in picked)
        key = normalize_raw_phrase(text)
        if not key or key in seen_keys:
            continue
        seen_keys.add(key)
        phrases.append(text)
    return phrases


# ---------------------------------------------------------------------------
# Tab-separated report tables

def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".6g")


def agreement_table(curves: Mapping[str, AgreementCurve]) -> list[str]:
    """One row per output size m, one column per labeled curve."""
    labels = list(curves)
    if not labels:
        raise ValueError("no curves")
    max_m = curves[labels[0]].max_m
    for label in labels:
        if curves[label].max_m != max_m:
            raise ValueError("curves must share max_m")
    lines = ["m\t" + "\t".join(labels)]
    for m in range(1, max_m + 1):
        cells = [_fmt(curves[label].mean(m)) for label in labels]
        lines.append(f"{m}\t" + "\t".join(cells))
    return lines


def ttest_table(label_a: str, label_b: str, entries: Sequence[TTestEntry]) -> list[str]:
    lines = [f"# paired t-test: {label_a} minus {label_b}",
             "m\tmean_diff\tt\thalf_width\tsignificant"]
    for m, e in enumerate(entries, start=1):
        lines.append(
            f"{m}\t{_fmt(e.mean)}\t{_fmt(e.t)}\t{_fmt(e.half_width)}\t"
            + ("yes" if e.significant else "no")
        )
    return lines


def overlap_table(report: OverlapReport) -> list[str]:
    header = ["variant", "method", "shared_all"]
    header += [f"shared_only_{name}" for name in report.methods]
    header += ["unique", "total"]
    lines = ["\t".join(header)]
    for variant, buckets in (("matched", report.matched), ("all", report.all_phrases)):
        for name in report.methods:
            bucket = buckets[name]
            cells = [variant, name, _fmt(bucket.shared_all)]
            for other in report.methods:
                if other == name:
                    cells.append("-")
                else:
                    cells.append(_fmt(bucket.shared_one[other]))
            cells += [_fmt(bucket.unique), _fmt(bucket.total)]
            lines.append("\t".join(cells))
    return lines


def search_table(stats_by_run: Mapping[str, MethodSearchStats]) -> list[str]:
    lines = [
        "run\tspecificity\tspec_half_width\tgenerality\tgen_half_width\tn"
    ]
    for label, s in stats_by_run.items():
        lines.append(
            f"{label}\t{_fmt(s.specificity)}\t{_fmt(s.specificity_half_width)}\t"
            f"{_fmt(s.generality)}\t{_fmt(s.generality_half_width)}\t{s.n}"
        )
    return lines
