"""Candidate features and their discretization.

Three families of features are computed for a candidate phrase:

* corpus statistics: within-document frequency scaled by how rare the phrase
  is across a reference corpus, and the relative position of the first
  occurrence;
* how often the phrase was chosen as a keyphrase by the authors of other
  documents (``keyphrase_frequency``);
* co-occurrence strength between the candidate and a document's strongest
  phrases, measured by hit counts from a provider and turned into per-document
  ranks in [0, 1].

Continuous features are discretized by recursive binary splitting: each
candidate cut sits halfway between adjacent distinct values whose label
make-up differs, and a cut is kept only when the class-entropy reduction
clears the minimum-description-length threshold for the segment.  A value
exactly on a cut falls into the lower interval.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .hitindex import AndQuery, HitProvider, NearQuery, PhraseQuery
from .textprep import Candidate, Document, StopList, generate_candidates, normalize_raw_phrase

__all__ = [
    "CorpusStats",
    "KeyFreqTable",
    "tfidf",
    "distance",
    "keyphrase_frequency",
    "rank_normalize",
    "Discretizer",
    "discretize_fit",
    "discretize_apply",
    "QueryVector",
    "QUERY_FEATURE_COUNT",
    "build_query_vectors",
    "build_query_table",
    "QueryFeatureTable",
    "feature_dump_lines",
]


@dataclass
class CorpusStats:
    """Document counts used by ``tfidf``: total documents and, per stem key,
    the number of corpus documents containing the phrase."""

    doc_count: int
    doc_freq: dict[str, int]

    @classmethod
    def fit(cls, corpus: Iterable[Document], stops: StopList) -> "CorpusStats":
        doc_freq: dict[str, int] = {}
        count = 0
        for doc in corpus:
            count += 1
            for cand in generate_candidates(doc, stops):
                doc_freq[cand.stem_key] = doc_freq.get(cand.stem_key, 0) + 1
        return cls(doc_count=count, doc_freq=doc_freq)

    def frequency(self, stem_key: str) -> int:
        return self.doc_freq.get(stem_key, 0)


def tfidf(freq_d: int, size_d: int, stats: CorpusStats, stem_key: str) -> float:
    """Within-document frequency times rarity across the corpus.

    Both the document frequency and the corpus size are incremented by one so
    the logarithm stays finite for unseen phrases and empty corpora.
    """
    if size_d <= 0:
        raise ValueError("document size must be positive")
    if freq_d < 0:
        raise ValueError("phrase frequency cannot be negative")
    rarity = -math.log2((stats.frequency(stem_key) + 1) / (stats.doc_count + 1))
    return (freq_d / size_d) * rarity


def distance(cand: Candidate, doc: Document) -> float:
    """Words before the first occurrence, as a fraction of document length."""
    if doc.word_count == 0:
        raise ValueError("document has no tokens")
    return cand.first_occur / doc.word_count


@dataclass
class KeyFreqTable:
    """How many documents chose each normalized phrase as an author keyphrase.

    Each document contributes at most one count per phrase.  ``doc_keys``
    remembers which document contributed what, so lookups can exclude the
    document being scored."""

    counts: dict[str, int]
    doc_keys: dict[str, frozenset[str]]

    @classmethod
    def fit(cls, corpus: Iterable[Document]) -> "KeyFreqTable":
        counts: dict[str, int] = {}
        doc_keys: dict[str, frozenset[str]] = {}
        for doc in corpus:
            keys = set()
            for raw in doc.author_keyphrases:
                normalized = normalize_raw_phrase(raw)
                if normalized:
                    keys.add(normalized)
            doc_keys[doc.id] = frozenset(keys)
            for key in keys:
                counts[key] = counts.get(key, 0) + 1
        return cls(counts=counts, doc_keys=doc_keys)

    def frequency(self, stem_key: str, doc_id: str) -> int:
        total = self.counts.get(stem_key, 0)
        if stem_key in self.doc_keys.get(doc_id, frozenset()):
            total -= 1
        return total


def keyphrase_frequency(stem_key: str, doc: Document, table: KeyFreqTable) -> int:
    """Documents other than ``doc`` whose authors chose this phrase."""
    return table.frequency(stem_key, doc.id)


def rank_normalize(values: Sequence[float], descending: bool = True) -> list[float]:
    """Competition-rank the values, then map best rank to 1.0, worst to 0.0.

    Equal values share a rank and the next distinct value is ranked as if
    the tied block were spelled out (ranks 1, 3, 2, 3 for 0.8, 0.1, 0.3,
    0.1 descending).  When every value is equal there is a single rank and
    every output is 1.0.
    """
    n = len(values)
    if n == 0:
        return []
    order = sorted(range(n), key=lambda i: values[i], reverse=descending)
    ranks = [0] * n
    current_rank = 0
    previous = None
    for position, i in enumerate(order):
        if previous is None or values[i] != previous:
            current_rank = position + 1
            previous = values[i]
        ranks[i] = current_rank
    worst = max(ranks)
    if worst == 1:
        return [1.0] * n
    return [(worst - r) / (worst - 1) for r in ranks]


@dataclass(frozen=True)
class Discretizer:
    """Sorted cut points; interval ids run 0..len(cuts)."""

    cuts: tuple[float, ...] = ()

    def __post_init__(self):
        if list(self.cuts) != sorted(self.cuts):
            raise ValueError("cut points must be sorted")

    @property
    def n_intervals(self) -> int:
        return len(self.cuts) + 1

    def apply(self, value: float) -> int:
        # bisect_left sends a value equal to a cut into the lower interval.
        return bisect_left(self.cuts, value)


def discretize_apply(disc: Discretizer, value: float) -> int:
    return disc.apply(value)


def _entropy(pos: int, neg: int) -> float:
    total = pos + neg
    if total == 0 or pos == 0 or neg == 0:
        return 0.0
    pp = pos / total
    pn = neg / total
    return -(pp * math.log2(pp) + pn * math.log2(pn))


def _mdl_split(pairs: list[tuple[float, bool]], cuts: list[float]) -> None:
    n = len(pairs)
    if n < 2:
        return
    pos = sum(1 for _, label in pairs if label)
    neg = n - pos
    if pos == 0 or neg == 0:
        return

    # Collapse duplicates into (value, positives, negatives) groups.
    groups: list[list] = []
    for value, label in pairs:
        if groups and groups[-1][0] == value:
            groups[-1][1 if label else 2] += 1
        else:
            groups.append([value, int(label), int(not label)])

    base = _entropy(pos, neg)
    best = None  # (weighted entropy, cut value, rows on the left)
    left_pos = left_neg = left_n = 0
    for g in range(len(groups) - 1):
        value, gpos, gneg = groups[g]
        left_pos += gpos
        left_neg += gneg
        left_n += gpos + gneg
        nvalue, npos, nneg = groups[g + 1]
        both_pure_same = (gpos == 0 and npos == 0) or (gneg == 0 and nneg == 0)
        if both_pure_same:
            continue
        weighted = (
            left_n / n * _entropy(left_pos, left_neg)
            + (n - left_n) / n * _entropy(pos - left_pos, neg - left_neg)
        )
        if best is None or weighted < best[0]:
            best = (weighted, (value + nvalue) / 2, left_n, left_pos, left_neg)

    if best is None:
        return
    weighted, cut, left_n, left_pos, left_neg = best
    right_pos = pos - left_pos
    right_neg = neg - left_neg
    gain = base - weighted
    k = 2
    k1 = (left_pos > 0) + (left_neg > 0)
    k2 = (right_pos > 0) + (right_neg > 0)
    ent1 = _entropy(left_pos, left_neg)
    ent2 = _entropy(right_pos, right_neg)
    delta = math.log2(3**k - 2) - (k * base - k1 * ent1 - k2 * ent2)
    if gain <= (math.log2(n - 1) + delta) / n:
        return

    cuts.append(cut)
    _mdl_split(pairs[:left_n], cuts)
    _mdl_split(pairs[left_n:], cuts)


def discretize_fit(values: Sequence[float], labels: Sequence[bool]) -> Discretizer:
    """Fit cut points by recursive entropy splitting with an MDL stop rule."""
    if len(values) != len(labels):
        raise ValueError("values and labels differ in length")
    pairs = sorted(zip([float(v) for v in values], [bool(l) for l in labels]))
    cuts: list[float] = []
    _mdl_split(pairs, cuts)
    return Discretizer(tuple(sorted(cuts)))


class QueryVector(NamedTuple):
    """Twelve features for one candidate in the co-occurrence feature set."""

    tfidf: float
    distance: float
    baseline_rank: float
    baseline_probability: float
    near_rank_1: float
    near_rank_2: float
    near_rank_3: float
    near_rank_4: float
    cap_rank_1: float
    cap_rank_2: float
    cap_rank_3: float
    cap_rank_4: float


QUERY_FEATURE_COUNT = len(QueryVector._fields)
REFERENCE_PHRASES = 4


@dataclass
class QueryFeatureTable:
    vectors: list[QueryVector]
    raw_near: list[tuple[float | None, ...]]
    raw_cap: list[tuple[float | None, ...]]
    query_phrases: list[str]
    cap_phrases: list[str]


def _cap_form(phrase_text: str) -> str:
    return " ".join(w[:1].upper() + w[1:] for w in phrase_text.split())


def build_query_table(
    top_n: Sequence[Candidate],
    top_k: Sequence[Candidate],
    baseline_probs: Sequence[float],
    provider: HitProvider,
    tfidf_values: Sequence[float],
    distance_values: Sequence[float],
) -> QueryFeatureTable:
    """Compute the full co-occurrence feature table for ranked candidates.

    ``top_n`` must be in first-pass rank order; ``top_k`` holds the reference
    phrases (normally four).  For each candidate the provider answers ten
    queries: the candidate's own hits in lowercase and capitalized form, four
    NEAR numerators against the reference phrases, and four AND numerators
    against the capitalized form.  Ratios with a zero denominator are
    undefined and sort below every defined ratio when the per-document ranks
    are formed.  With fewer than four reference phrases the missing columns
    are entirely undefined, which turns them into constant features.
    """
    if len(top_n) != len(baseline_probs):
        raise ValueError("baseline_probs must align with top_n")
    if len(top_n) != len(tfidf_values) or len(top_n) != len(distance_values):
        raise ValueError("feature columns must align with top_n")
    if len(top_k) > len(top_n):
        raise ValueError("reference phrases must come from the candidate list")

    reference = [c.modal_surface().lower() for c in top_k[:REFERENCE_PHRASES]]
    query_phrases: list[str] = []
    cap_phrases: list[str] = []
    raw_near: list[tuple[float | None, ...]] = []
    raw_cap: list[tuple[float | None, ...]] = []

    for cand in top_n:
        lower_text = cand.modal_surface().lower()
        cap_text = _cap_form(lower_text)
        query_phrases.append(lower_text)
        cap_phrases.append(cap_text)

        lower_q = PhraseQuery(tuple(lower_text.split()))
        cap_q = PhraseQuery(tuple(cap_text.split()), case_sensitive=True)
        lower_den = provider.hits(lower_q)
        cap_den = provider.hits(cap_q)

        near_scores = []
        cap_scores = []
        for j in range(REFERENCE_PHRASES):
            if j >= len(reference):
                near_scores.append(None)
                cap_scores.append(None)
                continue
            ref_q = PhraseQuery(tuple(reference[j].split()))
            near_num = provider.hits(NearQuery(ref_q, lower_q))
            and_num = provider.hits(AndQuery(ref_q, cap_q))
            near_scores.append(near_num / lower_den if lower_den > 0 else None)
            cap_scores.append(and_num / cap_den if cap_den > 0 else None)
        raw_near.append(tuple(near_scores))
        raw_cap.append(tuple(cap_scores))

    def ranked_column(column: list[float | None]) -> list[float]:
        filled = [-math.inf if v is None else v for v in column]
        return rank_normalize(filled, descending=True)

    near_ranks = [
        ranked_column([row[j] for row in raw_near]) for j in range(REFERENCE_PHRASES)
    ]
    cap_ranks = [
        ranked_column([row[j] for row in raw_cap]) for j in range(REFERENCE_PHRASES)
    ]

    vectors = []
    for i in range(len(top_n)):
        vectors.append(
            QueryVector(
                tfidf=float(tfidf_values[i]),
                distance=float(distance_values[i]),
                baseline_rank=float(i + 1),
                baseline_probability=float(baseline_probs[i]),
                near_rank_1=near_ranks[0][i],
                near_rank_2=near_ranks[1][i],
                near_rank_3=near_ranks[2][i],
                near_rank_4=near_ranks[3][i],
                cap_rank_1=cap_ranks[0][i],
                cap_rank_2=cap_ranks[1][i],
                cap_rank_3=cap_ranks[2][i],
                cap_rank_4=cap_ranks[3][i],
            )
        )
    return QueryFeatureTable(
        vectors=vectors,
        raw_near=raw_near,
        raw_cap=raw_cap,
        query_phrases=query_phrases,
        cap_phrases=cap_phrases,
    )


def build_query_vectors(
    top_n: Sequence[Candidate],
    top_k: Sequence[Candidate],
    baseline_probs: Sequence[float],
    provider: HitProvider,
    tfidf_values: Sequence[float],
    distance_values: Sequence[float],
) -> list[QueryVector]:
    return build_query_table(
        top_n, top_k, baseline_probs, provider, tfidf_values, distance_values
    ).vectors


def feature_dump_lines(
    doc_id: str,
    rows: Iterable[tuple[str, Sequence[float | None], Sequence[float], Sequence[int]]],
) -> list[str]:
    """Tab-separated dump: doc id, stem key, raw values, normalized values,
    interval ids.  Undefined raw values print as ``NA``."""
    lines = []
    for stem_key, raw, normalized, intervals in rows:
        cells = [doc_id, stem_key]
        cells += ["NA" if v is None else format(float(v), ".6g") for v in raw]
        cells += [format(float(v), ".6g") for v in normalized]
        cells += [str(int(v)) for v in intervals]
        lines.append("\t".join(cells))
    return lines
