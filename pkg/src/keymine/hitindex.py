"""Positional document index and hit-count providers.

``hits`` answers "how many documents satisfy this query" for three query
forms: a consecutive-word phrase (case-insensitive or exact-case), the AND of
two subqueries, and NEAR, which requires two phrases to occur in the same
document separated by at most ``window`` intervening words.  The gap for NEAR
is the number of words strictly between the nearest ends of the two phrase
occurrences; occurrences that overlap do not satisfy NEAR at all.  Hit counts
always count documents, not occurrences.

Providers wrap the counting behind a small interface so callers do not care
whether counts come from a local index, a persistent cache, or a remote
service.  The cache file holds one record per line: the canonical query form,
a tab, and the count.  A remote provider never invents a count: failures
surface as :class:`ProviderError` after bounded retries.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .textprep import Document

log = logging.getLogger(__name__)

DEFAULT_NEAR_WINDOW = 10

__all__ = [
    "QueryError",
    "ProviderError",
    "PhraseQuery",
    "AndQuery",
    "NearQuery",
    "Query",
    "phrase",
    "parse_query",
    "PositionalIndex",
    "build_index",
    "phrase_occurrences",
    "matching_docs",
    "hits",
    "HitProvider",
    "IndexHitProvider",
    "FixedCountProvider",
    "CachedHitProvider",
    "cached",
    "RemoteHitProvider",
]


class QueryError(ValueError):
    """Malformed query structure."""


class ProviderError(RuntimeError):
    """A hit-count provider could not produce an answer."""


@dataclass(frozen=True)
class PhraseQuery:
    words: tuple[str, ...]
    case_sensitive: bool = False

    def __post_init__(self):
        if not self.words:
            raise QueryError("phrase query needs at least one word")
        cleaned = []
        for word in self.words:
            if not word or any(c.isspace() for c in word):
                raise QueryError(f"bad phrase word: {word!r}")
            cleaned.append(word if self.case_sensitive else word.lower())
        object.__setattr__(self, "words", tuple(cleaned))

    def canonical(self) -> str:
        mode = "cs" if self.case_sensitive else "ci"
        return f"PHRASE{mode}:{' '.join(self.words)}"


@dataclass(frozen=True)
class AndQuery:
    left: "Query"
    right: "Query"

    def canonical(self) -> str:
        return f"AND({self.left.canonical()},{self.right.canonical()})"


@dataclass(frozen=True)
class NearQuery:
    first: PhraseQuery
    second: PhraseQuery
    window: int = DEFAULT_NEAR_WINDOW

    def __post_init__(self):
        if not isinstance(self.first, PhraseQuery) or not isinstance(self.second, PhraseQuery):
            raise QueryError("NEAR operands must be phrase queries")
        if self.window < 0:
            raise QueryError("NEAR window must be non-negative")

    def canonical(self) -> str:
        return f"NEAR{self.window}({self.first.canonical()},{self.second.canonical()})"


Query = Union[PhraseQuery, AndQuery, NearQuery]


def phrase(text: str, case_sensitive: bool = False) -> PhraseQuery:
    """Build a phrase query from space-separated words."""
    return PhraseQuery(tuple(text.split()), case_sensitive=case_sensitive)


def parse_query(canonical: str) -> Query:
    """Inverse of ``Query.canonical`` (used when replaying cache files)."""
    text = canonical.strip()
    if text.startswith("PHRASEcs:"):
        return phrase(text[len("PHRASEcs:"):], case_sensitive=True)
    if text.startswith("PHRASEci:"):
        return phrase(text[len("PHRASEci:"):], case_sensitive=False)
    for name in ("AND", "NEAR"):
        if not text.startswith(name):
            continue
        head, sep, _ = text.partition("(")
        if not sep or not text.endswith(")"):
            break
        if name == "AND" and head != "AND":
            continue
        if name == "NEAR" and not head[len("NEAR"):].isdigit():
            continue
        inner = text[len(head) + 1 : -1]
        depth = 0
        for i, c in enumerate(inner):
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
            elif c == "," and depth == 0:
                left, right = parse_query(inner[:i]), parse_query(inner[i + 1 :])
                if name == "AND":
                    return AndQuery(left, right)
                window = int(head[len("NEAR"):])
                if not isinstance(left, PhraseQuery) or not isinstance(right, PhraseQuery):
                    raise QueryError(f"NEAR operands must be phrases: {canonical!r}")
                return NearQuery(left, right, window=window)
    raise QueryError(f"cannot parse query: {canonical!r}")


class PositionalIndex:
    """Map each term to the positions where it occurs, per document.

    ``postings`` is keyed by the lowercased term; ``case_postings`` by the
    exact spelling, so exact-case postings are always a subset of the
    case-insensitive ones.  Position lists are ascending by construction.
    """

    def __init__(self):
        self.doc_count = 0
        self.doc_sizes: dict[str, int] = {}
        self.postings: dict[str, dict[str, list[int]]] = {}
        self.case_postings: dict[str, dict[str, list[int]]] = {}
        self._phrase_memo: dict[str, dict[str, list[int]]] = {}

    def add_document(self, doc: Document) -> None:
        if doc.id in self.doc_sizes:
            raise ValueError(f"duplicate document id: {doc.id}")
        self.doc_sizes[doc.id] = doc.word_count
        self.doc_count += 1
        for tok in doc.tokens:
            self.postings.setdefault(tok.lower, {}).setdefault(doc.id, []).append(
                tok.position
            )
            self.case_postings.setdefault(tok.surface, {}).setdefault(
                doc.id, []
            ).append(tok.position)
        self._phrase_memo.clear()

    def doc_frequency(self, term: str) -> int:
        return len(self.postings.get(term.lower(), {}))


def build_index(corpus: list[Document]) -> PositionalIndex:
    index = PositionalIndex()
    for doc in corpus:
        index.add_document(doc)
    return index


def phrase_occurrences(index: PositionalIndex, pq: PhraseQuery) -> dict[str, list[int]]:
    """Start positions of every occurrence of the phrase, per document."""
    key = pq.canonical()
    memo = index._phrase_memo
    found = memo.get(key)
    if found is not None:
        return found

    source = index.case_postings if pq.case_sensitive else index.postings
    first = source.get(pq.words[0], {})
    if len(pq.words) == 1:
        result = {doc: list(pos) for doc, pos in first.items()}
    else:
        rest = [source.get(w, {}) for w in pq.words[1:]]
        result = {}
        for doc, positions in first.items():
            follow = []
            for offsets in rest:
                plist = offsets.get(doc)
                if plist is None:
                    follow = None
                    break
                follow.append(set(plist))
            if follow is None:
                continue
            starts = [
                p for p in positions if all(p + k + 1 in s for k, s in enumerate(follow))
            ]
            if starts:
                result[doc] = starts
    memo[key] = result
    return result


def _near_satisfied(
    occ1: list[int], len1: int, occ2: list[int], len2: int, window: int
) -> bool:
    for s1 in occ1:
        e1 = s1 + len1 - 1
        for s2 in occ2:
            e2 = s2 + len2 - 1
            if e1 < s2:
                gap = s2 - e1 - 1
            elif e2 < s1:
                gap = s1 - e2 - 1
            else:
                continue  # overlapping occurrences never satisfy NEAR
            if gap <= window:
                return True
    return False


def matching_docs(index: PositionalIndex, q: Query) -> set[str]:
    if isinstance(q, PhraseQuery):
        return set(phrase_occurrences(index, q))
    if isinstance(q, AndQuery):
        left = matching_docs(index, q.left)
        if not left:
            return set()
        return left & matching_docs(index, q.right)
    if isinstance(q, NearQuery):
        occ1 = phrase_occurrences(index, q.first)
        occ2 = phrase_occurrences(index, q.second)
        len1 = len(q.first.words)
        len2 = len(q.second.words)
        docs = set()
        for doc in occ1.keys() & occ2.keys():
            if _near_satisfied(occ1[doc], len1, occ2[doc], len2, q.window):
                docs.add(doc)
        return docs
    raise QueryError(f"unknown query type: {type(q).__name__}")


def hits(index: PositionalIndex, q: Query) -> int:
    """Number of documents satisfying the query."""
    return len(matching_docs(index, q))


class HitProvider:
    """Interface of anything that can answer hit-count queries."""

    def total_docs(self) -> int:
        raise NotImplementedError

    def hits(self, q: Query) -> int:
        raise NotImplementedError


class IndexHitProvider(HitProvider):
    """Counts straight from a local index; tracks how many queries it saw."""

    def __init__(self, index: PositionalIndex):
        self.index = index
        self.query_count = 0

    def total_docs(self) -> int:
        return self.index.doc_count

    def hits(self, q: Query) -> int:
        self.query_count += 1
        return hits(self.index, q)


class FixedCountProvider(HitProvider):
    """Fixed counts keyed by canonical query form (stub for offline use)."""

    def __init__(self, counts: dict[str, int], total: int, default: int = 0):
        self.counts = dict(counts)
        self.total = total
        self.default = default
        self.query_count = 0

    def total_docs(self) -> int:
        return self.total

    def hits(self, q: Query) -> int:
        self.query_count += 1
        return self.counts.get(q.canonical(), self.default)


class CachedHitProvider(HitProvider):
    """Write-through persistent cache in front of another provider.

    The file format is one record per line, ``canonical-query<TAB>count``.
    An unreadable or malformed file is discarded and rebuilt with a warning;
    writes are serialized under a lock.
    """

    def __init__(self, backend: HitProvider, cache_path: str | Path):
        self.backend = backend
        self.path = Path(cache_path)
        self._lock = threading.Lock()
        self._counts: dict[str, int] = {}
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        loaded: dict[str, int] = {}
        try:
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    query_text, sep, count_text = line.rpartition("\t")
                    count = int(count_text)
                    if not sep or not query_text or count < 0:
                        raise ValueError(f"bad cache record: {line!r}")
                    loaded[query_text] = count
        except (OSError, ValueError, UnicodeDecodeError) as exc:
            log.warning("hit cache %s is corrupt (%s); rebuilding", self.path, exc)
            self.path.write_text("", encoding="utf-8")
            self._counts = {}
            return
        self._counts = loaded

    def total_docs(self) -> int:
        return self.backend.total_docs()

    def hits(self, q: Query) -> int:
        key = q.canonical()
        with self._lock:
            if key in self._counts:
                return self._counts[key]
        count = self.backend.hits(q)
        with self._lock:
            if key not in self._counts:
                self._counts[key] = count
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(f"{key}\t{count}\n")
            return self._counts[key]

    def __len__(self) -> int:
        return len(self._counts)


def cached(provider: HitProvider, cache_path: str | Path) -> CachedHitProvider:
    return CachedHitProvider(provider, cache_path)


class RemoteHitProvider(HitProvider):
    """Hit counts from an HTTP endpoint.

    ``endpoint_template`` must contain ``{query}``, replaced by the
    percent-encoded canonical query.  The response body is searched with
    ``count_pattern`` (first group if the pattern has one, else the whole
    match) and parsed as an integer.  Requests are spaced to at most
    ``rate_limit`` per second and retried ``retries`` times; a request that
    still fails raises :class:`ProviderError` rather than pretending the
    count was zero.
    """

    def __init__(
        self,
        endpoint_template: str,
        total: int | None = None,
        rate_limit: float = 1.0,
        retries: int = 3,
        count_pattern: str = r"-?\d+",
        timeout: float = 10.0,
    ):
        if "{query}" not in endpoint_template:
            raise ValueError("endpoint template must contain {query}")
        self.endpoint_template = endpoint_template
        self.total = total
        self.retries = retries
        self.count_re = re.compile(count_pattern)
        self.timeout = timeout
        self.query_count = 0
        self._min_interval = 1.0 / rate_limit if rate_limit > 0 else 0.0
        self._last_request = 0.0
        self._lock = threading.Lock()

    def total_docs(self) -> int:
        if self.total is None:
            raise ProviderError("remote provider was not configured with a corpus size")
        return self.total

    def _wait_turn(self) -> None:
        with self._lock:
            now = time.monotonic()
            wait = self._last_request + self._min_interval - now
            if wait > 0:
                time.sleep(wait)
                now = time.monotonic()
            self._last_request = now

    def hits(self, q: Query) -> int:
        url = self.endpoint_template.replace(
            "{query}", urllib.parse.quote(q.canonical(), safe="")
        )
        self.query_count += 1
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            self._wait_turn()
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    body = resp.read().decode("utf-8", "replace")
                found = self.count_re.search(body)
                if not found:
                    raise ValueError(f"no count in response: {body[:80]!r}")
                text = found.group(1) if found.groups() else found.group(0)
                count = int(text)
                if count < 0:
                    raise ValueError(f"negative count in response: {count}")
                return count
            except Exception as exc:  # retried; surfaced if retries run out
                last_error = exc
        raise ProviderError(f"hit query failed after {self.retries + 1} attempts: {url}") from last_error


def save_index(index: PositionalIndex, path: str | Path) -> None:
    """Serialize deterministically (same index, same bytes)."""
    payload = {
        "format": "keymine-index v1",
        "doc_sizes": index.doc_sizes,
        "postings": index.postings,
        "case_postings": index.case_postings,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_index(path: str | Path) -> PositionalIndex:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != "keymine-index v1":
            raise ValueError("unrecognized index format")
        index = PositionalIndex()
        index.doc_sizes = {str(k): int(v) for k, v in payload["doc_sizes"].items()}
        index.doc_count = len(index.doc_sizes)
        index.postings = {
            term: {doc: [int(p) for p in pos] for doc, pos in docs.items()}
            for term, docs in payload["postings"].items()
        }
        index.case_postings = {
            term: {doc: [int(p) for p in pos] for doc, pos in docs.items()}
            for term, docs in payload["case_postings"].items()
        }
        return index
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot load index from {path}: {exc}") from exc
