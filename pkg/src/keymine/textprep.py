"""Tokenization, phrase normalization, and candidate phrase generation.

This module turns raw text into the structures the rest of the package works
with: position-numbered tokens, documents, and candidate phrases of one to
three words.  Candidate windows never cross a punctuation boundary, never
contain a stop word or a token with a digit, and are grouped under a stem key
produced by case folding and stemming each word, so spelling variants of the
same phrase collapse into a single candidate.

A hyphen splits a word into two tokens without creating a phrase boundary, so
a hyphenated compound can still form a two-word candidate.  All other
punctuation terminates the token before it and marks a boundary before the
next token; sentence-ending punctuation additionally marks the next token as
sentence-initial, which the proper-noun heuristic relies on.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .lovins import iterated_lovins_stem

__all__ = [
    "CapPattern",
    "Token",
    "Document",
    "StopList",
    "Candidate",
    "tokenize",
    "normalize_phrase",
    "normalize_raw_phrase",
    "generate_candidates",
    "detect_proper_noun",
    "default_stoplist",
    "load_document",
    "load_corpus",
    "iterated_lovins_stem",
]

MAX_PHRASE_WORDS = 3

_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_PIECE = re.compile(r"[^\W_]+(?:'[^\W_]+)*|\S")
_SENTENCE_END = frozenset(".!?")


class CapPattern(str, Enum):
    ALL_LOWER = "all_lower"
    INITIAL_CAP = "initial_cap"
    ALL_CAPS = "all_caps"
    MIXED = "mixed"


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    position: int
    boundary_before: bool
    sentence_initial: bool
    cap_pattern: CapPattern


@dataclass
class Document:
    id: str
    tokens: list[Token]
    author_keyphrases: list[str] = field(default_factory=list)

    @property
    def word_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class StopList:
    words: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "StopList":
        return cls(frozenset(w.lower() for w in words))

    @classmethod
    def from_text(cls, text: str) -> "StopList":
        words = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                words.append(line)
        return cls.from_words(words)

    @classmethod
    def from_file(cls, path: str | Path) -> "StopList":
        return cls.from_text(Path(path).read_text("utf-8"))


_DEFAULT_STOPLIST: StopList | None = None


def default_stoplist() -> StopList:
    """Packaged list of common English function words (one per line)."""
    global _DEFAULT_STOPLIST
    if _DEFAULT_STOPLIST is None:
        text = resources.files("keymine.data").joinpath("stopwords.txt").read_text("utf-8")
        _DEFAULT_STOPLIST = StopList.from_text(text)
    return _DEFAULT_STOPLIST


def _cap_pattern(surface: str) -> CapPattern:
    letters = [c for c in surface if c.isalpha()]
    if not letters:
        return CapPattern.ALL_LOWER
    if all(c.isupper() for c in letters):
        return CapPattern.ALL_CAPS
    if all(c.islower() for c in letters):
        return CapPattern.ALL_LOWER
    if letters[0].isupper() and surface[0] == letters[0] and all(c.islower() for c in letters[1:]):
        return CapPattern.INITIAL_CAP
    return CapPattern.MIXED


def tokenize(text: str) -> list[Token]:
    """Split text into tokens with boundary and capitalization annotations."""
    tokens: list[Token] = []
    boundary = False
    sentence = True
    for match in _PIECE.finditer(text):
        piece = match.group()
        if _WORD.fullmatch(piece):
            tokens.append(
                Token(
                    surface=piece,
                    lower=piece.lower(),
                    position=len(tokens),
                    boundary_before=boundary,
                    sentence_initial=sentence,
                    cap_pattern=_cap_pattern(piece),
                )
            )
            boundary = False
            sentence = False
        elif piece == "-":
            # Hyphens split words without interrupting the phrase window.
            continue
        else:
            boundary = True
            if piece in _SENTENCE_END:
                sentence = True
    return tokens


def normalize_phrase(words: Sequence[str]) -> str:
    """Case-fold and stem each word; join with single spaces."""
    if not words:
        raise ValueError("cannot normalize an empty phrase")
    stems = []
    for word in words:
        if not word:
            raise ValueError("cannot normalize a phrase with an empty word")
        stems.append(iterated_lovins_stem(word.lower()))
    return " ".join(stems)


def normalize_raw_phrase(raw: str) -> str:
    """Normalize free text (for example an author's keyphrase line).

    The text passes through the same tokenizer as document bodies so that
    hyphenation and punctuation are treated identically.  Returns an empty
    string when the text contains no tokens.
    """
    tokens = tokenize(raw)
    if not tokens:
        return ""
    return normalize_phrase([t.lower for t in tokens])


@dataclass
class Candidate:
    stem_key: str
    num_words: int
    freq: int
    first_occur: int
    surface_forms: Counter
    occurrences: tuple[int, ...]
    proper_noun: bool = False

    def modal_surface(self) -> str:
        """Most frequent original spelling; earliest seen wins ties."""
        best = ""
        best_count = -1
        for form, count in self.surface_forms.items():
            if count > best_count:
                best, best_count = form, count
        return best


def generate_candidates(
    doc: Document, stops: StopList, max_words: int = MAX_PHRASE_WORDS
) -> list[Candidate]:
    """Enumerate candidate phrases of ``doc`` grouped by stem key.

    A window qualifies when it has one to ``max_words`` tokens, no token
    after the first carries ``boundary_before``, and no token is a stop word
    or contains a digit.  Occurrences of a key are counted left to right
    without overlap; ``first_occur`` is the position of the earliest window.
    The result is ordered by first occurrence, then stem key.
    """
    tokens = doc.tokens
    n = len(tokens)
    usable = [
        t.lower not in stops and not any(c.isdigit() for c in t.lower) for t in tokens
    ]

    starts: dict[str, list[int]] = {}
    width: dict[str, int] = {}
    for start in range(n):
        if not usable[start]:
            continue
        stems = []
        for length in range(1, max_words + 1):
            idx = start + length - 1
            if idx >= n:
                break
            tok = tokens[idx]
            if length > 1 and (tok.boundary_before or not usable[idx]):
                break
            stems.append(iterated_lovins_stem(tok.lower))
            key = " ".join(stems)
            starts.setdefault(key, []).append(start)
            width[key] = length

    candidates = []
    for key, positions in starts.items():
        num_words = width[key]
        counted = []
        next_free = 0
        for pos in positions:
            if pos >= next_free:
                counted.append(pos)
                next_free = pos + num_words
        surfaces = Counter(
            " ".join(tokens[i].surface for i in range(pos, pos + num_words))
            for pos in counted
        )
        cand = Candidate(
            stem_key=key,
            num_words=num_words,
            freq=len(counted),
            first_occur=positions[0],
            surface_forms=surfaces,
            occurrences=tuple(counted),
        )
        cand.proper_noun = detect_proper_noun(cand, doc)
        candidates.append(cand)

    candidates.sort(key=lambda c: (c.first_occur, c.stem_key))
    return candidates


def detect_proper_noun(cand: Candidate, doc: Document) -> bool:
    """True when every occurrence is fully capitalized and at least one
    occurrence does not start a sentence (so the capitals are not explained
    by sentence position alone)."""
    tokens = doc.tokens
    capitalized = (CapPattern.INITIAL_CAP, CapPattern.ALL_CAPS)
    witness = False
    for pos in cand.occurrences:
        window = tokens[pos : pos + cand.num_words]
        if any(t.cap_pattern not in capitalized for t in window):
            return False
        if not window[0].sentence_initial:
            witness = True
    return witness


def load_document(txt_path: str | Path) -> Document:
    """Read ``<id>.txt`` and, when present, the sibling ``<id>.key`` file
    holding one author keyphrase per line."""
    txt_path = Path(txt_path)
    text = txt_path.read_text("utf-8")
    keys: list[str] = []
    key_path = txt_path.with_suffix(".key")
    if key_path.exists():
        for line in key_path.read_text("utf-8").splitlines():
            line = line.strip()
            if line:
                keys.append(line)
    return Document(id=txt_path.stem, tokens=tokenize(text), author_keyphrases=keys)


def load_corpus(directory: str | Path) -> list[Document]:
    """Load every ``*.txt`` document under ``directory`` in sorted order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {directory}")
    return [load_document(p) for p in sorted(directory.glob("*.txt"))]
