"""Association strength between a problem phrase and candidate choices.

Given hit counts from any provider, two ratio scores measure how strongly a
choice phrase co-occurs with a problem phrase: ``score1`` uses plain
document co-occurrence (AND) and ``score2`` uses proximity (NEAR within ten
words), each divided by the choice's own hit count so common words are not
rewarded for being common.  ``pmi`` is the log-scale version normalized by
corpus size; all three agree on which choice wins when every count is
positive, because for a fixed problem they are monotone transforms of each
other.

A score with a zero denominator is undefined rather than zero or infinite;
undefined scores rank below every defined score when choosing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hitindex import AndQuery, HitProvider, NearQuery, phrase

__all__ = [
    "AssocScore",
    "SynonymQuestion",
    "score1",
    "score2",
    "pmi",
    "choose_synonym",
    "format_score_table",
]


@dataclass(frozen=True)
class AssocScore:
    numerator_hits: int
    denominator_hits: int

    @property
    def defined(self) -> bool:
        return self.denominator_hits > 0

    @property
    def value(self) -> float | None:
        if not self.defined:
            return None
        return self.numerator_hits / self.denominator_hits


@dataclass(frozen=True)
class SynonymQuestion:
    problem: str
    choices: tuple[str, ...]

    def __post_init__(self):
        if not self.problem.strip():
            raise ValueError("problem phrase is empty")
        cleaned = tuple(c.strip() for c in self.choices)
        if len(cleaned) < 2:
            raise ValueError("need at least two choices")
        if any(not c for c in cleaned):
            raise ValueError("choices must be non-empty")
        if len(set(cleaned)) != len(cleaned):
            raise ValueError("choices must be distinct")
        object.__setattr__(self, "choices", cleaned)


def score1(problem: str, choice: str, provider: HitProvider) -> AssocScore:
    """Document co-occurrence with the problem, relative to the choice."""
    numerator = provider.hits(AndQuery(phrase(problem), phrase(choice)))
    denominator = provider.hits(phrase(choice))
    return AssocScore(numerator, denominator)


def score2(problem: str, choice: str, provider: HitProvider) -> AssocScore:
    """Proximity co-occurrence (NEAR) with the problem, relative to the choice."""
    numerator = provider.hits(NearQuery(phrase(problem), phrase(choice)))
    denominator = provider.hits(phrase(choice))
    return AssocScore(numerator, denominator)


def pmi(problem: str, choice: str, provider: HitProvider) -> float | None:
    """Pointwise mutual information in bits; None when any count is zero."""
    total = provider.total_docs()
    p_hits = provider.hits(phrase(problem))
    c_hits = provider.hits(phrase(choice))
    joint = provider.hits(AndQuery(phrase(problem), phrase(choice)))
    if total <= 0 or p_hits == 0 or c_hits == 0 or joint == 0:
        return None
    return math.log2((joint / total) / ((p_hits / total) * (c_hits / total)))


def choose_synonym(question: SynonymQuestion, provider: HitProvider) -> str:
    """Choice with the highest proximity score; earliest listed wins ties.

    Raises ``ValueError`` when every choice's score is undefined.
    """
    best: str | None = None
    best_value = -math.inf
    for choice in question.choices:
        value = score2(question.problem, choice, provider).value
        if value is not None and value > best_value:
            best, best_value = choice, value
    if best is None:
        raise ValueError("every choice has an undefined score")
    return best


def format_score_table(
    problem: str, choices: tuple[str, ...], provider: HitProvider
) -> str:
    """Fixed-width table of NEAR-based scores for each choice."""
    rows = []
    for choice in choices:
        s = score2(problem, choice, provider)
        rows.append((choice, s.numerator_hits, s.denominator_hits, s.value))
    defined = [r for r in rows if r[3] is not None]
    winner = max(defined, key=lambda r: r[3])[0] if defined else None

    width = max([len("choice")] + [len(r[0]) for r in rows])
    lines = [f"{'choice':<{width}}  {'near-hits':>12}  {'hits':>12}  {'score':>12}"]
    for choice, num, den, value in rows:
        shown = "undefined" if value is None else f"{value:.7f}"
        mark = " *" if choice == winner else ""
        lines.append(f"{choice:<{width}}  {num:>12}  {den:>12}  {shown:>12}{mark}")
    return "\n".join(lines)
