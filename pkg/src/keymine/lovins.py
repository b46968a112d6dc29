"""Lovins stemmer, applied repeatedly until the output stops changing.

The single-pass stemmer is J. B. Lovins' 1968 algorithm: remove the longest
matching ending from a fixed table (subject to a per-ending contextual
condition and a universal minimum stem length of two letters), then tidy the
result by undoubling a terminal double consonant and applying one respelling
rule.  A single pass strips only one ending, so "agreements" needs two passes
to reach "agr"; iterating to a fixed point makes stems of morphological
relatives agree far more often.  Iteration is capped defensively, although in
practice a handful of passes suffices because each pass shortens the word or
leaves it alone.
"""

from __future__ import annotations

from functools import lru_cache

MAX_ROUNDS = 16
MIN_STEM = 2

# Ending table.  Each ending maps to the key of the condition that the
# remaining stem must satisfy before the ending may be removed.
ENDINGS = {
    # length 11
    "alistically": "B", "arizability": "A", "izationally": "B",
    # length 10
    "antialness": "A", "arisations": "A", "arizations": "A", "entialness": "A",
    # length 9
    "allically": "C", "antaneous": "A", "antiality": "A", "arisation": "A",
    "arization": "A", "ationally": "B", "ativeness": "A", "eableness": "E",
    "entations": "A", "entiality": "A", "entialize": "A", "entiation": "A",
    "ionalness": "A", "istically": "A", "itousness": "A", "izability": "A",
    "izational": "A",
    # length 8
    "ableness": "A", "arizable": "A", "entation": "A", "entially": "A",
    "eousness": "A", "ibleness": "A", "icalness": "A", "ionalism": "A",
    "ionality": "A", "ionalize": "A", "iousness": "A", "izations": "B",
    "lessness": "A",
    # length 7
    "ability": "A", "aically": "A", "alistic": "B", "alities": "A",
    "ariness": "E", "aristic": "A", "arizing": "A", "ateness": "A",
    "atingly": "A", "ational": "B", "atively": "A", "ativism": "A",
    "eliness": "E", "entally": "A", "entials": "A", "entiate": "A",
    "entness": "A", "fulness": "A", "ibility": "A", "icalism": "A",
    "icalist": "A", "icality": "A", "icalize": "A", "ication": "G",
    "icianry": "A", "ination": "A", "ingness": "A", "ionally": "A",
    "isation": "A", "ishness": "A", "istical": "A", "iteness": "A",
    "iveness": "A", "ivistic": "A", "ivities": "A", "ization": "F",
    "izement": "A", "oidally": "A", "ousness": "A",
    # length 6
    "aceous": "A", "acious": "B", "action": "G", "alness": "A",
    "ancial": "A", "ancies": "A", "ancing": "B", "ariser": "A",
    "arized": "A", "arizer": "A", "atable": "A", "ations": "B",
    "atives": "A", "eature": "Z", "efully": "A", "encies": "A",
    "encing": "A", "ential": "A", "enting": "C", "entist": "A",
    "eously": "A", "ialist": "A", "iality": "A", "ialize": "A",
    "ically": "A", "icance": "A", "icians": "A", "icists": "A",
    "ifully": "A", "ionals": "A", "ionate": "D", "ioning": "A",
    "ionist": "A", "iously": "A", "istics": "A", "izable": "E",
    "lessly": "A", "nesses": "A", "oidism": "A",
    # length 5
    "acies": "A", "acity": "A", "aging": "B", "aical": "A",
    "alist": "A", "alism": "B", "ality": "A", "alize": "A",
    "allic": "BB", "anced": "B", "ances": "B", "antic": "C",
    "arial": "A", "aries": "A", "arily": "A", "arity": "B",
    "arize": "A", "aroid": "A", "ately": "A", "ating": "I",
    "ation": "B", "ative": "A", "ators": "A", "atory": "A",
    "ature": "E", "early": "Y", "ehood": "A", "eless": "A",
    "elity": "A", "ement": "A", "enced": "A", "ences": "A",
    "eness": "E", "ening": "E", "ental": "A", "ented": "C",
    "ently": "A", "fully": "A", "ially": "A", "icant": "A",
    "ician": "A", "icide": "A", "icism": "A", "icist": "A",
    "icity": "A", "idine": "I", "iedly": "A", "ihood": "A",
    "inate": "A", "iness": "A", "ingly": "B", "inism": "J",
    "inity": "CC", "ional": "A", "ioned": "A", "ished": "A",
    "istic": "A", "ities": "A", "itous": "A", "ively": "A",
    "ivity": "A", "izers": "F", "izing": "F", "oidal": "A",
    "oides": "A", "otide": "A", "ously": "A",
    # length 4
    "able": "A", "ably": "A", "ages": "B", "ally": "B",
    "ance": "B", "ancy": "B", "ants": "B", "aric": "A",
    "arly": "K", "ated": "I", "ates": "A", "atic": "B",
    "ator": "A", "ealy": "Y", "edly": "E", "eful": "A",
    "eity": "A", "ence": "A", "ency": "A", "ened": "E",
    "enly": "E", "eous": "A", "hood": "A", "ials": "A",
    "ians": "A", "ible": "A", "ibly": "A", "ical": "A",
    "ides": "L", "iers": "A", "iful": "A", "ines": "M",
    "ings": "N", "ions": "B", "ious": "A", "isms": "B",
    "ists": "A", "itic": "H", "ized": "F", "izer": "F",
    "less": "A", "lily": "A", "ness": "A", "ogen": "A",
    "ward": "A", "wise": "A", "ying": "B", "yish": "A",
    # length 3
    "acy": "A", "age": "B", "aic": "A", "als": "BB",
    "ant": "B", "ars": "O", "ary": "F", "ata": "A",
    "ate": "A", "eal": "Y", "ear": "Y", "ely": "E",
    "ene": "E", "ent": "C", "ery": "E", "ese": "A",
    "ful": "A", "ial": "A", "ian": "A", "ics": "A",
    "ide": "L", "ied": "A", "ier": "A", "ies": "P",
    "ily": "A", "ine": "M", "ing": "N", "ion": "Q",
    "ish": "C", "ism": "B", "ist": "A", "ite": "AA",
    "ity": "A", "ium": "A", "ive": "A", "ize": "F",
    "oid": "A", "one": "R", "ous": "A",
    # length 2
    "ae": "A", "al": "BB", "ar": "X", "as": "B",
    "ed": "E", "en": "F", "es": "E", "ia": "A",
    "ic": "A", "is": "A", "ly": "B", "on": "S",
    "or": "T", "um": "U", "us": "V", "yl": "R",
    "'s": "A", "s'": "A",
    # length 1
    "a": "A", "e": "A", "i": "A", "o": "A",
    "s": "W", "y": "B",
}

MAX_ENDING = max(len(e) for e in ENDINGS)


def _ends(stem: str, *suffixes: str) -> bool:
    return stem.endswith(suffixes)


# Contextual conditions, keyed as in the ending table.  Each predicate sees
# the candidate stem (the word minus the ending) and decides whether removal
# is allowed.  Minimum lengths beyond the universal two letters are part of
# the condition.
CONDITIONS = {
    "A": lambda s: True,
    "B": lambda s: len(s) >= 3,
    "C": lambda s: len(s) >= 4,
    "D": lambda s: len(s) >= 5,
    "E": lambda s: not _ends(s, "e"),
    "F": lambda s: len(s) >= 3 and not _ends(s, "e"),
    "G": lambda s: len(s) >= 3 and _ends(s, "f"),
    "H": lambda s: _ends(s, "t", "ll"),
    "I": lambda s: not _ends(s, "o", "e"),
    "J": lambda s: not _ends(s, "a", "e"),
    "K": lambda s: len(s) >= 3 and (_ends(s, "l", "i") or (s[-1] == "e" and s[-3] == "u")),
    "L": lambda s: not _ends(s, "u", "x") and not (_ends(s, "s") and not _ends(s, "os")),
    "M": lambda s: not _ends(s, "a", "c", "e", "m"),
    "N": lambda s: len(s) >= (4 if len(s) >= 3 and s[-3] == "s" else 3),
    "O": lambda s: _ends(s, "l", "i"),
    "P": lambda s: not _ends(s, "c"),
    "Q": lambda s: len(s) >= 3 and not _ends(s, "l", "n"),
    "R": lambda s: _ends(s, "n", "r"),
    "S": lambda s: _ends(s, "dr") or (_ends(s, "t") and not _ends(s, "tt")),
    "T": lambda s: _ends(s, "s") or (_ends(s, "t") and not _ends(s, "ot")),
    "U": lambda s: _ends(s, "l", "m", "n", "r"),
    "V": lambda s: _ends(s, "c"),
    "W": lambda s: not _ends(s, "s", "u"),
    "X": lambda s: _ends(s, "l", "i") or (s[-1:] == "e" and len(s) >= 3 and s[-3] == "u"),
    "Y": lambda s: _ends(s, "in"),
    "Z": lambda s: not _ends(s, "f"),
    "AA": lambda s: _ends(s, "d", "f", "ph", "th", "l", "er", "or", "es", "t"),
    "BB": lambda s: len(s) >= 3 and not _ends(s, "met", "ryst"),
    "CC": lambda s: _ends(s, "l"),
}

UNDOUBLE = frozenset("bdglmnprst")

# Respelling rules applied to the stem tail after ending removal.  Each entry
# is (suffix, replacement, letters that must not precede the suffix).  At most
# one rule fires; longer suffixes are tried first.
RESPELL = (
    ("istr", "ister", ""),
    ("metr", "meter", ""),
    ("umpt", "um", ""),
    ("erid", "eris", ""),
    ("pand", "pans", ""),
    ("iev", "ief", ""),
    ("uct", "uc", ""),
    ("rpt", "rb", ""),
    ("urs", "ur", ""),
    ("olv", "olut", ""),
    ("bex", "bic", ""),
    ("dex", "dic", ""),
    ("pex", "pic", ""),
    ("tex", "tic", ""),
    ("lux", "luc", ""),
    ("uad", "uas", ""),
    ("vad", "vas", ""),
    ("cid", "cis", ""),
    ("lid", "lis", ""),
    ("end", "ens", "s"),
    ("ond", "ons", ""),
    ("lud", "lus", ""),
    ("rud", "rus", ""),
    ("her", "hes", "pt"),
    ("mit", "mis", ""),
    ("ent", "ens", "m"),
    ("ert", "ers", ""),
    ("ul", "l", "aio"),
    ("ax", "ac", ""),
    ("ex", "ec", ""),
    ("ix", "ic", ""),
    ("et", "es", "n"),
    ("yt", "ys", ""),
    ("yz", "ys", ""),
)


def _remove_ending(word: str) -> str:
    longest = min(MAX_ENDING, len(word) - MIN_STEM)
    for size in range(longest, 0, -1):
        ending = word[-size:]
        cond = ENDINGS.get(ending)
        if cond is None:
            continue
        stem = word[:-size]
        if CONDITIONS[cond](stem):
            return stem
    return word


def _recode(stem: str) -> str:
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] in UNDOUBLE:
        stem = stem[:-1]
    for suffix, replacement, blocked in RESPELL:
        if stem.endswith(suffix):
            prev = stem[-len(suffix) - 1 : -len(suffix)]
            if prev and prev in blocked:
                break
            stem = stem[: -len(suffix)] + replacement
            break
    return stem


def stem_once(word: str) -> str:
    """One Lovins pass: strip at most one ending, then undouble and respell."""
    if len(word) <= MIN_STEM:
        return word
    return _recode(_remove_ending(word))


@lru_cache(maxsize=65536)
def iterated_lovins_stem(word: str) -> str:
    """Apply ``stem_once`` until the word stops changing (bounded rounds)."""
    for _ in range(MAX_ROUNDS):
        shrunk = stem_once(word)
        if shrunk == word:
            return word
        word = shrunk
    return word
