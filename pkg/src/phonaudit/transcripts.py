"""Phone-level parsing, validity classification, normalization, and census.

A transcript is a space-delimited sequence of words; each word is a run of
phones. A phone is a base symbol plus the marks attached to it: combining
diacritics, superscript modifier letters, length marks, and tone letters
all attach to the preceding base; a tie bar joins the following base into
the same phone, so an affricate is a single phone.

Everything operates on NFD-normalized text. Validity is membership in a
FeatureTable; invalid phones can be rewritten through a human-curated
ReplacementMap.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from phonaudit.errors import EmptyTranscript
from phonaudit.features import FeatureTable, nfd

TIE_BARS = frozenset({"͡", "͜"})

# Categories that attach to a preceding base symbol: combining marks (Mn,
# Mc, Me), modifier letters (Lm: aspiration, palatalization, length, stress)
# and modifier symbols (Sk: Chao tone bars).
_ATTACH_CATEGORIES = frozenset({"Mn", "Mc", "Me", "Lm", "Sk"})


def _attaches(ch: str) -> bool:
    return unicodedata.category(ch) in _ATTACH_CATEGORIES


class Category(Enum):
    """Validity taxonomy for a phone, given a feature table."""

    VALID_PRIMARY = "valid_primary"
    VALID_ONE_DIACRITIC = "valid_one_diacritic"
    VALID_TWO_DIACRITICS = "valid_two_diacritics"
    INVALID = "invalid"


@dataclass(frozen=True)
class Phone:
    """One IPA segment: a base symbol plus ordered trailing diacritics.

    The surface string is always ``base + "".join(diacritics)``. For a
    tie-barred pair the base spans both joined symbols (including any marks
    between them), so only marks after the final base symbol count as
    diacritics.
    """

    surface: str
    base: str
    diacritics: tuple[str, ...]

    def __post_init__(self) -> None:
        assert self.surface == self.base + "".join(self.diacritics)


@dataclass
class Transcript:
    """Word-segmented phone sequence with utterance metadata."""

    words: list[list[Phone]]
    language_code: str = ""
    utterance_id: str = ""

    def phones(self) -> list[Phone]:
        """Flattened phone sequence, word boundaries dropped."""
        return [p for word in self.words for p in word]

    def render(self) -> str:
        """Back to a space-delimited string (NFD, single spaces)."""
        return " ".join("".join(p.surface for p in word) for word in self.words)


def _segment_word(word: str) -> list[Phone]:
    phones: list[Phone] = []
    i = 0
    n = len(word)
    while i < n:
        start = i
        if _attaches(word[i]):
            # Orphaned marks with no preceding base: keep the run as one
            # (invalid) phone rather than silently dropping content.
            while i < n and _attaches(word[i]):
                i += 1
            run = word[start:i]
            phones.append(Phone(surface=run, base=run[0], diacritics=tuple(run[1:])))
            continue
        i += 1
        base_end = i
        while i < n:
            ch = word[i]
            if ch in TIE_BARS and i + 1 < n and not _attaches(word[i + 1]):
                i += 2
                base_end = i
            elif _attaches(ch):
                i += 1
            else:
                break
        surface = word[start:i]
        base = word[start:base_end]
        phones.append(
            Phone(surface=surface, base=base, diacritics=tuple(word[base_end:i]))
        )
    return phones


def tokenize(raw: str, language_code: str = "", utterance_id: str = "") -> Transcript:
    """Segment a raw transcript into words of phones.

    Words are whitespace-delimited. Raises EmptyTranscript when the input
    contains no phone content.
    """
    text = nfd(raw)
    words = [w for w in text.split() if w]
    if not words:
        raise EmptyTranscript(f"no phone content in {raw!r}")
    return Transcript(
        words=[_segment_word(w) for w in words],
        language_code=language_code,
        utterance_id=utterance_id,
    )


def classify(phone: Phone, table: FeatureTable) -> Category:
    """Validity category of a phone under a feature table.

    Total: any phone classifies. A surface that resolves in the table is
    valid; the diacritic count picks the valid bucket, with three or more
    diacritics kept under VALID_TWO_DIACRITICS (census flags the overflow).
    """
    if table.resolve(phone.surface) is None:
        return Category.INVALID
    count = len(phone.diacritics)
    if count == 0:
        return Category.VALID_PRIMARY
    if count == 1:
        return Category.VALID_ONE_DIACRITIC
    return Category.VALID_TWO_DIACRITICS


@dataclass
class ReplacementMap:
    """Curated rewrite rules from invalid phone strings to valid ones.

    A rule target may tokenize to several phones (a superscript nasal
    becoming a vowel-nasal pair) or to the empty string (drop the phone).
    Targets must resolve in the feature table and must never themselves be
    rule sources, which makes application idempotent.
    """

    rules: dict[str, str]
    provenance: dict[str, str] = field(default_factory=dict)

    def validate(self, table: FeatureTable) -> None:
        for source, target in self.rules.items():
            if target == "":
                continue
            replacement = _segment_word(nfd(target))
            for phone in replacement:
                if table.resolve(phone.surface) is None:
                    raise ValueError(
                        f"rule {source!r} -> {target!r}: target phone "
                        f"{phone.surface!r} does not resolve in the table"
                    )
                if phone.surface in self.rules:
                    raise ValueError(
                        f"rule {source!r} -> {target!r}: target is itself "
                        "a rule source; application would not be idempotent"
                    )

    @classmethod
    def load(cls, path: str | Path, table: FeatureTable | None = None) -> ReplacementMap:
        """Load a JSON object {invalid_string: valid_string} (UTF-8, NFD)."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        rules = {nfd(k): nfd(v) for k, v in data.items()}
        rmap = cls(rules=rules)
        if table is not None:
            rmap.validate(table)
        return rmap


@dataclass
class NormalizeResult:
    """Normalized transcript plus a log of what happened."""

    transcript: Transcript
    applied: Counter[str] = field(default_factory=Counter)
    unmapped: Counter[str] = field(default_factory=Counter)


def normalize_transcript(
    t: Transcript, rmap: ReplacementMap, table: FeatureTable
) -> NormalizeResult:
    """Rewrite invalid phones through the replacement map.

    Valid phones pass through untouched. Invalid phones with a rule are
    replaced (possibly by several phones, possibly deleted); invalid phones
    without a rule are collected as unmapped warnings, never fatal. Words
    emptied by deletions are dropped. Idempotent by construction.
    """
    result = NormalizeResult(
        transcript=Transcript(words=[], language_code=t.language_code,
                              utterance_id=t.utterance_id)
    )
    for word in t.words:
        new_word: list[Phone] = []
        for phone in word:
            if classify(phone, table) is not Category.INVALID:
                new_word.append(phone)
                continue
            target = rmap.rules.get(phone.surface)
            if target is None:
                result.unmapped[phone.surface] += 1
                new_word.append(phone)
                continue
            result.applied[phone.surface] += 1
            if target:
                new_word.extend(_segment_word(nfd(target)))
        if new_word:
            result.transcript.words.append(new_word)
    return result


@dataclass
class PhoneCensus:
    """Type and token counts of a corpus, bucketed by validity category."""

    per_category: dict[Category, dict[str, int]]
    per_phone: dict[str, int]
    category_of: dict[str, Category]
    overflow_diacritics: int = 0  # valid phones with >2 diacritics (tokens)

    def total_tokens(self) -> int:
        return sum(self.per_phone.values())


def census(corpus: list[Transcript], table: FeatureTable) -> PhoneCensus:
    """Count phone types and tokens per validity category.

    Order-independent: counts depend only on the multiset of phones.
    """
    tokens: Counter[str] = Counter()
    sample: dict[str, Phone] = {}
    for t in corpus:
        for phone in t.phones():
            tokens[phone.surface] += 1
            sample.setdefault(phone.surface, phone)

    per_category = {
        cat: {"type_count": 0, "token_count": 0} for cat in Category
    }
    category_of: dict[str, Category] = {}
    overflow = 0
    for surface, count in tokens.items():
        phone = sample[surface]
        cat = classify(phone, table)
        category_of[surface] = cat
        per_category[cat]["type_count"] += 1
        per_category[cat]["token_count"] += count
        if cat is Category.VALID_TWO_DIACRITICS and len(phone.diacritics) > 2:
            overflow += count

    return PhoneCensus(
        per_category=per_category,
        per_phone=dict(tokens),
        category_of=category_of,
        overflow_diacritics=overflow,
    )
