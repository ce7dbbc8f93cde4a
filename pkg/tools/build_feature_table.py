#!/usr/bin/env python3
"""Generate the bundled articulatory feature table.

Writes src/phonaudit/data/feature_table.tsv: one row per phone, 24 ternary
feature columns (+/-/0) in a panphon-compatible layout. Rows are composed
from a hand-curated base segment inventory plus diacritic rules, so the
file regenerates deterministically.

Run from the repository root:

    python tools/build_feature_table.py
"""

from __future__ import annotations

import unicodedata
from pathlib import Path

FEATURE_NAMES = [
    "syl", "son", "cons", "cont", "delrel", "lat", "nas", "strid",
    "voi", "sg", "cg", "ant", "cor", "distr", "lab", "hi", "lo",
    "back", "round", "velaric", "tense", "long", "hitone", "hireg",
]

BUNDLE_VERSION = "1"

_C_DEFAULT = {
    "syl": -1, "son": -1, "cons": 1, "cont": -1, "delrel": -1, "lat": -1,
    "nas": -1, "strid": -1, "voi": -1, "sg": -1, "cg": -1, "ant": 0,
    "cor": -1, "distr": 0, "lab": -1, "hi": -1, "lo": -1, "back": -1,
    "round": -1, "velaric": -1, "tense": 0, "long": -1, "hitone": 0,
    "hireg": 0,
}

_V_DEFAULT = {
    "syl": 1, "son": 1, "cons": -1, "cont": 1, "delrel": -1, "lat": -1,
    "nas": -1, "strid": 0, "voi": 1, "sg": -1, "cg": -1, "ant": 0,
    "cor": -1, "distr": 0, "lab": -1, "hi": -1, "lo": -1, "back": -1,
    "round": -1, "velaric": -1, "tense": -1, "long": -1, "hitone": 0,
    "hireg": 0,
}

# Place-of-articulation feature bundles for consonants.
_PLACES = {
    "bilabial": {"lab": 1, "ant": 1},
    "labiodental": {"lab": 1, "ant": 1},
    "dental": {"cor": 1, "ant": 1, "distr": 1},
    "alveolar": {"cor": 1, "ant": 1, "distr": -1},
    "postalveolar": {"cor": 1, "ant": -1, "distr": 1},
    "retroflex": {"cor": 1, "ant": -1, "distr": -1},
    "alveolopalatal": {"cor": 1, "ant": -1, "distr": 1, "hi": 1},
    "palatal": {"cor": 1, "ant": -1, "distr": 1, "hi": 1},
    "velar": {"hi": 1, "back": 1},
    "uvular": {"back": 1},
    "pharyngeal": {"lo": 1, "back": 1},
}

_MANNERS = {
    "plosive": {},
    "nasal": {"son": 1, "nas": 1, "voi": 1},
    "trill": {"son": 1, "cont": 1, "voi": 1},
    "tap": {"son": 1, "voi": 1},
    "fricative": {"cont": 1},
    "affricate": {"delrel": 1},
    "lat-fricative": {"cont": 1, "lat": 1},
    "approximant": {"son": 1, "cont": 1, "voi": 1},
    "lat-approximant": {"son": 1, "cont": 1, "voi": 1, "lat": 1},
    "implosive": {"voi": 1, "cg": 1},
    "click": {"velaric": 1},
}


def _cons(place: str, manner: str, voiced: bool = False, **extra: int) -> dict:
    fv = dict(_C_DEFAULT)
    fv.update(_PLACES[place])
    fv.update(_MANNERS[manner])
    if voiced:
        fv["voi"] = 1
    fv.update(extra)
    return fv


def _vowel(hi: int, lo: int, back: int, rnd: int, tense: int, **extra: int) -> dict:
    fv = dict(_V_DEFAULT)
    fv.update({"hi": hi, "lo": lo, "back": back, "round": rnd, "tense": tense})
    if rnd == 1:
        fv["lab"] = 1
    fv.update(extra)
    return fv


def base_segments() -> dict[str, dict]:
    p = {}

    # Plosives
    p["p"] = _cons("bilabial", "plosive")
    p["b"] = _cons("bilabial", "plosive", voiced=True)
    p["t"] = _cons("alveolar", "plosive")
    p["d"] = _cons("alveolar", "plosive", voiced=True)
    p["ʈ"] = _cons("retroflex", "plosive")                  # ʈ
    p["ɖ"] = _cons("retroflex", "plosive", voiced=True)     # ɖ
    p["c"] = _cons("palatal", "plosive")
    p["ɟ"] = _cons("palatal", "plosive", voiced=True)       # ɟ
    p["k"] = _cons("velar", "plosive")
    p["ɡ"] = _cons("velar", "plosive", voiced=True)         # ɡ
    p["q"] = _cons("uvular", "plosive")
    p["ɢ"] = _cons("uvular", "plosive", voiced=True)        # ɢ
    p["ʔ"] = _cons("alveolar", "plosive", cons=-1, cor=-1, ant=0,
                        distr=0, cg=1)                           # ʔ

    # Nasals
    p["m"] = _cons("bilabial", "nasal")
    p["ɱ"] = _cons("labiodental", "nasal")                  # ɱ
    p["n"] = _cons("alveolar", "nasal")
    p["ɳ"] = _cons("retroflex", "nasal")                    # ɳ
    p["ɲ"] = _cons("palatal", "nasal")                      # ɲ
    p["ŋ"] = _cons("velar", "nasal")                        # ŋ
    p["ɴ"] = _cons("uvular", "nasal")                       # ɴ

    # Trills and taps
    p["ʙ"] = _cons("bilabial", "trill")                     # ʙ
    p["r"] = _cons("alveolar", "trill")
    p["ʀ"] = _cons("uvular", "trill")                       # ʀ
    p["ɾ"] = _cons("alveolar", "tap")                       # ɾ
    p["ɽ"] = _cons("retroflex", "tap")                      # ɽ

    # Fricatives
    p["ɸ"] = _cons("bilabial", "fricative")                 # ɸ
    p["β"] = _cons("bilabial", "fricative", voiced=True)    # β
    p["f"] = _cons("labiodental", "fricative", strid=1)
    p["v"] = _cons("labiodental", "fricative", voiced=True, strid=1)
    p["θ"] = _cons("dental", "fricative")                   # θ
    p["ð"] = _cons("dental", "fricative", voiced=True)      # ð
    p["s"] = _cons("alveolar", "fricative", strid=1)
    p["z"] = _cons("alveolar", "fricative", voiced=True, strid=1)
    p["ʃ"] = _cons("postalveolar", "fricative", strid=1)    # ʃ
    p["ʒ"] = _cons("postalveolar", "fricative", voiced=True, strid=1)  # ʒ
    p["ʂ"] = _cons("retroflex", "fricative", strid=1)       # ʂ
    p["ʐ"] = _cons("retroflex", "fricative", voiced=True, strid=1)     # ʐ
    p["ɕ"] = _cons("alveolopalatal", "fricative", strid=1)  # ɕ
    p["ʑ"] = _cons("alveolopalatal", "fricative", voiced=True, strid=1)  # ʑ
    p["ç"] = _cons("palatal", "fricative")                  # ç
    p["ʝ"] = _cons("palatal", "fricative", voiced=True)     # ʝ
    p["x"] = _cons("velar", "fricative")
    p["ɣ"] = _cons("velar", "fricative", voiced=True)       # ɣ
    p["χ"] = _cons("uvular", "fricative")                   # χ
    p["ʁ"] = _cons("uvular", "fricative", voiced=True)      # ʁ
    p["ħ"] = _cons("pharyngeal", "fricative")               # ħ
    p["ʕ"] = _cons("pharyngeal", "fricative", voiced=True)  # ʕ
    p["h"] = _cons("alveolar", "fricative", cons=-1, cor=-1, ant=0,
                   distr=0, sg=1)
    p["ɦ"] = _cons("alveolar", "fricative", voiced=True, cons=-1,
                        cor=-1, ant=0, distr=0, sg=1)            # ɦ
    p["ɬ"] = _cons("alveolar", "lat-fricative")             # ɬ
    p["ɮ"] = _cons("alveolar", "lat-fricative", voiced=True)  # ɮ

    # Approximants
    p["ʋ"] = _cons("labiodental", "approximant")            # ʋ
    p["ɹ"] = _cons("alveolar", "approximant")               # ɹ
    p["ɻ"] = _cons("retroflex", "approximant")              # ɻ
    p["j"] = _cons("palatal", "approximant", cons=-1, cor=-1, ant=0, distr=0)
    p["ɰ"] = _cons("velar", "approximant", cons=-1)         # ɰ
    p["w"] = _cons("velar", "approximant", cons=-1, round=1, lab=1)
    p["ɥ"] = _cons("palatal", "approximant", cons=-1, cor=-1, ant=0,
                        distr=0, round=1, lab=1)                 # ɥ
    p["l"] = _cons("alveolar", "lat-approximant")
    p["ɭ"] = _cons("retroflex", "lat-approximant")          # ɭ
    p["ʎ"] = _cons("palatal", "lat-approximant")            # ʎ
    p["ʟ"] = _cons("velar", "lat-approximant")              # ʟ
    p["ɫ"] = _cons("alveolar", "lat-approximant", hi=1, back=1)  # ɫ

    # Implosives
    p["ɓ"] = _cons("bilabial", "implosive")                 # ɓ
    p["ɗ"] = _cons("alveolar", "implosive")                 # ɗ
    p["ʄ"] = _cons("palatal", "implosive")                  # ʄ
    p["ɠ"] = _cons("velar", "implosive")                    # ɠ
    p["ʛ"] = _cons("uvular", "implosive")                   # ʛ

    # Clicks
    p["ʘ"] = _cons("bilabial", "click")                     # ʘ
    p["ǀ"] = _cons("dental", "click")                       # ǀ
    p["ǃ"] = _cons("alveolar", "click")                     # ǃ
    p["ǂ"] = _cons("palatal", "click")                      # ǂ
    p["ǁ"] = _cons("alveolar", "click", lat=1)              # ǁ

    # Affricates (tie-barred)
    tie = "͡"
    p[f"t{tie}s"] = _cons("alveolar", "affricate", strid=1)
    p[f"d{tie}z"] = _cons("alveolar", "affricate", voiced=True, strid=1)
    p[f"t{tie}ʃ"] = _cons("postalveolar", "affricate", strid=1)
    p[f"d{tie}ʒ"] = _cons("postalveolar", "affricate", voiced=True, strid=1)
    p[f"t{tie}ɕ"] = _cons("alveolopalatal", "affricate", strid=1)
    p[f"d{tie}ʑ"] = _cons("alveolopalatal", "affricate", voiced=True, strid=1)
    p[f"ʈ{tie}ʂ"] = _cons("retroflex", "affricate", strid=1)
    p[f"ɖ{tie}ʐ"] = _cons("retroflex", "affricate", voiced=True, strid=1)
    p[f"t{tie}ɬ"] = _cons("alveolar", "affricate", lat=1)
    p[f"p{tie}f"] = _cons("labiodental", "affricate", strid=1)
    p[f"k{tie}x"] = _cons("velar", "affricate")

    # Vowels: (hi, lo, back, round, tense)
    p["i"] = _vowel(1, -1, -1, -1, 1)
    p["y"] = _vowel(1, -1, -1, 1, 1)
    p["ɨ"] = _vowel(1, -1, -1, -1, -1)    # ɨ
    p["ʉ"] = _vowel(1, -1, -1, 1, -1)     # ʉ
    p["ɯ"] = _vowel(1, -1, 1, -1, 1)      # ɯ
    p["u"] = _vowel(1, -1, 1, 1, 1)
    p["ɪ"] = _vowel(1, -1, -1, -1, -1, cons=-1, distr=1)  # ɪ
    p["ʏ"] = _vowel(1, -1, -1, 1, -1, distr=1)            # ʏ
    p["ʊ"] = _vowel(1, -1, 1, 1, -1, distr=1)             # ʊ
    p["e"] = _vowel(-1, -1, -1, -1, 1)
    p["ø"] = _vowel(-1, -1, -1, 1, 1)     # ø
    p["ɘ"] = _vowel(-1, -1, -1, -1, -1)   # ɘ
    p["ɵ"] = _vowel(-1, -1, -1, 1, -1)    # ɵ
    p["ɤ"] = _vowel(-1, -1, 1, -1, 1)     # ɤ
    p["o"] = _vowel(-1, -1, 1, 1, 1)
    p["ə"] = _vowel(-1, -1, -1, -1, -1, distr=1)  # ə
    p["ɛ"] = _vowel(-1, -1, -1, -1, -1, distr=-1)  # ɛ
    p["œ"] = _vowel(-1, -1, -1, 1, -1, distr=-1)   # œ
    p["ɜ"] = _vowel(-1, -1, -1, -1, -1, cons=0)    # ɜ
    p["ɞ"] = _vowel(-1, -1, -1, 1, -1, cons=0)     # ɞ
    p["ʌ"] = _vowel(-1, -1, 1, -1, -1)    # ʌ
    p["ɔ"] = _vowel(-1, -1, 1, 1, -1)     # ɔ
    p["æ"] = _vowel(-1, 1, -1, -1, 1)     # æ
    p["ɐ"] = _vowel(-1, 1, -1, -1, -1)    # ɐ
    p["a"] = _vowel(-1, 1, -1, -1, -1, distr=1)
    p["ɶ"] = _vowel(-1, 1, -1, 1, -1)     # ɶ
    p["ɑ"] = _vowel(-1, 1, 1, -1, -1)     # ɑ
    p["ɒ"] = _vowel(-1, 1, 1, 1, -1)      # ɒ

    return p


# Diacritic rules: symbol -> (feature edits, applicability predicate).
# Predicates work on the already-composed feature dict so stacked
# diacritics chain naturally.

def _is_stop_like(fv: dict) -> bool:
    return fv["son"] == -1 and fv["cont"] == -1 and fv["velaric"] == -1


def _is_consonant(fv: dict) -> bool:
    return fv["syl"] == -1


def _is_vowel(fv: dict) -> bool:
    return fv["syl"] == 1


DIACRITICS = {
    "ʰ": ({"sg": 1}, _is_stop_like),                       # ʰ aspirated
    "ʱ": ({"sg": 1}, lambda fv: _is_stop_like(fv) and fv["voi"] == 1),  # ʱ
    "ʲ": ({"hi": 1, "back": -1}, _is_consonant),           # ʲ palatalized
    "ʷ": ({"round": 1, "lab": 1}, _is_consonant),          # ʷ labialized
    "ˤ": ({"lo": 1, "back": 1}, lambda fv: True),          # ˤ pharyngealized
    "ʼ": ({"cg": 1}, lambda fv: fv["son"] == -1 and fv["voi"] == -1),  # ʼ
    "̥": ({"voi": -1}, lambda fv: fv["voi"] == 1),         # ̥ voiceless
    "̬": ({"voi": 1}, lambda fv: fv["voi"] == -1),         # ̬ voiced
    "̃": ({"nas": 1}, lambda fv: fv["son"] == 1),          # ̃ nasalized
    "ː": ({"long": 1}, lambda fv: True),                   # ː long
    "̩": ({"syl": 1}, lambda fv: fv["son"] == 1 and fv["cons"] == 1),  # ̩
    "̪": ({"ant": 1, "distr": 1}, lambda fv: fv["cor"] == 1),  # ̪ dental
    "˥": ({"hitone": 1, "hireg": 1}, _is_vowel),           # ˥
    "˦": ({"hitone": 1, "hireg": -1}, _is_vowel),          # ˦
    "˧": ({"hitone": -1, "hireg": 1}, _is_vowel),          # ˧
    "˨": ({"hitone": -1, "hireg": -1}, _is_vowel),         # ˨
    "˩": ({"hitone": -1, "hireg": -1, "lo": 1}, _is_vowel),  # ˩
}

# Ordered diacritic pairs worth precomposing (first applied, then second).
_CONS_PAIR_POOL = ["ʰ", "ʲ", "ʷ", "ˤ", "ʼ"]
_VOWEL_PAIR_POOL = ["̃", "ˤ", "ː"]

# A few deliberately deep stacks so >2-diacritic lookups stay exercised.
_TRIPLES = [
    ("a", ["̃", "ˤ", "ː"]),
    ("e", ["̃", "ˤ", "ː"]),
    ("i", ["̃", "ˤ", "ː"]),
    ("o", ["̃", "ˤ", "ː"]),
    ("u", ["̃", "ˤ", "ː"]),
]


def _apply(fv: dict, marks: list[str]) -> dict | None:
    out = dict(fv)
    for mark in marks:
        edits, applicable = DIACRITICS[mark]
        if not applicable(out):
            return None
        out.update(edits)
    return out


def compose_entries() -> dict[str, dict]:
    entries: dict[str, dict] = {}
    bases = base_segments()

    def put(key: str, fv: dict) -> None:
        entries[unicodedata.normalize("NFD", key)] = fv

    for phone, fv in bases.items():
        put(phone, fv)

    for phone, fv in bases.items():
        for mark in DIACRITICS:
            derived = _apply(fv, [mark])
            if derived is not None:
                put(phone + mark, derived)

        if _is_vowel(fv):
            pool = _VOWEL_PAIR_POOL
        else:
            pool = _CONS_PAIR_POOL
        for first in pool:
            for second in pool:
                if first == second:
                    continue
                derived = _apply(fv, [first, second])
                if derived is not None:
                    put(phone + first + second, derived)
        # Long palatalized/labialized consonants occur in several corpora.
        if _is_consonant(fv):
            for mark in _CONS_PAIR_POOL:
                derived = _apply(fv, [mark, "ː"])
                if derived is not None:
                    put(phone + mark + "ː", derived)

    for base, marks in _TRIPLES:
        derived = _apply(bases[base], marks)
        if derived is not None:
            put(base + "".join(marks), derived)

    return entries


def main() -> None:
    out_path = Path(__file__).resolve().parent.parent / "src" / "phonaudit" / "data" / "feature_table.tsv"
    out_path.parent.mkdir(parents=True, exist_ok=True)

    entries = compose_entries()
    mark = {1: "+", -1: "-", 0: "0"}

    lines = [
        f"# phonaudit articulatory feature bundle v{BUNDLE_VERSION}",
        "# 24-feature ternary layout, panphon-compatible column order; "
        "values hand-curated for this bundle.",
        "# Regenerate with: python tools/build_feature_table.py",
        "phone\t" + "\t".join(FEATURE_NAMES),
    ]
    for phone in sorted(entries):
        fv = entries[phone]
        lines.append(phone + "\t" + "\t".join(mark[fv[name]] for name in FEATURE_NAMES))

    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(entries)} phones -> {out_path}")


if __name__ == "__main__":
    main()
