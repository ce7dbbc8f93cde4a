"""Articulatory feature table: loading, lookup, and feature distance.

The bundled table (data/feature_table.tsv) maps each phone string to a
24-value ternary feature vector. All lookups are case-sensitive over
NFD-normalized Unicode. The table is immutable after load and safe to
share across workers.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

_VALUE_MAP = {"+": 1, "-": -1, "0": 0}


def nfd(s: str) -> str:
    """Canonical decomposition; the single normal form used everywhere."""
    return unicodedata.normalize("NFD", s)


@dataclass(frozen=True)
class FeatureTable:
    """Phone string -> ternary feature vector, with a fixed feature basis."""

    entries: dict[str, tuple[int, ...]]
    feature_names: tuple[str, ...]

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    def __contains__(self, phone: str) -> bool:
        return nfd(phone) in self.entries

    def resolve(self, phone: str) -> tuple[int, ...] | None:
        """Feature vector for a phone string, or None if unknown."""
        return self.entries.get(nfd(phone))

    def hamming(self, a: str, b: str) -> int:
        """Count of differing feature positions between two known phones."""
        va = self.entries[nfd(a)]
        vb = self.entries[nfd(b)]
        return sum(1 for x, y in zip(va, vb) if x != y)

    def distance(self, a: str, b: str) -> float:
        """Hamming distance normalized by the feature count, in [0, 1]."""
        return self.hamming(a, b) / self.feature_count

    @classmethod
    def load(cls, path: str | Path) -> FeatureTable:
        """Load a TSV table: header row of feature names, then one row per
        phone with values in {+, -, 0}. Leading '#' lines are comments."""
        entries: dict[str, tuple[int, ...]] = {}
        feature_names: tuple[str, ...] | None = None
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                cells = line.split("\t")
                if feature_names is None:
                    feature_names = tuple(cells[1:])
                    continue
                phone = nfd(cells[0])
                values = tuple(_VALUE_MAP[c] for c in cells[1:])
                if len(values) != len(feature_names):
                    raise ValueError(
                        f"row for {phone!r} has {len(values)} values, "
                        f"expected {len(feature_names)}"
                    )
                entries[phone] = values
        if feature_names is None:
            raise ValueError(f"no header row in {path}")
        return cls(entries=entries, feature_names=feature_names)


@lru_cache(maxsize=1)
def default_table() -> FeatureTable:
    """The bundled feature table, loaded once per process."""
    ref = resources.files("phonaudit").joinpath("data/feature_table.tsv")
    with resources.as_file(ref) as path:
        return FeatureTable.load(path)
