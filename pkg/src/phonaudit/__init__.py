"""Quality auditing toolkit for multilingual phonetic transcript corpora.

Parses IPA transcripts into phones, benchmarks gold transcripts against
baseline recognizer output with feature-weighted alignment metrics, runs
an exact binomial preference test over human pairwise annotations, and
emits filtered dataset manifests.
"""

from phonaudit.features import FeatureTable, default_table
from phonaudit.transcripts import (
    Category,
    Phone,
    ReplacementMap,
    Transcript,
    census,
    classify,
    normalize_transcript,
    tokenize,
)
from phonaudit.alignment import AlignmentPath, CostModel, align, induce_spaces
from phonaudit.metrics import (
    LanguageAggregate,
    PhoneErrorProfile,
    UtteranceScore,
    aggregate_language,
    expected_phone_error,
    pfer,
    phone_recall,
)
from phonaudit.preference_test import (
    PowerRow,
    PreferenceTestConfig,
    Verdict,
    agreement,
    binom_cdf,
    critical_value,
    preference_verdict,
    sample_size_table,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentPath",
    "Category",
    "CostModel",
    "FeatureTable",
    "LanguageAggregate",
    "Phone",
    "PhoneErrorProfile",
    "PowerRow",
    "PreferenceTestConfig",
    "ReplacementMap",
    "Transcript",
    "UtteranceScore",
    "Verdict",
    "aggregate_language",
    "agreement",
    "align",
    "binom_cdf",
    "census",
    "classify",
    "critical_value",
    "default_table",
    "expected_phone_error",
    "induce_spaces",
    "normalize_transcript",
    "pfer",
    "phone_recall",
    "preference_verdict",
    "sample_size_table",
    "tokenize",
]
