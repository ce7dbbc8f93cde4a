"""End-to-end audit orchestration over JSONL corpora.

Flow: score every language against each baseline model, select the
high-error languages for annotation, sample blind annotation tasks,
compile verdicts from completed preference records, and emit a filtered
manifest without the flagged languages. Every stage is a pure function of
its inputs, the seed, and the config, so reruns are byte-identical.
"""

from __future__ import annotations

import json
import os
import zlib
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from phonaudit.alignment import CostModel, induce_spaces
from phonaudit.errors import (
    DomainError,
    DuplicateRecord,
    InsufficientAnnotations,
    InsufficientUtterances,
    InvalidChoice,
    MissingPredictions,
    UnknownTask,
)
from phonaudit.metrics import LanguageAggregate, UtteranceScore, aggregate_language, pfer
from phonaudit.preference_test import (
    Decision,
    PreferenceTestConfig,
    Verdict,
    preference_verdict,
)
from phonaudit.transcripts import tokenize


# ---------------------------------------------------------------------------
# JSONL plumbing

def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    """Atomic, deterministic JSONL write (sorted keys, UTF-8)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    os.replace(tmp, path)


def write_json(path: str | Path, payload: dict) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Corpus containers

@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    language_code: str
    audio_path: str
    gold_transcript: str
    duration_s: float


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    by_id: dict[str, ManifestEntry] = field(init=False)
    by_language: dict[str, list[ManifestEntry]] = field(init=False)

    def __post_init__(self) -> None:
        self.by_id = {}
        self.by_language = {}
        for e in self.entries:
            if e.utterance_id in self.by_id:
                raise ValueError(f"duplicate utterance_id {e.utterance_id!r}")
            if not e.language_code:
                raise ValueError(f"empty language_code for {e.utterance_id!r}")
            if e.duration_s <= 0:
                raise ValueError(f"nonpositive duration for {e.utterance_id!r}")
            self.by_id[e.utterance_id] = e
            self.by_language.setdefault(e.language_code, []).append(e)

    def languages(self) -> list[str]:
        return sorted(self.by_language)

    @classmethod
    def load(cls, path: str | Path) -> DatasetManifest:
        entries = [
            ManifestEntry(
                utterance_id=row["utterance_id"],
                language_code=row["language"],
                audio_path=row["audio"],
                gold_transcript=row["gold"],
                duration_s=float(row["duration_s"]),
            )
            for row in read_jsonl(path)
        ]
        return cls(entries=entries)

    def save(self, path: str | Path) -> None:
        write_jsonl(
            path,
            (
                {
                    "utterance_id": e.utterance_id,
                    "language": e.language_code,
                    "audio": e.audio_path,
                    "gold": e.gold_transcript,
                    "duration_s": e.duration_s,
                }
                for e in self.entries
            ),
        )


@dataclass
class ModelTranscriptSet:
    model_id: str
    entries: dict[str, str]  # utterance_id -> phone string


def load_model_transcripts(path: str | Path) -> list[ModelTranscriptSet]:
    """Group a transcript JSONL by model_id (sorted for determinism)."""
    grouped: dict[str, dict[str, str]] = {}
    for row in read_jsonl(path):
        grouped.setdefault(row["model_id"], {})[row["utterance_id"]] = row["transcript"]
    return [
        ModelTranscriptSet(model_id=m, entries=grouped[m]) for m in sorted(grouped)
    ]


# ---------------------------------------------------------------------------
# Scoring and language selection

@dataclass
class ScoreTable:
    """Normalized-PFER aggregates per (language, model) plus the pairwise
    correlation of per-language medians between models."""

    aggregates: dict[tuple[str, str], LanguageAggregate]
    per_utterance: dict[tuple[str, str], list[UtteranceScore]]
    correlations: dict[tuple[str, str], float]

    def models(self) -> list[str]:
        return sorted({m for _, m in self.aggregates})

    def languages(self) -> list[str]:
        return sorted({lang for lang, _ in self.aggregates})

    def median(self, language: str, model: str) -> float:
        return self.aggregates[(language, model)].median_pfer


def pearson(xs: list[float], ys: list[float]) -> float:
    """Pearson correlation coefficient of two aligned sequences."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DomainError("correlation needs two sequences of equal length >= 2")
    return float(np.corrcoef(np.asarray(xs), np.asarray(ys))[0, 1])


def score_languages(
    manifest: DatasetManifest,
    model_sets: list[ModelTranscriptSet],
    cost: CostModel,
    coverage_threshold: float = 1.0,
) -> ScoreTable:
    """Length-normalized PFER aggregates per language and model.

    A model must cover at least coverage_threshold of each language's
    utterances (default: all of them), else MissingPredictions.
    """
    if not model_sets:
        raise DomainError("at least one model transcript set is required")
    aggregates: dict[tuple[str, str], LanguageAggregate] = {}
    per_utterance: dict[tuple[str, str], list[UtteranceScore]] = {}

    for mset in model_sets:
        for language in manifest.languages():
            entries = manifest.by_language[language]
            covered = [e for e in entries if e.utterance_id in mset.entries]
            if len(covered) < coverage_threshold * len(entries):
                raise MissingPredictions(
                    f"model {mset.model_id!r} covers {len(covered)}/{len(entries)} "
                    f"utterances of {language!r}"
                )
            scores = []
            for e in covered:
                gold = tokenize(e.gold_transcript, language, e.utterance_id)
                pred_raw = mset.entries[e.utterance_id]
                pred = (
                    tokenize(pred_raw, language, e.utterance_id)
                    if pred_raw.strip()
                    else _empty_transcript(language, e.utterance_id)
                )
                scores.append(pfer(gold, pred, cost))
            key = (language, mset.model_id)
            per_utterance[key] = scores
            aggregates[key] = aggregate_language(scores, language)

    correlations: dict[tuple[str, str], float] = {}
    models = sorted({m.model_id for m in model_sets})
    languages = sorted(manifest.languages())
    for i, m1 in enumerate(models):
        for m2 in models[i + 1:]:
            correlations[(m1, m2)] = pearson(
                [aggregates[(lang, m1)].median_pfer for lang in languages],
                [aggregates[(lang, m2)].median_pfer for lang in languages],
            )
    return ScoreTable(
        aggregates=aggregates,
        per_utterance=per_utterance,
        correlations=correlations,
    )


def _empty_transcript(language: str, utterance_id: str):
    from phonaudit.transcripts import Transcript

    return Transcript(words=[], language_code=language, utterance_id=utterance_id)


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    thresholds: dict[str, float]
    quantile: float


def select_audit_languages(scores: ScoreTable, quantile: float = 2 / 3) -> SelectionResult:
    """Languages whose normalized PFER exceeds the per-model quantile
    threshold for any model (union rule, strictly greater).

    quantile = 0 disables thresholding and selects every language.
    """
    if not 0.0 <= quantile < 1.0:
        raise DomainError(f"quantile must be in [0,1), got {quantile}")
    languages = scores.languages()
    models = scores.models()
    if quantile == 0.0:
        return SelectionResult(
            selected=tuple(languages),
            thresholds={m: float("-inf") for m in models},
            quantile=quantile,
        )
    thresholds = {
        m: float(
            np.percentile(
                [scores.median(lang, m) for lang in languages],
                100 * quantile,
                method="linear",
            )
        )
        for m in models
    }
    selected = tuple(
        lang
        for lang in languages
        if any(scores.median(lang, m) > thresholds[m] for m in models)
    )
    return SelectionResult(selected=selected, thresholds=thresholds, quantile=quantile)


def choose_model_for_language(scores: ScoreTable, language: str) -> str:
    """The better-performing model for a language: lowest normalized
    median PFER, ties broken by model id."""
    return min(scores.models(), key=lambda m: (scores.median(language, m), m))


# ---------------------------------------------------------------------------
# Annotation tasks and preference records

class Choice(Enum):
    PREFER_A = "prefer_a"
    PREFER_B = "prefer_b"
    TIE_GOOD = "tie_good"
    TIE_POOR = "tie_poor"


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    language_code: str
    utterance_id: str
    audio_path: str
    transcript_a: str
    transcript_b: str
    model_id: str
    a_is_gold: bool | None  # None once exported for annotators (blind)

    def blind_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "language": self.language_code,
            "utterance_id": self.utterance_id,
            "audio": self.audio_path,
            "transcript_a": self.transcript_a,
            "transcript_b": self.transcript_b,
            "model_id": self.model_id,
        }


@dataclass(frozen=True)
class PreferenceRecord:
    task_id: str
    annotator_id: str
    choice: Choice
    influential_words: tuple[int, ...] = ()  # word indices in the preferred transcript
    timestamp: str = ""
    playback_speeds: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.influential_words and self.choice in (Choice.TIE_GOOD, Choice.TIE_POOR):
            raise InvalidChoice(
                f"{self.task_id}: influential words are only valid with a "
                "preference choice"
            )

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "choice": self.choice.value,
            "influential_words": list(self.influential_words),
            "timestamp": self.timestamp,
            "playback_speeds": list(self.playback_speeds),
        }

    @classmethod
    def from_dict(cls, row: dict) -> PreferenceRecord:
        return cls(
            task_id=row["task_id"],
            annotator_id=row["annotator_id"],
            choice=Choice(row["choice"]),
            influential_words=tuple(row.get("influential_words", ())),
            timestamp=row.get("timestamp", ""),
            playback_speeds=tuple(row.get("playback_speeds", ())),
        )


def _task_rng(seed: int, language_code: str) -> np.random.Generator:
    # PCG64 keyed on (seed, crc32(language)) so every language draws an
    # independent, reproducible stream from one campaign seed.
    lang_key = zlib.crc32(language_code.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, lang_key])))


def sample_tasks(
    manifest: DatasetManifest,
    language_code: str,
    model_set: ModelTranscriptSet,
    n: int,
    seed: int,
    cost: CostModel,
) -> list[AnnotationTask]:
    """Sample n annotation tasks for a language, uniformly without
    replacement, with gold/model display position randomized per task.

    The model transcript is flattened and re-segmented by projecting the
    gold word boundaries through the alignment before display.
    """
    entries = sorted(
        (
            e
            for e in manifest.by_language.get(language_code, [])
            if e.utterance_id in model_set.entries
        ),
        key=lambda e: e.utterance_id,
    )
    if len(entries) < n:
        raise InsufficientUtterances(
            f"{language_code!r} has {len(entries)} utterances with predictions, "
            f"need {n}"
        )
    rng = _task_rng(seed, language_code)
    chosen = rng.choice(len(entries), size=n, replace=False)

    tasks = []
    for idx in chosen:
        e = entries[int(idx)]
        gold_t = tokenize(e.gold_transcript, language_code, e.utterance_id)
        pred_raw = model_set.entries[e.utterance_id]
        if pred_raw.strip():
            pred_phones = tokenize(pred_raw, language_code, e.utterance_id).phones()
        else:
            pred_phones = []
        model_display = induce_spaces(gold_t, pred_phones, cost).render()
        gold_display = gold_t.render()
        a_is_gold = bool(rng.random() < 0.5)
        tasks.append(
            AnnotationTask(
                task_id=f"{language_code}__{e.utterance_id}__{model_set.model_id}",
                language_code=language_code,
                utterance_id=e.utterance_id,
                audio_path=e.audio_path,
                transcript_a=gold_display if a_is_gold else model_display,
                transcript_b=model_display if a_is_gold else gold_display,
                model_id=model_set.model_id,
                a_is_gold=a_is_gold,
            )
        )
    return tasks


def save_tasks(tasks: list[AnnotationTask], tasks_path: str | Path,
               keys_path: str | Path) -> None:
    """Write the annotator-facing task file (blind) and the resolution key
    file separately; only the key file knows which side is gold."""
    write_jsonl(tasks_path, (t.blind_dict() for t in tasks))
    write_jsonl(
        keys_path,
        ({"task_id": t.task_id, "a_is_gold": t.a_is_gold} for t in tasks),
    )


def load_tasks(tasks_path: str | Path,
               keys_path: str | Path | None = None) -> list[AnnotationTask]:
    keys: dict[str, bool] = {}
    if keys_path is not None:
        keys = {row["task_id"]: bool(row["a_is_gold"]) for row in read_jsonl(keys_path)}
    tasks = []
    for row in read_jsonl(tasks_path):
        tasks.append(
            AnnotationTask(
                task_id=row["task_id"],
                language_code=row["language"],
                utterance_id=row["utterance_id"],
                audio_path=row["audio"],
                transcript_a=row["transcript_a"],
                transcript_b=row["transcript_b"],
                model_id=row["model_id"],
                a_is_gold=keys.get(row["task_id"]),
            )
        )
    return tasks


def save_records(records: list[PreferenceRecord], path: str | Path) -> None:
    write_jsonl(path, (r.to_dict() for r in records))


def load_records(path: str | Path) -> list[PreferenceRecord]:
    return [PreferenceRecord.from_dict(row) for row in read_jsonl(path)]


# ---------------------------------------------------------------------------
# Report compilation and filtering

@dataclass(frozen=True)
class LanguageAudit:
    language_code: str
    n_tasks: int
    n_annotated: int
    gold_preferred: int
    model_preferred: int
    abstain_good: int
    abstain_poor: int
    status: str  # "pass" | "flag" | "insufficient"
    verdict: Verdict | None


@dataclass
class AuditReport:
    per_language: dict[str, LanguageAudit]
    audited_languages: tuple[str, ...]
    flagged_languages: tuple[str, ...]
    config: PreferenceTestConfig

    def to_dict(self) -> dict:
        return {
            "config": {
                "alpha": self.config.alpha,
                "theta_null": self.config.theta_null,
                "theta_alt": self.config.theta_alt,
                "min_decided": self.config.min_decided,
            },
            "audited_languages": list(self.audited_languages),
            "flagged_languages": list(self.flagged_languages),
            "languages": [
                {
                    "language": a.language_code,
                    "n_tasks": a.n_tasks,
                    "n_annotated": a.n_annotated,
                    "gold_preferred": a.gold_preferred,
                    "model_preferred": a.model_preferred,
                    "abstain_good": a.abstain_good,
                    "abstain_poor": a.abstain_poor,
                    "status": a.status,
                    "critical_k": a.verdict.critical_k if a.verdict else None,
                }
                for a in (self.per_language[lang] for lang in self.audited_languages)
            ],
        }


def compile_report(
    tasks: list[AnnotationTask],
    records: list[PreferenceRecord],
    config: PreferenceTestConfig,
) -> AuditReport:
    """Resolve blind records against the task key and run the preference
    test per language.

    Rejects records for unknown tasks and duplicate (annotator, task)
    submissions. Languages with too few decided annotations come back with
    status "insufficient" instead of a verdict.
    """
    by_task = {t.task_id: t for t in tasks}
    for t in tasks:
        if t.a_is_gold is None:
            raise UnknownTask(
                f"task {t.task_id!r} has no resolution key; load tasks with "
                "the key file to compile a report"
            )

    seen: set[tuple[str, str]] = set()
    counts: dict[str, Counter] = {t.language_code: Counter() for t in tasks}
    for r in records:
        task = by_task.get(r.task_id)
        if task is None:
            raise UnknownTask(f"record references unknown task {r.task_id!r}")
        dup_key = (r.annotator_id, r.task_id)
        if dup_key in seen:
            raise DuplicateRecord(
                f"annotator {r.annotator_id!r} submitted task {r.task_id!r} twice"
            )
        seen.add(dup_key)
        c = counts[task.language_code]
        if r.choice is Choice.TIE_GOOD:
            c["abstain_good"] += 1
        elif r.choice is Choice.TIE_POOR:
            c["abstain_poor"] += 1
        else:
            chose_a = r.choice is Choice.PREFER_A
            if chose_a == task.a_is_gold:
                c["gold_preferred"] += 1
            else:
                c["model_preferred"] += 1

    n_tasks = Counter(t.language_code for t in tasks)
    per_language: dict[str, LanguageAudit] = {}
    for lang in sorted(counts):
        c = counts[lang]
        gold_n = c["gold_preferred"]
        model_n = c["model_preferred"]
        tie_good = c["abstain_good"]
        tie_poor = c["abstain_poor"]
        try:
            verdict = preference_verdict(
                gold_n, model_n, tie_good, tie_poor, config, language_code=lang
            )
            status = verdict.decision.value
        except InsufficientAnnotations:
            verdict = None
            status = "insufficient"
        per_language[lang] = LanguageAudit(
            language_code=lang,
            n_tasks=n_tasks[lang],
            n_annotated=gold_n + model_n + tie_good + tie_poor,
            gold_preferred=gold_n,
            model_preferred=model_n,
            abstain_good=tie_good,
            abstain_poor=tie_poor,
            status=status,
            verdict=verdict,
        )

    audited = tuple(sorted(per_language))
    flagged = tuple(
        sorted(
            (lang for lang, a in per_language.items() if a.status == Decision.FLAG.value),
            key=lambda lang: (per_language[lang].gold_preferred, lang),
        )
    )
    return AuditReport(
        per_language=per_language,
        audited_languages=audited,
        flagged_languages=flagged,
        config=config,
    )


def filter_manifest(
    manifest: DatasetManifest, report: AuditReport
) -> tuple[DatasetManifest, dict[str, int]]:
    """Drop every entry of the flagged languages.

    Returns the filtered manifest plus surviving per-language entry counts.
    """
    flagged = set(report.flagged_languages)
    kept = [e for e in manifest.entries if e.language_code not in flagged]
    counts = Counter(e.language_code for e in kept)
    return DatasetManifest(entries=kept), dict(sorted(counts.items()))
