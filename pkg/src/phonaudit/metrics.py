"""Transcript- and corpus-level error metrics.

Phonetic feature error rate (PFER) is the total alignment cost between a
gold and a predicted phone sequence; the normalized variant divides by
the gold length so utterance length does not masquerade as quality.
Per-phone profiles report the expected error, recall, and majority
predicted label for each occurrence of a target phone. Word boundaries
are ignored throughout: metrics run over flattened phone sequences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from phonaudit.alignment import CostModel, StepOp, align
from phonaudit.errors import EmptyGold, EmptyScoreList, PhoneNotFound
from phonaudit.features import nfd
from phonaudit.transcripts import Phone, Transcript

GAP = None  # aligned-to-gap marker in majority labels


@dataclass(frozen=True)
class UtteranceScore:
    utterance_id: str
    pfer_raw: float
    pfer_normalized: float
    gold_length: int


@dataclass(frozen=True)
class PhoneErrorProfile:
    phone: str
    occurrence_count: int
    expected_error: float
    majority_label: str | None  # None = gap
    recall: float


@dataclass(frozen=True)
class LanguageAggregate:
    """Median and interquartile range of an utterance score distribution.

    Quantiles use linear interpolation between closest ranks.
    """

    language_code: str
    median_pfer: float
    iqr_pfer: float
    n_utterances: int


def pfer(gold: Transcript, pred: Transcript, cost: CostModel) -> UtteranceScore:
    """Alignment cost between two transcripts, raw and length-normalized."""
    gold_phones = gold.phones()
    if not gold_phones:
        raise EmptyGold(f"gold transcript {gold.utterance_id!r} has no phones")
    path = align(gold_phones, pred.phones(), cost)
    raw = path.total_cost
    return UtteranceScore(
        utterance_id=gold.utterance_id,
        pfer_raw=raw,
        pfer_normalized=raw / len(gold_phones),
        gold_length=len(gold_phones),
    )


def _phone_surface(q: Phone | str) -> str:
    return nfd(q.surface if isinstance(q, Phone) else q)


def _occurrence_sweep(
    corpus: list[tuple[Transcript, Transcript]],
    targets: set[str],
    cost: CostModel,
) -> dict[str, list[tuple[float, str | None]]]:
    """Per target phone: (step cost, aligned prediction or gap) for every
    gold occurrence, in corpus order."""
    hits: dict[str, list[tuple[float, str | None]]] = {t: [] for t in targets}
    for gold, pred in corpus:
        gold_phones = gold.phones()
        pred_phones = pred.phones()
        if not gold_phones:
            continue
        path = align(gold_phones, pred_phones, cost)
        for step in path.steps:
            if step.gold_index is None:
                continue
            surface = gold_phones[step.gold_index].surface
            if surface not in hits:
                continue
            if step.op is StepOp.DELETE:
                hits[surface].append((cost.indel_cost, GAP))
            else:
                hits[surface].append(
                    (step.cost, pred_phones[step.pred_index].surface)
                )
    return hits


def _profile(phone: str, occ: list[tuple[float, str | None]]) -> PhoneErrorProfile:
    if not occ:
        raise PhoneNotFound(f"phone {phone!r} never occurs in the gold corpus")
    costs = [c for c, _ in occ]
    labels = Counter(lab for _, lab in occ)
    # Deterministic mode: highest count, then lexicographic label, gap last.
    majority = min(
        labels.items(), key=lambda kv: (-kv[1], kv[0] is None, kv[0] or "")
    )[0]
    exact = sum(1 for _, lab in occ if lab == phone)
    return PhoneErrorProfile(
        phone=phone,
        occurrence_count=len(occ),
        expected_error=sum(costs) / len(costs),
        majority_label=majority,
        recall=exact / len(occ),
    )


def expected_phone_error(
    corpus: list[tuple[Transcript, Transcript]],
    q: Phone | str,
    cost: CostModel,
) -> PhoneErrorProfile:
    """Mean aligned-step cost over every gold occurrence of one phone.

    An occurrence aligned to a gap contributes the indel cost; each
    occurrence counts once regardless of which utterance it came from.
    """
    surface = _phone_surface(q)
    hits = _occurrence_sweep(corpus, {surface}, cost)
    return _profile(surface, hits[surface])


def phone_recall(
    corpus: list[tuple[Transcript, Transcript]],
    phones: set[Phone | str] | list[Phone | str],
    cost: CostModel,
) -> dict[str, PhoneErrorProfile]:
    """Profiles for several target phones in one alignment sweep.

    Recall counts only exact surface-string equality (after NFD) of the
    aligned prediction; raises PhoneNotFound for any absent target.
    """
    targets = {_phone_surface(p) for p in phones}
    hits = _occurrence_sweep(corpus, targets, cost)
    return {t: _profile(t, hits[t]) for t in sorted(targets)}


def aggregate_language(
    scores: list[UtteranceScore],
    language_code: str = "",
    use_normalized: bool = True,
) -> LanguageAggregate:
    """Median and IQR over an utterance score list (permutation-invariant)."""
    if not scores:
        raise EmptyScoreList("no utterance scores to aggregate")
    values = np.array(
        [s.pfer_normalized if use_normalized else s.pfer_raw for s in scores]
    )
    q1, q2, q3 = np.percentile(values, [25, 50, 75], method="linear")
    return LanguageAggregate(
        language_code=language_code,
        median_pfer=float(q2),
        iqr_pfer=float(q3 - q1),
        n_utterances=len(scores),
    )
