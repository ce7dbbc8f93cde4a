"""Global phone-sequence alignment under a feature-distance cost model.

Costs are minimized: substituting a phone costs the normalized hamming
distance between its feature vectors, an insertion or deletion costs a
flat indel penalty, and phones missing from the feature table substitute
at a fixed unknown-phone cost unless the surfaces match exactly. Also
provides the space-induction step that projects gold word boundaries onto
an unsegmented model transcript.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from phonaudit.features import FeatureTable
from phonaudit.transcripts import Phone, Transcript


class StepOp(Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    INSERT = "insert"   # consumes a predicted phone only
    DELETE = "delete"   # consumes a gold phone only


@dataclass(frozen=True)
class AlignStep:
    op: StepOp
    gold_index: int | None
    pred_index: int | None
    cost: float


@dataclass
class AlignmentPath:
    """Ordered edit steps; every position of both sequences is consumed
    exactly once and total_cost is the sum of step costs."""

    steps: list[AlignStep]
    total_cost: float

    def dump_tsv(self, gold: list[Phone], pred: list[Phone]) -> str:
        """Debug rendering: one row per step (op, gold, pred, cost)."""
        rows = ["op\tgold\tpred\tcost"]
        for s in self.steps:
            g = gold[s.gold_index].surface if s.gold_index is not None else ""
            p = pred[s.pred_index].surface if s.pred_index is not None else ""
            rows.append(f"{s.op.value}\t{g}\t{p}\t{s.cost:g}")
        return "\n".join(rows) + "\n"


@dataclass
class CostModel:
    """Substitution function plus indel and unknown-phone penalties.

    substitution(p, p) is 0 for any phone the table resolves, and the
    function is symmetric. Build one per feature table via from_table().
    """

    substitution: Callable[[Phone, Phone], float]
    indel_cost: float = 1.0
    unknown_phone_cost: float = 1.0

    @classmethod
    def from_table(
        cls,
        table: FeatureTable,
        indel_cost: float = 1.0,
        unknown_phone_cost: float = 1.0,
    ) -> CostModel:
        cache: dict[tuple[str, str], float] = {}

        def sub(a: Phone, b: Phone) -> float:
            key = (a.surface, b.surface)
            hit = cache.get(key)
            if hit is not None:
                return hit
            va = table.resolve(a.surface)
            vb = table.resolve(b.surface)
            if va is not None and vb is not None:
                cost = sum(1 for x, y in zip(va, vb) if x != y) / table.feature_count
            elif a.surface == b.surface:
                cost = 0.0
            else:
                cost = unknown_phone_cost
            cache[key] = cost
            cache[(b.surface, a.surface)] = cost
            return cost

        return cls(substitution=sub, indel_cost=indel_cost,
                   unknown_phone_cost=unknown_phone_cost)


_DIAG, _UP, _LEFT = 0, 1, 2


def align(gold: list[Phone], pred: list[Phone], cost: CostModel) -> AlignmentPath:
    """Minimum-cost global alignment of two phone sequences.

    Ties break deterministically: diagonal (match/substitute) over delete
    over insert. Empty inputs align as pure insertions/deletions.
    """
    n, m = len(gold), len(pred)
    indel = cost.indel_cost
    sub = cost.substitution

    score = [[0.0] * (m + 1) for _ in range(n + 1)]
    trace = [[_DIAG] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        score[i][0] = i * indel
        trace[i][0] = _UP
    for j in range(1, m + 1):
        score[0][j] = j * indel
        trace[0][j] = _LEFT

    for i in range(1, n + 1):
        g = gold[i - 1]
        row = score[i]
        above = score[i - 1]
        trow = trace[i]
        for j in range(1, m + 1):
            best = above[j - 1] + sub(g, pred[j - 1])
            ptr = _DIAG
            up = above[j] + indel
            if up < best:
                best, ptr = up, _UP
            left = row[j - 1] + indel
            if left < best:
                best, ptr = left, _LEFT
            row[j] = best
            trow[j] = ptr

    steps: list[AlignStep] = []
    i, j = n, m
    while i > 0 or j > 0:
        ptr = trace[i][j]
        if i > 0 and j > 0 and ptr == _DIAG:
            g, p = gold[i - 1], pred[j - 1]
            c = sub(g, p)
            op = StepOp.MATCH if g.surface == p.surface else StepOp.SUBSTITUTE
            steps.append(AlignStep(op=op, gold_index=i - 1, pred_index=j - 1, cost=c))
            i -= 1
            j -= 1
        elif i > 0 and (ptr == _UP or j == 0):
            steps.append(AlignStep(op=StepOp.DELETE, gold_index=i - 1,
                                   pred_index=None, cost=indel))
            i -= 1
        else:
            steps.append(AlignStep(op=StepOp.INSERT, gold_index=None,
                                   pred_index=j - 1, cost=indel))
            j -= 1
    steps.reverse()
    return AlignmentPath(steps=steps, total_cost=score[n][m])


def induce_spaces(gold: Transcript, pred_flat: list[Phone], cost: CostModel) -> Transcript:
    """Project gold word boundaries onto an unsegmented predicted sequence.

    A boundary lands after the predicted phone aligned to the last gold
    phone of each gold word; when that gold phone aligned to a gap, the
    boundary follows the most recently consumed predicted phone. The
    flattened output equals the input sequence; empty segments collapse.
    """
    gold_phones = gold.phones()
    path = align(gold_phones, pred_flat, cost)

    # Where each gold index ended up on the predicted side: the consumed
    # pred index for diagonal steps, else the last pred index consumed so far.
    pred_pos_after_gold: dict[int, int] = {}
    last_pred = -1
    for step in path.steps:
        if step.pred_index is not None:
            last_pred = step.pred_index
        if step.gold_index is not None:
            pred_pos_after_gold[step.gold_index] = last_pred

    cuts: list[int] = []
    consumed = 0
    for word in gold.words[:-1]:
        consumed += len(word)
        cuts.append(pred_pos_after_gold.get(consumed - 1, -1) + 1)

    words: list[list[Phone]] = []
    start = 0
    for cut in cuts + [len(pred_flat)]:
        if cut > start:
            words.append(list(pred_flat[start:cut]))
            start = cut
    return Transcript(words=words, language_code=gold.language_code,
                      utterance_id=gold.utterance_id)
