"""Evaluation harness: majority-vote gold labeling with a tie-breaking
fifth rater, Fleiss' kappa agreement, and precision/recall/F1 against gold.

Input files mirror the annotation protocol: four primary raters per item
plus an optional tie-breaker. Kappa is computed over the four primary
raters only.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

TASK_LABELS = {
    "sentiment": ("positive", "negative", "neutral"),
    "hate": ("hate", "normal"),
}

N_PRIMARY_RATERS = 4


class TieError(ValueError):
    """An even vote split with no usable tie-breaker."""


@dataclass(frozen=True)
class AnnotationSet:
    post_id: str
    task: str
    votes: tuple[str, ...]
    tie_breaker: str | None = None

    def __post_init__(self) -> None:
        if self.task not in TASK_LABELS:
            raise ValueError(f"unknown task: {self.task!r}")
        if len(self.votes) != N_PRIMARY_RATERS:
            raise ValueError(f"expected {N_PRIMARY_RATERS} votes, got {len(self.votes)}")
        labels = TASK_LABELS[self.task]
        for v in self.votes:
            if v not in labels:
                raise ValueError(f"vote {v!r} not in task labels {labels}")
        if self.tie_breaker is not None and self.tie_breaker not in labels:
            raise ValueError(f"tie_breaker {self.tie_breaker!r} not in task labels {labels}")

    @classmethod
    def from_dict(cls, raw: dict) -> "AnnotationSet":
        return cls(post_id=str(raw["post_id"]), task=raw["task"],
                   votes=tuple(raw["votes"]), tie_breaker=raw.get("tie_breaker"))


@dataclass(frozen=True)
class GoldLabel:
    post_id: str
    task: str
    label: str

    def __post_init__(self) -> None:
        if self.label not in TASK_LABELS[self.task]:
            raise ValueError(f"label {self.label!r} not in task {self.task!r}")


def majority_vote(votes: tuple[str, ...] | list[str], tie_breaker: str | None = None) -> str:
    """Gold label from four votes; the tie-breaker decides tied pluralities.

    A unique top count wins outright (strict majority or plurality). When
    several labels tie at the top, the tie-breaker must be present and must
    pick one of the tied labels; otherwise TieError.
    """
    if len(votes) != N_PRIMARY_RATERS:
        raise ValueError(f"expected {N_PRIMARY_RATERS} votes, got {len(votes)}")
    counts = Counter(votes)
    top = max(counts.values())
    leaders = sorted(label for label, c in counts.items() if c == top)
    if len(leaders) == 1:
        return leaders[0]
    if tie_breaker is None:
        raise TieError(f"votes tied between {leaders}; a tie-breaker is required")
    if tie_breaker not in leaders:
        raise TieError(f"tie-breaker {tie_breaker!r} is not among the tied labels {leaders}")
    return tie_breaker


def fleiss_kappa(counts: list[list[int]]) -> float:
    """Fleiss' kappa for items x categories rating counts.

    Every row must sum to the same rater count n >= 2. Perfect observed
    agreement returns 1.0 exactly; a degenerate single-category marginal
    (expected agreement 1) also returns 1.0, with a warning.
    """
    if not counts:
        raise ValueError("counts must be nonempty")
    n = sum(counts[0])
    if n < 2:
        raise ValueError("at least 2 raters required")
    for row in counts:
        if sum(row) != n:
            raise ValueError("all rows must sum to the same rater count")
    n_items = len(counts)
    n_cats = len(counts[0])

    p_item = [(sum(c * c for c in row) - n) / (n * (n - 1)) for row in counts]
    p_bar = sum(p_item) / n_items
    totals = [sum(row[j] for row in counts) for j in range(n_cats)]
    p_cat = [t / (n_items * n) for t in totals]
    p_expected = sum(p * p for p in p_cat)

    # check the marginal first: a single-category table also has p_bar == 1
    # but must carry the degeneracy warning
    if p_expected == 1.0:
        logger.warning("degenerate rating distribution: all raters used one category")
        return 1.0
    if p_bar == 1.0:
        return 1.0
    return (p_bar - p_expected) / (1.0 - p_expected)


@dataclass
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {"label": self.label, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "support": self.support}


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    mode: str
    per_class: list[ClassMetrics] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mode": self.mode,
            "per_class": [c.to_dict() for c in self.per_class],
            "warnings": self.warnings,
        }

    def to_table(self) -> str:
        """Aligned text table: one row per class plus the average row."""
        rows = [("Class", "Precision", "Recall", "F1", "Support")]
        for c in self.per_class:
            rows.append((c.label, f"{c.precision:.2f}", f"{c.recall:.2f}",
                         f"{c.f1:.2f}", str(c.support)))
        rows.append((self.mode, f"{self.precision:.2f}", f"{self.recall:.2f}",
                     f"{self.f1:.2f}", str(sum(c.support for c in self.per_class))))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
                 for row in rows]
        return "\n".join(lines)


def _safe_div(num: float, den: float, warnings: list[str], what: str) -> float:
    if den == 0:
        warnings.append(f"{what}: 0/0 treated as 0")
        return 0.0
    return num / den


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if (p + r) > 0 else 0.0


def precision_recall_f1(preds: dict[str, str], gold: dict[str, str],
                        mode: str = "macro",
                        positive_label: str | None = None) -> MetricsReport:
    """P/R/F1 of predictions against gold labels aligned by post id.

    binary mode scores the designated positive class; macro averages
    per-class scores unweighted. Empty denominators follow the 0/0 -> 0
    convention and are surfaced in the report warnings.
    """
    if mode not in ("binary", "macro"):
        raise ValueError(f"unknown mode: {mode!r}")
    if mode == "binary" and positive_label is None:
        raise ValueError("binary mode requires a positive_label")
    ids = sorted(set(preds) & set(gold))
    if not ids:
        raise ValueError("no overlapping post ids between predictions and gold")

    labels = sorted({gold[i] for i in ids} | {preds[i] for i in ids})
    warnings: list[str] = []
    per_class = []
    for label in labels:
        tp = sum(1 for i in ids if preds[i] == label and gold[i] == label)
        fp = sum(1 for i in ids if preds[i] == label and gold[i] != label)
        fn = sum(1 for i in ids if preds[i] != label and gold[i] == label)
        p = _safe_div(tp, tp + fp, warnings, f"precision[{label}]")
        r = _safe_div(tp, tp + fn, warnings, f"recall[{label}]")
        per_class.append(ClassMetrics(label=label, precision=p, recall=r,
                                      f1=_f1(p, r), support=tp + fn))

    if mode == "binary":
        chosen = next((c for c in per_class if c.label == positive_label), None)
        if chosen is None:
            chosen = ClassMetrics(label=positive_label, precision=0.0, recall=0.0,
                                  f1=0.0, support=0)
            warnings.append(f"positive label {positive_label!r} absent from data")
            per_class.append(chosen)
        return MetricsReport(precision=chosen.precision, recall=chosen.recall,
                             f1=chosen.f1, mode=f"binary:{positive_label}",
                             per_class=per_class, warnings=warnings)

    k = len(per_class)
    return MetricsReport(
        precision=sum(c.precision for c in per_class) / k,
        recall=sum(c.recall for c in per_class) / k,
        f1=sum(c.f1 for c in per_class) / k,
        mode="macro",
        per_class=per_class,
        warnings=warnings,
    )


def load_annotations(path: str | Path) -> list[AnnotationSet]:
    """JSONL of {post_id, task, votes: [...], tie_breaker}."""
    out = []
    for line in Path(path).read_text("utf-8").splitlines():
        if line.strip():
            out.append(AnnotationSet.from_dict(json.loads(line)))
    return out


def load_predictions(path: str | Path) -> dict[str, dict[str, str]]:
    """JSONL of {post_id, task, label} -> task -> post_id -> label."""
    out: dict[str, dict[str, str]] = {}
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        out.setdefault(raw["task"], {})[str(raw["post_id"])] = raw["label"]
    return out


def gold_from_annotations(annotations: list[AnnotationSet]) -> dict[str, dict[str, str]]:
    """Majority-vote gold labels, task -> post_id -> label."""
    out: dict[str, dict[str, str]] = {}
    for ann in annotations:
        out.setdefault(ann.task, {})[ann.post_id] = majority_vote(ann.votes, ann.tie_breaker)
    return out


def kappa_by_task(annotations: list[AnnotationSet]) -> dict[str, float]:
    """Fleiss' kappa per task over the four primary raters."""
    out = {}
    for task, labels in TASK_LABELS.items():
        rows = []
        for ann in annotations:
            if ann.task != task:
                continue
            counts = Counter(ann.votes)
            rows.append([counts.get(label, 0) for label in labels])
        if rows:
            out[task] = fleiss_kappa(rows)
    return out
