"""Effort-to-recall evaluation over completed trajectories.

Recall is stratum-weighted: each document counts with its stratum weight
(the inverse of its assessment sampling rate when that applies), so with
uniform weights this reduces to plain recall. The headline table reports,
per topic and strategy, the mean fraction of the collection reviewed to
first reach each recall target; a run that never reaches a target within
budget censors the whole cell, rendered as ">X%".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MixedConfigs, NoRelevantInTruth
from .search import Trajectory

UNREACHED = None  # cell value for "budget exhausted before the target"


def weighted_recall(found_ids, labels: dict[str, int], weights: dict[str, float]) -> float:
    """Weight of relevant documents found over the weight of all relevant."""
    total = sum(weights[d] for d, y in labels.items() if y == 1)
    if total <= 0:
        raise NoRelevantInTruth("no relevant document in the ground truth")
    got = sum(weights[d] for d in found_ids if labels.get(d, 0) == 1)
    return got / total


@dataclass
class RecallCurve:
    """Weighted recall after each review, as parallel arrays."""

    reviewed: np.ndarray
    recall: np.ndarray
    collection_size: int

    def __post_init__(self):
        self.reviewed = np.asarray(self.reviewed, dtype=np.int64)
        self.recall = np.asarray(self.recall, dtype=np.float64)
        if np.any(np.diff(self.reviewed) <= 0) or np.any(np.diff(self.recall) < -1e-12):
            raise ValueError("curve must be non-decreasing")
        if self.recall.size and self.recall[-1] > 1.0 + 1e-9:
            raise ValueError("recall cannot exceed 1")

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for reviewed, recall in zip(self.reviewed, self.recall):
                fh.write(f"{int(reviewed)}\t{float(recall)!r}\n")


def recall_curve(trajectory: Trajectory, labels: dict[str, int],
                 weights: dict[str, float], collection_size: int) -> RecallCurve:
    """Accumulate the weighted recall point by point along a trajectory."""
    total = sum(weights[d] for d, y in labels.items() if y == 1)
    if total <= 0:
        raise NoRelevantInTruth("no relevant document in the ground truth")
    reviewed = []
    recall = []
    got = 0.0
    for i, entry in enumerate(trajectory.entries, start=1):
        if labels.get(entry.doc_id, 0) == 1:
            got += weights[entry.doc_id]
        reviewed.append(i)
        recall.append(got / total)
    return RecallCurve(np.array(reviewed, dtype=np.int64), np.array(recall), collection_size)


def effort_to_recall(curve: RecallCurve, target: float):
    """Fraction of the collection reviewed when `target` recall is first
    reached, or UNREACHED if the curve never crosses it."""
    if not (0.0 < target <= 1.0):
        raise ValueError("target must be in (0, 1]")
    hits = np.flatnonzero(curve.recall >= target - 1e-12)
    if hits.size == 0:
        return UNREACHED
    return float(curve.reviewed[hits[0]] / curve.collection_size)


@dataclass
class RunResult:
    """Efforts of a single run, keyed by recall target (UNREACHED allowed)."""

    topic: str
    strategy: str
    seed: int
    efforts: dict[float, float | None]


@dataclass
class EvaluationReport:
    """Mean effort per (topic, strategy, target) cell over seeded runs."""

    budget: float
    targets: list[float]
    cells: dict[tuple[str, str], dict[float, float | None]] = field(default_factory=dict)

    def to_lines(self) -> list[str]:
        header = "topic\tstrategy\t" + "\t".join(f"recall={t:g}" for t in self.targets)
        lines = [header]
        over = f">{self.budget * 100:g}%"
        for (topic, strategy) in sorted(self.cells):
            row = self.cells[(topic, strategy)]
            cells = [over if row[t] is UNREACHED else f"{row[t] * 100:.4f}%"
                     for t in self.targets]
            lines.append(f"{topic}\t{strategy}\t" + "\t".join(cells))
        return lines

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")


def aggregate_runs(results: list[RunResult]) -> dict[float, float | None]:
    """Mean effort across runs of one (topic, strategy) cell.

    Any single censored run censors the aggregate: averaging a value that
    is only known to exceed the budget is undefined, so the conservative
    rule propagates UNREACHED.
    """
    if not results:
        raise ValueError("nothing to aggregate")
    topics = {r.topic for r in results}
    strategies = {r.strategy for r in results}
    target_sets = {tuple(sorted(r.efforts)) for r in results}
    if len(topics) > 1 or len(strategies) > 1 or len(target_sets) > 1:
        raise MixedConfigs("runs disagree on topic, strategy, or targets")
    out: dict[float, float | None] = {}
    for target in results[0].efforts:
        values = [r.efforts[target] for r in results]
        if any(v is UNREACHED for v in values):
            out[target] = UNREACHED
        else:
            out[target] = float(np.mean(values))
    return out


def build_report(results: list[RunResult], budget: float,
                 targets: list[float]) -> EvaluationReport:
    report = EvaluationReport(budget=budget, targets=list(targets))
    keys = sorted({(r.topic, r.strategy) for r in results})
    for topic, strategy in keys:
        group = [r for r in results if r.topic == topic and r.strategy == strategy]
        report.cells[(topic, strategy)] = aggregate_runs(group)
    return report
