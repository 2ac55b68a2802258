import numpy as np
import pytest

from activesearch.errors import MixedConfigs, NoRelevantInTruth
from activesearch.evaluation import (RecallCurve, RunResult, UNREACHED, aggregate_runs,
                                     build_report, effort_to_recall, recall_curve,
                                     weighted_recall)
from activesearch.search import Trajectory, TrajectoryEntry


def trajectory_of(ids_labels, start_round=0):
    t = Trajectory()
    for i, (doc_id, label) in enumerate(ids_labels):
        t.entries.append(TrajectoryEntry(start_round + i, doc_id, 0.5, 0.5, label))
    return t


def random_truth_and_trajectory(rng, n=50, prevalence=0.3):
    labels = {f"d{i:03d}": int(rng.random() < prevalence) for i in range(n)}
    if not any(labels.values()):
        labels["d000"] = 1
    order = rng.permutation(sorted(labels))
    reviewed = order[: rng.integers(5, n)]
    return labels, trajectory_of([(d, labels[d]) for d in reviewed])


class TestWeightedRecall:
    def test_uniform_three_of_ten(self):
        labels = {f"d{i}": 1 for i in range(10)}
        weights = {f"d{i}": 1.0 for i in range(10)}
        assert weighted_recall(["d0", "d1", "d2"], labels, weights) == pytest.approx(0.3)

    def test_stratified_heavy_document(self):
        labels = {"easy": 1, "hard": 1, "junk": 0}
        weights = {"easy": 1.0, "hard": 9.0, "junk": 1.0}
        assert weighted_recall(["hard"], labels, weights) == pytest.approx(0.9)
        assert weighted_recall(["easy"], labels, weights) == pytest.approx(0.1)

    def test_empty_prefix(self):
        labels = {"a": 1}
        assert weighted_recall([], labels, {"a": 2.0}) == 0.0

    def test_no_relevant_in_truth(self):
        with pytest.raises(NoRelevantInTruth):
            weighted_recall(["a"], {"a": 0}, {"a": 1.0})

    def test_uniform_equals_plain_on_random_trajectories(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            labels, trajectory = random_truth_and_trajectory(rng)
            weights = {d: 1.0 for d in labels}
            found = trajectory.reviewed_ids()
            plain = sum(labels[d] for d in found) / sum(labels.values())
            assert weighted_recall(found, labels, weights) == pytest.approx(plain, abs=1e-12)


class TestRecallCurve:
    def test_matches_independent_rescan(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            labels, trajectory = random_truth_and_trajectory(rng)
            weights = {d: float(rng.integers(1, 5)) for d in labels}
            curve = recall_curve(trajectory, labels, weights, len(labels))
            ids = trajectory.reviewed_ids()
            for idx in range(len(ids)):
                expected = weighted_recall(ids[: idx + 1], labels, weights)
                assert curve.recall[idx] == pytest.approx(expected, abs=1e-12)

    def test_monotone_validation(self):
        with pytest.raises(ValueError):
            RecallCurve(np.array([1, 2]), np.array([0.5, 0.4]), 10)
        with pytest.raises(ValueError):
            RecallCurve(np.array([2, 2]), np.array([0.4, 0.5]), 10)


class TestEffortToRecall:
    def curve(self):
        reviewed = np.array([100, 500, 4000])
        recall = np.array([0.5, 0.9, 0.95])
        return RecallCurve(reviewed, recall, 10_000)

    def test_direct_read_off(self):
        assert effort_to_recall(self.curve(), 0.9) == pytest.approx(0.05)

    def test_unreached(self):
        assert effort_to_recall(self.curve(), 0.99) is UNREACHED

    def test_step_semantics(self):
        labels = {"a": 1, "b": 0, "c": 1}
        trajectory = trajectory_of([("b", 0), ("a", 1), ("c", 1)])
        curve = recall_curve(trajectory, labels, {d: 1.0 for d in labels}, 3)
        # first relevant shows up at review 2: any target at or below 0.5
        # is first reached there
        assert effort_to_recall(curve, 0.4999) == pytest.approx(2 / 3)
        assert effort_to_recall(curve, 0.5) == pytest.approx(2 / 3)

    def test_monotone_in_target(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            labels, trajectory = random_truth_and_trajectory(rng)
            curve = recall_curve(trajectory, labels, {d: 1.0 for d in labels}, len(labels))
            prev = 0.0
            for target in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
                effort = effort_to_recall(curve, target)
                if effort is UNREACHED:
                    break
                assert effort >= prev
                prev = effort

    def test_target_validation(self):
        with pytest.raises(ValueError):
            effort_to_recall(self.curve(), 0.0)


class TestAggregate:
    def result(self, efforts, seed=0):
        return RunResult(topic="t", strategy="mab", seed=seed, efforts=efforts)

    def test_mean(self):
        agg = aggregate_runs([self.result({0.9: 0.02}), self.result({0.9: 0.04}, 1)])
        assert agg[0.9] == pytest.approx(0.03)

    def test_censoring_propagates(self):
        agg = aggregate_runs([self.result({0.9: 0.02}), self.result({0.9: UNREACHED}, 1)])
        assert agg[0.9] is UNREACHED

    def test_single_run_identity(self):
        agg = aggregate_runs([self.result({0.9: 0.07})])
        assert agg[0.9] == pytest.approx(0.07)

    def test_mixed_configs_rejected(self):
        other = RunResult(topic="t2", strategy="mab", seed=0, efforts={0.9: 0.02})
        with pytest.raises(MixedConfigs):
            aggregate_runs([self.result({0.9: 0.02}), other])


class TestReport:
    def test_layout_and_censored_cell(self):
        results = [
            RunResult("topicA", "mab", 0, {0.5: 0.01, 0.9: 0.05}),
            RunResult("topicA", "mab", 1, {0.5: 0.03, 0.9: UNREACHED}),
            RunResult("topicA", "greedy", 0, {0.5: 0.02, 0.9: 0.30}),
            RunResult("topicA", "greedy", 1, {0.5: 0.02, 0.9: 0.10}),
        ]
        report = build_report(results, budget=0.4, targets=[0.5, 0.9])
        lines = report.to_lines()
        assert lines[0] == "topic\tstrategy\trecall=0.5\trecall=0.9"
        greedy = next(l for l in lines if "\tgreedy\t" in l)
        mab = next(l for l in lines if "\tmab\t" in l)
        assert greedy.split("\t")[2:] == ["2.0000%", "20.0000%"]
        assert mab.split("\t")[2:] == ["2.0000%", ">40%"]
