"""The active-search loop: growing batches, two-level selection, retraining.

One session owns a labeled set L, a pool U, a growing batch size B and a
bandit state. Each round it proposes a batch, waits for labels (from the
dataset oracle in simulation or a human through the review service), then
updates the cluster posteriors, regrows the batch size, retrains the
classifier on L plus fresh pseudo-negatives and rescores the pool.

Selection is two-level: per pick, draw an optimistic conversion rate
theta*_k per cluster, then take the pool instance maximizing
pi_i * sum_k mu[i,k] * theta*_k (ties broken by smallest doc id). The
greedy baseline takes the top-B instances by pi with the same tie break;
the random baseline samples the pool uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Protocol

import numpy as np

from . import backend
from .bandit import (BanditState, RewardBatch, DISCOUNT, WINDOW,
                     init_posteriors, sample_optimistic, update_posteriors)
from .classifier import (REVIEWED, SEED, assemble_training_set, predict, train)
from .cluster import MembershipMatrix
from .corpus import CorpusMatrix, synthetic_positive
from .errors import EmptyAfterVectorize, EmptyPool, NoSeeds, PartialLabels, SessionFinished, UnknownIds
from .sparse import SparseVector

STRATEGIES = ("mab", "greedy", "random")


@dataclass
class SearchConfig:
    """Everything a run needs besides the corpus and memberships.

    Exactly one of `gamma` (discount mode) and `window` (sliding-window
    mode) may be set. `budget` is the total-review budget as a fraction of
    the collection; the loop stops at the first round boundary where the
    number of reviewed instances (seeds included) reaches it, and the final
    batch is truncated so the budget is met exactly, never exceeded.
    """

    strategy: str = "mab"
    gamma: float | None = 0.95
    window: int | None = None
    n_pseudo: int = 100
    budget: float = 0.40
    initial_batch: int = 1
    l2_lambda: float = 1e-4
    epochs: int = 300
    seed: int = 0
    # clustering provenance, carried for manifests; not used by the loop
    k_clusters: int | None = None
    temperature: float = 0.1
    membership_source: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not (0.0 < self.budget <= 1.0):
            raise ValueError("budget must be in (0, 1]")
        if self.initial_batch < 1:
            raise ValueError("initial batch size must be at least 1")
        if self.n_pseudo < 0:
            raise ValueError("n_pseudo must be nonnegative")
        if self.window is not None and self.gamma is not None:
            raise ValueError("set either gamma or window, not both")
        if self.window is None and self.gamma is None:
            raise ValueError("one of gamma or window is required")
        if self.gamma is not None and not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.window is not None and self.window < 1:
            raise ValueError("window must be positive")

    @property
    def bandit_mode(self) -> str:
        return WINDOW if self.window is not None else DISCOUNT

    def as_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "SearchConfig":
        return SearchConfig(**d)


def next_batch_size(b: int) -> int:
    """Growth schedule B -> B + ceil(B / 40)."""
    if b < 1:
        raise ValueError("batch size must be at least 1")
    return b + -(-b // 40)


@dataclass
class TrajectoryEntry:
    round: int
    doc_id: str
    pi: float          # classifier score at selection time (nan for seeds)
    arm_score: float   # sum_k mu[i,k] theta*_k at selection (nan outside mab)
    label: int


@dataclass
class Trajectory:
    """Append-only review log plus per-round posterior snapshots."""

    entries: list[TrajectoryEntry] = field(default_factory=list)
    snapshots: list[tuple[int, np.ndarray, np.ndarray]] = field(default_factory=list)

    def found_curve(self) -> list[tuple[int, int]]:
        """Cumulative (reviewed, relevant found) after each review."""
        curve = []
        found = 0
        for i, entry in enumerate(self.entries, start=1):
            found += entry.label
            curve.append((i, found))
        return curve

    def reviewed_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def to_lines(self) -> list[str]:
        return [f"{e.round}\t{e.doc_id}\t{float(e.pi)!r}\t{float(e.arm_score)!r}\t{int(e.label)}"
                for e in self.entries]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")


class LabelOracle(Protocol):
    """Answers proposed batches; implementations may raise OracleTimeout."""

    def label(self, ids: list[str]) -> dict[str, int]:  # pragma: no cover
        ...


class DatasetOracle:
    """Simulation oracle backed by ground-truth labels."""

    def __init__(self, truth: dict[str, int]):
        self.truth = truth

    def label(self, ids: list[str]) -> dict[str, int]:
        return {i: int(self.truth[i]) for i in ids}


def _argmax_id_tiebreak(scores: np.ndarray, rows: np.ndarray, doc_ids: list[str]) -> int:
    """Index into `rows` of the max score; exact ties go to the smallest id."""
    best = np.max(scores)
    candidates = np.flatnonzero(scores == best)
    if candidates.size == 1:
        return int(candidates[0])
    return int(min(candidates, key=lambda j: doc_ids[rows[j]]))


def select_instance(pool_rows: np.ndarray, pi: np.ndarray, memberships: MembershipMatrix,
                    theta_star: np.ndarray, doc_ids: list[str]) -> tuple[int, float, float]:
    """One two-level pick: argmax over the pool of pi_i * (mu_i . theta*).

    `pi` is indexed by matrix row. Returns (row, pi_row, arm_score_row).
    """
    if pool_rows.size == 0:
        raise EmptyPool("selection from an empty pool")
    if theta_star.size != memberships.k:
        raise ValueError("theta* length must equal the number of clusters")
    m = memberships.matrix
    arm = backend.csr_rows_matvec(m.indptr, m.indices, m.data, pool_rows, theta_star)
    scores = pi[pool_rows] * arm
    j = _argmax_id_tiebreak(scores, pool_rows, doc_ids)
    return int(pool_rows[j]), float(pi[pool_rows[j]]), float(arm[j])


def greedy_pick_rows(pi: np.ndarray, pool_rows: np.ndarray, doc_ids: list[str],
                     b: int) -> np.ndarray:
    """Top-b pool rows by pi, descending, ties by smallest doc id."""
    ids = np.array([doc_ids[r] for r in pool_rows])
    order = np.lexsort((ids, -pi[pool_rows]))
    return pool_rows[order[:b]]


class ActiveSearchSession:
    """Stepper for one search run; drives Algorithm rounds one batch at a time.

    The same stepper backs both the batch simulator and the live review
    service, which is what makes a scripted service session reproduce a
    simulated run exactly.
    """

    def __init__(self, corpus: CorpusMatrix, memberships: MembershipMatrix,
                 config: SearchConfig, seed_ids: list[str] | None = None,
                 seed_query: str | None = None):
        if memberships.n_docs != corpus.n_docs:
            raise ValueError("memberships and corpus disagree on document count")
        self.corpus = corpus
        self.memberships = memberships
        self.config = config
        seed_ids = list(seed_ids or [])
        for doc_id in seed_ids:
            if doc_id not in corpus.row_of:
                raise NoSeeds(f"unknown seed document {doc_id!r}")
        self._labeled: list[tuple[SparseVector, int, str]] = []
        self._seed_query_used = False
        if seed_query is not None:
            try:
                vec = synthetic_positive(seed_query, corpus.vocabulary)
            except EmptyAfterVectorize as exc:
                raise NoSeeds(str(exc)) from exc
            self._labeled.append((vec, 1, SEED))
            self._seed_query_used = True
        for doc_id in seed_ids:
            self._labeled.append((corpus.row(doc_id), 1, SEED))
        if not self._labeled:
            raise NoSeeds("need seed ids or a seed query")

        n = corpus.n_docs
        self.pool_mask = np.ones(n, dtype=bool)
        seed_rows = [corpus.row_of[i] for i in seed_ids]
        self.pool_mask[seed_rows] = False
        # the synthetic query vector is not a collection member: it adds a
        # training example but contributes nothing to reviewed effort
        self.reviewed = len(seed_ids)
        self.relevant_found = len(seed_ids)
        self.budget_count = int(math.floor(config.budget * n + 1e-9))
        self.batch_size = config.initial_batch
        self.round = 1
        self.trajectory = Trajectory()
        for doc_id in seed_ids:
            self.trajectory.entries.append(
                TrajectoryEntry(0, doc_id, float("nan"), float("nan"), 1))

        self.bandit: BanditState = init_posteriors(
            memberships.k, mode=config.bandit_mode,
            gamma=config.gamma if config.gamma is not None else 1.0,
            window=config.window)
        self.trajectory.snapshots.append((0, self.bandit.s.copy(), self.bandit.f.copy()))

        seq = np.random.SeedSequence(config.seed)
        bandit_seq, pseudo_seq, strategy_seq = seq.spawn(3)
        self._bandit_rng = np.random.default_rng(bandit_seq)
        self._pseudo_rng = np.random.default_rng(pseudo_seq)
        self._strategy_rng = np.random.default_rng(strategy_seq)

        self.pi = np.zeros(n)
        self.finished = False
        self.pending: list[tuple[str, int, float, float]] = []  # id, row, pi, arm
        if self.reviewed >= self.budget_count or not self.pool_mask.any():
            self.finished = True
        else:
            self._retrain()
            self._build_pending()

    # -- loop internals ----------------------------------------------------

    def _pool_rows(self) -> np.ndarray:
        return np.flatnonzero(self.pool_mask)

    def _retrain(self) -> None:
        ts = assemble_training_set(self._labeled, self._pool_rows(),
                                   self.corpus.matrix, self.config.n_pseudo,
                                   self._pseudo_rng)
        model = train(ts, l2_lambda=self.config.l2_lambda, epochs=self.config.epochs)
        self.pi = predict(model, self.corpus.matrix)

    def _build_pending(self) -> None:
        remaining = self.budget_count - self.reviewed
        pool_rows = self._pool_rows()
        size = min(self.batch_size, remaining, pool_rows.size)
        if size <= 0:
            self.finished = True
            self.pending = []
            return
        doc_ids = self.corpus.doc_ids
        picks: list[tuple[str, int, float, float]] = []
        if self.config.strategy == "mab":
            for _ in range(size):
                theta_star = sample_optimistic(self.bandit, self._bandit_rng)
                row, pi_val, arm_val = select_instance(
                    pool_rows, self.pi, self.memberships, theta_star, doc_ids)
                picks.append((doc_ids[row], row, pi_val, arm_val))
                pool_rows = pool_rows[pool_rows != row]
        elif self.config.strategy == "greedy":
            for row in greedy_pick_rows(self.pi, pool_rows, doc_ids, size):
                picks.append((doc_ids[row], int(row), float(self.pi[row]), float("nan")))
        else:  # random
            chosen = self._strategy_rng.choice(pool_rows, size=size, replace=False)
            for row in chosen:
                picks.append((doc_ids[row], int(row), float(self.pi[row]), float("nan")))
        for _, row, _, _ in picks:
            self.pool_mask[row] = False
        self.pending = picks

    # -- public stepper API --------------------------------------------------

    def pending_ids(self) -> list[str]:
        return [doc_id for doc_id, _, _, _ in self.pending]

    def submit_labels(self, labels: dict[str, int]) -> None:
        """Label the entire pending batch and advance one round."""
        if self.finished:
            raise SessionFinished("the session already finished")
        pending_ids = set(self.pending_ids())
        got = set(labels)
        if got - pending_ids:
            raise UnknownIds(f"not in the pending batch: {sorted(got - pending_ids)}")
        if pending_ids - got:
            raise PartialLabels(f"missing labels for: {sorted(pending_ids - got)}")
        for doc_id, value in labels.items():
            if value not in (0, 1):
                raise ValueError(f"label for {doc_id!r} must be 0 or 1")

        rows = []
        rewards = []
        for doc_id, row, pi_val, arm_val in self.pending:
            label = int(labels[doc_id])
            self.trajectory.entries.append(
                TrajectoryEntry(self.round, doc_id, pi_val, arm_val, label))
            self._labeled.append((self.corpus.matrix.row(row), label, REVIEWED))
            rows.append(row)
            rewards.append(label)
        self.reviewed += len(rows)
        self.relevant_found += int(sum(rewards))

        batch = RewardBatch([doc_id for doc_id, _, _, _ in self.pending],
                            np.array(rewards, dtype=np.float64),
                            self.memberships.matrix.sub_rows(np.array(rows, dtype=np.int64)))
        update_posteriors(self.bandit, batch)
        self.trajectory.snapshots.append(
            (self.round, self.bandit.s.copy(), self.bandit.f.copy()))

        self.batch_size = next_batch_size(self.batch_size)
        self.round += 1
        self.pending = []
        if self.reviewed >= self.budget_count or not self.pool_mask.any():
            self.finished = True
            return
        self._retrain()
        self._build_pending()

    def pending_scores(self) -> list[tuple[str, float]]:
        return [(doc_id, pi_val) for doc_id, _, pi_val, _ in self.pending]


def run_search(corpus: CorpusMatrix, memberships: MembershipMatrix, oracle: LabelOracle,
               config: SearchConfig, seed_ids: list[str] | None = None,
               seed_query: str | None = None) -> tuple[Trajectory, ActiveSearchSession]:
    """Run a full simulated session against a label oracle."""
    session = ActiveSearchSession(corpus, memberships, config,
                                  seed_ids=seed_ids, seed_query=seed_query)
    while not session.finished:
        answers = oracle.label(session.pending_ids())
        session.submit_labels(answers)
    return session.trajectory, session
