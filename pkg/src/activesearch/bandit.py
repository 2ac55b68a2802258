"""Non-stationary multiple-plays Thompson sampling over cluster arms.

Each cluster k carries a Beta(S_k, F_k) posterior over its conversion rate,
initialized at the Jeffreys prior (0.5, 0.5). After each labeled batch the
binary reward of every instance is split across clusters by its soft
membership row, and the running counts either decay by a forgetting factor
gamma (discount mode) or fall out of a sliding window of the last W rounds
(window mode). Sampling is optimistic: a draw below the posterior mean is
replaced by the mean.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, HistoryGap
from .sparse import CSRMatrix

PRIOR_S = 0.5
PRIOR_F = 0.5

DISCOUNT = "discount"
WINDOW = "window"


@dataclass(frozen=True)
class ArmPosterior:
    """Beta parameters of a single arm; mean = s / (s + f)."""

    s: float
    f: float

    def __post_init__(self):
        if not (self.s >= 0 and self.f >= 0 and self.s + self.f > 0):
            raise ValueError("require s >= 0, f >= 0, s + f > 0")

    @property
    def mean(self) -> float:
        return self.s / (self.s + self.f)


@dataclass
class RewardBatch:
    """One round of labeled instances with their membership rows.

    `memberships` is a (batch x K) row-stochastic CSR block; rewards are
    0/1. An empty batch is valid and produces a decay-only round.
    """

    instance_ids: list[str]
    rewards: np.ndarray
    memberships: CSRMatrix

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        if self.rewards.size != len(self.instance_ids) or self.memberships.n_rows != self.rewards.size:
            raise ValueError("ids, rewards and membership rows must align")

    def weighted_counts(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-cluster success and failure mass contributed by this batch."""
        if self.memberships.n_cols != k:
            raise DimensionMismatch(
                f"membership rows have {self.memberships.n_cols} columns, state has {k} arms")
        m = self.memberships
        succ = np.zeros(k)
        fail = np.zeros(k)
        for i in range(m.n_rows):
            lo, hi = m.indptr[i], m.indptr[i + 1]
            if self.rewards[i] == 1.0:
                np.add.at(succ, m.indices[lo:hi], m.data[lo:hi])
            else:
                np.add.at(fail, m.indices[lo:hi], m.data[lo:hi])
        return succ, fail


def empty_batch(k: int) -> RewardBatch:
    return RewardBatch([], np.empty(0), CSRMatrix(np.zeros(1, np.int64),
                                                  np.empty(0, np.int64),
                                                  np.empty(0, np.float64), k))


@dataclass
class BanditState:
    """Posterior parameters for all K arms plus the update-mode state.

    In window mode the per-round (success, failure) aggregate vectors of
    the last W rounds are retained and S = prior + their sum; the prior is
    never windowed out. window=None means an unbounded window.
    """

    k: int
    mode: str = DISCOUNT
    gamma: float = 1.0
    window: int | None = None
    s: np.ndarray = field(init=False)
    f: np.ndarray = field(init=False)
    history: deque = field(init=False)
    round: int = field(init=False, default=0)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one arm")
        if self.mode not in (DISCOUNT, WINDOW):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == DISCOUNT and not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.mode == WINDOW and self.window is not None and self.window < 1:
            raise ValueError("window must be positive (or None for unbounded)")
        self.s = np.full(self.k, PRIOR_S)
        self.f = np.full(self.k, PRIOR_F)
        self.history = deque()

    def means(self) -> np.ndarray:
        return self.s / (self.s + self.f)

    def arm(self, index: int) -> ArmPosterior:
        return ArmPosterior(float(self.s[index]), float(self.f[index]))


def init_posteriors(k: int, mode: str = DISCOUNT, gamma: float = 1.0,
                    window: int | None = None) -> BanditState:
    """All arms start at the Jeffreys prior Beta(0.5, 0.5)."""
    return BanditState(k=k, mode=mode, gamma=gamma, window=window)


def update_posteriors(state: BanditState, batch: RewardBatch) -> BanditState:
    """Advance one round with a labeled batch (possibly empty).

    Discount mode:  S_k <- gamma * S_k + sum_i r_i * mu[i, k]
                    F_k <- gamma * F_k + sum_i (1 - r_i) * mu[i, k]
    The decay applies uniformly to every arm, including arms that received
    no reward mass this round, so ignored clusters drift back toward the
    uninformative prior mean.

    Window mode: append this round's weighted counts, drop rounds older
    than W, and rebuild S_k = 0.5 + window success sum (F_k analogous).
    """
    succ, fail = batch.weighted_counts(state.k)
    if state.mode == DISCOUNT:
        state.s = state.gamma * state.s + succ
        state.f = state.gamma * state.f + fail
    else:
        state.history.append((succ, fail))
        if state.window is not None:
            while len(state.history) > state.window:
                state.history.popleft()
        s = np.full(state.k, PRIOR_S)
        f = np.full(state.k, PRIOR_F)
        for round_succ, round_fail in state.history:  # chronological
            s += round_succ
            f += round_fail
        state.s, state.f = s, f
    state.round += 1
    return state


def sample_optimistic(state: BanditState, rng: np.random.Generator) -> np.ndarray:
    """Draw theta_k ~ Beta(S_k, F_k) per arm, clamped below by the mean.

    Arms are sampled in index order from the supplied generator so a seeded
    run replays exactly.
    """
    theta = rng.beta(state.s, state.f)
    return np.maximum(theta, state.means())


def replay_reconstruct(k: int, mode: str, reward_history: list[tuple[int, RewardBatch]],
                       gamma: float = 1.0, window: int | None = None) -> BanditState:
    """Recompute the final state by folding the update rule from scratch.

    `reward_history` holds (round_index, batch) pairs; rounds must be the
    contiguous sequence 0..T-1 or HistoryGap is raised. Used as an audit
    oracle against the live state.
    """
    state = init_posteriors(k, mode=mode, gamma=gamma, window=window)
    for expected, (round_index, batch) in enumerate(reward_history):
        if round_index != expected:
            raise HistoryGap(f"expected round {expected}, found {round_index}")
        update_posteriors(state, batch)
    return state


def posterior_snapshot_lines(snapshots: list[tuple[int, np.ndarray, np.ndarray]]) -> list[str]:
    """Flatten per-round (S, F) snapshots to `round \\t cluster \\t S \\t F` lines."""
    lines = []
    for round_index, s, f in snapshots:
        for cluster in range(s.size):
            lines.append(f"{round_index}\t{cluster}\t{float(s[cluster])!r}\t{float(f[cluster])!r}")
    return lines
