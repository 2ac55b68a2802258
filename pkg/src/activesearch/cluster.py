"""Soft cluster structure over the corpus: the arms of the bandit.

The built-in clusterer is softmax spherical k-means: run spherical k-means
(cosine similarity) to convergence, then set membership mu[i, k] as the
softmax over clusters of cos(x_i, c_k) / temperature. Externally computed
memberships (e.g. from a topic model) can be imported from a triplet file
instead; both paths produce the same row-stochastic MembershipMatrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .corpus import CorpusMatrix
from .errors import DegenerateClustering, MalformedMembership
from .sparse import CSRMatrix

MU_FLOOR = 1e-4  # memberships below this are dropped, then rows renormalized
MAX_ITER = 100


@dataclass
class MembershipMatrix:
    """Row-stochastic soft memberships, one row per document, K columns."""

    matrix: CSRMatrix
    k: int

    @property
    def n_docs(self) -> int:
        return self.matrix.n_rows

    def row_sums(self) -> np.ndarray:
        sums = np.zeros(self.n_docs)
        np.add.at(sums, np.repeat(np.arange(self.n_docs), self.matrix.row_nnz()),
                  self.matrix.data)
        return sums

    def validate(self, atol: float = 1e-6) -> None:
        if self.matrix.n_cols != self.k:
            raise ValueError("column count does not match k")
        if np.any(self.matrix.data < 0):
            raise ValueError("negative membership")
        if np.any(self.matrix.row_nnz() == 0):
            raise ValueError("instance with no membership")
        if not np.allclose(self.row_sums(), 1.0, atol=atol):
            raise ValueError("rows must sum to 1")

    def to_dense(self) -> np.ndarray:
        return self.matrix.to_dense()


def _similarities(matrix: CSRMatrix, centroids: np.ndarray) -> np.ndarray:
    return backend.csr_dense_matmat(matrix.indptr, matrix.indices, matrix.data, centroids)


def farthest_point_init(matrix: CSRMatrix, k: int, rng: np.random.Generator) -> np.ndarray:
    """Deterministic-given-seed farthest-point centroid selection.

    The first centroid is a uniformly drawn row; each next centroid is the
    row with the smallest maximum cosine similarity to those already chosen
    (ties broken by smallest row index).
    """
    n = matrix.n_rows
    first = int(rng.integers(n))
    chosen = [first]
    centroids = np.zeros((k, matrix.n_cols))
    centroids[0] = matrix.row(first).to_dense(matrix.n_cols)
    if k == 1:
        return centroids
    max_sim = backend.csr_matvec(matrix.indptr, matrix.indices, matrix.data, centroids[0])
    max_sim[first] = np.inf
    for c in range(1, k):
        nxt = int(np.argmin(max_sim))
        chosen.append(nxt)
        centroids[c] = matrix.row(nxt).to_dense(matrix.n_cols)
        sims = backend.csr_matvec(matrix.indptr, matrix.indices, matrix.data, centroids[c])
        np.maximum(max_sim, sims, out=max_sim)
        max_sim[nxt] = np.inf
    return centroids


def _normalize_rows(dense: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(dense * dense, axis=1, keepdims=True))
    norms[norms == 0] = 1.0
    return dense / norms


def _repair_empty(matrix: CSRMatrix, centroids, assign, counts) -> None:
    # give each empty cluster the point least similar to its current centroid
    sims = _similarities(matrix, centroids)
    own = sims[np.arange(matrix.n_rows), assign].copy()
    for k in np.flatnonzero(counts == 0):
        victim = int(np.argmin(own))
        centroids[k] = matrix.row(victim).to_dense(matrix.n_cols)
        own[victim] = np.inf

def spherical_kmeans(matrix: CSRMatrix, initial_centroids: np.ndarray,
                     max_iter: int = MAX_ITER) -> tuple[np.ndarray, np.ndarray, int]:
    """Iterate assignment/update on the unit sphere from given centroids.

    Returns (centroids, assignments, iterations). Assignment is argmax
    cosine similarity with first-index tie break; centroids are the
    L2-normalized mean of their members. Raises DegenerateClustering when
    a cluster stays empty after one repair pass.
    """
    k = initial_centroids.shape[0]
    centroids = _normalize_rows(initial_centroids.astype(np.float64).copy())
    assign = np.full(matrix.n_rows, -1, dtype=np.int64)
    iteration = 0
    for iteration in range(1, max_iter + 1):
        sims = _similarities(matrix, centroids)
        new_assign = np.argmax(sims, axis=1).astype(np.int64)
        counts = np.bincount(new_assign, minlength=k)
        if np.any(counts == 0):
            _repair_empty(matrix, centroids, new_assign, counts)
            sims = _similarities(matrix, centroids)
            new_assign = np.argmax(sims, axis=1).astype(np.int64)
            counts = np.bincount(new_assign, minlength=k)
            if np.any(counts == 0):
                raise DegenerateClustering(
                    f"{int((counts == 0).sum())} clusters captured zero mass")
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        sums = backend.csr_scatter_rows(matrix.indptr, matrix.indices, matrix.data,
                                        assign, k, matrix.n_cols)
        norms = np.sqrt(np.sum(sums * sums, axis=1))
        # a zero-sum cluster keeps its previous centroid direction
        nonzero = norms > 0
        centroids[nonzero] = sums[nonzero] / norms[nonzero, None]
    return centroids, assign, iteration


def memberships_from_centroids(matrix: CSRMatrix, centroids: np.ndarray,
                               temperature: float, mu_floor: float = MU_FLOOR) -> MembershipMatrix:
    """softmax(cos(x_i, c_k) / temperature) rows, small entries dropped."""
    k = centroids.shape[0]
    sims = _similarities(matrix, centroids)
    logits = sims / temperature
    logits -= logits.max(axis=1, keepdims=True)
    mu = np.exp(logits)
    mu /= mu.sum(axis=1, keepdims=True)
    # drop tiny memberships but never a row's largest entry
    keep = mu >= mu_floor
    keep[np.arange(mu.shape[0]), np.argmax(mu, axis=1)] = True
    mu = np.where(keep, mu, 0.0)
    mu /= mu.sum(axis=1, keepdims=True)
    rows, cols = np.nonzero(mu)
    indptr = np.zeros(mu.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=mu.shape[0]), out=indptr[1:])
    mm = MembershipMatrix(CSRMatrix(indptr, cols, mu[rows, cols], k), k)
    mm.validate()
    return mm


def soft_cluster(cm: CorpusMatrix, k: int, temperature: float = 0.1,
                 rng_seed: int = 0, mu_floor: float = MU_FLOOR) -> MembershipMatrix:
    """Cluster the corpus into k arms and return soft memberships.

    Deterministic for fixed (corpus, k, temperature, rng_seed): the only
    randomness is the farthest-point first pick, drawn from
    numpy.random.default_rng(rng_seed).
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > cm.n_docs:
        raise ValueError("k cannot exceed the number of documents")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    rng = np.random.default_rng(rng_seed)
    centroids = farthest_point_init(cm.matrix, k, rng)
    centroids, _, _ = spherical_kmeans(cm.matrix, centroids)
    return memberships_from_centroids(cm.matrix, centroids, temperature, mu_floor)


# ---------------------------------------------------------------------------
# membership file: one `doc_id \t cluster_index \t mu` triplet per line
# ---------------------------------------------------------------------------

def write_memberships(mm: MembershipMatrix, doc_ids: list[str], path: str | Path) -> None:
    m = mm.matrix
    with open(path, "w", encoding="utf-8") as fh:
        for i, doc_id in enumerate(doc_ids):
            for j in range(m.indptr[i], m.indptr[i + 1]):
                fh.write(f"{doc_id}\t{int(m.indices[j])}\t{float(m.data[j])!r}\n")


def import_memberships(path: str | Path, doc_ids: list[str],
                       k: int | None = None) -> MembershipMatrix:
    """Load and validate a membership triplet file.

    Row sums within 1e-3 of 1 are renormalized to exactly 1; anything
    further off, a negative value, an unknown doc id, or a document with
    no triplet at all raises MalformedMembership (naming the line).
    """
    row_of = {d: i for i, d in enumerate(doc_ids)}
    per_row: list[dict[int, float]] = [dict() for _ in doc_ids]
    max_cluster = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedMembership(f"{path}:{lineno}: expected 3 tab-separated fields")
            doc_id, cluster_s, mu_s = parts
            if doc_id not in row_of:
                raise MalformedMembership(f"{path}:{lineno}: unknown doc id {doc_id!r}")
            cluster = int(cluster_s)
            mu = float(mu_s)
            if cluster < 0:
                raise MalformedMembership(f"{path}:{lineno}: negative cluster index")
            if mu < 0:
                raise MalformedMembership(f"{path}:{lineno}: negative membership")
            per_row[row_of[doc_id]][cluster] = per_row[row_of[doc_id]].get(cluster, 0.0) + mu
            max_cluster = max(max_cluster, cluster)
    n_clusters = (max_cluster + 1) if k is None else k
    if max_cluster >= n_clusters:
        raise MalformedMembership(f"cluster index {max_cluster} exceeds k={n_clusters}")
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for i, row in enumerate(per_row):
        total = sum(row.values())
        # padded so a row summing to exactly 0.999 stays inside the tolerance
        if abs(total - 1.0) > 1e-3 * (1.0 + 1e-9):
            raise MalformedMembership(
                f"doc {doc_ids[i]!r}: memberships sum to {total:.6f}, expected 1")
        # leave machine-precision rows untouched so re-export is byte-stable
        scale = 1.0 if abs(total - 1.0) < 1e-12 else total
        for cluster in sorted(row):
            value = row[cluster] / scale
            if value > 0:
                indices.append(cluster)
                data.append(value)
        indptr.append(len(indices))
    mm = MembershipMatrix(CSRMatrix(np.array(indptr, dtype=np.int64),
                                    np.array(indices, dtype=np.int64),
                                    np.array(data), n_clusters), n_clusters)
    mm.validate()
    return mm
