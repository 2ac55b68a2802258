import numpy as np
import pytest

from activesearch.cluster import (MembershipMatrix, farthest_point_init,
                                  import_memberships, memberships_from_centroids,
                                  soft_cluster, spherical_kmeans, write_memberships)
from activesearch.corpus import CorpusMatrix, Document, build_vocabulary, vectorize
from activesearch.errors import MalformedMembership
from activesearch.sparse import CSRMatrix


def corpus_from_texts(texts):
    docs = [Document(id=f"d{i:02d}", text=t) for i, t in enumerate(texts)]
    vocab = build_vocabulary(docs, min_df=1)
    return vectorize(docs, vocab)


def two_group_corpus():
    group_a = ["tax audit revenue", "tax audit fraud", "tax revenue fraud"]
    group_b = ["football match goal", "football goal referee", "match goal referee"]
    return corpus_from_texts(group_a + group_b)


# --- independent from-scratch reimplementation, dense arithmetic only -------

def dense_reference(x_dense, k, temperature, seed, max_iter=100, mu_floor=1e-4):
    rng = np.random.default_rng(seed)
    n = x_dense.shape[0]
    first = int(rng.integers(n))
    centroids = [x_dense[first].copy()]
    max_sim = x_dense @ centroids[0]
    max_sim[first] = np.inf
    while len(centroids) < k:
        nxt = int(np.argmin(max_sim))
        centroids.append(x_dense[nxt].copy())
        max_sim = np.maximum(max_sim, x_dense @ centroids[-1])
        max_sim[nxt] = np.inf
    c = np.array(centroids)
    norms = np.linalg.norm(c, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    c = c / norms
    assign = np.full(n, -1)
    for _ in range(max_iter):
        sims = x_dense @ c.T
        new_assign = sims.argmax(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            member_sum = x_dense[assign == j].sum(axis=0)
            norm = np.linalg.norm(member_sum)
            if norm > 0:
                c[j] = member_sum / norm
    sims = x_dense @ c.T
    logits = sims / temperature
    logits = logits - logits.max(axis=1, keepdims=True)
    mu = np.exp(logits)
    mu = mu / mu.sum(axis=1, keepdims=True)
    keep = mu >= mu_floor
    keep[np.arange(n), mu.argmax(axis=1)] = True
    mu = np.where(keep, mu, 0.0)
    return mu / mu.sum(axis=1, keepdims=True)


class TestSoftCluster:
    def test_matches_independent_reimplementation(self):
        cm = two_group_corpus()
        mm = soft_cluster(cm, 2, temperature=0.1, rng_seed=7)
        expected = dense_reference(cm.matrix.to_dense(), 2, 0.1, 7)
        np.testing.assert_allclose(mm.to_dense(), expected, atol=1e-9)

    def test_rejects_k_one(self):
        cm = two_group_corpus()
        with pytest.raises(ValueError):
            soft_cluster(cm, 1)

    def test_k_equals_n_gives_unique_argmax_rows(self):
        cm = two_group_corpus()
        mm = soft_cluster(cm, cm.n_docs, temperature=0.1, rng_seed=3)
        dense = mm.to_dense()
        argmaxes = dense.argmax(axis=1)
        assert len(set(argmaxes.tolist())) == cm.n_docs

    def test_low_temperature_approaches_one_hot(self):
        cm = two_group_corpus()
        mm = soft_cluster(cm, 2, temperature=1e-3, rng_seed=0)
        dense = mm.to_dense()
        assert np.all(dense.max(axis=1) > 0.999)
        # the two text groups land in different clusters
        assert len({dense[i].argmax() for i in range(3)}) == 1
        assert dense[0].argmax() != dense[3].argmax()

    def test_row_stochastic_and_deterministic(self):
        cm = two_group_corpus()
        mm1 = soft_cluster(cm, 3, temperature=0.2, rng_seed=11)
        mm2 = soft_cluster(cm, 3, temperature=0.2, rng_seed=11)
        mm1.validate()
        np.testing.assert_array_equal(mm1.matrix.data, mm2.matrix.data)
        np.testing.assert_array_equal(mm1.matrix.indices, mm2.matrix.indices)

    def test_permuting_initial_centroids_permutes_columns(self):
        cm = two_group_corpus()
        rng = np.random.default_rng(5)
        init = farthest_point_init(cm.matrix, 2, rng)
        c1, _, _ = spherical_kmeans(cm.matrix, init.copy())
        c2, _, _ = spherical_kmeans(cm.matrix, init[::-1].copy())
        mu1 = memberships_from_centroids(cm.matrix, c1, 0.1).to_dense()
        mu2 = memberships_from_centroids(cm.matrix, c2, 0.1).to_dense()
        np.testing.assert_allclose(mu1, mu2[:, ::-1], atol=1e-12)


class TestImportMemberships:
    def write(self, tmp_path, lines):
        path = tmp_path / "memberships.tsv"
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    def test_basic_triplets(self, tmp_path):
        path = self.write(tmp_path, ["d1\t0\t0.7", "d1\t1\t0.3", "d2\t1\t1.0"])
        mm = import_memberships(path, ["d1", "d2"])
        np.testing.assert_allclose(mm.to_dense(), [[0.7, 0.3], [0.0, 1.0]], atol=1e-12)

    def test_near_one_renormalized(self, tmp_path):
        path = self.write(tmp_path, ["d1\t0\t0.499", "d1\t1\t0.5", "d2\t0\t1.0"])
        mm = import_memberships(path, ["d1", "d2"])
        assert mm.row_sums() == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_bad_row_sum_rejected(self, tmp_path):
        path = self.write(tmp_path, ["d1\t0\t0.5", "d2\t0\t1.0"])
        with pytest.raises(MalformedMembership):
            import_memberships(path, ["d1", "d2"])

    def test_unknown_doc_and_negative_mu(self, tmp_path):
        path = self.write(tmp_path, ["ghost\t0\t1.0"])
        with pytest.raises(MalformedMembership, match="ghost"):
            import_memberships(path, ["d1"])
        path2 = self.write(tmp_path, ["d1\t0\t-0.2", "d1\t1\t1.2"])
        with pytest.raises(MalformedMembership, match="negative"):
            import_memberships(path2, ["d1"])

    def test_missing_document_rejected(self, tmp_path):
        path = self.write(tmp_path, ["d1\t0\t1.0"])
        with pytest.raises(MalformedMembership):
            import_memberships(path, ["d1", "d2"])

    def test_error_names_line_number(self, tmp_path):
        path = self.write(tmp_path, ["d1\t0\t1.0", "d2\t0\tnot-a-number"])
        with pytest.raises(ValueError):
            import_memberships(path, ["d1", "d2"])

    def test_round_trip_with_writer(self, tmp_path):
        cm = two_group_corpus()
        mm = soft_cluster(cm, 2, temperature=0.1, rng_seed=7)
        path = tmp_path / "out.tsv"
        write_memberships(mm, cm.doc_ids, path)
        back = import_memberships(path, cm.doc_ids)
        np.testing.assert_allclose(back.to_dense(), mm.to_dense(), atol=1e-12)
