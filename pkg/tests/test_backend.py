import numpy as np
import pytest

from activesearch import _kernels_numpy as knp
from activesearch.sparse import CSRMatrix, SparseVector

try:
    from activesearch import _kernels_numba as knb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


def random_csr(rng, n_rows, n_cols, density=0.2):
    rows = []
    for _ in range(n_rows):
        mask = rng.random(n_cols) < density
        idx = np.flatnonzero(mask)
        vals = rng.normal(size=idx.size)
        vals[vals == 0] = 1.0
        rows.append(SparseVector(idx, vals))
    return CSRMatrix.from_rows(rows, n_cols)


@pytest.fixture(scope="module")
def problem():
    rng = np.random.default_rng(0)
    m = random_csr(rng, 60, 40)
    # make a couple of rows empty to exercise segment handling
    m = CSRMatrix.vstack([m, CSRMatrix.from_rows(
        [SparseVector(np.empty(0, np.int64), np.empty(0))] * 3, 40)])
    x = rng.normal(size=40)
    g = rng.normal(size=m.n_rows)
    dense_t = rng.normal(size=(5, 40))
    rows = np.array([0, 7, 61, 62, 33, 12])
    assign = rng.integers(0, 5, size=m.n_rows).astype(np.int64)
    return m, x, g, dense_t, rows, assign


class TestNumpyKernelsAgainstDense:
    def test_matvec(self, problem):
        m, x, *_ = problem
        np.testing.assert_allclose(knp.csr_matvec(m.indptr, m.indices, m.data, x),
                                   m.to_dense() @ x, atol=1e-12)

    def test_rows_matvec(self, problem):
        m, x, _, _, rows, _ = problem
        np.testing.assert_allclose(
            knp.csr_rows_matvec(m.indptr, m.indices, m.data, rows, x),
            m.to_dense()[rows] @ x, atol=1e-12)

    def test_rmatvec(self, problem):
        m, _, g, *_ = problem
        np.testing.assert_allclose(
            knp.csr_rmatvec(m.indptr, m.indices, m.data, g, m.n_cols),
            m.to_dense().T @ g, atol=1e-12)

    def test_dense_matmat(self, problem):
        m, _, _, dense_t, _, _ = problem
        np.testing.assert_allclose(
            knp.csr_dense_matmat(m.indptr, m.indices, m.data, dense_t),
            m.to_dense() @ dense_t.T, atol=1e-12)

    def test_scatter_rows(self, problem):
        m, *_, assign = problem
        got = knp.csr_scatter_rows(m.indptr, m.indices, m.data, assign, 5, m.n_cols)
        expected = np.zeros((5, m.n_cols))
        dense = m.to_dense()
        for i in range(m.n_rows):
            expected[assign[i]] += dense[i]
        np.testing.assert_allclose(got, expected, atol=1e-12)


@needs_numba
class TestBackendsAgree:
    def test_all_kernels_match(self, problem):
        m, x, g, dense_t, rows, assign = problem
        pairs = [
            (knb.csr_matvec(m.indptr, m.indices, m.data, x),
             knp.csr_matvec(m.indptr, m.indices, m.data, x)),
            (knb.csr_rows_matvec(m.indptr, m.indices, m.data, rows, x),
             knp.csr_rows_matvec(m.indptr, m.indices, m.data, rows, x)),
            (knb.csr_rmatvec(m.indptr, m.indices, m.data, g, m.n_cols),
             knp.csr_rmatvec(m.indptr, m.indices, m.data, g, m.n_cols)),
            (knb.csr_dense_matmat(m.indptr, m.indices, m.data, dense_t),
             knp.csr_dense_matmat(m.indptr, m.indices, m.data, dense_t)),
            (knb.csr_scatter_rows(m.indptr, m.indices, m.data, assign, 5, m.n_cols),
             knp.csr_scatter_rows(m.indptr, m.indices, m.data, assign, 5, m.n_cols)),
        ]
        for got, expected in pairs:
            np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-14)

    def test_empty_matrix(self):
        m = CSRMatrix.from_rows([SparseVector(np.empty(0, np.int64), np.empty(0))], 4)
        x = np.ones(4)
        assert knb.csr_matvec(m.indptr, m.indices, m.data, x).tolist() == [0.0]
        assert knp.csr_matvec(m.indptr, m.indices, m.data, x).tolist() == [0.0]


def test_env_flag_selects_numpy_backend():
    import subprocess
    import sys
    code = ("import os; os.environ['ACTIVESEARCH_DISABLE_NUMBA']='1'; "
            "from activesearch import backend; print(backend.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
