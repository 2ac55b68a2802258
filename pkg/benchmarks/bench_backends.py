"""Time the numba kernels against the pure-numpy fallback.

Runs each CSR kernel on search-shaped inputs (feature matrix ~5000 x 4500,
membership matrix 5000 x 10) under both implementations and reports
speedups, then times one full simulated search round-trip on the backend
selected by ACTIVESEARCH_DISABLE_NUMBA.

    python3 benchmarks/bench_backends.py
    ACTIVESEARCH_DISABLE_NUMBA=1 python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from activesearch import _kernels_numpy as knp
from activesearch import backend
from activesearch.cluster import soft_cluster
from activesearch.corpus import build_vocabulary, vectorize
from activesearch.search import DatasetOracle, SearchConfig, run_search
from activesearch.synthetic import generate_synthetic, mode_of_id

try:
    from activesearch import _kernels_numba as knb
except ImportError:
    knb = None


def timeit(fn, repeats=5):
    fn()  # warm-up (and numba compile)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    print(f"active backend: {backend.BACKEND}")
    docs, truth = generate_synthetic(modes=5, n=5000, prevalence=0.02, seed=0)
    cm = vectorize(docs, build_vocabulary(docs, min_df=3))
    mm = soft_cluster(cm, 10, temperature=0.05, rng_seed=0)
    x = cm.matrix
    m = mm.matrix
    rng = np.random.default_rng(0)
    w = rng.normal(size=x.n_cols)
    g = rng.normal(size=x.n_rows)
    theta = rng.random(10)
    centroids = rng.normal(size=(10, x.n_cols))
    pool = np.flatnonzero(rng.random(x.n_rows) < 0.8)

    cases = {
        "csr_matvec (pool rescore)":
            lambda k: k.csr_matvec(x.indptr, x.indices, x.data, w),
        "csr_rmatvec (gradient)":
            lambda k: k.csr_rmatvec(x.indptr, x.indices, x.data, g, x.n_cols),
        "csr_rows_matvec (arm scores)":
            lambda k: k.csr_rows_matvec(m.indptr, m.indices, m.data, pool, theta),
        "csr_dense_matmat (k-means step)":
            lambda k: k.csr_dense_matmat(x.indptr, x.indices, x.data, centroids),
    }
    print(f"\n{'kernel':<34}{'numpy':>10}{'numba':>10}{'speedup':>9}")
    for name, call in cases.items():
        t_np = timeit(lambda: call(knp))
        if knb is None:
            print(f"{name:<34}{t_np * 1e3:>9.2f}ms{'n/a':>10}")
            continue
        t_nb = timeit(lambda: call(knb))
        diff = np.max(np.abs(np.asarray(call(knp)) - np.asarray(call(knb))))
        print(f"{name:<34}{t_np * 1e3:>9.2f}ms{t_nb * 1e3:>9.2f}ms{t_np / t_nb:>8.1f}x"
              f"   max|diff|={diff:.2e}")

    head = sorted(d for d in truth if truth[d] == 1 and mode_of_id(d) == 0)[:3]
    config = SearchConfig(strategy="mab", gamma=0.95, budget=0.10, epochs=200, seed=1)
    start = time.perf_counter()
    trajectory, _ = run_search(cm, mm, DatasetOracle(truth), config, seed_ids=head)
    elapsed = time.perf_counter() - start
    print(f"\nend-to-end mab run (budget 10%, {len(trajectory.entries)} reviews) "
          f"on '{backend.BACKEND}': {elapsed:.2f}s")
    if backend.BACKEND == "numba":
        print("rerun with ACTIVESEARCH_DISABLE_NUMBA=1 to time the numpy path")


if __name__ == "__main__":
    main()
