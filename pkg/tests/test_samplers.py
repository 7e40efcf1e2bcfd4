import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bifbm import streams
from bifbm.covkernels import BifParams, FBm, TimeGrid, XK, bifbm, cov, covariance_matrix, x_hk
from bifbm.errors import DomainError, NotPositiveSemidefiniteError, RegimeError, TruncationError
from bifbm.samplers import (
    cholesky_factor,
    sample_decomposition,
    sample_exact,
    sample_xk_wiener,
    wiener_mesh,
    wiener_weights,
)
from bifbm.verify import empirical_covariance


def test_cholesky_small_cases():
    f = cholesky_factor(np.eye(3))
    assert np.array_equal(f.lower, np.eye(3)) and f.jitter_applied == 0.0
    f = cholesky_factor(np.array([[1.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(f.lower, [[1.0, 0.0], [1.0, 1.0]], atol=1e-15)
    assert np.array_equal(f.lower, np.tril(f.lower))


def test_cholesky_bifbm_100_points():
    grid = TimeGrid(np.linspace(0.05, 5.0, 100))
    M = covariance_matrix(bifbm(0.6, 1.5), grid)
    f = cholesky_factor(M, grid=grid)
    n = M.shape[0]
    assert f.jitter_applied <= 1e-10 * np.trace(M) / n
    recon = f.lower @ f.lower.T
    target = M + f.jitter_applied * np.eye(n)
    assert np.linalg.norm(recon - target) <= 1e-8 * np.linalg.norm(target)


def test_cholesky_jitter_and_failure():
    # rank-one PSD matrix needs a little jitter
    v = np.array([1.0, 2.0, 3.0])
    f = cholesky_factor(np.outer(v, v))
    assert 0.0 < f.jitter_applied <= 1e-8 * np.trace(np.outer(v, v)) / 3
    with pytest.raises(NotPositiveSemidefiniteError) as info:
        cholesky_factor(np.array([[1.0, 0.0], [0.0, -1.0]]))
    assert info.value.pivot == 2
    with pytest.raises(DomainError):
        cholesky_factor(np.array([[1.0, 0.5], [0.4, 1.0]]))


def test_zero_grid_gives_zero_paths():
    ens = sample_exact(bifbm(0.6, 1.5), TimeGrid(np.array([0.0])), 5, 1)
    assert np.array_equal(ens.paths, np.zeros((5, 1)))
    ens = sample_decomposition(BifParams(0.6, 1.5), TimeGrid.uniform(1.0, 4), 5, 1)
    assert np.array_equal(ens.column(0.0), np.zeros(5))


def test_exact_brownian_variance():
    ens = sample_exact(FBm(0.5), TimeGrid(np.arange(1, 17) / 16), 20000, 11)
    assert abs(np.var(ens.column(1.0), ddof=1) - 1.0) < 3 * math.sqrt(2 / 20000)


def test_determinism_and_path_addressing():
    grid = TimeGrid.uniform(1.0, 8)
    m = bifbm(0.6, 1.5)
    a = sample_exact(m, grid, 600, 5)
    assert np.array_equal(a.paths, sample_exact(m, grid, 600, 5, threads=4).paths)
    tail = sample_exact(m, grid, 100, 5, first_path=500)
    assert np.array_equal(a.paths[500:], tail.paths)
    assert not np.array_equal(a.paths, sample_exact(m, grid, 600, 6).paths)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2000), st.integers(1, 3))
def test_rows_depend_on_seed_and_index_only(seed, first, threads):
    block = streams.normals(seed, streams.EXACT, first, 3, 4)
    again = streams.map_chunks(lambda s, c: streams.normals(seed, streams.EXACT, s, c, 4), 3, first, threads)
    assert np.array_equal(block, again)


def test_seed_validation():
    with pytest.raises(DomainError):
        sample_exact(FBm(0.5), TimeGrid.uniform(1.0, 2), 2, -1)
    with pytest.raises(DomainError):
        sample_exact(FBm(0.5), TimeGrid.uniform(1.0, 2), 0, 1)


def test_decomposition_theoretical_variance():
    p = BifParams(0.6, 1.5)
    a, b = p.decomp.a, p.decomp.b
    assert a**2 + b**2 * cov(x_hk(p), 1.0, 1.0) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(RegimeError):
        sample_decomposition(BifParams(0.6, 0.5), TimeGrid.uniform(1.0, 2), 2, 1)


def test_decomposition_covariance_pairs():
    p = BifParams(0.6, 1.5)
    ens = sample_decomposition(p, TimeGrid(np.array([0.5, 1.0, 2.0])), 20000, 3)
    for (t, s), (est, se) in zip([(1, 1), (2, 1), (2, 2)], empirical_covariance(ens, [(1, 1), (2, 1), (2, 2)])):
        assert abs(est - cov(bifbm(0.6, 1.5), t, s)) < 3 * se


def test_wiener_mesh_tail_budget():
    K, T, tol = 1.5, 2.0, 1e-3
    edges = wiener_mesh(K, T, tol)
    budget = tol**2 * cov(XK(K), T, T)
    assert edges[-1] ** (-K) / K <= budget * (1 + 1e-12)
    assert T**2 * edges[0] ** (2 - K) / (2 - K) <= budget * (1 + 1e-12)
    with pytest.raises(DomainError):
        wiener_mesh(K, T, 0.5)


def test_wiener_weights_capture_covariance():
    K = 1.5
    times = np.array([0.5, 1.0, 2.0])
    W = wiener_weights(K, times, wiener_mesh(K, 2.0, 1e-4, 16384))
    C = W.T @ W
    for i, t in enumerate(times):
        for j, s in enumerate(times):
            assert C[i, j] == pytest.approx(cov(XK(K), t, s), rel=1e-3)


def test_wiener_variance_and_zero_column():
    ens = sample_xk_wiener(1.5, TimeGrid(np.array([0.0, 1.0])), 20000, 4, 1e-3)
    assert np.array_equal(ens.column(0.0), np.zeros(20000))
    target = cov(XK(1.5), 1.0, 1.0)
    assert abs(np.var(ens.column(1.0), ddof=1) - target) < 3 * target * math.sqrt(2 / 19999)


def test_wiener_small_k_branch():
    ens = sample_xk_wiener(0.5, TimeGrid(np.array([1.0])), 20000, 9, 1e-3)
    target = cov(XK(0.5), 1.0, 1.0)
    assert abs(np.var(ens.column(1.0), ddof=1) - target) < 3 * target * math.sqrt(2 / 19999)


def test_wiener_truncation_error():
    with pytest.raises(TruncationError) as info:
        sample_xk_wiener(1.5, TimeGrid(np.array([1.0])), 2, 1, 1e-9)
    assert info.value.achieved > 1e-9


def test_wiener_paths_are_smooth():
    # sum of squared increments halves per dyadic refinement for absolutely continuous paths
    grid = TimeGrid(0.5 + np.arange(0, 129) / 128)
    paths = sample_xk_wiener(1.5, grid, 2000, 8, 1e-3).paths
    qv = [np.mean(np.sum(np.diff(paths[:, :: 2**j], axis=1) ** 2, axis=1)) for j in range(4)]
    n = [128 / 2**j for j in range(4)]
    slope = -np.polyfit(np.log(n), np.log(qv), 1)[0]
    assert 0.8 <= slope <= 1.2
