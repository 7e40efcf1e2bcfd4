"""Path samplers: Cholesky factorization, the fBm-plus-smooth decomposition,
and direct discretization of the Wiener integral defining X^K."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import lapack

from . import streams
from .covkernels import (
    BifBm,
    BifParams,
    FBm,
    TimeGrid,
    XK,
    cov,
    covariance_matrix,
    x_hk,
)
from .errors import DomainError, NotPositiveSemidefiniteError, TruncationError

DEFAULT_JITTER_REL = 1e-8
WIENER_NODES = 4096


@dataclass(frozen=True)
class GaussianFactor:
    grid: TimeGrid | None
    lower: np.ndarray
    jitter_applied: float


@dataclass
class PathEnsemble:
    """M sample paths on a common grid; ``paths[i, j]`` is path i at ``grid.points[j]``."""

    grid: TimeGrid
    paths: np.ndarray
    seed: int
    model_tag: str
    first_path: int = 0

    @property
    def n_paths(self):
        return self.paths.shape[0]

    def column(self, t):
        j = np.flatnonzero(np.isclose(self.grid.points, t, rtol=0, atol=1e-12))
        if j.size == 0:
            raise DomainError(f"time {t} is not a grid point")
        return self.paths[:, j[0]]


def cholesky_factor(matrix, jitter_cap=None, grid=None):
    """Lower Cholesky factor, adding diagonal jitter only if plain factorization fails.

    Jitter starts at 1e-12*trace/n and grows tenfold up to ``jitter_cap``
    (default 1e-8*trace/n).
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError("cholesky_factor needs a square matrix of size >= 1")
    if not np.array_equal(a, a.T):
        raise DomainError("cholesky_factor needs an exactly symmetric matrix")
    n = a.shape[0]
    scale = float(np.trace(a)) / n
    if not scale > 0.0:
        # indefinite or zero diagonal: size jitter by the largest entry instead
        scale = float(np.max(np.abs(a)))
    if not np.any(a):
        return GaussianFactor(grid, np.zeros_like(a), 0.0)
    if jitter_cap is None:
        jitter_cap = DEFAULT_JITTER_REL * scale
    jitter = 0.0
    while True:
        work = a + jitter * np.eye(n) if jitter else a
        c, info = lapack.dpotrf(work, lower=1, clean=1)
        if info == 0:
            return GaussianFactor(grid, c, jitter)
        if info < 0:
            raise DomainError(f"invalid argument {-info} passed to dpotrf")
        jitter = 1e-12 * scale if jitter == 0.0 else jitter * 10.0
        if jitter > jitter_cap * (1 + 1e-12):
            raise NotPositiveSemidefiniteError(
                f"matrix not positive semidefinite: pivot {info} failed with jitter up to {jitter_cap:g}",
                pivot=int(info),
            )


_FACTOR_CACHE = {}
_FACTOR_CACHE_SIZE = 8


def _cached_factor(model, grid: TimeGrid, jitter_cap):
    # chunked callers re-request the same factor; keep the latest few
    key = (model, grid.points.tobytes(), jitter_cap)
    factor = _FACTOR_CACHE.pop(key, None)
    if factor is None:
        factor = cholesky_factor(covariance_matrix(model, grid), jitter_cap, grid=grid)
    _FACTOR_CACHE[key] = factor
    while len(_FACTOR_CACHE) > _FACTOR_CACHE_SIZE:
        _FACTOR_CACHE.pop(next(iter(_FACTOR_CACHE)))
    return factor


def _positive_part(grid: TimeGrid):
    pos = grid.points > 0.0
    return pos, TimeGrid(grid.points[pos]) if pos.any() else None


def _gaussian_paths(factor, pos, n_grid, n_paths, seed, tag, first_path, threads):
    lower = factor.lower if factor is not None else None
    dim = 0 if lower is None else lower.shape[0]

    def block(start, count):
        out = np.zeros((count, n_grid))
        if dim:
            z = streams.normals(seed, tag, start, count, dim)
            out[:, pos] = z @ lower.T
        return out

    return streams.map_chunks(block, n_paths, first_path, threads)


def sample_exact(model, grid: TimeGrid, n_paths, seed, *, jitter_cap=None, first_path=0,
                 threads=1, tag=streams.EXACT):
    """Sample paths as factor @ z with z drawn from per-path streams."""
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    seed = streams.check_seed(seed)
    pos, sub = _positive_part(grid)
    factor = None
    if sub is not None:
        factor = _cached_factor(model, sub, jitter_cap)
    paths = _gaussian_paths(factor, pos, len(grid), n_paths, seed, tag, first_path, threads)
    return PathEnsemble(grid, paths, seed, model.tag, first_path)


def sample_decomposition(params: BifParams, grid: TimeGrid, n_paths, seed, *, jitter_cap=None,
                         first_path=0, threads=1):
    """a * fBm(HK) + b * X^{H,K} from two independent substreams."""
    params.require_extended()
    fbm = sample_exact(FBm(params.HK), grid, n_paths, seed, jitter_cap=jitter_cap,
                       first_path=first_path, threads=threads, tag=streams.FBM_PART)
    smooth = sample_exact(x_hk(params), grid, n_paths, seed, jitter_cap=jitter_cap,
                          first_path=first_path, threads=threads, tag=streams.XHK_PART)
    a, b = params.decomp.a, params.decomp.b
    paths = a * fbm.paths + b * smooth.paths
    return PathEnsemble(grid, paths, fbm.seed, BifBm(params).tag + ":decomposition", first_path)


def wiener_mesh(K, T, tail_tol, n_nodes=WIENER_NODES):
    """Log-uniform r-mesh (edges) covering the L2 mass of the X^K integrand on [0, T]."""
    model = XK(K)
    tail_tol = float(tail_tol)
    if not 0.0 < tail_tol <= 1e-2:
        raise DomainError(f"tail_tol must lie in (0, 1e-2], got {tail_tol}")
    budget = tail_tol**2 * cov(model, T, T)
    r_max = (K * budget) ** (-1.0 / K)
    r_min = (budget * (2.0 - K) / T**2) ** (1.0 / (2.0 - K))
    return np.geomspace(r_min, r_max, int(n_nodes) + 1)


def wiener_weights(K, times, edges):
    """(n_nodes, n_times) matrix of f_t(r_mid) * sqrt(dr)."""
    mids = 0.5 * (edges[1:] + edges[:-1])
    dr = np.diff(edges)
    times = np.asarray(times, dtype=float)
    f = -np.expm1(-np.outer(mids, times)) * mids[:, None] ** (-(1.0 + K) / 2.0)
    return f * np.sqrt(dr)[:, None]


def sample_xk_wiener(K, grid: TimeGrid, n_paths, seed, tail_tol=1e-3, *, n_nodes=WIENER_NODES,
                     first_path=0, threads=1):
    """X^K_t = int_0^inf (1 - e^{-rt}) r^{-(1+K)/2} dW_r on a truncated log mesh."""
    model = XK(K)
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    seed = streams.check_seed(seed)
    T = grid.T
    if T <= 0.0:
        return PathEnsemble(grid, np.zeros((n_paths, len(grid))), seed, model.tag + ":wiener", first_path)
    edges = wiener_mesh(model.K, T, tail_tol, n_nodes)
    weights = wiener_weights(model.K, grid.points, edges)
    target = cov(model, T, T)
    captured = float(np.sum(weights[:, -1] ** 2))
    missing = abs(1.0 - captured / target)
    if not missing <= tail_tol:
        raise TruncationError(
            f"r-mesh of {n_nodes} nodes captures variance with relative error {missing:.3g} > {tail_tol:g}",
            achieved=missing,
        )

    def block(start, count):
        return streams.normals(seed, streams.WIENER, start, count, weights.shape[0]) @ weights

    paths = streams.map_chunks(block, n_paths, first_path, threads)
    return PathEnsemble(grid, paths, seed, model.tag + ":wiener", first_path)
