"""Volterra kernel of fractional Brownian motion and a sampler built on it.

The kernel splits into a singular leading term d_H (t-s)^{H-1/2} and a
correction d_H (1/2-H) int_s^t (u-s)^{H-3/2} (1-(s/u)^{1/2-H}) du.  The
correction is evaluated after the substitution u = s + v^2, which turns the
endpoint singularity into a bounded integrand.

Both terms scale as t^{H-1/2} k(s/t), so bulk evaluation only ever needs the
unit-horizon kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import streams
from .covkernels import FBm, TimeGrid
from .errors import DomainError
from .samplers import PathEnsemble
from .specfn import volterra_constant


@dataclass(frozen=True)
class KernelEval:
    H: float
    quad_tol: float = 1e-10

    def __post_init__(self):
        H = float(self.H)
        if not 0.0 < H < 1.0:
            raise DomainError(f"Hurst index must lie in (0, 1), got H={H}")
        if not 0.0 < self.quad_tol <= 1e-4:
            raise DomainError(f"quad_tol must lie in (0, 1e-4], got {self.quad_tol}")
        object.__setattr__(self, "H", H)

    @property
    def d(self):
        return volterra_constant(self.H)


def _correction_integral(H, t, s, tol):
    """int_s^t (u-s)^{H-3/2} (1 - (s/u)^{1/2-H}) du via u = s + v^2."""
    a = 0.5 - H

    def f(v):
        if v == 0.0:
            return 0.0
        return 2.0 * v ** (2.0 * H - 2.0) * -math.expm1(-a * math.log1p(v * v / s))

    top = math.sqrt(t - s)
    knee = min(math.sqrt(s), top)
    val, _ = integrate.quad(f, 0.0, knee, epsabs=tol, epsrel=1e-12, limit=200)
    if knee < top:
        # beyond sqrt(s) the integrand is a near power law; integrate in log v
        tail, _ = integrate.quad(lambda w: f(math.exp(w)) * math.exp(w), math.log(knee),
                                 math.log(top), epsabs=tol, epsrel=1e-12, limit=200)
        val += tail
    return val


def volterra_kernel(ke: KernelEval, t, s):
    t, s = float(t), float(s)
    if not 0.0 < s < t:
        raise DomainError(f"kernel is defined on 0 < s < t, got s={s}, t={t}")
    H, d = ke.H, ke.d
    lead = d * (t - s) ** (H - 0.5)
    if H == 0.5:
        return lead
    return lead + d * (0.5 - H) * _correction_integral(H, t, s, ke.quad_tol / d)


def kernel_correction(H, t, s, tol=1e-10):
    """The correction term alone (zero at H = 1/2)."""
    if H == 0.5:
        return 0.0
    d = volterra_constant(H)
    return d * (0.5 - H) * _correction_integral(H, t, s, tol / d)


def _graded_nodes(n_edge=120, n_mid=240):
    edge = np.geomspace(1e-12, 2e-2, n_edge)
    mid = np.linspace(2e-2, 1.0 - 2e-2, n_mid)[1:-1]
    return np.unique(np.concatenate(([0.0], edge, mid, 1.0 - edge[::-1], [1.0])))


@lru_cache(maxsize=32)
def _correction_primitive(H):
    """Interpolant of x -> int_0^x correction(1, y) dy on [0, 1]."""
    nodes = _graded_nodes()
    if H == 0.5:
        return nodes, PchipInterpolator(nodes, np.zeros_like(nodes))
    inc = np.empty(nodes.size - 1)
    for i, (lo, hi) in enumerate(zip(nodes[:-1], nodes[1:])):
        inc[i], _ = integrate.quad(lambda y: kernel_correction(H, 1.0, y, 1e-13), lo, hi,
                                   epsabs=1e-13, epsrel=1e-10, limit=100)
    cum = np.concatenate(([0.0], np.cumsum(inc)))
    return nodes, PchipInterpolator(nodes, cum)


def unit_kernel_primitive(H, x):
    """g(x) = int_0^x K^H(1, y) dy, vectorized over x in [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    d = volterra_constant(H)
    p = H + 0.5
    if H == 0.5:
        return x.copy()
    with np.errstate(divide="ignore"):
        lead = d * -np.expm1(p * np.log1p(-x)) / p
    return lead + _correction_primitive(H)[1](x)


def kernel_primitive(H, t, s):
    """int_0^min(s,t) K^H(t, r) dr for t > 0; broadcasts over s."""
    t = float(t)
    s = np.asarray(s, dtype=float)
    return t ** (H + 0.5) * unit_kernel_primitive(H, np.minimum(s, t) / t)


def kernel_l2_norm(H, t, tol=1e-10):
    """int_0^t K^H(t,s)^2 ds by adaptive quadrature; equals t^{2H} in exact arithmetic."""
    ke = KernelEval(H, tol)
    val, _ = integrate.quad(lambda s: volterra_kernel(ke, t, s) ** 2, 0.0, t,
                            epsabs=0.0, epsrel=1e-9, limit=200, points=[t / 2])
    return val


def _brownian_mesh(grid: TimeGrid, substeps, H=0.5, grading=12):
    """Refined mesh: ``substeps`` uniform cells per grid interval plus dyadic ladders
    toward the kernel's singular points (s = 0 unless H = 1/2, and s = t for H < 1/2)."""
    pts = grid.points
    nodes = np.concatenate(([0.0], pts)) if pts[0] > 0.0 else pts
    base = np.linspace(0.0, 1.0, substeps + 1)[:-1]
    ladder = 2.0 ** -np.arange(1, grading + 1) / substeps
    inner = np.unique(np.concatenate((base, 1.0 - ladder))) if H < 0.5 else base
    first = np.unique(np.concatenate((inner, ladder))) if H != 0.5 else inner
    pieces = [lo + (hi - lo) * (first if k == 0 else inner)
              for k, (lo, hi) in enumerate(zip(nodes[:-1], nodes[1:]))]
    return np.concatenate(pieces + [nodes[-1:]])


def volterra_weights(H, grid: TimeGrid, substeps=8, grading=12):
    """(n_cells, n_grid) matrix of cell-averaged kernel times sqrt(cell length).

    Cell averages come from the kernel primitive, so the only discretization
    error is the projection of K(t, .) onto piecewise constants.
    """
    mesh = _brownian_mesh(grid, substeps, H, grading)
    dt = np.diff(mesh)
    w = np.zeros((dt.size, len(grid)))
    for i, t in enumerate(grid.points):
        if t > 0.0:
            w[:, i] = np.diff(kernel_primitive(H, t, mesh)) / np.sqrt(dt)
    return w


def sample_fbm_volterra(H, grid: TimeGrid, n_paths, seed, substeps=8, *, grading=12, first_path=0,
                        threads=1):
    """fBm as a sum of kernel-weighted Brownian increments on a refined mesh."""
    FBm(H)
    n_paths, substeps, grading = int(n_paths), int(substeps), int(grading)
    if n_paths < 1 or substeps < 1 or grading < 0:
        raise DomainError("n_paths and substeps must be >= 1, grading >= 0")
    seed = streams.check_seed(seed)
    if grid.T <= 0.0:
        return PathEnsemble(grid, np.zeros((n_paths, len(grid))), seed, FBm(H).tag + ":volterra")
    weights = volterra_weights(H, grid, substeps, grading)

    def block(start, count):
        return streams.normals(seed, streams.VOLTERRA, start, count, weights.shape[0]) @ weights

    paths = streams.map_chunks(block, n_paths, first_path, threads)
    return PathEnsemble(grid, paths, seed, FBm(H).tag + ":volterra", first_path)
