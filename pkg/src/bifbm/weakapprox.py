"""Poisson-driven weak approximation of bifractional Brownian motion.

With N a unit-rate Poisson process, sin(theta * N(2s/eps^2)) and
cos(theta * N(2s/eps^2)) are piecewise constant in s, so each functional is a
finite sum over the cells between consecutive arrivals.  Cell integrals use
exact primitives:

* the fBm part integrates the Volterra kernel K^{HK}(t, .) through its
  tabulated primitive (closed form at HK = 1/2, where the kernel is 1);
* the smooth part integrates (1 - e^{-s tau}) s^{-(1+K)/2} through the
  incomplete gamma function.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from . import streams
from .covkernels import BifBm, BifParams, TimeGrid, XK, cov
from .errors import DomainError
from .samplers import PathEnsemble
from .volterra import kernel_primitive

ADMISSIBILITY_TOL = 1e-9
# beyond s = FAR / tau the factor e^{-s tau} is below 4e-18
FAR = 40.0


def theta_admissible(theta, H, K):
    params = BifParams(H, K)
    theta = float(theta)
    if not (0.0 < theta < math.pi or math.pi < theta < 2.0 * math.pi):
        return False
    if params.HK <= 0.25:
        for i in range(int(math.floor(1.0 / params.H)) // 4 + 1):
            if abs(math.cos((2 * i + 1) * theta) - 1.0) <= ADMISSIBILITY_TOL:
                return False
    return True


@dataclass(frozen=True)
class WeakApproxParams:
    eps: float
    theta: float
    params: BifParams
    T: float
    tail_tol: float = 1e-2

    def __post_init__(self):
        self.params.require_extended()
        if not (math.isfinite(self.eps) and self.eps > 0.0):
            raise DomainError(f"eps must be positive, got {self.eps}")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise DomainError(f"horizon T must be positive, got {self.T}")
        if not 0.0 < self.tail_tol <= 1e-1:
            raise DomainError(f"tail_tol must lie in (0, 0.1], got {self.tail_tol}")
        if not theta_admissible(self.theta, self.params.H, self.params.K):
            raise DomainError(
                f"theta={self.theta} is not admissible for H={self.params.H}, K={self.params.K}: "
                "need theta in (0, pi) U (pi, 2 pi) and, when HK <= 1/4, cos((2i+1) theta) != 1"
            )

    @property
    def clock(self):
        """Factor mapping s to Poisson time 2s/eps^2."""
        return 2.0 / self.eps**2

    @property
    def truncation(self):
        """Upper limit R with int_R^inf s^{-(1+K)} ds below tail_tol^2 * Var X^{H,K}_T."""
        K = self.params.K
        budget = self.tail_tol**2 * cov(XK(K), self.T ** (2 * self.params.H), self.T ** (2 * self.params.H))
        return (K * budget) ** (-1.0 / K)


class PoissonStream:
    """Unit-rate Poisson arrivals, generated lazily in blocks of exponential gaps.

    Arrivals are cached so the two functionals of one path can read the same
    realization.  ``count`` must be queried at non-decreasing times.
    """

    def __init__(self, seed, index=0, block=4096):
        self.seed = streams.check_seed(seed)
        self.index = int(index)
        self._rng = streams.path_rng(self.seed, streams.POISSON, self.index)
        self._block = int(block)
        self._arrivals = np.empty(0)
        self._last_query = -math.inf

    @classmethod
    def from_arrivals(cls, arrivals):
        """A fixed realization; querying beyond the last arrival is an error."""
        obj = cls.__new__(cls)
        obj.seed, obj.index, obj._rng, obj._block = 0, 0, None, 0
        arr = np.asarray(arrivals, dtype=float)
        if arr.size and (arr[0] <= 0.0 or np.any(np.diff(arr) <= 0.0)):
            raise DomainError("arrivals must be positive and strictly increasing")
        obj._arrivals = arr
        obj._last_query = -math.inf
        return obj

    def _extend_to(self, u):
        if self._rng is None:
            return
        while self._arrivals.size == 0 or self._arrivals[-1] <= u:
            start = self._arrivals[-1] if self._arrivals.size else 0.0
            fresh = start + np.cumsum(self._rng.standard_exponential(self._block))
            self._arrivals = np.concatenate((self._arrivals, fresh))

    def arrivals_until(self, u):
        """All arrival times <= u."""
        self._extend_to(u)
        return self._arrivals[: np.searchsorted(self._arrivals, u, side="right")]

    def count(self, u):
        if u < self._last_query:
            raise DomainError("Poisson counts must be queried at non-decreasing times")
        self._last_query = u
        return int(self.arrivals_until(u).size)


def _cells(wp: WeakApproxParams, stream: PoissonStream, upper):
    """Edges 0 = e_0 < e_1 < ... < e_n = upper in s, with N = k on [e_k, e_{k+1})."""
    jumps = stream.arrivals_until(upper * wp.clock) / wp.clock
    jumps = jumps[jumps < upper]
    return np.concatenate(([0.0], jumps, [upper]))


def _check_grid(grid: TimeGrid, T):
    if grid.T > T * (1 + 1e-12):
        raise DomainError(f"grid extends to {grid.T}, beyond the horizon T={T}")


def approx_fbm_path(wp: WeakApproxParams, grid: TimeGrid, stream: PoissonStream, *, use_cos=False):
    """(2/eps) int_0^t K^{HK}(t,s) sin(theta N(2s/eps^2)) ds at each grid time."""
    _check_grid(grid, wp.T)
    edges = _cells(wp, stream, grid.T)
    k = np.arange(edges.size - 1)
    osc = np.cos(wp.theta * k) if use_cos else np.sin(wp.theta * k)
    HK = wp.params.HK
    out = np.zeros(len(grid))
    for i, t in enumerate(grid.points):
        if t <= 0.0:
            continue
        m = int(np.searchsorted(edges, t, side="left"))
        e = np.minimum(edges[: m + 1], t)
        prim = kernel_primitive(HK, t, e)
        out[i] = np.dot(osc[:m], np.diff(prim))
    return 2.0 / wp.eps * out


def _smooth_primitive(s, tau, beta):
    """int_0^s (1 - e^{-r tau}) r^{-beta} dr for 1 < beta < 3/2."""
    s = np.asarray(s, dtype=float)
    a = 2.0 - beta
    out = np.zeros_like(s)
    pos = s > 0.0
    sp = s[pos]
    lower = tau ** (beta - 1.0) * special.gamma(a) * special.gammainc(a, sp * tau)
    out[pos] = (sp ** (1.0 - beta) * -np.expm1(-sp * tau) - lower) / (1.0 - beta)
    return out


def _power_increments(edges, beta):
    """int over [e_k, e_{k+1}] of r^{-beta} dr, accurate for short cells far out."""
    lo, hi = edges[:-1], edges[1:]
    out = np.full(lo.size, np.inf)
    pos = lo > 0.0
    p = 1.0 - beta
    out[pos] = lo[pos] ** p * np.expm1(p * np.log1p((hi[pos] - lo[pos]) / lo[pos])) / p
    return out


def approx_xhk_path(wp: WeakApproxParams, grid: TimeGrid, stream: PoissonStream, *, use_sin=False):
    """(2/eps) int_0^R (1 - e^{-s t^{2H}}) s^{-(1+K)/2} cos(theta N(2s/eps^2)) ds."""
    _check_grid(grid, wp.T)
    H, K = wp.params.H, wp.params.K
    beta = (1.0 + K) / 2.0
    R = wp.truncation
    edges = _cells(wp, stream, R)
    k = np.arange(edges.size - 1)
    osc = np.sin(wp.theta * k) if use_sin else np.cos(wp.theta * k)
    # far cells: the integrand is s^{-beta} for every t; share their suffix sums
    inc = _power_increments(edges, beta)
    inc[0] = 0.0  # the first cell starts at 0 and is always integrated exactly
    far_terms = osc * inc
    suffix = np.concatenate((np.cumsum(far_terms[::-1])[::-1], [0.0]))
    out = np.zeros(len(grid))
    for i, t in enumerate(grid.points):
        if t <= 0.0:
            continue
        tau = t ** (2.0 * H)
        m = max(int(np.searchsorted(edges, FAR / tau, side="left")), 1)
        m = min(m, edges.size - 1)
        prim = _smooth_primitive(edges[: m + 1], tau, beta)
        out[i] = np.dot(osc[:m], np.diff(prim)) + suffix[m]
    return 2.0 / wp.eps * out


def approx_bifbm_paths(wp: WeakApproxParams, grid: TimeGrid, stream: PoissonStream, *, swap=False):
    """(Y, fBm part, smooth part) for one Poisson realization driving both functionals."""
    fbm = approx_fbm_path(wp, grid, stream, use_cos=swap)
    smooth = approx_xhk_path(wp, grid, stream, use_sin=swap)
    a, b = wp.params.decomp.a, wp.params.decomp.b
    return a * fbm + b * smooth, fbm, smooth


def approx_bifbm_ensemble(wp: WeakApproxParams, grid: TimeGrid, n_paths, seed, *, swap=False,
                          first_path=0, threads=1):
    """Y = a * B_eps + b * X_eps, one fresh Poisson stream per path."""
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    seed = streams.check_seed(seed)
    _check_grid(grid, wp.T)

    def block(start, count):
        rows = np.empty((count, len(grid)))
        for j in range(count):
            rows[j] = approx_bifbm_paths(wp, grid, PoissonStream(seed, start + j), swap=swap)[0]
        return rows

    paths = streams.map_chunks(block, n_paths, first_path, threads)
    tag = f"{BifBm(wp.params).tag}:weak(eps={wp.eps!r},theta={wp.theta!r}{',swap' if swap else ''})"
    return PathEnsemble(grid, paths, seed, tag, first_path)
