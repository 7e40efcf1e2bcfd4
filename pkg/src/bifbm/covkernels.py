"""Covariance functions of the Gaussian processes in the package.

Every model is an immutable dataclass.  ``cov`` evaluates a single entry,
``covariance_matrix`` assembles a grid matrix; both share the vectorized
``cov_array`` so scalar and matrix values agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import warnings
from typing import Union

import numpy as np

from .errors import DomainError, RegimeError
from .specfn import (
    DecompCoeffs,
    LeiNualartCoeffs,
    decomposition_coeffs,
    gamma,
    lei_nualart_coeffs,
)

SEMIMARTINGALE_TOL = 1e-14


def _open_interval(name, value, lo, hi):
    value = float(value)
    if not (math.isfinite(value) and lo < value < hi):
        raise DomainError(f"{name} must lie in the open interval ({lo}, {hi}), got {name}={value}")
    return value


@dataclass(frozen=True)
class BifParams:
    """Validated (H, K) pair with the derived product HK and regime flags.

    Decomposition constants are computed here once, so samplers never re-derive them.
    """

    H: float
    K: float
    HK: float = field(init=False)
    decomp: DecompCoeffs | None = field(init=False, repr=False, compare=False)
    lei_nualart: LeiNualartCoeffs | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        H = _open_interval("H", self.H, 0.0, 1.0)
        K = _open_interval("K", self.K, 0.0, 2.0)
        HK = H * K
        if not 0.0 < HK < 1.0:
            raise DomainError(f"the product HK must lie in (0, 1), got H={H}, K={K}, HK={HK}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "HK", HK)
        object.__setattr__(self, "decomp", decomposition_coeffs(K) if K > 1.0 else None)
        object.__setattr__(self, "lei_nualart", lei_nualart_coeffs(K) if K < 1.0 else None)

    @property
    def extended(self):
        """True in the regime K in (1, 2)."""
        return self.K > 1.0

    @property
    def semimartingale(self):
        return self.extended and abs(2.0 * self.HK - 1.0) < SEMIMARTINGALE_TOL

    def require_extended(self):
        if not self.extended:
            raise RegimeError(
                f"this operation needs K in (1, 2) with HK in (0, 1); got H={self.H}, K={self.K}"
            )
        return self


@dataclass(frozen=True)
class BifBm:
    params: BifParams

    @property
    def tag(self):
        return f"bifbm(H={self.params.H!r},K={self.params.K!r})"


@dataclass(frozen=True)
class FBm:
    h: float

    def __post_init__(self):
        object.__setattr__(self, "h", _open_interval("h", self.h, 0.0, 1.0))

    @property
    def tag(self):
        return f"fbm(h={self.h!r})"


@dataclass(frozen=True)
class SubFBm:
    """Sub-fractional Brownian motion.

    For h in (1, 2] the normalizing constant 2(1 - h) is applied exactly as
    published, which makes the variance negative; that branch only exists for
    inspection and warns on construction.
    """

    h: float

    def __post_init__(self):
        h = float(self.h)
        if not (math.isfinite(h) and (0.0 < h < 1.0 or 1.0 < h <= 2.0)):
            raise DomainError(f"sub-fBm index must lie in (0, 1) or (1, 2], got h={h}")
        if h > 1.0:
            warnings.warn(
                "sub-fBm with h > 1 uses the constant 2(1-h) as written; covariance is not PSD",
                stacklevel=2,
            )
        object.__setattr__(self, "h", h)

    @property
    def constant(self):
        return 1.0 if self.h < 1.0 else 2.0 * (1.0 - self.h)

    @property
    def tag(self):
        return f"subfbm(h={self.h!r})"


@dataclass(frozen=True)
class XK:
    """The Gaussian process with covariance given by the two-branch (t+s)^K formula."""

    K: float

    def __post_init__(self):
        K = float(self.K)
        if not (math.isfinite(K) and (0.0 < K < 1.0 or 1.0 < K < 2.0)):
            raise DomainError(f"X^K needs K in (0, 1) or (1, 2); K=1 is singular, got K={K}")
        object.__setattr__(self, "K", K)

    @property
    def constant(self):
        K = self.K
        if K < 1.0:
            return gamma(1.0 - K) / K
        return gamma(2.0 - K) / (K * (K - 1.0))

    @property
    def tag(self):
        return f"xk(K={self.K!r})"


@dataclass(frozen=True)
class TimeChanged:
    """``base`` observed at time t**exponent."""

    base: "CovModel"
    exponent: float

    def __post_init__(self):
        e = float(self.exponent)
        if not (math.isfinite(e) and e > 0.0):
            raise DomainError(f"time-change exponent must be positive, got {e}")
        object.__setattr__(self, "exponent", e)

    @property
    def tag(self):
        return f"timechanged({self.base.tag},{self.exponent!r})"


CovModel = Union[BifBm, FBm, SubFBm, XK, TimeChanged]


def bifbm(H, K):
    return BifBm(BifParams(H, K))


def x_hk(params: BifParams):
    """X^{H,K}: the X^K process run on the clock t**(2H)."""
    return TimeChanged(XK(params.K), 2.0 * params.H)


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1)
        if pts.size < 1:
            raise DomainError("time grid needs at least one point")
        if not np.all(np.isfinite(pts)) or pts[0] < 0.0:
            raise DomainError("time grid points must be finite and non-negative")
        if np.any(np.diff(pts) <= 0.0):
            raise DomainError("time grid must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, T, n_steps, include_zero=True):
        T = float(T)
        if not T > 0.0 or int(n_steps) < 1:
            raise DomainError(f"uniform grid needs T > 0 and n_steps >= 1, got T={T}, n_steps={n_steps}")
        pts = np.linspace(0.0, T, int(n_steps) + 1)
        return cls(pts if include_zero else pts[1:])

    def __len__(self):
        return self.points.size

    @property
    def T(self):
        return float(self.points[-1])

    def is_uniform(self, rtol=1e-9):
        """Uniform spacing starting at 0."""
        pts = self.points
        if pts.size < 2 or pts[0] != 0.0:
            return False
        d = np.diff(pts)
        return bool(np.all(np.abs(d - d[0]) <= rtol * d[0]))


def _pow(x, p):
    # 0**p = 0 for p > 0 without relying on platform pow(0, p)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = np.power(x[pos], p)
    return out


def cov_array(model, t, s):
    """Vectorized covariance; ``t`` and ``s`` broadcast against each other."""
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    if np.any(t < 0.0) or np.any(s < 0.0):
        raise DomainError("covariance is defined for non-negative times only")
    if isinstance(model, BifBm):
        H, K, HK = model.params.H, model.params.K, model.params.HK
        if K == 1.0:
            return cov_array(FBm(H), t, s)
        lhs = np.power(_pow(t, 2.0 * H) + _pow(s, 2.0 * H), K)
        return (lhs - _pow(np.abs(t - s), 2.0 * HK)) / 2.0**K
    if isinstance(model, FBm):
        h2 = 2.0 * model.h
        return 0.5 * (_pow(t, h2) + _pow(s, h2) - _pow(np.abs(t - s), h2))
    if isinstance(model, SubFBm):
        h2 = 2.0 * model.h
        inner = _pow(t, h2) + _pow(s, h2) - 0.5 * (_pow(t + s, h2) + _pow(np.abs(t - s), h2))
        return model.constant * inner
    if isinstance(model, XK):
        K = model.K
        # grouping t^K + s^K keeps the value exactly symmetric in (t, s)
        bracket = _pow(t + s, K) - (_pow(t, K) + _pow(s, K))
        if K < 1.0:
            bracket = -bracket
        return model.constant * bracket
    if isinstance(model, TimeChanged):
        return cov_array(model.base, _pow(t, model.exponent), _pow(s, model.exponent))
    raise TypeError(f"unknown covariance model {model!r}")


def cov(model, t, s):
    t, s = float(t), float(s)
    if t < 0.0 or s < 0.0:
        raise DomainError(f"covariance is defined for non-negative times only, got t={t}, s={s}")
    return float(cov_array(model, t, s))


def increment_variance(model, s, t):
    """E(X_t - X_s)^2."""
    return cov(model, t, t) + cov(model, s, s) - 2.0 * cov(model, s, t)


def increment_variance_array(model, s, t):
    return cov_array(model, t, t) + cov_array(model, s, s) - 2.0 * cov_array(model, s, t)


def quasi_helix_bounds(params: BifParams):
    """Coefficients (lower, upper) with lower*|t-s|^{2HK} <= E(B_t-B_s)^2 <= upper*|t-s|^{2HK}."""
    params.require_extended()
    lower = 2.0 ** (1.0 - params.K)
    upper = 1.0 if params.H <= 0.5 else 2.0 ** (2.0 - params.K)
    return lower, upper


def covariance_matrix(model, grid: TimeGrid):
    pts = grid.points
    m = cov_array(model, pts[:, None], pts[None, :])
    upper = np.triu(m)
    return upper + np.triu(m, 1).T
