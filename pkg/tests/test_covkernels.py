import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bifbm.covkernels import (
    BifBm,
    BifParams,
    FBm,
    SubFBm,
    TimeChanged,
    TimeGrid,
    XK,
    bifbm,
    cov,
    covariance_matrix,
    increment_variance,
    quasi_helix_bounds,
    x_hk,
)
from bifbm.errors import DomainError, RegimeError

times = st.floats(min_value=0.0, max_value=10.0)


@st.composite
def bif_params(draw, extended=True):
    H = draw(st.floats(min_value=0.02, max_value=0.98))
    lo, hi = (1.01, 1.99) if extended else (0.02, 1.99)
    K = draw(st.floats(min_value=lo, max_value=hi))
    assume(H * K < 0.99 and abs(K - 1.0) > 1e-6)
    return BifParams(H, K)


def all_models():
    p = BifParams(0.6, 1.5)
    return [BifBm(p), FBm(0.3), SubFBm(0.75), XK(1.5), XK(0.5), x_hk(p), bifbm(0.7, 0.5)]


def mp_bifbm(H, K, t, s):
    H, K, t, s = map(mp.mpf, (H, K, t, s))
    return 2**-K * ((t ** (2 * H) + s ** (2 * H)) ** K - abs(t - s) ** (2 * H * K))


def test_params_validation():
    p = BifParams(0.6, 1.5)
    assert p.HK == pytest.approx(0.9)
    assert p.extended and not p.semimartingale
    assert BifParams(1 / 3, 1.5).semimartingale
    for H, K in [(0.0, 1.5), (1.0, 1.5), (0.6, 0.0), (0.6, 2.0), (0.9, 1.5), (math.nan, 1.5)]:
        with pytest.raises(DomainError):
            BifParams(H, K)
    with pytest.raises(RegimeError):
        BifParams(0.5, 0.5).require_extended()


def test_bifbm_reference_values():
    m = bifbm(0.6, 1.5)
    assert cov(m, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    # mpmath: 1.76340248965494617860571777242
    assert cov(m, 2.0, 1.0) == pytest.approx(1.7634024896549462, rel=1e-14)
    assert increment_variance(bifbm(0.4, 1.5), 1.0, 2.0) == pytest.approx(0.79548226797791719, rel=1e-14)


def test_xk_reference_values():
    assert cov(XK(1.5), 1.0, 1.0) == pytest.approx(1.9577984632679586, rel=1e-14)
    assert cov(XK(0.5), 1.0, 1.0) == pytest.approx(2.0765588543600631, rel=1e-14)
    assert cov(XK(1.5), 1.0, 2.0) == pytest.approx(3.2323066284678392, rel=1e-14)


def test_xk_matches_wiener_integral_definition():
    K = mp.mpf("1.5")
    f = lambda r: (1 - mp.e ** (-r * 1)) * (1 - mp.e ** (-r * 2)) * r ** (-1 - K)
    with mp.workdps(30):
        expected = float(mp.quad(f, [0, 1, 10, mp.inf]))
    assert cov(XK(1.5), 1.0, 2.0) == pytest.approx(expected, rel=1e-13)


def test_subfbm_value_and_flagged_branch():
    assert cov(SubFBm(0.75), 1.0, 1.0) == pytest.approx(2 - 2**0.5, rel=1e-14)
    with pytest.warns(UserWarning):
        m = SubFBm(1.5)
    assert m.constant == pytest.approx(-1.0)
    with pytest.raises(DomainError):
        SubFBm(1.0)


def test_xk_rejects_one():
    with pytest.raises(DomainError):
        XK(1.0)


def _dK_at_one(H, t, s):
    # derivative in K of the bifBm covariance at K = 1
    A, D = t ** (2 * H) + s ** (2 * H), abs(t - s) ** (2 * H)
    fbm = 0.5 * (A - D)
    return -math.log(2) * fbm + 0.5 * (A * math.log(A) if A else 0.0) - 0.5 * (D * math.log(D) if D else 0.0)


def test_k_equal_one_is_fbm():
    t, s = np.meshgrid(np.linspace(0, 3, 7), np.linspace(0, 3, 7))
    for ti, si in zip(t.ravel(), s.ravel()):
        assert cov(bifbm(0.3, 1.0), ti, si) == cov(FBm(0.3), ti, si)
        # near K = 1 the covariance moves linearly with K - 1
        for d in (1e-8, -1e-8):
            expected = cov(FBm(0.3), ti, si) + d * _dK_at_one(0.3, ti, si)
            assert cov(bifbm(0.3, 1 + d), ti, si) == pytest.approx(expected, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(bif_params(extended=False), times, times)
def test_bifbm_against_mpmath(p, t, s):
    expected = float(mp_bifbm(p.H, p.K, t, s))
    assert cov(BifBm(p), t, s) == pytest.approx(expected, rel=1e-11, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(times, times)
def test_symmetry_and_origin(t, s):
    for m in all_models():
        assert cov(m, t, s) == cov(m, s, t)
        assert abs(cov(m, t, 0.0)) <= 1e-14


@settings(max_examples=100, deadline=None)
@given(bif_params(extended=False), st.floats(min_value=1e-3, max_value=10.0))
def test_diagonal_law(p, t):
    assert cov(BifBm(p), t, t) == pytest.approx(t ** (2 * p.HK), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(bif_params(extended=False), times, times, st.sampled_from([0.5, 2.0, 7.3]))
def test_self_similarity(p, t, s, a):
    m = BifBm(p)
    assert cov(m, a * t, a * s) == pytest.approx(a ** (2 * p.HK) * cov(m, t, s), rel=1e-12, abs=1e-13)


def test_time_changed():
    m = TimeChanged(XK(1.5), 1.2)
    assert cov(m, 2.0, 1.0) == cov(XK(1.5), 2.0**1.2, 1.0)
    with pytest.raises(DomainError):
        TimeChanged(XK(1.5), 0.0)


def test_negative_time():
    with pytest.raises(DomainError):
        cov(FBm(0.5), -1.0, 1.0)


def test_increment_variance():
    assert increment_variance(bifbm(0.6, 1.5), 2.0, 2.0) == 0.0
    assert increment_variance(FBm(0.3), 1.0, 3.5) == pytest.approx(2.5**0.6, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(bif_params())
def test_quasi_helix_property(p):
    lower, upper = quasi_helix_bounds(p)
    pts = np.linspace(0.05, 10.0, 40)
    m = BifBm(p)
    for i, t in enumerate(pts):
        for s in pts[:i]:
            r = increment_variance(m, s, t) / (t - s) ** (2 * p.HK)
            assert lower - 1e-12 <= r <= upper + 1e-12


def test_quasi_helix_constants():
    assert quasi_helix_bounds(BifParams(0.4, 1.5)) == pytest.approx((2**-0.5, 1.0))
    assert quasi_helix_bounds(BifParams(0.6, 1.5)) == pytest.approx((2**-0.5, 2**0.5))
    assert quasi_helix_bounds(BifParams(0.5, 1.5))[1] == 1.0
    with pytest.raises(RegimeError):
        quasi_helix_bounds(BifParams(0.5, 0.5))


def test_time_grid():
    g = TimeGrid.uniform(2.0, 4)
    assert g.is_uniform() and len(g) == 5 and g.T == 2.0
    assert not TimeGrid(np.array([0.0, 1.0, 3.0])).is_uniform()
    with pytest.raises(ValueError):
        g.points[0] = 1.0
    for bad in ([], [1.0, 1.0], [-1.0, 1.0], [0.0, math.nan]):
        with pytest.raises(DomainError):
            TimeGrid(np.array(bad))


def test_covariance_matrix():
    assert covariance_matrix(bifbm(0.6, 1.5), TimeGrid(np.array([0.0]))).tolist() == [[0.0]]
    assert covariance_matrix(FBm(0.5), TimeGrid(np.array([1.0, 2.0]))).tolist() == [[1.0, 1.0], [1.0, 2.0]]
    M = covariance_matrix(bifbm(0.6, 1.5), TimeGrid(np.array([0.5, 1.0, 1.5])))
    assert np.array_equal(M, M.T)
    assert np.linalg.eigvalsh(M)[0] > 0.0
    for i, t in enumerate([0.5, 1.0, 1.5]):
        for j, s in enumerate([0.5, 1.0, 1.5]):
            assert M[i, j] == pytest.approx(cov(bifbm(0.6, 1.5), t, s), rel=1e-15)


def test_psd_sweep():
    grid = TimeGrid(np.linspace(0.05, 5.0, 100))
    for H in np.arange(2, 10) / 10:
        for K in np.arange(11, 20) / 10:
            if H * K >= 1.0:
                continue
            eig = np.linalg.eigvalsh(covariance_matrix(bifbm(H, K), grid))
            assert eig[0] >= -1e-10 * eig[-1]
