import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bifbm.covkernels import XK, cov
from bifbm.errors import DomainError, RegimeError
from bifbm.specfn import (
    absolute_moment,
    decomposition_coeffs,
    gamma,
    lei_nualart_coeffs,
    volterra_constant,
)

# 30-digit mpmath values
GAMMA_ORACLE = {
    0.5: 1.77245385090551602729816748334,
    1e-3: 999.4237724845954661149822013,
    7.25: 1155.38101391998968720270376797,
    0.1: 9.51350769866873183629248717727,
}


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, 1.7724538509055160), (1.5, 0.8862269254527580)])
def test_gamma_reference_points(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("x", sorted(GAMMA_ORACLE))
def test_gamma_against_mpmath(x):
    assert gamma(x) == pytest.approx(GAMMA_ORACLE[x], rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=4.0))
def test_gamma_relative_error_on_unit_range(x):
    assert abs(gamma(x) / float(mp.gamma(x)) - 1.0) < 1e-12


def test_gamma_recurrence():
    for x in np.round(np.arange(1, 31) * 0.1, 10):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
def test_gamma_rejects(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_absolute_moment():
    assert absolute_moment(2.0) == pytest.approx(1.0, rel=1e-14)
    assert absolute_moment(4.0) == pytest.approx(3.0, rel=1e-14)
    assert absolute_moment(1.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-14)
    assert absolute_moment(1.5) == pytest.approx(0.860039987324519535, rel=1e-13)
    with pytest.raises(DomainError):
        absolute_moment(0.0)


def test_absolute_moment_monte_carlo():
    z = np.random.default_rng(7).standard_normal(10**7)
    assert abs(np.mean(np.abs(z)) - absolute_moment(1.0)) < 1e-3


def test_decomposition_coeffs_values():
    c = decomposition_coeffs(1.5)
    assert c.a == pytest.approx(0.840896415253714543, rel=1e-14)
    assert c.b == pytest.approx(0.386785929359558340, rel=1e-13)
    assert decomposition_coeffs(1.0 + 1e-9).a == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("K", [1.0, 2.0, 0.5, 2.5])
def test_decomposition_coeffs_regime(K):
    with pytest.raises(RegimeError, match=r"\(1, 2\)"):
        decomposition_coeffs(K)


def test_variance_identity_grid():
    for K in np.linspace(1.0, 2.0, 52)[1:-1]:
        c = decomposition_coeffs(K)
        assert c.a**2 + c.b**2 * cov(XK(K), 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        bracket = gamma(2 - K) * (2**K - 2) / (K * (K - 1))
        assert c.a**2 + c.b**2 * bracket == pytest.approx(1.0, abs=1e-12)


def test_lei_nualart_coeffs():
    c = lei_nualart_coeffs(0.5)
    assert c.C2 == pytest.approx(1.1892071150027211, rel=1e-14)
    assert c.C1**2 == pytest.approx(0.1994711402, rel=1e-9)
    for K in np.linspace(0.0, 1.0, 52)[1:-1]:
        assert lei_nualart_coeffs(K).C2 ** 2 == pytest.approx(2 ** (1 - K), rel=1e-15)
    with pytest.raises(RegimeError):
        lei_nualart_coeffs(1.5)


def test_volterra_constant():
    assert volterra_constant(0.5) == pytest.approx(1.0, rel=1e-14)
    assert volterra_constant(0.75) == pytest.approx(1.06964463503199032, rel=1e-13)
    assert volterra_constant(0.3) == pytest.approx(0.730282934079922966, rel=1e-13)
    for H in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            volterra_constant(H)
