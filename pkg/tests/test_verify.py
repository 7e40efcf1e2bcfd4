import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bifbm.covkernels import FBm, TimeGrid
from bifbm.errors import DomainError, RegimeError
from bifbm.samplers import PathEnsemble, sample_exact
from bifbm.specfn import absolute_moment
from bifbm.verify import (
    Metric,
    VerificationReport,
    check_decomposition_identity,
    check_lei_nualart_identity,
    check_psd,
    check_quasi_helix,
    check_self_similarity,
    check_subfbm_identity,
    empirical_covariance,
    estimate_pvariation,
    increment_covariances,
    ks_statistic,
    lrd_exponent,
    pvariation_constants,
)

PTS = np.linspace(0.0, 5.0, 21)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1.01, 1.99))
def test_decomposition_identity_holds(H, K):
    assume(H * K < 0.99)
    assert check_decomposition_identity(H, K, PTS).passed


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.99))
def test_lei_nualart_identity_holds(H, K):
    assert check_lei_nualart_identity(H, K, PTS).passed


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 1.99))
def test_subfbm_identity_holds(H, K):
    assume(H * K < 0.99 and abs(K - 1.0) > 1e-6)
    assert check_subfbm_identity(H, K, PTS).passed


def test_identity_regimes():
    with pytest.raises(RegimeError):
        check_decomposition_identity(0.5, 0.5, PTS)
    with pytest.raises(RegimeError):
        check_lei_nualart_identity(0.5, 1.5, PTS)
    with pytest.raises(DomainError):
        check_decomposition_identity(0.9, 1.5, PTS)


def test_structural_checks_pass():
    assert check_quasi_helix(0.4, 1.5, np.linspace(0.1, 5.0, 30)).passed
    assert check_psd(0.6, 1.5, np.linspace(0.05, 5.0, 50)).passed
    r = check_self_similarity(0.6, 1.5, seed=3)
    assert r.passed and r.seed == 3


def test_metric_kinds():
    assert Metric("x", 1.0, 2.0).passed and not Metric("x", 3.0, 2.0).passed
    assert Metric("x", 3.0, 2.0, kind="min").passed
    assert Metric("x", 3.0, 2.0, kind="info").passed
    assert not Metric("x", math.nan, 2.0).passed


def test_report_json_round_trip():
    r = check_psd(0.6, 1.5, np.linspace(0.1, 1.0, 5))
    r.findings["note"] = np.float64(0.5)
    d = json.loads(r.to_json())
    assert d["suite"] == "psd" and d["passed"] is True
    assert d["metrics"][0]["name"] == "min_eig_over_max"
    assert d["findings"]["note"] == 0.5
    assert json.loads(r.to_json(timing=False))["runtime_ms"] is None
    with pytest.raises(KeyError):
        r.metric("missing")
    assert VerificationReport("empty").passed


def test_empirical_covariance():
    grid = TimeGrid(np.array([0.5, 1.0]))
    with pytest.raises(DomainError):
        empirical_covariance(PathEnsemble(grid, np.zeros((1, 2)), 0, "x"), [(1.0, 1.0)])
    zero = PathEnsemble(grid, np.zeros((10, 2)), 0, "x")
    assert empirical_covariance(zero, [(1.0, 0.5)]) == [(0.0, 0.0)]
    ens = sample_exact(FBm(0.5), grid, 20000, 1)
    (c, se), = empirical_covariance(ens, [(1.0, 0.5)])
    assert abs(c - 0.5) < 3 * se


def test_ks_statistic():
    r = ks_statistic(np.zeros(100), 1.0)
    assert r.statistic == pytest.approx(0.5)
    assert r.pvalue < 1e-10
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(DomainError):
            ks_statistic([0.0], bad)
    rng = np.random.default_rng(0)
    assert ks_statistic(2.0 + 3.0 * rng.standard_normal(5000), 3.0, mu=2.0).pvalue > 1e-3


def test_pvariation_constants():
    c = pvariation_constants(0.4, 1.0)
    assert c["full_exponent"] == c["half_exponent"] == pytest.approx(absolute_moment(2.5))
    c = pvariation_constants(0.6, 1.5, T=2.0)
    assert c["half_exponent"] == pytest.approx(2 ** (-0.5 / 1.8) * absolute_moment(1 / 0.9) * 2.0)


def test_brownian_quadratic_variation():
    ens = sample_exact(FBm(0.5), TimeGrid.uniform(1.0, 256), 2000, 7)
    r = estimate_pvariation(ens, 0.5, 1.0)
    assert r.passed
    assert r.findings["matched"] == "both"
    with pytest.raises(DomainError):
        estimate_pvariation(PathEnsemble(TimeGrid(np.array([0.0, 1.0, 3.0])), np.zeros((2, 3)), 0, "x"),
                            0.5, 1.0)


def test_increment_covariances_brownian_vanish():
    assert np.all(increment_covariances(0.5, 1.0, np.arange(1, 50)) == 0.0)


def test_lrd_exponent():
    r = lrd_exponent(0.6, 1.5)
    assert r.passed and r.findings["memory"] == "long"
    assert r.metric("slope").value == pytest.approx(-0.2, abs=0.05)
    with pytest.raises(DomainError):
        lrd_exponent(1 / 3, 1.5)
