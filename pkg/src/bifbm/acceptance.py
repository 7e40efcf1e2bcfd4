"""The acceptance criteria as runnable checks.

Each criterion returns one or more ``VerificationReport``s; it passes when all
of them pass and the wall time stays inside its budget.  The Monte Carlo
criteria (7-13) take a ``threads`` hint so the determinism criterion can rerun
them under a different thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import time
from typing import Callable

import numpy as np

from .verify import (
    IDENTITY_TOL,
    VerificationReport,
    check_decomposition_identity,
    check_lei_nualart_identity,
    check_psd,
    check_quasi_helix,
    check_sampler_agreement,
    check_self_similarity,
    check_subfbm_identity,
    check_volterra_route,
    check_weak_approx,
    check_wiener_variance,
    lrd_exponent,
    pvariation_from_sampler,
    quadratic_variation_trend,
)

SEED = 20240611
N_TUPLES = 100
PSD_H = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
PSD_K = (1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9)
HELIX_PAIRS = [(H, K) for H in (0.2, 0.3, 0.4, 0.5, 0.6) for K in (1.1, 1.3, 1.5, 1.6)]
SELF_SIMILAR_PAIRS = [(0.3, 1.5), (0.6, 1.5), (0.45, 1.9), (0.8, 1.1), (0.5, 0.7)]
LRD_PAIRS = [(0.2, 1.5), (0.6, 1.25)]  # HK = 0.3 and 0.75 with K in (1, 2)


def _random_tuples(rng, n, K_lo, K_hi, t_max=5.0):
    out = []
    while len(out) < n:
        H, K = rng.uniform(0.02, 0.98), rng.uniform(K_lo, K_hi)
        if K == 1.0 or not 0.0 < H * K < 0.98:
            continue
        out.append((H, K, rng.uniform(0.0, t_max), rng.uniform(0.0, t_max)))
    return out


def _identity_sweep(suite, check, K_lo, K_hi, seed):
    """Max absolute residual of an exact identity over random (H, K, t, s)."""
    rng = np.random.default_rng(seed)
    report = VerificationReport(suite, seed=seed, params={"n_tuples": N_TUPLES, "K_range": [K_lo, K_hi]})
    start = time.perf_counter()
    worst, worst_at = 0.0, None
    for H, K, t, s in _random_tuples(rng, N_TUPLES, K_lo, K_hi):
        r = check(H, K, np.array([t, s]))
        res = r.metric("max_abs_residual").value
        if res >= worst:
            worst, worst_at = res, (H, K, t, s)
    report.add("max_abs_residual", worst, IDENTITY_TOL, f"worst tuple (H, K, t, s) = {worst_at}")
    report.runtime_ms = int(round(1000 * (time.perf_counter() - start)))
    return [report]


def c1_decomposition(threads=1):
    return _identity_sweep("decomposition-identity", check_decomposition_identity, 1.0 + 1e-6,
                           2.0 - 1e-6, SEED + 1)


def c2_lei_nualart(threads=1):
    return _identity_sweep("lei-nualart-identity", check_lei_nualart_identity, 1e-6, 1.0 - 1e-6,
                           SEED + 2)


def c3_subfbm(threads=1):
    return _identity_sweep("subfbm-identity", check_subfbm_identity, 1e-6, 2.0 - 1e-6, SEED + 3)


def c4_psd(threads=1):
    grid = np.linspace(0.05, 5.0, 100)
    return [check_psd(H, K, grid) for H in PSD_H for K in PSD_K if H * K < 1.0]


def c5_quasi_helix(threads=1):
    st = np.linspace(0.1, 5.0, 50)
    return [check_quasi_helix(H, K, st) for H, K in HELIX_PAIRS]


def c6_self_similarity(threads=1):
    return [check_self_similarity(H, K, seed=SEED + 6 + i) for i, (H, K) in enumerate(SELF_SIMILAR_PAIRS)]


def c7_samplers(threads=1):
    return [check_sampler_agreement(0.6, 1.5, seed=SEED + 7, threads=threads)]


def c8_wiener(threads=1):
    return [check_wiener_variance(1.5, seed=SEED + 8, threads=threads)]


def c9_volterra(threads=1):
    return [check_volterra_route(seed=SEED + 9, threads=threads)]


def c10_semimartingale(threads=1):
    H, K = 1.0 / 3.0, 1.5
    qv = quadratic_variation_trend(H, K, levels=range(6, 12), n_paths=20000, seed=SEED + 10,
                                   threads=threads)
    pv = pvariation_from_sampler(H, K, n_steps=2048, n_paths=20000, seed=SEED + 10, threads=threads)
    return [qv, pv]


def c11_qv_trend(threads=1):
    return [quadratic_variation_trend(H, K, seed=SEED + 11, threads=threads)
            for H, K in ((0.25, 1.5), (0.6, 1.5))]


def c12_lrd(threads=1):
    return [lrd_exponent(H, K) for H, K in LRD_PAIRS]


def c13_weak_approx(threads=1):
    return [check_weak_approx(seed=SEED + 13, threads=threads)]


MONTE_CARLO = (7, 8, 9, 10, 11, 12, 13)


@dataclass
class CriterionResult:
    number: int
    title: str
    budget_s: float
    runtime_s: float
    reports: list = field(default_factory=list)
    note: str = ""

    @property
    def passed(self):
        return self.runtime_s <= self.budget_s and all(r.passed for r in self.reports)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        failing = [r.summary() for r in self.reports if not r.passed]
        if self.runtime_s > self.budget_s:
            failing.append(f"runtime {self.runtime_s:.1f}s over budget {self.budget_s:g}s")
        if self.note:
            failing.append(self.note)
        detail = "; ".join(failing)
        return (f"[{status}] criterion {self.number:2d} {self.title} ({self.runtime_s:.1f}s / "
                f"{self.budget_s:g}s){': ' + detail if detail else ''}")


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    budget_s: float
    fn: Callable

    def run(self, threads=1):
        start = time.perf_counter()
        reports = self.fn(threads)
        return CriterionResult(self.number, self.title, self.budget_s, time.perf_counter() - start,
                               reports)


CRITERIA = [
    Criterion(1, "decomposition identity", 1.0, c1_decomposition),
    Criterion(2, "Lei-Nualart identity", 1.0, c2_lei_nualart),
    Criterion(3, "sub-fBm identity", 1.0, c3_subfbm),
    Criterion(4, "covariance matrices are PSD", 30.0, c4_psd),
    Criterion(5, "quasi-helix bounds", 5.0, c5_quasi_helix),
    Criterion(6, "self-similarity", 1.0, c6_self_similarity),
    Criterion(7, "cholesky and decomposition samplers", 120.0, c7_samplers),
    Criterion(8, "X^K Wiener-integral variance", 60.0, c8_wiener),
    Criterion(9, "Volterra kernel and sampler", 180.0, c9_volterra),
    Criterion(10, "semimartingale quadratic variation", 180.0, c10_semimartingale),
    Criterion(11, "quadratic variation slopes", 180.0, c11_qv_trend),
    Criterion(12, "long-range dependence exponent", 10.0, c12_lrd),
    Criterion(13, "weak approximation", 600.0, c13_weak_approx),
]
BY_NUMBER = {c.number: c for c in CRITERIA}


def determinism(results, threads=3):
    """Rerun the Monte Carlo criteria with another thread count; reports must match exactly."""
    start = time.perf_counter()
    report = VerificationReport("determinism", params={"threads": threads, "criteria": list(MONTE_CARLO)})
    for n in MONTE_CARLO:
        again = BY_NUMBER[n].run(threads)
        first = [r.to_json(timing=False) for r in results[n].reports]
        second = [r.to_json(timing=False) for r in again.reports]
        report.add(f"criterion_{n}_identical", float(first == second), 1.0, kind="min")
    runtime = time.perf_counter() - start
    budget = sum(BY_NUMBER[n].budget_s for n in MONTE_CARLO)
    return CriterionResult(14, f"determinism at threads={threads}", budget, runtime, [report])


def run_all(numbers=None, threads=1, echo=print):
    numbers = sorted(numbers or list(BY_NUMBER) + [14])
    results = {}
    for n in numbers:
        if n == 14:
            for m in MONTE_CARLO:
                if m not in results:
                    results[m] = BY_NUMBER[m].run(threads)
            res = determinism(results, threads=3 if threads != 3 else 2)
        else:
            res = results.get(n) or BY_NUMBER[n].run(threads)
        results[n] = res
        if echo:
            echo(res.line())
    return {n: results[n] for n in numbers}


def pvariation_match(result: CriterionResult):
    """Which candidate constant the semimartingale run matched."""
    for r in result.reports:
        if "matched" in r.findings:
            return r.findings["matched"]
    return None

