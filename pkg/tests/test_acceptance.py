"""Acceptance criteria, each run at its stated tolerance and budget.

Every test records one ``PASS``/``FAIL`` line; the lines are printed in a
summary section at the end of the pytest run. Criteria are asserted as
stated, so a criterion that does not hold shows up as a failing test.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from gaussminimax.bounds import mu0_empirical, mu0_lemma1, stein_lower
from gaussminimax.cli import main
from gaussminimax.hypotheses import HypothesisPair, format_pair, kl_null_vs
from gaussminimax.lrtest import calibrate_threshold, estimate_beta, exact_beta_1d
from gaussminimax.maximalset import (
    CandidatePair,
    expected_ratio_mc,
    f_report,
    k_unknown_mean,
    log_f_diag,
    log_f_zero_mean,
    membership,
)
from gaussminimax.pdlinalg import SymMatrix, is_pd
from gaussminimax.scenarios import (
    ExperimentConfig,
    alternating_family,
    make_family,
    run_replacement_check,
)

from conftest import random_spd

pytestmark = pytest.mark.acceptance


def record(log, number, ok, summary, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {summary}  [{detail}]"
    log.append(line)
    print(line)
    return ok


def test_lemma2_equality(acceptance_log):
    """Criterion 1: MC ratio mean vs exp(log_f / 2) for 100 configurations."""
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    within = 0
    total = 0
    for n in (1, 2, 4, 8):
        accepted = 0
        while accepted < 25:
            ref = HypothesisPair(0.5 * rng.normal(size=n), random_spd(n, rng, 0.5, 2.0))
            cand = CandidatePair(ref.mean + 0.3 * rng.normal(size=n), random_spd(n, rng, 0.5, 2.0))
            rep = f_report(ref, cand)
            if not rep.b_pd:
                continue
            # keep configurations whose ratio has a finite second moment, so the std error is meaningful
            second = np.eye(n) + 2 * cand.chol.inverse().dense() - 2 * ref.chol.inverse().dense()
            if not is_pd(second):
                continue
            accepted += 1
            total += 1
            est = expected_ratio_mc(ref, cand, 10**6, seed=total)
            within += abs(est.value - math.exp(rep.log_f / 2)) <= 3 * est.std_err
    elapsed = time.perf_counter() - start
    ok = within >= 97 and elapsed <= 120
    record(acceptance_log, 1, ok, "ratio identity", f"{within}/{total} within 3 SE, {elapsed:.1f}s <= 120s")
    assert ok


def test_one_dimensional_oracle(acceptance_log):
    """Criterion 2: calibrate + estimate_beta vs the exact one-dimensional miss probability."""
    rng = np.random.default_rng(1002)
    start = time.perf_counter()
    n_samples = 10**6
    worst = 0.0
    agree = 0
    for k in range(20):
        lam, a, alpha = rng.uniform(0.3, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(0.05, 0.5)
        _, beta = exact_beta_1d(lam, a, alpha)
        pair = HypothesisPair.diagonal([lam], [a])
        th = calibrate_threshold(pair, alpha, n_samples, seed=2 * k)
        est = estimate_beta(pair, pair, th.gamma, n_samples, seed=2 * k + 1)
        # threshold noise moves beta by p_alt(gamma)/p_null(gamma) = exp(-gamma) times the alpha noise
        se = math.hypot(est.std_err, math.exp(-th.gamma) * math.sqrt(alpha * (1 - alpha) / n_samples))
        z = abs(est.value - beta) / se
        worst = max(worst, z)
        agree += z <= 3
    elapsed = time.perf_counter() - start
    ok = agree == 20 and elapsed <= 60
    record(acceptance_log, 2, ok, "1-D oracle equivalence", f"{agree}/20 within 3 SE (max {worst:.2f}), {elapsed:.1f}s <= 60s")
    assert ok


def test_sandwich(acceptance_log):
    """Criterion 3: lower <= ln beta_hat <= -D + mu0 for random diagonal pairs."""
    rng = np.random.default_rng(1003)
    start = time.perf_counter()
    n_samples = 100_000
    held = 0
    configs = 0
    for n in (64, 256):
        for alpha in (0.1, 0.5):
            for rep in range(5):
                pair = HypothesisPair.diagonal(rng.uniform(0.5, 2.0, n), rng.uniform(-0.3, 0.3, n))
                seed = configs * 2
                D = kl_null_vs(pair).kl
                th = calibrate_threshold(pair, alpha, n_samples, seed)
                mu0 = mu0_empirical(pair, alpha, n_samples, seed)
                est = estimate_beta(pair, pair, th.gamma, n_samples, seed + 1)
                lo, hi = est.log_interval(3.0)
                held += stein_lower(pair, alpha) <= hi and lo <= -D + mu0
                configs += 1
    elapsed = time.perf_counter() - start
    ok = held == configs and configs >= 20 and elapsed <= 300
    record(acceptance_log, 3, ok, "divergence sandwich", f"{held}/{configs} configs, {elapsed:.1f}s <= 300s")
    assert ok


def test_stein_exponent(acceptance_log):
    """Criterion 4: relative gap between -ln(beta_hat)/n and D/n at n = 512."""
    start = time.perf_counter()
    n, alpha, n_samples = 512, 0.1, 10**5
    pair = alternating_family(2.0, 0.5)(n)
    D = kl_null_vs(pair).kl
    th = calibrate_threshold(pair, alpha, n_samples, seed=4001)
    est = estimate_beta(pair, pair, th.gamma, n_samples, seed=4002)
    rel = abs(-est.log_value / n - D / n) / (D / n)
    elapsed = time.perf_counter() - start
    ok = rel <= 0.10 and elapsed <= 180
    record(
        acceptance_log, 4, ok, "Stein exponent at n=512",
        f"-ln(beta)/n={-est.log_value / n:.5f}, D/n={D / n:.5f}, rel={rel:.3f} (<= 0.10), {elapsed:.1f}s",
    )
    assert ok


REPLACEMENT_CASES = [
    ("constant", {"lam": 2.0}, "constant", {"lam": 4.0}),
    ("constant", {"lam": 2.0}, "constant", {"lam": 3.0}),
    ("constant", {"lam": 2.0}, "constant", {"lam": 2.0}),
    ("constant", {"lam": 0.5}, "constant", {"lam": 0.4}),
    ("constant", {"lam": 1.5, "a": 0.2}, "constant", {"lam": 2.5, "a": 0.2}),
    ("mean_shift", {"a": 0.3}, "mean_shift", {"a": 0.4}),
    ("mean_shift", {"a": 0.2}, "constant", {"lam": 1.5, "a": 0.3}),
    ("alternating", {}, "alternating", {"lam1": 3.0, "lam2": 0.5}),
    ("ramp", {"c": 1.0}, "ramp", {"c": 2.0}),
    ("ramp", {"c": 1.0}, "constant", {"lam": 2.5}),
]


def test_replacement(acceptance_log):
    """Criterion 5: candidate miss probability under the reference detector stays below the bound."""
    start = time.perf_counter()
    held = members = 0
    for k, (rf, rp, cf, cp) in enumerate(REPLACEMENT_CASES):
        cfg = ExperimentConfig(rf, rp, n_list=(128,), alpha=0.1, slack_rule="zero", n_samples=100_000, seed=500 + k)
        (row,) = run_replacement_check(make_family(rf, rp), make_family(cf, cp), cfg)
        members += row.status == "member"
        held += row.status == "member" and row.holds
    elapsed = time.perf_counter() - start
    ok = members == 10 and held == 10 and elapsed <= 300
    record(acceptance_log, 5, ok, "replacement property", f"{held}/{members} members hold, {elapsed:.1f}s <= 300s")
    assert ok


def _sample_member(ref, rng, slack):
    """Draw (b, V) around the reference, shrinking the spread after each rejection.

    Candidates are ``b = a + s z`` and ``V = L W L'`` with ``L L' = M`` and ``W``
    having eigenvalues in ``[e^-s, e^s]``; as ``s`` shrinks the draw approaches
    the reference, which is itself a member, so the loop terminates.
    """
    n = ref.dim
    low = np.linalg.cholesky(ref.cov.dense())
    s = 1.5
    while True:
        w = random_spd(n, rng, math.exp(-s), math.exp(s))
        cand = CandidatePair(ref.mean + s * rng.normal(size=n), low @ w @ low.T)
        if membership(ref, cand, slack).is_member:
            return cand
        s *= 0.9


def test_convexity(acceptance_log):
    """Criterion 6: convex combinations of members remain members at the same slack."""
    rng = np.random.default_rng(1006)
    start = time.perf_counter()
    slack = 0.0
    bad = []
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        ref = HypothesisPair(0.5 * rng.normal(size=n), random_spd(n, rng, 0.3, 3.0))
        c1, c2 = _sample_member(ref, rng, slack), _sample_member(ref, rng, slack)
        t = rng.uniform()
        mix = CandidatePair(t * c1.mean + (1 - t) * c2.mean, t * c1.cov.dense() + (1 - t) * c2.cov.dense())
        v = membership(ref, mix, slack)
        if not v.is_member:
            bad.append(v.log_f)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed <= 30
    worst = max(bad) if bad else float("nan")
    record(
        acceptance_log, 6, ok, "convexity of the member set",
        f"{1000 - len(bad)}/1000 combinations are members (worst log_f {worst:.4g}), {elapsed:.1f}s <= 30s",
    )
    assert ok


def test_lemma1_dominance_and_rate(acceptance_log):
    """Criterion 7: mu0_empirical <= mu0_lemma1(p=2); log-log slope of mu0_lemma1 equals 1/p."""
    rng = np.random.default_rng(1007)
    start = time.perf_counter()
    dominated = 0
    alphas = (0.5, 0.1, 0.01)
    for k in range(50):
        n = int(rng.integers(1, 65))
        pair = HypothesisPair.diagonal(rng.uniform(0.3, 3.0, n), rng.uniform(-0.5, 0.5, n))
        alpha = alphas[k % 3]
        dominated += mu0_empirical(pair, alpha, 100_000, seed=k) <= mu0_lemma1(pair, alpha, p=2)
    ns = 2 ** np.arange(4, 11)
    slopes = {}
    for p in (2.0, 1.5):
        vals = [mu0_lemma1(HypothesisPair.diagonal(np.tile([2.0, 0.5], n // 2)), 0.1, p=p) for n in ns]
        slopes[p] = np.polyfit(np.log(ns), np.log(vals), 1)[0]
    elapsed = time.perf_counter() - start
    slope_ok = all(abs(s - 1 / p) <= 0.05 for p, s in slopes.items())
    ok = dominated == 50 and slope_ok and elapsed <= 60
    record(
        acceptance_log, 7, ok, "moment-bound dominance and rate",
        f"{dominated}/50 dominated, slopes "
        + ", ".join(f"p={p}: {s:.4f}" for p, s in slopes.items())
        + f", {elapsed:.1f}s <= 60s",
    )
    assert ok


def test_path_consistency(acceptance_log):
    """Criterion 8: diagonal fast paths agree with the dense general path to 1e-10."""
    rng = np.random.default_rng(1008)
    start = time.perf_counter()
    worst = 0.0

    def gap(x, y):
        if math.isinf(x) or math.isinf(y):
            return 0.0 if x == y else math.inf
        return abs(x - y) / max(1.0, abs(y))

    for _ in range(500):
        n = int(rng.integers(1, 17))
        lam, nu = rng.uniform(0.2, 5.0, n), rng.uniform(0.2, 5.0, n)
        a, b = rng.normal(size=n), rng.normal(size=n)
        dense_ref = HypothesisPair(a, np.diag(lam))
        worst = max(
            worst,
            gap(log_f_diag(lam, a, nu, b), f_report(dense_ref, CandidatePair(b, np.diag(nu))).log_f),
            gap(kl_null_vs(HypothesisPair.diagonal(lam, a)).kl, kl_null_vs(dense_ref).kl),
            gap(k_unknown_mean(lam, a, b), -f_report(dense_ref, CandidatePair(b, np.diag(lam))).log_f),
            gap(
                log_f_zero_mean(SymMatrix(lam), SymMatrix(nu)),
                f_report(HypothesisPair(np.zeros(n), np.diag(lam)), CandidatePair(np.zeros(n), np.diag(nu))).log_f,
            ),
        )
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed <= 30
    record(acceptance_log, 8, ok, "path consistency", f"max relative gap {worst:.2e} <= 1e-10, {elapsed:.1f}s <= 30s")
    assert ok


def test_cli_determinism(acceptance_log, tmp_path):
    """Criterion 9: MC-backed CLI commands give byte-identical output across 1, 2 and 8 workers."""
    n = 2000  # several chunks per run at this dimension
    lam = np.tile([2.0, 0.5], n // 2)
    pair = tmp_path / "pair.txt"
    pair.write_text(format_pair(HypothesisPair.diagonal(lam, np.full(n, 0.05))))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "alternating", "n_list": [512, 2048], "alpha": 0.1,
                               "samples": 20000, "seed": 9, "cand_family": "alternating",
                               "cand_params": {"lam1": 3.0, "lam2": 0.5}}))
    commands = {
        "calibrate": ["calibrate", "--pair", str(pair), "--alpha", "0.1", "--samples", "20000", "--seed", "5"],
        "beta": ["beta", "--decision", str(pair), "--truth", str(pair), "--gamma", "-20",
                 "--samples", "20000", "--seed", "6"],
        "beta-plain": ["beta", "--decision", str(pair), "--truth", str(pair), "--gamma", "-20",
                       "--samples", "20000", "--seed", "6", "--method", "plain"],
        "bounds": ["bounds", "--pair", str(pair), "--alpha", "0.1", "--mu0", "empirical",
                   "--samples", "20000", "--seed", "7"],
    }
    identical = []
    for name, argv in commands.items():
        outputs = set()
        for w in (1, 2, 8):
            buf = io.StringIO()
            assert main(argv + ["--workers", str(w)], out=buf) == 0
            outputs.add(buf.getvalue().encode())
        identical.append((name, len(outputs) == 1))
    scenario_outputs = set()
    for w in (1, 2, 8):
        out = tmp_path / f"scn{w}"
        main(["scenario", "--config", str(cfg), "--out", str(out), "--workers", str(w)], out=io.StringIO())
        scenario_outputs.add(tuple((out / f).read_bytes() for f in ("exponent.csv", "replacement.csv", "membership.csv")))
    identical.append(("scenario", len(scenario_outputs) == 1))
    ok = all(flag for _, flag in identical)
    record(
        acceptance_log, 9, ok, "CLI determinism across 1/2/8 workers",
        ", ".join(f"{name}={'same' if flag else 'DIFF'}" for name, flag in identical),
    )
    assert ok
