"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also collected into the terminal summary.
"""

import csv
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from semimarkov_lob.chain import StateModel, build_state_model, stationary_distribution
from semimarkov_lob.contlarrad import prob_up_integral, race_prob_up_mc
from semimarkov_lob.diffusion import from_summary, sigma2_general, sigma2_one_tick, sigma2_two_state
from semimarkov_lob.errors import IrreducibilityError, ParseError
from semimarkov_lob.ingest import parse_lobster, read_lobster
from semimarkov_lob.simulate import SojournSpec, clt_check, long_run_variance, simulate_path
from semimarkov_lob.stats import linear_fit_adjr2


def record(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def test_criterion_1_formula_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_general = worst_tick = 0.0
    for _ in range(1000):
        p, q = rng.uniform(0, 0.99, 2)
        a1 = 1.0 - rng.uniform(0, 1)  # (0, 1]
        a2 = -rng.uniform(0, 1)  # [-1, 0)
        two = sigma2_two_state(p, q, a1, a2)
        general = sigma2_general(StateModel.from_P([a1, a2], [[p, 1 - p], [1 - q, q]]))
        worst_general = max(worst_general, abs(general - two))
        d = a1
        s_two = sigma2_two_state(p, q, d, -d)
        s_gen = sigma2_general(StateModel.from_P([d, -d], [[p, 1 - p], [1 - q, q]]))
        s_tick = sigma2_one_tick(d, p, q)
        worst_tick = max(worst_tick, abs(s_two - s_tick), abs(s_gen - s_tick))
    elapsed = time.perf_counter() - t0
    ok = worst_general <= 1e-10 and worst_tick <= 1e-10 and elapsed < 1.0
    record(1, "formula reduction", ok,
           f"max |general-two|={worst_general:.2e}, max |.-one_tick|={worst_tick:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_two_state_table_row():
    est = from_summary(0.4932, 0.4956, 0.0170, -0.0172, 0.0370, 0.4026)
    checks = {
        "sigma2": (est.sigma2, 0.0003, 1e-4),
        "coeff_balanced": (est.coeff_balanced, 0.0881, 1e-4),
        "coeff_unbalanced": (est.coeff_unbalanced, 0.0267, 1e-4),
    }
    # one unit in the last printed digit, plus float slack at the boundary
    bad = [k for k, (got, want, unit) in checks.items() if abs(got - want) > unit + 1e-12]
    detail = ", ".join(f"{k}={got:.6g} (printed {want})" for k, (got, want, _) in checks.items())
    record(2, "two-state table row", not bad, detail + (f"; outside +-1 digit: {bad}" if bad else ""))
    assert not bad


def test_criterion_3_clt_unbalanced():
    t0 = time.perf_counter()
    model = StateModel.two_state(0.5, 0.5, 1.0, -1.0)
    rep = clt_check(model, SojournSpec.exponential(1.0), n_paths=200, n_jumps=100_000, t=1.0, seed=42)
    elapsed = time.perf_counter() - t0
    ok = rep.relative_error < 0.05 and rep.ks_statistic < 0.05 and elapsed < 120
    record(3, "CLT oracle (unbalanced)", ok,
           f"predicted={rep.predicted_coeff:.4f} empirical={rep.empirical_coeff:.4f} "
           f"rel_err={rep.relative_error:.4f} KS={rep.ks_statistic:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_4_sigma2_n_state():
    t0 = time.perf_counter()
    model = StateModel.from_P([-1.0, 0.0, 1.0], np.full((3, 3), 1 / 3))
    s2 = sigma2_general(model)
    est, se = long_run_variance(model, n_jumps=1_000_000, n_paths=80, batch=1000, seed=7)
    elapsed = time.perf_counter() - t0
    rel = abs(s2 - est) / est
    ok = rel < 0.02 and elapsed < 60
    record(4, "sigma^2 oracle (3-state)", ok,
           f"sigma2_general={s2:.6f} empirical={est:.6f}+-{se:.6f} rel_err={rel:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_prob_up():
    t0 = time.perf_counter()
    diag = max(abs(prob_up_integral(n, n) - 0.5) for n in range(1, 21))
    comp = max(abs(prob_up_integral(n, p) + prob_up_integral(p, n) - 1)
               for n in range(1, 21) for p in range(1, 21))
    worst_race = 0.0
    worst_undecided = 0.0
    for n in range(1, 6):
        for p in range(1, 6):
            mc, undecided = race_prob_up_mc(n, p, trials=1_000_000, seed=1000 + 10 * n + p)
            worst_race = max(worst_race, abs(mc - prob_up_integral(n, p)))
            worst_undecided = max(worst_undecided, undecided)
    elapsed = time.perf_counter() - t0
    ok = diag <= 1e-6 and comp <= 2e-6 and worst_race < 0.005 and elapsed < 120
    record(5, "price-increase probability", ok,
           f"max |p(n,n)-.5|={diag:.1e}, max complement err={comp:.1e}, max race diff={worst_race:.4f} "
           f"(undecided<= {worst_undecided:.1e}), {elapsed:.1f}s")
    assert ok


def _random_irreducible(rng, n):
    # sparse random weights plus a random Hamiltonian cycle
    W = rng.random((n, n)) * (rng.random((n, n)) < rng.uniform(0.1, 1.0))
    perm = rng.permutation(n)
    W[perm, np.roll(perm, -1)] += rng.uniform(0.01, 1.0, n)
    return W / W.sum(axis=1, keepdims=True)


def test_criterion_6_stationary_solver():
    rng = np.random.default_rng(6)
    worst = 0.0
    for k in range(1000):
        n = 2 + k % 19
        P = _random_irreducible(rng, n)
        pi = stationary_distribution(P)
        worst = max(worst, float(np.max(np.abs(pi @ P - pi))))
    try:
        stationary_distribution(np.eye(4))
        rejected = False
    except IrreducibilityError:
        rejected = True
    ok = worst <= 1e-10 and rejected
    record(6, "stationary solver", ok, f"max residual={worst:.2e} over 1000 matrices, identity rejected={rejected}")
    assert ok


def test_criterion_7_round_trip():
    a = np.array([0.02, 0.01, -0.01, -0.03])
    P = np.array([
        [0.40, 0.30, 0.20, 0.10],
        [0.15, 0.35, 0.30, 0.20],
        [0.20, 0.30, 0.35, 0.15],
        [0.10, 0.20, 0.30, 0.40],
    ])
    true = StateModel.from_P(a, P, m=[0.5, 1.0, 1.0, 2.0])
    path = simulate_path(true, SojournSpec.parse("exp:2,exp:1,exp:1,exp:0.5"), 1_000_000, seed=7)
    fit, _, _ = build_state_model(path.jumps, path.sojourns, binning="distinct")
    p_err = float(np.max(np.abs(fit.P - true.P)))
    s2_true, s2_fit = sigma2_general(true), sigma2_general(fit)
    s2_rel = abs(s2_fit - s2_true) / s2_true
    pi_err = float(np.max(np.abs(fit.pi_star - true.pi_star)))
    a_err = float(np.max(np.abs(fit.a - true.a)))
    ok = p_err < 0.01 and s2_rel < 0.03 and fit.n == 4
    record(7, "round-trip estimation", ok,
           f"max|dP|={p_err:.4f}, sigma2 rel_err={s2_rel:.4f}, max|dpi|={pi_err:.4f}, max|da|={a_err:.1e}, "
           f"m={np.round(fit.m, 3).tolist()}")
    assert ok


GOLDEN_ADJ_R2 = {"two_state": (0.9788, 0.9821), "many_state": (0.9814, 0.9839), "one_tick": (0.3916, 0.3813)}


def test_criterion_8_regression_harness():
    x = np.array([0.0052, 0.0065, 0.0412, 0.0834, 0.0881])
    y = 0.7 * x + 0.001
    res = linear_fit_adjr2(x, y)
    ok = abs(res.adj_r2 - 1.0) <= 1e-12
    record(8, "regression harness", ok,
           f"exact-line adj R^2 = {res.adj_r2!r}; golden targets {GOLDEN_ADJ_R2} need the 40-stock dataset")
    assert ok


@pytest.mark.parametrize("label", sorted(GOLDEN_ADJ_R2))
def test_criterion_8_golden_targets(label):
    """Set SEMIMARKOV_LOB_REPORT_<LABEL> to a report.csv built from the 40-stock dataset."""
    path = os.environ.get(f"SEMIMARKOV_LOB_REPORT_{label.upper()}")
    if not path:
        pytest.skip(f"no report for {label}; golden adj R^2 targets are data-dependent")
    with open(path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r.get("realized_std")]
    y = np.array([float(r["realized_std"]) for r in rows])
    got = tuple(linear_fit_adjr2(np.array([float(r[k]) for r in rows]), y).adj_r2
                for k in ("coeff_balanced", "coeff_unbalanced"))
    ok = all(abs(g - w) <= 1e-4 for g, w in zip(got, GOLDEN_ADJ_R2[label]))
    record(8, f"golden adj R^2 ({label})", ok, f"got {got}, expected {GOLDEN_ADJ_R2[label]}")
    assert ok


def test_criterion_9_parser(golden_paths):
    from decimal import Decimal

    t0 = time.perf_counter()
    events, quotes = read_lobster(*golden_paths)
    elapsed = time.perf_counter() - t0
    msg_lines = golden_paths[0].read_text().splitlines()
    exact = True
    for e, line in zip(events, msg_lines):
        fields = line.split(",")
        ticks = Decimal(fields[4]) / Decimal(100)
        if fields[1] != "5" or ticks == ticks.to_integral_value():
            exact &= Decimal(e.price) == ticks
    bad = msg_lines.copy()
    bad[536] = bad[536].replace(",", ";", 1)
    try:
        parse_lobster("\n".join(bad), golden_paths[1].read_text())
        row = None
    except ParseError as err:
        row = err.row
    ok = len(events) == len(quotes) == 1000 and exact and row == 537 and elapsed < 1.0
    record(9, "parser golden file", ok,
           f"rows={len(events)}, tick conversion exact={exact}, malformed row reported={row} (expected 537), "
           f"{elapsed * 1000:.0f} ms")
    assert ok
