"""Acceptance gate.

Seven end-to-end checks, one per criterion, each printing a single
PASS/FAIL line (run with ``pytest -s`` to see them).  Tolerances are
pinned here and nowhere else; they are deliberately tighter than the
working tolerances used inside the library.
"""

import time

import numpy as np
import pytest

from conftest import axis_frame, unit_square_set
from subquad import linalg
from subquad.bridge import coincidence_check, lift_lfu, restrict
from subquad.geometry import (
    SampleSet,
    hat_sampleset,
    quadratic_constraint_matrix,
)
from subquad.harness import SUITES, negative_controls, run_suite
from subquad.models import fit_dqi, fit_lfu, fit_mfn, fit_mn
from subquad.simplex import DirectionBundle, fit_qgsd, gsg, gsh


def _report(name, ok, info=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({info})" if info else ""))
    assert ok, f"{name}: {info}"


def test_criterion_1_minimum_curvature_on_flat_data():
    """Four points of ||x||^2 on the unit square: the smallest-Hessian
    interpolant is affine with gradient (1, 1, 0), the third coordinate
    undetermined; and the fit is cheap."""
    square = unit_square_set()
    fit_mfn(square)  # warm up (BLAS thread pools, caches)
    t0 = time.perf_counter()
    result = fit_mfn(square)
    elapsed = time.perf_counter() - t0

    h_ok = np.linalg.norm(result.model.H) <= 1e-10
    g_ok = np.linalg.norm(result.model.g - np.array([1.0, 1.0, 0.0])) <= 1e-10
    amb = result.gradients.ambiguity_basis
    amb_ok = (
        amb.shape == (3, 1)
        and abs(abs(amb[2, 0]) - 1.0) <= 1e-8
        and np.linalg.norm(amb[:2, 0]) <= 1e-8
    )
    fast = elapsed < 0.010
    _report(
        "criterion 1: flat-data fit",
        h_ok and g_ok and amb_ok and fast,
        f"|H|={np.linalg.norm(result.model.H):.1e} "
        f"g={result.model.g} time={1e3 * elapsed:.2f}ms",
    )


def test_criterion_2_least_change_worked_example():
    """Identity reference on the square: full fit ((1/2,1/2,0), I_3),
    exact lift/restrict round trip, perfect agreement on the plane and
    a gap of exactly 1/2 one unit off it."""
    square, frame = unit_square_set(), axis_frame()
    full = fit_lfu(square, np.eye(3))
    sub = fit_lfu(hat_sampleset(square, frame), np.eye(2))

    full_ok = (
        np.linalg.norm(full.model.H - np.eye(3)) <= 1e-10
        and np.linalg.norm(full.model.g - np.array([0.5, 0.5, 0.0])) <= 1e-10
    )
    amb = full.gradients.ambiguity_basis
    amb_ok = amb.shape == (3, 1) and abs(abs(amb[2, 0]) - 1.0) <= 1e-8

    lifted = lift_lfu(sub, frame, np.eye(3))
    lift_ok = (
        np.linalg.norm(lifted.model.H - full.model.H) <= 1e-10
        and np.linalg.norm(lifted.model.g - full.model.g) <= 1e-10
    )
    back = restrict(full, frame)
    restrict_ok = (
        np.linalg.norm(back.model.H - sub.model.H) <= 1e-10
        and np.linalg.norm(back.model.g - sub.model.g) <= 1e-10
    )

    report = coincidence_check(full.model, sub.model, frame, probes=16, seed=0)
    on_ok = report.subspace_value_gap <= 1e-10
    probe_ok = (
        len(report.complement_probe_gaps) == 1
        and abs(report.complement_probe_gaps[0] - 0.5) <= 1e-10
    )
    _report(
        "criterion 2: least-change worked example",
        full_ok and amb_ok and lift_ok and restrict_ok and on_ok and probe_ok,
        f"H-I={np.linalg.norm(full.model.H - np.eye(3)):.1e} "
        f"probe={report.complement_probe_gaps[0]:.12f}",
    )


def test_criterion_3_randomized_suites():
    """Eight suites, 200 seeded trials each, every conversion identity
    within 1e-8, inside a minute."""
    t0 = time.perf_counter()
    failures = {}
    worst = 0.0
    for theorem in SUITES:
        result = run_suite(theorem, 200, tol=1e-8, seed=42)
        worst = max(worst, result.max_gap)
        if result.failures:
            failures[theorem] = [
                (r.trial, r.gap, r.detail)
                for r in result.records if not r.passed
            ]
    elapsed = time.perf_counter() - t0
    _report(
        "criterion 3: randomized conversion suites",
        not failures and elapsed < 60.0,
        f"8x200 trials, worst gap {worst:.2e}, {elapsed:.1f}s"
        + (f", failures: {failures}" if failures else ""),
    )


def test_criterion_4_negative_controls():
    """100 random-reference least-change instances: coincidence must
    survive on the subspace and visibly break off it."""
    result = negative_controls(seed=0, trials=100, tol=1e-8, probes=8)
    random_rows = [r for r in result.records if r.suite == "lfu-random"]
    n_rows_ok = len(random_rows) == 100
    separated = sum(1 for r in random_rows if r.gap > 1e-4)
    on_ok = all(
        float(r.detail.split()[0].split("=")[1]) <= 1e-8 for r in random_rows
    )
    _report(
        "criterion 4: negative controls",
        result.passed and n_rows_ok and separated >= 95 and on_ok,
        f"{separated}/100 off-subspace gaps > 1e-4, all pass={result.passed}",
    )


def test_criterion_5_poised_sets_collapse_every_fit():
    """On a poised determined set the interpolant is unique, so all four
    fits must produce the same polynomial regardless of objective."""
    rng = np.random.default_rng(5150)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 5))
        m = (n + 1) * (n + 2) // 2 - 1
        disp = None
        for _attempt in range(200):
            cand = rng.standard_normal((m, n))
            sigma = np.linalg.svd(
                quadratic_constraint_matrix(cand), compute_uv=False
            )
            if sigma[-1] > 1e-3 * sigma[0]:
                disp = cand
                break
        assert disp is not None
        values = rng.standard_normal(m + 1)
        ss = SampleSet(np.zeros(n), disp, values)
        href = rng.standard_normal((n, n))
        href = (href + href.T) / 2
        fits = [fit_dqi(ss), fit_mn(ss), fit_mfn(ss), fit_lfu(ss, href)]
        scale = max(
            1.0,
            max(np.linalg.norm(f.model.g) + np.linalg.norm(f.model.H) for f in fits),
        )
        for a in fits:
            for b in fits:
                gap = (
                    np.linalg.norm(a.model.g - b.model.g)
                    + np.linalg.norm(a.model.H - b.model.H)
                ) / scale
                worst = max(worst, gap)
    _report(
        "criterion 5: poised sets collapse every fit",
        worst <= 1e-8,
        f"50 sets, worst relative coefficient gap {worst:.2e}",
    )


def test_criterion_6_refined_stencil_interpolation():
    """The refined combined model reproduces the sampled values at every
    stencil point when the outer directions have full column rank."""
    rng = np.random.default_rng(66)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(2, 7))
        p = int(rng.integers(1, n + 1))
        s = rng.standard_normal((n, p))
        if np.linalg.matrix_rank(s) < p:
            continue
        x0 = rng.standard_normal(n)
        w = rng.standard_normal(n)
        f = lambda x: float(np.sin(x) @ w + 0.2 * (x @ x))
        result = fit_qgsd(x0, DirectionBundle(s, s), f, variant="refined")
        for pt in result.sample_points:
            err = abs(result.model(pt) - f(pt)) / max(1.0, abs(f(pt)))
            worst = max(worst, err)
    _report(
        "criterion 6: refined stencil interpolation",
        worst <= 1e-9,
        f"100 stencils, worst relative value error {worst:.2e}",
    )


def test_criterion_7_simplex_estimates_close_forms():
    """Gradient estimates are exact (projected) for linear functions;
    Hessian estimates are exact for quadratics on square nonsingular
    direction sets."""
    rng = np.random.default_rng(77)
    worst_g = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 8))
        p = int(rng.integers(1, n + 2))
        s = rng.standard_normal((n, p))
        b = rng.standard_normal(n)
        g = gsg(rng.standard_normal(n), s, lambda x: float(b @ x))
        proj = s @ np.linalg.pinv(s)
        worst_g = max(worst_g, float(np.linalg.norm(g - proj @ b)))

    worst_h = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        s = rng.standard_normal((n, n))
        if np.linalg.cond(s) > 1e4:
            continue
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        b = rng.standard_normal(n)
        f = lambda x: float(b @ x + 0.5 * x @ a @ x)
        h = gsh(rng.standard_normal(n), DirectionBundle(s, s), f)
        worst_h = max(
            worst_h, float(np.linalg.norm(h - a) / max(1.0, np.linalg.norm(a)))
        )
    _report(
        "criterion 7: simplex estimates close forms",
        worst_g <= 1e-10 and worst_h <= 1e-8,
        f"gradient {worst_g:.2e}, hessian {worst_h:.2e}",
    )
