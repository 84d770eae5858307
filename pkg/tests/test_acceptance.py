"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Runtime budgets are asserted where stated; every numerical threshold is
pinned here rather than deferred to configuration.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from loopfield import (
    Circle,
    FieldConstants,
    PlanarRect,
    QuadratureSpec,
    cross_projection_identity,
    taylor_probe,
)
from loopfield.experiments import (
    ampere_catalog,
    curl_vanishing,
    default_catalog,
    line_limit_study,
    maxwell_probe,
    similitude_general,
    similitude_infinitesimal,
    symmetry_sweep,
    unit_circle,
    unit_disk_mesh,
)
from loopfield.linking import combinatorial_lk, gauss_pair_integral
from loopfield.selftest import default_probe_points

REPO = Path(__file__).resolve().parents[1]


def _report(criterion: str, passed: bool, detail: str = ""):
    print(f"acceptance {criterion}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, f"{criterion} failed: {detail}"


def test_criterion_1_straight_wire_limit():
    start = time.monotonic()
    report = line_limit_study([2, 4, 8, 16, 32])
    elapsed = time.monotonic() - start
    final = report.detail[-1]
    tails = [r.a_far_legs for r in report.detail]
    ok = (
        abs(final.a_total - 1.0) <= 1e-2
        and all(b < a for a, b in zip(tails[:-1], tails[1:]))
        and all(r.lk == 1 for r in report.detail)
        and elapsed <= 30.0
    )
    _report(
        "criterion-1 straight-wire limit",
        ok,
        f"|A(32)-1|={abs(final.a_total - 1.0):.3e} runtime={elapsed:.1f}s",
    )


def test_criterion_2_ampere_catalog():
    start = time.monotonic()
    rows = ampere_catalog(default_catalog())
    elapsed = time.monotonic() - start
    lks = {r.lk for r in rows}
    ok = (
        len(rows) >= 6
        and {-1, 0, 1, 2} <= lks
        and all(r.passed for r in rows)
        and all(r.abs_diff <= 1e-4 + r.error_estimate for r in rows)
        and elapsed <= 60.0
    )
    worst = max(r.abs_diff for r in rows)
    _report(
        "criterion-2 circulation-law catalog",
        ok,
        f"scenes={len(rows)} worst|A-Lk|={worst:.3e} runtime={elapsed:.1f}s",
    )


def test_criterion_3_symmetry():
    rows = symmetry_sweep(default_catalog())
    ok = all(r.diff <= r.bound for r in rows)
    _report(
        "criterion-3 exchange symmetry",
        ok,
        f"worst diff={max(r.diff for r in rows):.3e}",
    )


def test_criterion_4_infinitesimal_similitude():
    report = similitude_infinitesimal(
        (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 2), [0.2, 0.1, 0.05, 0.025], 1e-4
    )
    ok = report.fitted_order >= 0.9
    _report(
        "criterion-4 infinitesimal similitude",
        ok,
        f"fitted_order={report.fitted_order:.3f}",
    )


def test_criterion_5_general_similitude():
    start = time.monotonic()
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    report = similitude_general(patch, (0.5, 0.5, 2.0), 1e-4, [8, 16, 32, 64])
    elapsed = time.monotonic() - start
    ok = (
        report.rows[-1].abs_error <= 1e-3
        and report.fitted_order >= 0.9
        and elapsed <= 120.0
    )
    _report(
        "criterion-5 general similitude",
        ok,
        f"final_rel={report.rows[-1].abs_error:.3e} order={report.fitted_order:.3f} "
        f"runtime={elapsed:.1f}s",
    )


def test_criterion_6_curl_vanishing():
    report = curl_vanishing(unit_circle(), default_probe_points(), [4e-3, 2e-3, 1e-3])
    finest = [r for r in report.point_rows if r.step == 1e-3]
    below = all(r.curl_norm <= 1e-5 for r in finest)
    # step-halving ratios where the truncation term dominates the floor
    ratios_ok = True
    for point in default_probe_points():
        mine = sorted(
            (r for r in report.point_rows if np.allclose(r.point, point)),
            key=lambda r: -r.step,
        )
        for coarse, fine in zip(mine[:-1], mine[1:]):
            if coarse.curl_norm > 10 * coarse.floor and fine.curl_norm > 10 * fine.floor:
                ratios_ok = ratios_ok and 3.0 <= coarse.curl_norm / fine.curl_norm <= 5.0
    ok = report.passed and below and ratios_ok
    _report(
        "criterion-6 curl-vanishing",
        ok,
        f"worst|curl|@1e-3={max(r.curl_norm for r in finest):.3e}",
    )


def test_criterion_7_maxwell_off_support():
    square = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    from loopfield import Disk

    disk = Disk((0, 0, 0), 1.0, (0, 0, 1))
    reports = [
        maxwell_probe(square, 1.0, [(0.5, 0.5, 1.0), (0.2, 0.8, 0.9)], [2e-3, 1e-3]),
        maxwell_probe(disk, 1.0, [(0.0, 0.0, 1.5), (0.3, -0.2, 1.2)], [2e-3, 1e-3]),
    ]
    finest = [
        row for rep in reports for _, row in rep.point_rows if row.step == 1e-3
    ]
    worst = max(max(r.curl_norm, r.div_norm) for r in finest)
    ok = all(rep.passed for rep in reports) and worst <= 1e-5
    _report("criterion-7 maxwell off-support", ok, f"worst={worst:.3e}")


def test_criterion_8_projection_identity():
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(10_000):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        r = rng.normal(size=3)
        r /= np.linalg.norm(r)
        lhs, rhs = cross_projection_identity(a, b, r)
        worst = max(
            worst,
            float(np.linalg.norm(lhs - rhs) / (np.linalg.norm(a) * np.linalg.norm(b))),
        )
    ok = worst <= 1e-12
    _report("criterion-8 projection identity", ok, f"worst_rel={worst:.3e}")


def test_criterion_9_taylor_probe():
    eps = [0.02, 0.01, 0.005, 0.0025]
    slopes, analytic = taylor_probe((1.3, -0.4, 0.7), (0.5, 1.1, -0.2), eps)
    errs = [abs(s - analytic) for s in slopes]
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    expected = -3.0 * np.linalg.norm([1.3, -0.4, 0.7]) ** -5 * (
        1.3 * 0.5 + (-0.4) * 1.1 + 0.7 * (-0.2)
    )
    ok = all(1.8 <= r <= 2.2 for r in ratios) and analytic == pytest.approx(expected)
    _report(
        "criterion-9 taylor probe",
        ok,
        "ratios=" + "/".join(f"{r:.3f}" for r in ratios),
    )


def test_criterion_10_route_independence(monkeypatch):
    import loopfield.linking as linking

    partner = Circle((1, 0, 0), 1.0, (0, 1, 0), "ccw")

    # the combinatorial route must never integrate
    def no_integrals(*args, **kwargs):
        raise AssertionError("combinatorial route called the integrator")

    monkeypatch.setattr(linking, "integrate_2d", no_integrals)
    lk = combinatorial_lk(partner, unit_disk_mesh())
    monkeypatch.undo()

    # the integral route must never intersect panels
    def no_intersections(*args, **kwargs):
        raise AssertionError("integral route called the intersector")

    monkeypatch.setattr(linking, "_panel_crossings", no_intersections)
    value, err = gauss_pair_integral(partner, unit_circle())
    monkeypatch.undo()

    ok = lk == 1 and abs(value - lk) <= 1e-4 + err
    _report(
        "criterion-10 route independence", ok, f"lk={lk} gauss={value:.10f}"
    )


def test_criterion_11_threads_determinism():
    start = time.monotonic()
    outputs = {}
    for threads in ("1", "4"):
        env = os.environ.copy()
        env["THREADS"] = threads
        result = subprocess.run(
            [sys.executable, "-m", "loopfield.cli", "selftest"],
            capture_output=True,
            text=True,
            env=env,
            cwd=REPO,
        )
        assert result.returncode == 0, result.stdout + result.stderr
        outputs[threads] = result.stdout
    elapsed = time.monotonic() - start
    ok = outputs["1"] == outputs["4"] and "selftest PASS" in outputs["1"]
    _report(
        "criterion-11 THREADS determinism",
        ok,
        f"byte_identical={outputs['1'] == outputs['4']} runtime={elapsed:.1f}s",
    )
