"""Acceptance suite: one deterministic pass/fail line per criterion.

Used by the `selftest` CLI subcommand and by the pytest acceptance
module.  Output lines contain only deterministic quantities (no timing),
so repeated runs are byte-identical regardless of the THREADS setting.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from unittest import mock

import numpy as np

from .experiments import (
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
from .fields import cross_projection_identity, taylor_probe
from .geometry import Circle, Disk, PlanarRect
from .linking import LinkScene, combinatorial_lk, gauss_pair_integral

__all__ = ["CriterionResult", "run_selftest", "CRITERIA", "default_probe_points"]


@dataclass(frozen=True)
class CriterionResult:
    ident: str
    title: str
    passed: bool
    detail: str


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def default_probe_points():
    """Shipped curl-probe points: one on the loop axis, two generic."""
    return [(0.0, 0.0, 1.5), (1.3, 0.8, 1.0), (0.4, -0.2, 1.3)]


def _c1_line_limit() -> CriterionResult:
    report = line_limit_study([2, 4, 8, 16, 32])
    last = report.detail[-1]
    tail = [r.a_far_legs for r in report.detail]
    monotone = all(b < a for a, b in zip(tail[:-1], tail[1:]))
    lk_ok = all(r.lk == 1 for r in report.detail)
    ok = report.passed and abs(last.a_total - 1.0) <= 1e-2 and monotone and lk_ok
    return CriterionResult(
        "01",
        "straight-wire limit",
        ok,
        f"|A(32)-1|={_fmt(abs(last.a_total - 1.0))} tail32={_fmt(last.a_far_legs)} "
        f"monotone={monotone} lk={'/'.join(str(r.lk) for r in report.detail)}",
    )


def _c2_catalog():
    rows = ampere_catalog(default_catalog())
    lks = {r.lk for r in rows if r.lk is not None}
    coverage = {-1, 0, 1, 2} <= lks
    ok = len(rows) >= 6 and coverage and all(r.passed for r in rows)
    worst = max((r.abs_diff for r in rows if not math.isnan(r.abs_diff)), default=float("nan"))
    result = CriterionResult(
        "02",
        "circulation law catalog",
        ok,
        f"scenes={len(rows)} lk_values={sorted(lks)} worst|A-Lk|={_fmt(worst)}",
    )
    return result, rows


def _c3_symmetry() -> CriterionResult:
    rows = symmetry_sweep(default_catalog())
    ok = all(r.passed for r in rows)
    worst = max(r.diff for r in rows)
    return CriterionResult(
        "03", "exchange symmetry", ok, f"scenes={len(rows)} worst|A(C,L)-A(L,C)|={_fmt(worst)}"
    )


def _c4_similitude_infinitesimal() -> CriterionResult:
    report = similitude_infinitesimal(
        (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 2.0),
        [0.2, 0.1, 0.05, 0.025], 1e-4,
    )
    return CriterionResult(
        "04",
        "infinitesimal similitude",
        report.passed,
        f"fitted_order={_fmt(report.fitted_order)} "
        f"final_rel={_fmt(report.rows[-1].abs_error)}",
    )


def _c5_similitude_general() -> CriterionResult:
    patch = PlanarRect((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    report = similitude_general(patch, (0.5, 0.5, 2.0), 1e-4, [8, 16, 32, 64])
    return CriterionResult(
        "05",
        "general similitude",
        report.passed,
        f"fitted_order={_fmt(report.fitted_order)} "
        f"final_rel={_fmt(report.rows[-1].abs_error)}",
    )


def _c6_curl() -> CriterionResult:
    report = curl_vanishing(unit_circle(), default_probe_points(), [4e-3, 2e-3, 1e-3])
    finest = [r for r in report.point_rows if r.step == 1e-3]
    worst = max(r.curl_norm for r in finest)
    return CriterionResult(
        "06", "curl-free loop field", report.passed,
        f"worst|curl|@1e-3={_fmt(worst)}",
    )


def _c7_maxwell() -> CriterionResult:
    square = PlanarRect((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    disk = Disk((0.0, 0.0, 0.0), 1.0, (0.0, 0.0, 1.0))
    rep_square = maxwell_probe(
        square, 1.0, [(0.5, 0.5, 1.0), (0.2, 0.8, 0.9)], [2e-3, 1e-3]
    )
    rep_disk = maxwell_probe(
        disk, 1.0, [(0.0, 0.0, 1.5), (0.3, -0.2, 1.2)], [2e-3, 1e-3]
    )
    finest = [
        row for rep in (rep_square, rep_disk)
        for _, row in rep.point_rows if row.step == 1e-3
    ]
    worst = max(max(r.curl_norm, r.div_norm) for r in finest)
    ok = rep_square.passed and rep_disk.passed
    return CriterionResult(
        "07", "div/curl off the sheets", ok, f"worst@1e-3={_fmt(worst)}"
    )


def _c8_identity() -> CriterionResult:
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(10_000):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        r = rng.normal(size=3)
        r /= np.linalg.norm(r)
        lhs, rhs = cross_projection_identity(a, b, r)
        scale = float(np.linalg.norm(a) * np.linalg.norm(b))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    ok = worst <= 1e-12
    return CriterionResult(
        "08", "cross-projection identity", ok, f"worst_rel={_fmt(worst)} (10000 triples)"
    )


def _c9_taylor() -> CriterionResult:
    eps = [0.02, 0.01, 0.005, 0.0025]
    slopes, analytic = taylor_probe((1.3, -0.4, 0.7), (0.5, 1.1, -0.2), eps)
    errs = [abs(s - analytic) for s in slopes]
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    ratio_ok = all(1.8 <= r <= 2.2 for r in ratios)
    slopes_axis, analytic_axis = taylor_probe((1.0, 0.0, 0.0), (1.0, 0.0, 0.0), [1e-4])
    slope_ok = abs(slopes_axis[0] - analytic_axis) <= 1e-3 and analytic_axis == -3.0
    ok = ratio_ok and slope_ok
    return CriterionResult(
        "09", "inverse-cube Taylor probe", ok,
        "ratios=" + "/".join(_fmt(r) for r in ratios),
    )


@contextmanager
def _poisoned(target: str, message: str):
    def boom(*_args, **_kwargs):
        raise AssertionError(message)

    with mock.patch(target, boom):
        yield


def _c10_independence(catalog_rows) -> CriterionResult:
    # counting route must not integrate
    with _poisoned("loopfield.linking.integrate_2d", "combinatorial route invoked quadrature"):
        lk = combinatorial_lk(
            Circle((1.0, 0.0, 0.0), 1.0, (0.0, 1.0, 0.0), "ccw"), unit_disk_mesh()
        )
    count_ok = lk == 1
    # integral route must not intersect panels
    with _poisoned(
        "loopfield.linking._panel_crossings", "integral route invoked panel intersection"
    ):
        value, _ = gauss_pair_integral(
            Circle((1.0, 0.0, 0.0), 1.0, (0.0, 1.0, 0.0), "ccw"), unit_circle()
        )
    integral_ok = abs(value - 1.0) <= 1e-6
    agreement_ok = all(r.passed for r in catalog_rows)
    ok = count_ok and integral_ok and agreement_ok
    return CriterionResult(
        "10", "route independence", ok,
        f"lk={lk} gauss={_fmt(value)} catalog_agreement={agreement_ok}",
    )


def _c11_threads_determinism() -> CriterionResult:
    outputs = []
    scene = LinkScene(
        Circle((1.0, 0.0, 0.0), 1.0, (0.0, 1.0, 0.0), "ccw"),
        unit_circle(),
        unit_disk_mesh(),
        name="hopf",
    )
    previous = os.environ.get("THREADS")
    try:
        for threads in ("1", "4"):
            os.environ["THREADS"] = threads
            value, err = gauss_pair_integral(scene.curve_c, scene.curve_l)
            lk = combinatorial_lk(scene.curve_c, scene.spanning_mesh)
            outputs.append(f"{_fmt(value)},{_fmt(err)},{lk}")
    finally:
        if previous is None:
            os.environ.pop("THREADS", None)
        else:
            os.environ["THREADS"] = previous
    ok = outputs[0] == outputs[1]
    return CriterionResult(
        "11", "THREADS-independent results", ok, f"outputs_equal={ok}"
    )


def run_selftest(stream=None) -> bool:
    """Run every acceptance criterion; print one line each; return all-pass."""
    import sys

    stream = stream or sys.stdout
    results: list[CriterionResult] = []

    results.append(_c1_line_limit())
    c2, catalog_rows = _c2_catalog()
    results.append(c2)
    results.append(_c3_symmetry())
    results.append(_c4_similitude_infinitesimal())
    results.append(_c5_similitude_general())
    results.append(_c6_curl())
    results.append(_c7_maxwell())
    results.append(_c8_identity())
    results.append(_c9_taylor())
    results.append(_c10_independence(catalog_rows))
    results.append(_c11_threads_determinism())

    all_ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        stream.write(f"criterion {res.ident} {status} {res.title}: {res.detail}\n")
        all_ok = all_ok and res.passed
    stream.write(f"selftest {'PASS' if all_ok else 'FAIL'} ({len(results)} criteria)\n")
    return all_ok


CRITERIA = [
    ("01", "straight-wire limit"),
    ("02", "circulation law catalog"),
    ("03", "exchange symmetry"),
    ("04", "infinitesimal similitude"),
    ("05", "general similitude"),
    ("06", "curl-free loop field"),
    ("07", "div/curl off the sheets"),
    ("08", "cross-projection identity"),
    ("09", "inverse-cube Taylor probe"),
    ("10", "route independence"),
    ("11", "THREADS-independent results"),
]
