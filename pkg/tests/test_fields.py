import math

import numpy as np
import pytest

from loopfield import (
    Circle,
    DegenerateBase,
    DipoleSheetSpec,
    FieldConstants,
    NearSingular,
    NotUnit,
    Panel,
    PlanarRect,
    PolyLine,
    QuadratureSpec,
    biot_savart,
    coulomb_surface_field,
    cross_projection_identity,
    differential_probe,
    dipole_mesh_field,
    dipole_panel_field,
    dipole_sheet_field_exact,
    mesh_surface,
    taylor_probe,
)

UNIT = FieldConstants(k_E=1.0, k_B=1.0)


def unit_circle():
    return Circle((0, 0, 0), 1.0, (0, 0, 1), "ccw")


def unit_square_loop():
    return PolyLine([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], closed=True)


# ---------------------------------------------------------------------------
# Biot-Savart
# ---------------------------------------------------------------------------


def test_circle_center_value():
    # closed form at the center of a circular loop: 2*pi*k_B/R
    b = biot_savart(unit_circle(), (0, 0, 0))
    assert np.allclose(b, [0, 0, 0.5], atol=1e-10)


def test_orientation_reversal_negates_field():
    x = (0.3, -0.2, 0.9)
    b = biot_savart(unit_circle(), x)
    b_rev = biot_savart(unit_circle().reversed(), x)
    assert np.allclose(b_rev, -b, atol=1e-10)


def test_on_axis_closed_form():
    # 2*pi*R^2 / (R^2 + z^2)^(3/2) along the axis, with k_B = 1
    for z in (0.5, 1.5, 4.0):
        b = biot_savart(unit_circle(), (0, 0, z), UNIT)
        expected = 2.0 * math.pi / (1.0 + z * z) ** 1.5
        assert abs(b[2] - expected) <= 1e-9 * expected
        assert np.hypot(b[0], b[1]) <= 1e-12


def test_square_loop_center_closed_form():
    # four finite straight wires: B = 8*sqrt(2)*k_B / side
    b = biot_savart(unit_square_loop(), (0.5, 0.5, 0.0), UNIT)
    assert abs(b[2] - 8.0 * math.sqrt(2.0)) <= 1e-9
    assert np.hypot(b[0], b[1]) <= 1e-12


def test_near_singular_guard():
    with pytest.raises(NearSingular):
        biot_savart(unit_circle(), (1.0, 0.0, 0.0))
    with pytest.raises(NearSingular):
        biot_savart(unit_circle(), (1.0 + 1e-9, 0.0, 0.0))


def test_prefactor_linearity():
    x = (0.2, 0.1, 1.2)
    b1 = biot_savart(unit_circle(), x, FieldConstants(k_B=1.0))
    b2 = biot_savart(unit_circle(), x, FieldConstants(k_B=-2.5))
    assert np.allclose(b2, -2.5 * b1, rtol=1e-12)


def test_resampling_invariance():
    # the same square traversed with extra collinear vertices
    square = unit_square_loop()
    dense = []
    verts = square.vertices
    for i in range(4):
        a, b = verts[i], verts[(i + 1) % 4]
        for k in range(8):
            dense.append(a + (b - a) * (k / 8.0))
    resampled = PolyLine(dense, closed=True)
    x = (0.4, 0.8, 0.7)
    assert np.allclose(
        biot_savart(square, x), biot_savart(resampled, x), atol=1e-9
    )


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(7)
    rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(rot) < 0:
        rot[:, 0] = -rot[:, 0]
    shift = rng.normal(size=3)
    loop = PolyLine([(0, 0, 0), (1, 0.1, 0), (0.9, 1, 0.2), (-0.1, 0.8, 0.1)], closed=True)
    moved = PolyLine([rot @ v + shift for v in loop.vertices], closed=True)
    x = np.array([0.4, 0.3, 1.5])
    b = biot_savart(loop, x)
    b_moved = biot_savart(moved, rot @ x + shift)
    assert np.allclose(b_moved, rot @ b, atol=1e-9)


# ---------------------------------------------------------------------------
# Coulomb sheets
# ---------------------------------------------------------------------------


def solid_angle_of_square(half_side, height):
    """Solid angle of a square of half-side a seen from height d over its center."""
    a, d = half_side, height
    return 4.0 * math.atan(a * a / (d * math.sqrt(d * d + 2 * a * a)))


def test_sheet_field_matches_solid_angle():
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    e = coulomb_surface_field(patch, 1.0, (0.5, 0.5, 1.0), UNIT)
    assert abs(e[2] - solid_angle_of_square(0.5, 1.0)) <= 1e-9
    assert np.hypot(e[0], e[1]) <= 1e-10


def test_far_field_is_point_charge():
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    e = coulomb_surface_field(patch, 1.0, (0.5, 0.5, 100.0), UNIT)
    assert abs(e[2] - 1e-4) <= 1e-4 * 1e-3
    assert np.hypot(e[0], e[1]) <= 1e-12


def test_mirror_symmetry_above_center():
    patch = PlanarRect((0, 0, 0), (2, 0, 0), (0, 2, 0))
    e = coulomb_surface_field(patch, -0.7, (1.0, 1.0, 0.5), UNIT)
    assert abs(e[0]) <= 1e-10 and abs(e[1]) <= 1e-10
    assert e[2] < 0  # negative charge pulls the field down


def test_growing_sheet_approaches_infinite_plane():
    # E_z -> 2*pi*sigma*k_E from below as the sheet grows
    values = []
    for side in (1.0, 4.0, 16.0):
        patch = PlanarRect((-side / 2, -side / 2, 0), (side, 0, 0), (0, side, 0))
        e = coulomb_surface_field(patch, 1.0, (0, 0, 0.01), UNIT)
        oracle = solid_angle_of_square(side / 2, 0.01)
        assert abs(e[2] - oracle) <= 1e-7 * oracle
        values.append(e[2])
    assert values[0] < values[1] < values[2] < 2 * math.pi
    assert 2 * math.pi - values[-1] < 0.01


def test_sheet_guard():
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    with pytest.raises(NearSingular):
        coulomb_surface_field(patch, 1.0, (0.5, 0.5, 0.0), UNIT)


# ---------------------------------------------------------------------------
# Dipole layers
# ---------------------------------------------------------------------------


def test_panel_field_above_base():
    panel = Panel((0, 0, 0), (1, 0, 0), (0, 1, 0))
    e = dipole_panel_field(panel, DipoleSheetSpec(1.0, 1.0), (0, 0, 2), UNIT)
    assert np.allclose(e, [0, 0, 0.25], atol=1e-15)


def test_panel_field_in_plane_direction():
    panel = Panel((0, 0, 0), (1, 0, 0), (0, 1, 0))
    e = dipole_panel_field(panel, DipoleSheetSpec(1.0, 1.0), (1, 0, 0), UNIT)
    assert np.allclose(e, [0, 0, -1.0], atol=1e-15)


def test_panel_field_zero_density():
    panel = Panel((0, 0, 0), (1, 0, 0), (0, 1, 0))
    e = dipole_panel_field(panel, DipoleSheetSpec(0.0, 1.0), (0, 0, 2), UNIT)
    assert np.allclose(e, 0.0)


def test_panel_field_linear_in_sigma_h_and_area():
    x = (0.3, 0.4, 1.7)
    base = Panel((0, 0, 0), (0.2, 0, 0), (0, 0.2, 0))
    e1 = dipole_panel_field(base, DipoleSheetSpec(1.0, 1e-3), x, UNIT)
    e2 = dipole_panel_field(base, DipoleSheetSpec(-2.0, 1e-3), x, UNIT)
    e3 = dipole_panel_field(base, DipoleSheetSpec(1.0, 3e-3), x, UNIT)
    doubled = Panel((0, 0, 0), (0.4, 0, 0), (0, 0.2, 0))
    e4 = dipole_panel_field(doubled, DipoleSheetSpec(1.0, 1e-3), x, UNIT)
    assert np.allclose(e2, -2.0 * e1, rtol=1e-14)
    assert np.allclose(e3, 3.0 * e1, rtol=1e-14)
    assert np.allclose(e4, 2.0 * e1, rtol=1e-14)


def test_panel_field_rotation_equivariance():
    rng = np.random.default_rng(11)
    rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(rot) < 0:
        rot[:, 0] = -rot[:, 0]
    panel = Panel((0.1, 0.2, 0.0), (0.3, 0, 0), (0, 0.25, 0.05))
    moved = Panel(rot @ panel.base, rot @ panel.edge_a, rot @ panel.edge_b)
    dp = DipoleSheetSpec(1.3, 2e-3)
    x = np.array([0.5, -0.4, 1.1])
    assert np.allclose(
        dipole_panel_field(moved, dp, rot @ x, UNIT),
        rot @ dipole_panel_field(panel, dp, x, UNIT),
        atol=1e-14,
    )


def test_dipole_sheet_zero_cases():
    patch = PlanarRect((0, 0, 0), (0.01, 0, 0), (0, 0.01, 0))
    assert np.allclose(
        dipole_sheet_field_exact(patch, DipoleSheetSpec(1.0, 0.0), (0, 0, 2), UNIT), 0.0
    )
    assert np.allclose(
        dipole_sheet_field_exact(patch, DipoleSheetSpec(0.0, 1e-3), (0, 0, 2), UNIT), 0.0
    )


def test_dipole_sheet_matches_center_anchored_closed_form():
    # two-sheet quadrature vs the closed form anchored at the patch center
    side, h = 0.01, 1e-3
    patch = PlanarRect((0, 0, 0), (side, 0, 0), (0, side, 0))
    x = (0, 0, 2)
    exact = dipole_sheet_field_exact(patch, DipoleSheetSpec(1.0, h), x, UNIT)
    centered = Panel((side / 2, side / 2, 0), (side, 0, 0), (0, side, 0))
    closed_form = dipole_panel_field(centered, DipoleSheetSpec(1.0, h), x, UNIT)
    rel = np.linalg.norm(exact - closed_form) / np.linalg.norm(closed_form)
    assert rel <= 1e-3
    # the base-corner anchor differs by O(panel size / distance)
    corner = Panel((0, 0, 0), (side, 0, 0), (0, side, 0))
    corner_form = dipole_panel_field(corner, DipoleSheetSpec(1.0, h), x, UNIT)
    rel_corner = np.linalg.norm(exact - corner_form) / np.linalg.norm(corner_form)
    assert rel_corner <= 1.5e-2


def test_dipole_sheet_converges_to_panel_form():
    # joint shrink of panel size and separation: first-order agreement
    x = (0, 0, 1.0)
    rels = []
    for eps in (0.08, 0.04, 0.02):
        patch = PlanarRect((0, 0, 0), (eps, 0, 0), (0, eps, 0))
        dp = DipoleSheetSpec(1.0, eps * 1e-2)
        exact = dipole_sheet_field_exact(patch, dp, x, UNIT)
        approx = dipole_panel_field(Panel((0, 0, 0), (eps, 0, 0), (0, eps, 0)), dp, x, UNIT)
        rels.append(np.linalg.norm(exact - approx) / np.linalg.norm(approx))
    order = np.polyfit(np.log([0.08, 0.04, 0.02]), np.log(rels), 1)[0]
    assert order >= 0.9
    assert rels[0] > rels[1] > rels[2]


def test_mesh_field_far_additivity():
    # total moment and centroid agree, so refinements match to ~(size/dist)^2
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    dp = DipoleSheetSpec(1.0, 1e-4)
    x = (0.5, 0.5, 1000.0)
    one = dipole_mesh_field(mesh_surface(patch, 1, 1), dp, x, UNIT)
    four = dipole_mesh_field(mesh_surface(patch, 2, 2), dp, x, UNIT)
    assert np.linalg.norm(four - one) <= 1e-6 * np.linalg.norm(one)


def test_mesh_field_second_order_cauchy():
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    dp = DipoleSheetSpec(1.0, 1e-4)
    x = (0.5, 0.5, 2.0)
    values = {m: dipole_mesh_field(mesh_surface(patch, m, m), dp, x, UNIT) for m in (8, 16, 32)}
    d1 = np.linalg.norm(values[16] - values[8])
    d2 = np.linalg.norm(values[32] - values[16])
    assert d1 / d2 >= 3.9


def test_mesh_field_single_cell_is_center_anchored():
    patch = PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0))
    dp = DipoleSheetSpec(1.0, 1e-4)
    x = (0.3, 0.9, 1.4)
    mesh = dipole_mesh_field(mesh_surface(patch, 1, 1), dp, x, UNIT)
    centered = Panel((0.5, 0.5, 0.0), (1, 0, 0), (0, 1, 0))
    assert np.allclose(mesh, dipole_panel_field(centered, dp, x, UNIT), rtol=1e-14)


# ---------------------------------------------------------------------------
# Differential probe
# ---------------------------------------------------------------------------


def test_probe_linear_rotation_field():
    curl, div = differential_probe(lambda p: np.array([-p[1], p[0], 0.0]), (0.3, 0.7, -0.2), 1e-3)
    assert np.allclose(curl, [0, 0, 2.0], atol=1e-9)
    assert abs(div) <= 1e-9


def test_probe_radial_field():
    curl, div = differential_probe(lambda p: np.asarray(p, dtype=float), (1.0, -2.0, 0.5), 1e-3)
    assert abs(div - 3.0) <= 1e-9
    assert np.linalg.norm(curl) <= 1e-9


def test_probe_loop_field_is_curl_free():
    spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11)
    curl, _ = differential_probe(
        lambda p: biot_savart(unit_circle(), p, FieldConstants(), spec), (0, 0, 1.5), 1e-3
    )
    assert np.linalg.norm(curl) <= 1e-5


# ---------------------------------------------------------------------------
# Algebraic identity and Taylor probe
# ---------------------------------------------------------------------------


def test_identity_standard_basis_case():
    r = np.array([0.48, 0.6, 0.64])  # unit by construction
    lhs, rhs = cross_projection_identity((1, 0, 0), (0, 1, 0), r)
    expected = np.array([r[2] * r[0], r[2] * r[1], r[2] ** 2])
    assert np.allclose(lhs, expected, atol=1e-15)
    assert np.allclose(rhs, expected, atol=1e-15)


def test_identity_degenerate_equal_vectors():
    lhs, rhs = cross_projection_identity((1, 2, 3), (1, 2, 3), (1, 0, 0))
    assert np.allclose(lhs, 0.0) and np.allclose(rhs, 0.0)


def test_identity_random_triples():
    rng = np.random.default_rng(123)
    for _ in range(2000):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        r = rng.normal(size=3)
        r /= np.linalg.norm(r)
        lhs, rhs = cross_projection_identity(a, b, r)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)


def test_identity_rejects_non_unit():
    with pytest.raises(NotUnit):
        cross_projection_identity((1, 0, 0), (0, 1, 0), (1, 1, 0))


def test_taylor_probe_aligned():
    slopes, analytic = taylor_probe((1, 0, 0), (1, 0, 0), [1e-4])
    assert analytic == -3.0
    assert abs(slopes[0] - analytic) <= 1e-3


def test_taylor_probe_perpendicular():
    slopes, analytic = taylor_probe((1, 0, 0), (0, 1, 0), [0.02, 0.01, 0.005])
    assert analytic == 0.0
    mags = [abs(s) for s in slopes]
    assert mags[0] > mags[1] > mags[2]
    assert mags[1] / mags[2] == pytest.approx(2.0, abs=0.1)


def test_taylor_probe_halving_ratio():
    eps = [0.02, 0.01, 0.005, 0.0025]
    slopes, analytic = taylor_probe((1.3, -0.4, 0.7), (0.5, 1.1, -0.2), eps)
    errs = [abs(s - analytic) for s in slopes]
    for coarse, fine in zip(errs[:-1], errs[1:]):
        assert 1.8 <= coarse / fine <= 2.2


def test_taylor_probe_preconditions():
    with pytest.raises(DegenerateBase):
        taylor_probe((0, 0, 0), (1, 0, 0), [1e-3])
    with pytest.raises(ValueError):
        taylor_probe((1, 0, 0), (1, 0, 0), [0.6])
    with pytest.raises(ValueError):
        taylor_probe((1, 0, 0), (1, 0, 0), [0.0])
