import math

import numpy as np
import pytest

from loopfield import (
    Circle,
    CurvesTooClose,
    DegenerateIntersection,
    Disk,
    FieldConstants,
    LinkScene,
    PlanarRect,
    PolyLine,
    QuadratureSpec,
    RectLoop,
    SurfacePatch,
    combinatorial_lk,
    curve_min_distance,
    gauss_linking,
    gauss_pair_integral,
    mesh_surface,
    vector_area,
)
from loopfield.experiments import unit_circle, unit_disk_mesh, axis_leg_closed_form


def hopf_partner():
    """Circle through the center of the unit circle's disk, linking it once."""
    return Circle((1, 0, 0), 1.0, (0, 1, 0), "ccw")


# ---------------------------------------------------------------------------
# Gauss double integral
# ---------------------------------------------------------------------------


def test_axis_leg_matches_closed_form():
    # the axis-leg integrand against the unit circle reduces to
    # (1+t^2)^(-3/2); its antiderivative t/sqrt(1+t^2) gives n/sqrt(1+n^2)
    circle = unit_circle()
    for n in (2, 5, 16):
        leg = PolyLine([(0, 0, -n), (0, 0, n)])
        value, err = gauss_pair_integral(leg, circle)
        assert abs(value - axis_leg_closed_form(n)) <= max(1e-10, 10 * err)


def test_hopf_link_is_one():
    value, err = gauss_linking(LinkScene(hopf_partner(), unit_circle()))
    assert abs(value - 1.0) <= 1e-6
    assert err <= 1e-6


def test_far_circles_unlink():
    far = Circle((0, 0, 10.0), 1.0, (0, 0, 1), "ccw")
    value, err = gauss_linking(LinkScene(far, unit_circle()))
    assert abs(value) <= 1e-6


def test_rect_loop_scenes_give_one():
    for n in (2, 32):
        value, _ = gauss_linking(LinkScene(RectLoop(n), unit_circle()))
        assert abs(value - 1.0) <= 1e-2
        assert abs(value - 1.0) <= 1e-6  # in practice far tighter than spec asks


def test_exchange_symmetry():
    scene = LinkScene(hopf_partner(), unit_circle())
    a_fwd, e_fwd = gauss_linking(scene)
    a_swp, e_swp = gauss_linking(scene.swapped())
    assert abs(a_fwd - a_swp) <= 2 * (e_fwd + e_swp) + 1e-12


def test_antisymmetry_under_reversal():
    scene = LinkScene(hopf_partner(), unit_circle())
    value, _ = gauss_linking(scene)
    rev_c, _ = gauss_linking(LinkScene(hopf_partner().reversed(), unit_circle()))
    rev_l, _ = gauss_linking(LinkScene(hopf_partner(), unit_circle().reversed()))
    assert rev_c == pytest.approx(-value, abs=1e-9)
    assert rev_l == pytest.approx(-value, abs=1e-9)


def test_deformation_invariance():
    # replacing the circle by a dilated, shifted coplanar circle that
    # cobounds an annulus missing the partner leaves the integral fixed
    partner = hopf_partner()
    small, e1 = gauss_linking(LinkScene(partner, unit_circle()))
    big, e2 = gauss_linking(
        LinkScene(partner, Circle((0.2, 0, 0), 1.4, (0, 0, 1), "ccw"))
    )
    assert abs(small - big) <= 2 * (e1 + e2) + 1e-12


def test_too_close_rejected():
    touching = Circle((1, 0, 0), 1.0, (0, 0, 1), "ccw")  # shares point with ring
    with pytest.raises(CurvesTooClose):
        gauss_linking(LinkScene(touching, unit_circle()))


def test_open_curve_rejected():
    arc = PolyLine([(0, 0, -1), (0, 0, 1)])
    with pytest.raises(ValueError):
        gauss_linking(LinkScene(arc, unit_circle()))


def test_curve_min_distance():
    a = Circle((0, 0, 0), 1.0, (0, 0, 1))
    b = Circle((0, 0, 3.0), 1.0, (0, 0, 1))
    assert curve_min_distance(a, b) == pytest.approx(3.0, abs=1e-6)
    # constant-distance pair
    assert curve_min_distance(hopf_partner(), unit_circle()) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# Combinatorial count
# ---------------------------------------------------------------------------


def test_rect_loops_cross_once():
    disk = unit_disk_mesh()
    for n in (2, 4, 8, 16, 32):
        assert combinatorial_lk(RectLoop(n), disk) == 1


def test_far_circle_crosses_zero_times():
    far = Circle((0, 0, 10.0), 1.0, (0, 0, 1), "ccw")
    assert combinatorial_lk(far, unit_disk_mesh()) == 0


def test_double_wind_counts_two():
    # passes up through the disk at x=+0.3 and x=-0.3, returning outside:
    # two upward transversal crossings, each +1
    loop = PolyLine(
        [
            (0.3, 0, -1), (0.3, 0, 1), (2.5, 0, 1), (2.5, 0, -1),
            (-0.3, 0, -1), (-0.3, 0, 1), (-2.5, 0, 1), (-2.5, 0, -1),
        ],
        closed=True,
    )
    assert combinatorial_lk(loop, unit_disk_mesh()) == 2


def test_zero_wind_cancels():
    # up at x=+0.3, down at x=-0.3: +1 - 1 = 0
    loop = PolyLine(
        [(0.3, 0, -1), (0.3, 0, 1), (-0.3, 0, 1), (-0.3, 0, -1)], closed=True
    )
    assert combinatorial_lk(loop, unit_disk_mesh()) == 0


def test_lk_sign_flips():
    disk = unit_disk_mesh()
    assert combinatorial_lk(hopf_partner(), disk) == 1
    assert combinatorial_lk(hopf_partner().reversed(), disk) == -1
    flipped_disk = mesh_surface(Disk((0, 0, 0), 1.0, (0, 0, -1)), 15, 15)
    assert combinatorial_lk(hopf_partner(), flipped_disk) == -1


class DomeCap(SurfacePatch):
    """Spherical-cap-like lift of the unit disk; boundary stays the circle."""

    def __init__(self, height: float):
        self._disk = Disk((0, 0, 0), 1.0, (0, 0, 1))
        self._height = height

    def point(self, u, v):
        p = self._disk.point(u, v)
        out = np.array(p, dtype=float)
        rho2 = out[..., 0] ** 2 + out[..., 1] ** 2
        out[..., 2] = self._height * (1.0 - rho2)
        return out


def test_lk_is_surface_independent():
    dome = mesh_surface(DomeCap(0.35), 15, 15)
    disk = unit_disk_mesh()
    for curve in (
        hopf_partner(),
        RectLoop(4),
        PolyLine(
            [
                (0.3, 0, -1), (0.3, 0, 1), (2.5, 0, 1), (2.5, 0, -1),
                (-0.3, 0, -1), (-0.3, 0, 1), (-2.5, 0, 1), (-2.5, 0, -1),
            ],
            closed=True,
        ),
    ):
        assert combinatorial_lk(curve, disk) == combinatorial_lk(curve, dome)


def test_degenerate_crossing_raises():
    # vertical line through a panel corner node of the spanning square
    square = mesh_surface(PlanarRect((0, 0, 0), (1, 0, 0), (0, 1, 0)), 2, 2)
    through_node = PolyLine(
        [(0.5, 0.5, -1), (0.5, 0.5, 1), (3, 0.5, 1), (3, 0.5, -1)], closed=True
    )
    with pytest.raises(DegenerateIntersection):
        combinatorial_lk(through_node, square)


def test_scene_mesh_boundary_validation():
    partner = hopf_partner()
    wrong_disk = mesh_surface(Disk((0, 0, 0), 0.8, (0, 0, 1)), 15, 15)
    with pytest.raises(ValueError):
        LinkScene(partner, unit_circle(), wrong_disk).validate()
    flipped = mesh_surface(Disk((0, 0, 0), 1.0, (0, 0, -1)), 15, 15)
    with pytest.raises(ValueError):
        LinkScene(partner, unit_circle(), flipped).validate()
    # the matching mesh passes
    LinkScene(partner, unit_circle(), unit_disk_mesh()).validate()


def test_vector_area():
    assert np.allclose(vector_area(unit_circle()), [0, 0, math.pi], atol=1e-12)
    square = PolyLine([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], closed=True)
    assert np.allclose(vector_area(square), [0, 0, 1.0], atol=1e-15)
    assert np.allclose(vector_area(unit_circle().reversed()), [0, 0, -math.pi], atol=1e-12)


def test_integer_proximity_with_tight_quadrature():
    spec = QuadratureSpec(abs_tol=1e-11, rel_tol=1e-9)
    scene = LinkScene(hopf_partner(), unit_circle(), unit_disk_mesh())
    value, err = gauss_linking(scene, FieldConstants(), spec)
    lk = combinatorial_lk(scene.curve_c, scene.spanning_mesh)
    assert abs(value - lk) <= 1e-4 + err
