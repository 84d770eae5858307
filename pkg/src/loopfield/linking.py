"""Two independent routes to the linking number of a pair of loops.

* gauss_linking evaluates the Gauss double line integral with adaptive
  quadrature; with k_B = 1/(4*pi) it equals the circulation of the
  Biot-Savart field of one loop around the other.
* combinatorial_lk counts signed transversal crossings of one loop
  through a panel mesh spanning the other.

The two routes share nothing beyond the geometric primitives: the first
never intersects panels, the second never integrates.  Their agreement
on integer values is the package's core cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CurvesTooClose, DegenerateIntersection, NonTransversal
from .fields import FieldConstants
from .geometry import (
    Circle,
    CompositeCurve,
    Curve,
    PolyLine,
    SurfaceMesh,
    bounding_box_diagonal,
    mesh_boundary,
)
from .quadrature import QuadratureSpec, integrate_2d

__all__ = [
    "LinkScene",
    "curve_min_distance",
    "vector_area",
    "gauss_pair_integral",
    "gauss_linking",
    "combinatorial_lk",
    "sample_closed_polyline",
]


def curve_min_distance(curve_a: Curve, curve_b: Curve, coarse: int = 192) -> float:
    """Closest approach between two curves.

    Coarse double sampling followed by local window zooms; deterministic
    and accurate far beyond guard-checking needs.
    """
    ta = np.linspace(curve_a.t_start, curve_a.t_end, coarse)
    tb = np.linspace(curve_b.t_start, curve_b.t_end, coarse)
    for _ in range(6):
        pa = curve_a.position(ta)
        pb = curve_b.position(tb)
        diff = pa[:, None, :] - pb[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        i, j = np.unravel_index(np.argmin(d2), d2.shape)
        best = math.sqrt(float(d2[i, j]))
        span_a = (ta[-1] - ta[0]) / (len(ta) - 1)
        span_b = (tb[-1] - tb[0]) / (len(tb) - 1)
        ta = np.linspace(
            max(ta[i] - 2 * span_a, curve_a.t_start),
            min(ta[i] + 2 * span_a, curve_a.t_end),
            33,
        )
        tb = np.linspace(
            max(tb[j] - 2 * span_b, curve_b.t_start),
            min(tb[j] + 2 * span_b, curve_b.t_end),
            33,
        )
    return best


def vector_area(curve: Curve, samples: int = 4096) -> np.ndarray:
    """Vector area (1/2) * closed integral of r x dr of a closed curve.

    Exact for polylines and circles; dense chord sampling otherwise.
    """
    if isinstance(curve, PolyLine):
        verts = curve.vertices
        nxt = np.roll(verts, -1, axis=0)
        return 0.5 * np.cross(verts, nxt).sum(axis=0)
    if isinstance(curve, Circle):
        sign = 1.0 if curve.orientation == "ccw" else -1.0
        return sign * math.pi * curve.radius**2 * (curve.axis / np.linalg.norm(curve.axis))
    if isinstance(curve, CompositeCurve):
        ts = np.linspace(curve.t_start, curve.t_end, samples + 1)
        pts = curve.position(ts)
        return 0.5 * np.cross(pts[:-1], pts[1:]).sum(axis=0)
    ts = np.linspace(curve.t_start, curve.t_end, samples + 1)
    pts = curve.position(ts)
    return 0.5 * np.cross(pts[:-1], pts[1:]).sum(axis=0)


@dataclass
class LinkScene:
    """A pair of disjoint closed curves, optionally with a spanning mesh.

    The mesh, when present, must span curve_l: its boundary vertices lie
    on curve_l and its orientation agrees with the curve's traversal.
    """

    curve_c: Curve
    curve_l: Curve
    spanning_mesh: Optional[SurfaceMesh] = None
    name: str = ""

    def validate(self, spec: QuadratureSpec = QuadratureSpec()) -> None:
        for label, curve in (("curve_c", self.curve_c), ("curve_l", self.curve_l)):
            if not curve.closed:
                raise ValueError(f"{label} must be a closed curve")
        scale = bounding_box_diagonal([self.curve_c, self.curve_l])
        guard = spec.resolve_guard(scale)
        dist = curve_min_distance(self.curve_c, self.curve_l)
        if dist <= guard:
            raise CurvesTooClose(
                f"curves approach within {dist:g} (guard {guard:g})"
            )
        if self.spanning_mesh is not None:
            self._validate_mesh(scale)

    def _validate_mesh(self, scale: float) -> None:
        boundary = mesh_boundary(self.spanning_mesh)
        worst = max(
            self.curve_l.distance_to(v) for v in boundary.vertices
        )
        if worst > 1e-6 * scale:
            raise ValueError(
                f"mesh boundary strays {worst:g} from curve_l "
                f"(allowed {1e-6 * scale:g})"
            )
        va = vector_area(boundary)
        vl = vector_area(self.curve_l)
        denom = float(np.linalg.norm(va) * np.linalg.norm(vl))
        if denom == 0.0 or float(va @ vl) / denom < 0.9:
            raise ValueError("mesh boundary orientation disagrees with curve_l")

    def swapped(self) -> "LinkScene":
        return LinkScene(self.curve_l, self.curve_c, None, name=self.name + "_swapped")


def gauss_pair_integral(
    curve_c: Curve,
    curve_l: Curve,
    consts: FieldConstants = FieldConstants(),
    spec: QuadratureSpec = QuadratureSpec(),
) -> tuple[float, float]:
    """Gauss double integral over an arbitrary pair of curve pieces.

    Computes k_B * double integral of

        (dm x (l(s) - m(t))) . dl / |l(s) - m(t)|^3

    over the full parameter rectangle, split at tangent breakpoints of
    both curves so every quadrature cell sees a smooth integrand.  No
    closedness is required, which lets limit studies integrate over
    sub-arcs.  Returns (value, error_estimate).
    """
    pieces_t = curve_c.smooth_pieces()
    pieces_s = curve_l.smooth_pieces()
    n_cells = len(pieces_t) * len(pieces_s)
    cell_spec = QuadratureSpec(
        nodes_per_cell=spec.nodes_per_cell,
        abs_tol=spec.abs_tol / n_cells,
        rel_tol=spec.rel_tol,
        max_depth=spec.max_depth,
        min_distance_guard=spec.min_distance_guard,
    )

    def integrand(tt, ss):
        m = curve_c.position(tt[:, 0])
        dm = curve_c.tangent(tt[:, 0])
        l = curve_l.position(ss[0, :])
        dl = curve_l.tangent(ss[0, :])
        rel = l[None, :, :] - m[:, None, :]
        inv_r3 = np.einsum("ijk,ijk->ij", rel, rel) ** -1.5
        num = np.einsum("ijk,jk->ij", np.cross(dm[:, None, :], rel), dl)
        return num * inv_r3

    total = 0.0
    err_total = 0.0
    for a, b in pieces_t:
        for c, d in pieces_s:
            value, err = integrate_2d(integrand, ((a, b), (c, d)), cell_spec)
            total += float(value)
            err_total += err
    return consts.k_B * total, abs(consts.k_B) * err_total


def gauss_linking(
    scene: LinkScene,
    consts: FieldConstants = FieldConstants(),
    spec: QuadratureSpec = QuadratureSpec(),
) -> tuple[float, float]:
    """Gauss linking integral of a validated scene; (value, error_estimate)."""
    scene.validate(spec)
    return gauss_pair_integral(scene.curve_c, scene.curve_l, consts, spec)


def sample_closed_polyline(curve: Curve, max_edge: float) -> np.ndarray:
    """Vertices of a closed polyline tracing the curve with edges <= max_edge.

    Piece subdivision counts are forced odd so that the midpoint of a
    symmetric leg is never a sample endpoint; crossings then fall in
    segment interiors for the shipped scenes.
    """
    if max_edge <= 0.0:
        raise ValueError("max_edge must be positive")
    verts: list[np.ndarray] = []
    for a, b in curve.smooth_pieces():
        probe = curve.position(np.linspace(a, b, 65))
        arc = float(np.linalg.norm(np.diff(probe, axis=0), axis=1).sum())
        count = max(int(math.ceil(1.02 * arc / max_edge)), 1)
        if count % 2 == 0:
            count += 1
        ts = np.linspace(a, b, count + 1)[:-1]
        verts.extend(curve.position(ts))
    pts = np.array(verts)
    # drop consecutive duplicates (piece joints)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 0.0
    return pts[keep]


def _panel_crossings(p0s, p1s, base, edge_a, edge_b, area, tol):
    """Signed crossings of many segments with one panel (vectorized).

    Mirrors segment_panel_intersection but over arrays; raises on any
    degenerate hit.
    """
    n_mag = float(np.linalg.norm(area))
    n_hat = area / n_mag
    len_a = float(np.linalg.norm(edge_a))
    len_b = float(np.linalg.norm(edge_b))
    h_a = n_mag / len_a  # in-plane distance per unit beta from the alpha edges
    h_b = n_mag / len_b
    edge_tol = tol * max(len_a, len_b)

    s0 = (p0s - base) @ n_hat
    s1 = (p1s - base) @ n_hat
    seg_lens = np.linalg.norm(p1s - p0s, axis=1)
    plane_eps = 1e-13 * max(len_a, len_b, float(seg_lens.max()))

    on_plane = (np.abs(s0) <= plane_eps) | (np.abs(s1) <= plane_eps)
    straddle = (s0 * s1 < 0.0) & ~on_plane
    if not (np.any(straddle) or np.any(on_plane)):
        return 0

    gram = np.array([[edge_a @ edge_a, edge_a @ edge_b], [edge_a @ edge_b, edge_b @ edge_b]])
    gram_inv = np.linalg.inv(gram)

    def params(points):
        rel = points - base
        rhs = np.stack([rel @ edge_a, rel @ edge_b], axis=-1)
        return rhs @ gram_inv.T

    if np.any(on_plane):
        idx = np.nonzero(on_plane)[0]
        for k in idx:
            for s, point in ((s0[k], p0s[k]), (s1[k], p1s[k])):
                if abs(s) <= plane_eps:
                    ab = params((point - s * n_hat)[None, :])[0]
                    if -0.05 <= ab[0] <= 1.05 and -0.05 <= ab[1] <= 1.05:
                        raise DegenerateIntersection(
                            "sample endpoint lies on a panel plane near the panel; "
                            "refine the sampling or perturb the mesh"
                        )

    idx = np.nonzero(straddle)[0]
    if len(idx) == 0:
        return 0
    tau = s0[idx] / (s0[idx] - s1[idx])
    points = p0s[idx] + tau[:, None] * (p1s[idx] - p0s[idx])
    ab = params(points)
    alpha, beta = ab[:, 0], ab[:, 1]
    near = (alpha >= -0.05) & (alpha <= 1.05) & (beta >= -0.05) & (beta <= 1.05)
    if not np.any(near):
        return 0

    d = p1s[idx] - p0s[idx]
    cos_angle = np.abs(d @ n_hat) / seg_lens[idx]
    if np.any(near & (cos_angle < tol)):
        raise NonTransversal("sampled crossing nearly parallel to a panel")

    margin = np.minimum.reduce(
        [alpha * h_a, (1.0 - alpha) * h_a, beta * h_b, (1.0 - beta) * h_b]
    )
    interior = near & (margin > edge_tol)
    band = near & ~interior & (margin >= -edge_tol)
    if np.any(band):
        raise DegenerateIntersection(
            "sampled crossing within edge tolerance of a panel boundary"
        )
    if not np.any(interior):
        return 0
    signs = np.where((d[interior] @ area) > 0.0, 1, -1)
    return int(signs.sum())


def combinatorial_lk(
    curve_c: Curve,
    spanning_mesh: SurfaceMesh,
    transversality_tol: float = 1e-9,
) -> int:
    """Signed count of transversal crossings of curve_c through the mesh.

    The curve is traced by a closed polyline with edge length at most a
    quarter of the smallest panel edge; each geometric crossing is then
    interior to exactly one panel segment pair and contributes the sign
    of (tangent . panel area vector).  Degenerate hits raise instead of
    being silently perturbed.
    """
    if not curve_c.closed:
        raise ValueError("curve_c must be closed")
    max_edge = spanning_mesh.min_edge_length() / 4.0
    pts = sample_closed_polyline(curve_c, max_edge)
    p0s = pts
    p1s = np.roll(pts, -1, axis=0)

    # cull segments that cannot reach the mesh bounding box
    lo, hi = spanning_mesh.bounding_box()
    pad = max_edge
    inside = ~(
        np.any((p0s < lo - pad) & (p1s < lo - pad), axis=0 if False else 1)
        | np.any((p0s > hi + pad) & (p1s > hi + pad), axis=1)
    )
    p0s, p1s = p0s[inside], p1s[inside]
    if len(p0s) == 0:
        return 0

    bases = spanning_mesh.base_points.reshape(-1, 3)
    eas = spanning_mesh.edge_vectors_a.reshape(-1, 3)
    ebs = spanning_mesh.edge_vectors_b.reshape(-1, 3)
    areas = spanning_mesh.area_vectors.reshape(-1, 3)
    total = 0
    for base, ea, eb, area in zip(bases, eas, ebs, areas):
        total += _panel_crossings(p0s, p1s, base, ea, eb, area, transversality_tol)
    return total
