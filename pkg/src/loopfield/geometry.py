"""Curves, surface patches, panel meshes, and transversal intersections.

Conventions used throughout the package:

* Points and vectors are numpy arrays of shape (3,), dtype float64, with
  finite components.  Curve/patch evaluators broadcast over 1-D (and for
  patches, n-D) parameter arrays and then return arrays with a trailing
  axis of length 3.
* Curves are parametrized on [t_start, t_end].  Polylines use arc-length
  parametrization, so their tangent is the unit segment direction.
* A surface patch maps the unit square; its positive side is the
  direction of du x dv and the induced boundary runs counterclockwise as
  seen from that side.
* All objects are immutable after construction and safe to share across
  threads.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateIntersection,
    DegeneratePatch,
    NonTransversal,
    ParamOutOfRange,
)

__all__ = [
    "as_vec3",
    "bounding_box_diagonal",
    "Curve",
    "Circle",
    "PolyLine",
    "RectLoop",
    "CompositeCurve",
    "eval_curve",
    "SurfacePatch",
    "PlanarRect",
    "Disk",
    "ShiftedPatch",
    "Panel",
    "SurfaceMesh",
    "mesh_surface",
    "mesh_boundary",
    "segment_panel_intersection",
]

_TWO_PI = 2.0 * math.pi


def as_vec3(value, name: str = "vector") -> np.ndarray:
    """Coerce to a finite (3,) float array; reject NaN/Inf and bad shapes."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have exactly 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite components, got {arr}")
    return arr.copy()


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _unit(v: np.ndarray, name: str = "vector") -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


def _orthonormal_frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-handed frame (u, v, a) with a = normalized axis and v = a x u.

    The in-plane seed is chosen deterministically so that identical axes
    always yield identical frames.
    """
    a = _unit(axis, "axis")
    seed = np.array([1.0, 0.0, 0.0]) if abs(a[0]) <= 0.9 else np.array([0.0, 1.0, 0.0])
    u = _unit(seed - a * float(seed @ a))
    v = np.cross(a, u)
    return u, v, a


def _merge_boxes(boxes: Iterable[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    los, his = zip(*boxes)
    return np.min(los, axis=0), np.max(his, axis=0)


def bounding_box_diagonal(objects: Sequence) -> float:
    """Diagonal of the joint bounding box; the scene length scale.

    Accepts curves, patches, meshes, and bare points.
    """
    boxes = []
    for obj in objects:
        if hasattr(obj, "bounding_box"):
            boxes.append(obj.bounding_box())
        else:
            p = as_vec3(obj, "point")
            boxes.append((p, p))
    lo, hi = _merge_boxes(boxes)
    return float(np.linalg.norm(hi - lo))


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


class Curve:
    """Oriented parametric curve on [t_start, t_end]."""

    t_start: float
    t_end: float
    closed: bool

    @property
    def param_interval(self) -> tuple[float, float]:
        return (self.t_start, self.t_end)

    def position(self, t):
        raise NotImplementedError

    def tangent(self, t):
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Interior parameters where the tangent may jump (none by default)."""
        return np.empty(0)

    def smooth_pieces(self) -> list[tuple[float, float]]:
        """Parameter sub-intervals on which the curve is smooth."""
        cuts = [self.t_start, *np.asarray(self.breakpoints(), float), self.t_end]
        return [(float(a), float(b)) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]

    def reversed(self) -> "Curve":
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def distance_to(self, point) -> float:
        raise NotImplementedError

    def _check_param(self, t) -> None:
        span = self.t_end - self.t_start
        slack = 1e-12 * max(span, 1.0)
        arr = np.asarray(t, dtype=float)
        if np.any(arr < self.t_start - slack) or np.any(arr > self.t_end + slack):
            raise ParamOutOfRange(
                f"parameter {t} outside [{self.t_start}, {self.t_end}]"
            )


def eval_curve(curve: Curve, t) -> tuple[np.ndarray, np.ndarray]:
    """Return (position, tangent) of the curve at parameter t.

    At a polyline vertex the tangent of the outgoing segment is returned;
    at the final parameter of a closed polyline, the last segment's.
    """
    curve._check_param(t)
    return curve.position(t), curve.tangent(t)


class Circle(Curve):
    """Circle of given center/radius in the plane normal to `axis`.

    Parametrized on [0, 2*pi].  With orientation "ccw" the traversal is
    counterclockwise as seen from the +axis side (right-hand rule); "cw"
    is the reverse traversal.
    """

    def __init__(self, center, radius: float, axis, orientation: str = "ccw"):
        if radius <= 0.0 or not math.isfinite(radius):
            raise ValueError(f"radius must be positive and finite, got {radius}")
        if orientation not in ("ccw", "cw"):
            raise ValueError(f"orientation must be 'ccw' or 'cw', got {orientation!r}")
        self.center = _frozen(as_vec3(center, "center"))
        self.radius = float(radius)
        self.axis = _frozen(as_vec3(axis, "axis"))
        self.orientation = orientation
        u, v, a = _orthonormal_frame(self.axis)
        self._u = _frozen(u)
        self._v = _frozen(v if orientation == "ccw" else -v)
        self._a = _frozen(a)
        self.t_start = 0.0
        self.t_end = _TWO_PI
        self.closed = True

    def position(self, t):
        t = np.asarray(t, dtype=float)
        ct, st = np.cos(t), np.sin(t)
        return self.center + self.radius * (
            np.multiply.outer(ct, self._u) + np.multiply.outer(st, self._v)
        )

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        ct, st = np.cos(t), np.sin(t)
        return self.radius * (
            np.multiply.outer(-st, self._u) + np.multiply.outer(ct, self._v)
        )

    def reversed(self) -> "Circle":
        flipped = "cw" if self.orientation == "ccw" else "ccw"
        return Circle(self.center, self.radius, self.axis, flipped)

    def bounding_box(self):
        # per-axis half-extent of a 3-D circle: R * sqrt(1 - a_i^2)
        ext = self.radius * np.sqrt(np.clip(1.0 - self._a**2, 0.0, 1.0))
        return self.center - ext, self.center + ext

    def distance_to(self, point) -> float:
        rel = as_vec3(point, "point") - self.center
        z = float(rel @ self._a)
        rho = float(np.linalg.norm(rel - z * self._a))
        return math.hypot(rho - self.radius, z)


class PolyLine(Curve):
    """Piecewise-straight curve, arc-length parametrized.

    `vertices` are traversed in order; with closed=True the final segment
    returns to the first vertex (a duplicated last vertex is dropped).
    The tangent is the unit direction of the current segment; at an
    interior vertex parameter the outgoing segment wins.
    """

    def __init__(self, vertices, closed: bool = False):
        verts = np.array([as_vec3(v, "vertex") for v in vertices], dtype=float)
        if closed and len(verts) > 1 and np.array_equal(verts[0], verts[-1]):
            verts = verts[:-1]
        if len(verts) < 2:
            raise ValueError("polyline needs at least 2 distinct vertices")
        starts = verts
        ends = np.roll(verts, -1, axis=0) if closed else verts[1:]
        if not closed:
            starts = verts[:-1]
        chords = ends - starts
        lengths = np.linalg.norm(chords, axis=1)
        if np.any(lengths == 0.0):
            raise ValueError("polyline has a zero-length segment")
        self.vertices = _frozen(verts)
        self.closed = bool(closed)
        self._starts = _frozen(starts)
        self._dirs = _frozen(chords / lengths[:, None])
        self._lengths = _frozen(lengths)
        cum = np.concatenate(([0.0], np.cumsum(lengths)))
        self._cum = _frozen(cum)
        self.t_start = 0.0
        self.t_end = float(cum[-1])

    @property
    def segment_count(self) -> int:
        return len(self._lengths)

    def _segment_index(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._cum, t, side="right") - 1
        return np.clip(idx, 0, self.segment_count - 1)

    def position(self, t):
        arr = np.asarray(t, dtype=float)
        idx = self._segment_index(np.atleast_1d(arr))
        local = np.atleast_1d(arr) - self._cum[idx]
        pos = self._starts[idx] + local[:, None] * self._dirs[idx]
        return pos[0] if arr.ndim == 0 else pos

    def tangent(self, t):
        arr = np.asarray(t, dtype=float)
        idx = self._segment_index(np.atleast_1d(arr))
        tan = self._dirs[idx]
        return tan[0] if arr.ndim == 0 else tan.copy()

    def breakpoints(self) -> np.ndarray:
        return self._cum[1:-1].copy()

    def reversed(self) -> "PolyLine":
        if self.closed:
            # same cycle, opposite traversal, same start vertex
            verts = np.concatenate((self.vertices[:1], self.vertices[:0:-1]))
        else:
            verts = self.vertices[::-1]
        return PolyLine(verts, closed=self.closed)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def distance_to(self, point) -> float:
        p = as_vec3(point, "point")
        rel = p - self._starts
        proj = np.einsum("ij,ij->i", rel, self._dirs)
        proj = np.clip(proj, 0.0, self._lengths)
        closest = self._starts + proj[:, None] * self._dirs
        return float(np.linalg.norm(p - closest, axis=1).min())


class RectLoop(PolyLine):
    """Closed rectangle with one leg on the z-axis, extent n.

    Traverses (0,0,-n) -> (0,0,n) -> (n,0,n) -> (n,0,-n) -> close.  Used
    by the straight-wire limit study: the first leg approximates an
    infinite upward wire through the unit circle as n grows.
    """

    def __init__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        self.n = int(n)
        verts = [
            (0.0, 0.0, -float(n)),
            (0.0, 0.0, float(n)),
            (float(n), 0.0, float(n)),
            (float(n), 0.0, -float(n)),
        ]
        super().__init__(verts, closed=True)

    def reversed(self) -> PolyLine:
        return PolyLine(self.vertices, closed=True).reversed()


class CompositeCurve(Curve):
    """Concatenation of curves traversed in order, parameter ranges stacked."""

    def __init__(self, parts: Sequence[Curve]):
        if not parts:
            raise ValueError("composite curve needs at least one part")
        self.parts = tuple(parts)
        spans = [p.t_end - p.t_start for p in self.parts]
        bounds = np.concatenate(([0.0], np.cumsum(spans)))
        self._bounds = _frozen(bounds)
        self.t_start = 0.0
        self.t_end = float(bounds[-1])
        start = self.parts[0].position(self.parts[0].t_start)
        end = self.parts[-1].position(self.parts[-1].t_end)
        scale = max(bounding_box_diagonal(self.parts), 1.0)
        self.closed = bool(np.linalg.norm(end - start) <= 1e-12 * scale)

    def _map_params(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(self._bounds, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.parts) - 1)
        return idx, t - self._bounds[idx]

    def _eval(self, t, attr: str):
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr)
        idx, local = self._map_params(flat)
        out = np.empty((len(flat), 3))
        for k, part in enumerate(self.parts):
            mask = idx == k
            if np.any(mask):
                out[mask] = getattr(part, attr)(part.t_start + local[mask])
        return out[0] if arr.ndim == 0 else out

    def position(self, t):
        return self._eval(t, "position")

    def tangent(self, t):
        return self._eval(t, "tangent")

    def breakpoints(self) -> np.ndarray:
        cuts = [self._bounds[1:-1]]
        for k, part in enumerate(self.parts):
            inner = np.asarray(part.breakpoints(), float)
            if inner.size:
                cuts.append(inner - part.t_start + self._bounds[k])
        return np.sort(np.concatenate(cuts)) if cuts else np.empty(0)

    def reversed(self) -> "CompositeCurve":
        return CompositeCurve([p.reversed() for p in reversed(self.parts)])

    def bounding_box(self):
        return _merge_boxes(p.bounding_box() for p in self.parts)

    def distance_to(self, point) -> float:
        return min(p.distance_to(point) for p in self.parts)


# ---------------------------------------------------------------------------
# Surface patches
# ---------------------------------------------------------------------------


class SurfacePatch:
    """Oriented parametric patch over the unit square [0,1]^2."""

    def point(self, u, v) -> np.ndarray:
        raise NotImplementedError

    def du(self, u, v) -> np.ndarray:
        raise NotImplementedError

    def dv(self, u, v) -> np.ndarray:
        raise NotImplementedError

    def normal(self, u, v) -> np.ndarray:
        n = np.cross(self.du(u, v), self.dv(u, v))
        mag = np.linalg.norm(n, axis=-1, keepdims=True)
        return n / mag

    def constant_normal(self) -> Optional[np.ndarray]:
        """Unit normal if the patch is planar, else None."""
        return None

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def bounding_box(self):
        grid = np.linspace(0.0, 1.0, 17)
        pts = self.point(grid[:, None], grid[None, :]).reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)

    def distance_to(self, point) -> float:
        """Distance from a point to the patch (sampled; exact in subclasses)."""
        p = as_vec3(point, "point")
        u_lo, u_hi = 0.0, 1.0
        v_lo, v_hi = 0.0, 1.0
        best = None
        # coarse grid with zoom rounds; plenty for guard checks
        for _ in range(4):
            uu = np.linspace(u_lo, u_hi, 33)
            vv = np.linspace(v_lo, v_hi, 33)
            pts = self.point(uu[:, None], vv[None, :])
            d = np.linalg.norm(pts - p, axis=-1)
            i, j = np.unravel_index(np.argmin(d), d.shape)
            best = float(d[i, j])
            span_u = (u_hi - u_lo) / 8.0
            span_v = (v_hi - v_lo) / 8.0
            u_lo, u_hi = max(uu[i] - span_u, 0.0), min(uu[i] + span_u, 1.0)
            v_lo, v_hi = max(vv[j] - span_v, 0.0), min(vv[j] + span_v, 1.0)
        return best


class PlanarRect(SurfacePatch):
    """Flat parallelogram patch: corner + u*edge_a + v*edge_b."""

    def __init__(self, corner, edge_a, edge_b):
        self.corner = _frozen(as_vec3(corner, "corner"))
        self.edge_a = _frozen(as_vec3(edge_a, "edge_a"))
        self.edge_b = _frozen(as_vec3(edge_b, "edge_b"))
        n = np.cross(self.edge_a, self.edge_b)
        mag = float(np.linalg.norm(n))
        if mag <= 1e-12 * max(float(np.linalg.norm(self.edge_a)), 1.0) ** 2:
            raise DegeneratePatch("edge_a x edge_b vanishes")
        self._normal = _frozen(n / mag)

    def point(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return (
            self.corner
            + np.multiply.outer(u, self.edge_a)
            + np.multiply.outer(v, self.edge_b)
        )

    def du(self, u, v):
        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        return np.broadcast_to(self.edge_a, shape + (3,)).copy()

    def dv(self, u, v):
        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        return np.broadcast_to(self.edge_b, shape + (3,)).copy()

    def constant_normal(self):
        return self._normal.copy()

    def boundary_polyline(self) -> PolyLine:
        c, a, b = self.corner, self.edge_a, self.edge_b
        return PolyLine([c, c + a, c + a + b, c + b], closed=True)

    def bounding_box(self):
        corners = np.array(
            [self.corner, self.corner + self.edge_a, self.corner + self.edge_b,
             self.corner + self.edge_a + self.edge_b]
        )
        return corners.min(axis=0), corners.max(axis=0)

    def distance_to(self, point) -> float:
        p = as_vec3(point, "point")
        rel = p - self.corner
        g = np.array([[self.edge_a @ self.edge_a, self.edge_a @ self.edge_b],
                      [self.edge_a @ self.edge_b, self.edge_b @ self.edge_b]])
        rhs = np.array([rel @ self.edge_a, rel @ self.edge_b])
        alpha, beta = np.linalg.solve(g, rhs)
        if 0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0:
            return abs(float(rel @ self._normal))
        return self.boundary_polyline().distance_to(p)


class Disk(SurfacePatch):
    """Flat disk patch via a smooth square-to-disk map.

    Uses the elliptical mapping (x*sqrt(1-y^2/2), y*sqrt(1-x^2/2)) on
    [-1,1]^2, which sends the square boundary onto the circle exactly and
    whose Jacobian vanishes only at the four parameter corners.  Unlike a
    polar map it produces no degenerate interior panels when meshed.
    """

    def __init__(self, center, radius: float, axis):
        if radius <= 0.0 or not math.isfinite(radius):
            raise ValueError(f"radius must be positive and finite, got {radius}")
        self.center = _frozen(as_vec3(center, "center"))
        self.radius = float(radius)
        self.axis = _frozen(as_vec3(axis, "axis"))
        u, v, a = _orthonormal_frame(self.axis)
        self._u = _frozen(u)
        self._v = _frozen(v)
        self._a = _frozen(a)

    @staticmethod
    def _square_coords(u, v):
        x = 2.0 * np.asarray(u, dtype=float) - 1.0
        y = 2.0 * np.asarray(v, dtype=float) - 1.0
        return np.broadcast_arrays(x, y)

    def point(self, u, v):
        x, y = self._square_coords(u, v)
        px = x * np.sqrt(1.0 - 0.5 * y**2)
        py = y * np.sqrt(1.0 - 0.5 * x**2)
        return self.center + self.radius * (
            np.multiply.outer(px, self._u) + np.multiply.outer(py, self._v)
        )

    def du(self, u, v):
        x, y = self._square_coords(u, v)
        sx = np.sqrt(1.0 - 0.5 * x**2)
        sy = np.sqrt(1.0 - 0.5 * y**2)
        return self.radius * (
            np.multiply.outer(2.0 * sy, self._u)
            - np.multiply.outer(x * y / sx, self._v)
        )

    def dv(self, u, v):
        x, y = self._square_coords(u, v)
        sx = np.sqrt(1.0 - 0.5 * x**2)
        sy = np.sqrt(1.0 - 0.5 * y**2)
        return self.radius * (
            -np.multiply.outer(x * y / sy, self._u)
            + np.multiply.outer(2.0 * sx, self._v)
        )

    def constant_normal(self):
        return self._a.copy()

    def boundary_circle(self) -> Circle:
        return Circle(self.center, self.radius, self.axis, "ccw")

    def bounding_box(self):
        ext = self.radius * np.sqrt(np.clip(1.0 - self._a**2, 0.0, 1.0))
        return self.center - ext, self.center + ext

    def distance_to(self, point) -> float:
        rel = as_vec3(point, "point") - self.center
        z = float(rel @ self._a)
        rho = float(np.linalg.norm(rel - z * self._a))
        if rho <= self.radius:
            return abs(z)
        return math.hypot(rho - self.radius, z)


class ShiftedPatch(SurfacePatch):
    """Patch displaced along its pointwise unit normal by a fixed offset.

    For planar patches the shift is a rigid translation and derivatives
    are exact.  For curved patches the derivatives fall back to central
    finite differences of the shifted map (step 1e-6).
    """

    _FD_STEP = 1e-6

    def __init__(self, base: SurfacePatch, offset: float):
        if not math.isfinite(offset):
            raise ValueError("offset must be finite")
        self.base = base
        self.offset = float(offset)
        self._const_n = base.constant_normal()

    def point(self, u, v):
        if self._const_n is not None:
            return self.base.point(u, v) + self.offset * self._const_n
        return self.base.point(u, v) + self.offset * self.base.normal(u, v)

    def _fd(self, u, v, du_step, dv_step):
        h = self._FD_STEP
        return (
            self.point(np.asarray(u) + du_step * h, np.asarray(v) + dv_step * h)
            - self.point(np.asarray(u) - du_step * h, np.asarray(v) - dv_step * h)
        ) / (2.0 * h)

    def du(self, u, v):
        if self._const_n is not None:
            return self.base.du(u, v)
        return self._fd(u, v, 1.0, 0.0)

    def dv(self, u, v):
        if self._const_n is not None:
            return self.base.dv(u, v)
        return self._fd(u, v, 0.0, 1.0)

    def constant_normal(self):
        return None if self._const_n is None else self._const_n.copy()

    def bounding_box(self):
        if self._const_n is not None:
            lo, hi = self.base.bounding_box()
            shift = self.offset * self._const_n
            corners = np.array([lo + shift, hi + shift])
            return corners.min(axis=0), corners.max(axis=0)
        return super().bounding_box()

    def distance_to(self, point) -> float:
        if self._const_n is not None:
            return self.base.distance_to(as_vec3(point, "point") - self.offset * self._const_n)
        return super().distance_to(point)


# ---------------------------------------------------------------------------
# Panels and meshes
# ---------------------------------------------------------------------------


class Panel:
    """Flat oriented parallelogram spanned by edge_a, edge_b at a base corner."""

    __slots__ = ("base", "edge_a", "edge_b", "area_vector")

    def __init__(self, base, edge_a, edge_b):
        self.base = _frozen(as_vec3(base, "base"))
        self.edge_a = _frozen(as_vec3(edge_a, "edge_a"))
        self.edge_b = _frozen(as_vec3(edge_b, "edge_b"))
        area = np.cross(self.edge_a, self.edge_b)
        if float(np.linalg.norm(area)) == 0.0:
            raise DegeneratePatch("panel edges are parallel (zero area vector)")
        self.area_vector = _frozen(area)

    def corners(self) -> np.ndarray:
        b, a, c = self.base, self.edge_a, self.edge_b
        return np.array([b, b + a, b + a + c, b + c])

    def __repr__(self):
        return f"Panel(base={self.base.tolist()}, edge_a={self.edge_a.tolist()}, edge_b={self.edge_b.tolist()})"


class SurfaceMesh:
    """M x N grid of flat panels over a patch.

    Panel (i, j) is anchored at grid node (i/M, j/N) with edges given by
    grid-node differences; interior grid edges are traversed by exactly
    two adjacent cells in opposite directions, so they cancel from the
    mesh boundary.
    """

    def __init__(self, patch: SurfacePatch, m: int, n: int, nodes: np.ndarray):
        self.source = patch
        self.m = int(m)
        self.n = int(n)
        self.nodes = _frozen(nodes)
        bases = nodes[:-1, :-1, :]
        self._edges_a = _frozen(nodes[1:, :-1, :] - bases)
        self._edges_b = _frozen(nodes[:-1, 1:, :] - bases)
        self._bases = _frozen(bases.copy())
        areas = np.cross(self._edges_a, self._edges_b)
        norms = np.linalg.norm(areas, axis=-1)
        if float(norms.min()) <= 1e-13 * float(norms.max()):
            raise DegeneratePatch(
                f"mesh {m}x{n} has (near-)degenerate panels: min area {norms.min():g}"
            )
        self._areas = _frozen(areas)

    @property
    def base_points(self) -> np.ndarray:
        return self._bases

    @property
    def edge_vectors_a(self) -> np.ndarray:
        return self._edges_a

    @property
    def edge_vectors_b(self) -> np.ndarray:
        return self._edges_b

    @property
    def area_vectors(self) -> np.ndarray:
        return self._areas

    @property
    def cell_centers(self) -> np.ndarray:
        """Average of the four grid-node corners per cell."""
        n = self.nodes
        return 0.25 * (n[:-1, :-1] + n[1:, :-1] + n[:-1, 1:] + n[1:, 1:])

    @property
    def cell_vector_areas(self) -> np.ndarray:
        """Vector area enclosed by each cell's four-node boundary loop.

        Half the cross product of the cell diagonals; summed over all
        cells this telescopes exactly to the vector area of the mesh
        boundary polygon.  Equals edge_a x edge_b on flat patches.
        """
        n = self.nodes
        d1 = n[1:, 1:] - n[:-1, :-1]
        d2 = n[:-1, 1:] - n[1:, :-1]
        return 0.5 * np.cross(d1, d2)

    def panel(self, i: int, j: int) -> Panel:
        return Panel(self._bases[i, j], self._edges_a[i, j], self._edges_b[i, j])

    def panels(self):
        """Iterate panels row-major as Panel objects."""
        for i in range(self.m):
            for j in range(self.n):
                yield self.panel(i, j)

    def min_edge_length(self) -> float:
        la = np.linalg.norm(self._edges_a, axis=-1)
        lb = np.linalg.norm(self._edges_b, axis=-1)
        return float(min(la.min(), lb.min()))

    def bounding_box(self):
        pts = self.nodes.reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)

    def total_area_vector(self) -> np.ndarray:
        return self._areas.sum(axis=(0, 1))


def mesh_surface(patch: SurfacePatch, m: int, n: int) -> SurfaceMesh:
    """Panelize a patch into an m x n grid of flat parallelogram panels."""
    if m < 1 or n < 1:
        raise ValueError(f"mesh dimensions must be >= 1, got {m}x{n}")
    uu = np.linspace(0.0, 1.0, m + 1)
    vv = np.linspace(0.0, 1.0, n + 1)
    nodes = patch.point(uu[:, None], vv[None, :])
    if nodes.shape != (m + 1, n + 1, 3):
        raise DegeneratePatch(f"patch evaluator returned shape {nodes.shape}")
    if not np.all(np.isfinite(nodes)):
        raise DegeneratePatch("patch evaluator returned non-finite nodes")
    return SurfaceMesh(patch, m, n, nodes)


def mesh_boundary(mesh: SurfaceMesh) -> PolyLine:
    """Outer boundary of the mesh as a closed polyline in induced orientation.

    Every cell contributes its four directed grid-node edges; edges shared
    by two cells cancel exactly (index bookkeeping, no float comparisons),
    leaving the outer boundary.  Requires the patch map to be injective on
    the closed unit square, which holds for all shipped patch kinds.
    """
    m, n = mesh.m, mesh.n
    ncols = n + 1

    def node_id(i, j):
        return i * ncols + j

    net: dict[tuple[int, int], int] = {}

    def add(a, b):
        key, direction = ((a, b), 1) if a < b else ((b, a), -1)
        net[key] = net.get(key, 0) + direction

    for i in range(m):
        for j in range(n):
            a = node_id(i, j)
            b = node_id(i + 1, j)
            c = node_id(i + 1, j + 1)
            d = node_id(i, j + 1)
            add(a, b)
            add(b, c)
            add(c, d)
            add(d, a)

    successor: dict[int, int] = {}
    for (a, b), count in net.items():
        if count == 0:
            continue
        if abs(count) != 1:
            raise DegeneratePatch("mesh has a non-manifold edge")
        src, dst = (a, b) if count > 0 else (b, a)
        if src in successor:
            raise DegeneratePatch("mesh boundary is not a single loop")
        successor[src] = dst

    start = node_id(0, 0)
    if start not in successor:
        raise DegeneratePatch("mesh corner node is not on the boundary")
    order = [start]
    cur = successor[start]
    while cur != start:
        order.append(cur)
        cur = successor[cur]
    if len(order) != len(successor):
        raise DegeneratePatch("mesh boundary is not a single loop")

    flat_nodes = mesh.nodes.reshape(-1, 3)
    return PolyLine(flat_nodes[order], closed=True)


# ---------------------------------------------------------------------------
# Transversal segment/panel intersection
# ---------------------------------------------------------------------------


def _panel_frame(panel: Panel):
    n = panel.area_vector
    n_mag = float(np.linalg.norm(n))
    len_a = float(np.linalg.norm(panel.edge_a))
    len_b = float(np.linalg.norm(panel.edge_b))
    # heights of the parallelogram over each edge; converts (alpha, beta)
    # offsets into true in-plane distances from the edges
    height_over_a = n_mag / len_a
    height_over_b = n_mag / len_b
    gram = np.array(
        [[panel.edge_a @ panel.edge_a, panel.edge_a @ panel.edge_b],
         [panel.edge_a @ panel.edge_b, panel.edge_b @ panel.edge_b]]
    )
    return n, n_mag, len_a, len_b, height_over_a, height_over_b, np.linalg.inv(gram)


def _classify_crossing(alpha, beta, h_a, h_b, edge_tol):
    """-1 outside, 0 degenerate (edge band), +1 strict interior."""
    margin = min(alpha * h_a, (1.0 - alpha) * h_a, beta * h_b, (1.0 - beta) * h_b)
    if margin > edge_tol:
        return 1
    if margin < -edge_tol:
        return -1
    return 0


def segment_panel_intersection(
    seg_start,
    seg_end,
    panel: Panel,
    transversality_tol: float = 1e-9,
):
    """Signed transversal crossing of an open segment with a panel interior.

    Returns (sign, point) when the segment crosses the panel interior
    transversally, where sign = sign((seg_end - seg_start) . area_vector);
    returns None when there is no crossing.  Raises NonTransversal for a
    glancing crossing (|cos angle| below transversality_tol) and
    DegenerateIntersection when the crossing lands within
    transversality_tol * max(edge lengths) of a panel edge or a segment
    endpoint sits on the panel plane near the panel.
    """
    p0 = as_vec3(seg_start, "seg_start")
    p1 = as_vec3(seg_end, "seg_end")
    d = p1 - p0
    seg_len = float(np.linalg.norm(d))
    if seg_len == 0.0:
        raise ValueError("segment has zero length")

    n, n_mag, len_a, len_b, h_a, h_b, gram_inv = _panel_frame(panel)
    n_hat = n / n_mag
    s0 = float((p0 - panel.base) @ n_hat)
    s1 = float((p1 - panel.base) @ n_hat)
    local_scale = max(len_a, len_b, seg_len)
    plane_eps = 1e-13 * local_scale
    edge_tol = transversality_tol * max(len_a, len_b)

    def params_at(point):
        rel = point - panel.base
        rhs = np.array([rel @ panel.edge_a, rel @ panel.edge_b])
        return gram_inv @ rhs

    if abs(s0) <= plane_eps or abs(s1) <= plane_eps:
        # an endpoint sits on the panel plane: ambiguous only near the panel
        for s, point in ((s0, p0), (s1, p1)):
            if abs(s) <= plane_eps:
                alpha, beta = params_at(point - s * n_hat)
                if -0.05 <= alpha <= 1.05 and -0.05 <= beta <= 1.05:
                    raise DegenerateIntersection(
                        "segment endpoint lies on the panel plane near the panel; "
                        "refine or perturb the sampling"
                    )
        return None

    if s0 * s1 > 0.0:
        return None

    tau = s0 / (s0 - s1)
    point = p0 + tau * d
    alpha, beta = params_at(point)
    if not (-0.05 <= alpha <= 1.05 and -0.05 <= beta <= 1.05):
        return None

    cos_angle = abs(float(d @ n_hat)) / seg_len
    if cos_angle < transversality_tol:
        raise NonTransversal(
            f"crossing direction nearly parallel to panel (|cos| = {cos_angle:g})"
        )

    side = _classify_crossing(alpha, beta, h_a, h_b, edge_tol)
    if side < 0:
        return None
    if side == 0:
        raise DegenerateIntersection(
            f"crossing within edge tolerance of the panel boundary "
            f"(alpha={alpha:.6g}, beta={beta:.6g})"
        )
    sign = 1 if float(d @ panel.area_vector) > 0.0 else -1
    return sign, point
