"""Strict JSON scene files: named curves, surfaces, scenes, experiments.

A scene file is plain data; geometry objects are built on demand.  The
parser rejects unknown fields and dangling references so that a file
that parses is a file that runs.  Parsing, re-serializing, and re-parsing
yields an identical structure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SceneFormatError
from .fields import FieldConstants
from .geometry import (
    Circle,
    CompositeCurve,
    Disk,
    PlanarRect,
    PolyLine,
    RectLoop,
    mesh_surface,
)
from .linking import LinkScene
from .quadrature import QuadratureSpec

__all__ = ["SceneFile", "parse_scene_file", "parse_scene_dict"]

SCENE_VERSION = 1

_CONSTANT_KEYS = {"k_E", "k_B"}
_QUADRATURE_KEYS = {"nodes_per_cell", "abs_tol", "rel_tol", "max_depth", "min_distance_guard"}

_CURVE_KINDS = {
    "circle": ({"center", "radius", "axis"}, {"orientation"}),
    "polyline": ({"vertices"}, {"closed"}),
    "rect_loop": ({"n"}, set()),
    "composite": ({"parts"}, set()),
}

_SURFACE_KINDS = {
    "planar_rect": ({"corner", "edge_a", "edge_b"}, {"mesh"}),
    "disk": ({"center", "radius", "axis"}, {"mesh"}),
}

_EXPERIMENT_KINDS = {
    "link": ({"scene"}, {"out"}),
    "lk": ({"scene"}, {"out"}),
    "ampere": (set(), {"scenes", "out"}),
    "linelimit": ({"n"}, {"out"}),
    "similitude": ({"surface", "r", "h"}, {"mesh_sizes", "out"}),
    "maxwell": ({"surface", "sigma", "points", "steps"}, {"dipole_separation", "out"}),
    "curl": ({"curve", "points", "steps"}, {"out"}),
    "field": ({"points"}, {"curve", "surface", "sigma", "out"}),
}


def _check_keys(obj: dict, required: set, optional: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SceneFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    keys = set(obj)
    missing = required - keys
    if missing:
        raise SceneFormatError(f"{where}: missing fields {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise SceneFormatError(f"{where}: unknown fields {sorted(unknown)}")


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneFormatError(f"{where}: expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise SceneFormatError(f"{where}: must be finite, got {value!r}")
    return out


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SceneFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_vec(value, where: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 3:
        raise SceneFormatError(f"{where}: expected a 3-element list, got {value!r}")
    return [_as_number(v, where) for v in value]


def _as_name(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise SceneFormatError(f"{where}: expected a non-empty string, got {value!r}")
    return value


@dataclass
class SceneFile:
    """Validated plain-data image of a scene file."""

    version: int = SCENE_VERSION
    constants: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    surfaces: dict = field(default_factory=dict)
    scenes: dict = field(default_factory=dict)
    experiments: list = field(default_factory=list)

    # -- object builders ----------------------------------------------------

    def field_constants(self) -> FieldConstants:
        kwargs = {}
        if "k_E" in self.constants:
            kwargs["k_E"] = self.constants["k_E"]
        if "k_B" in self.constants:
            kwargs["k_B"] = self.constants["k_B"]
        return FieldConstants(**kwargs)

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(**self.quadrature)

    def build_curve(self, name: str, _stack: tuple = ()):
        if name in _stack:
            raise SceneFormatError(f"curve {name!r}: circular composite reference")
        spec = self.curves[name]
        kind = spec["kind"]
        if kind == "circle":
            return Circle(
                spec["center"], spec["radius"], spec["axis"],
                spec.get("orientation", "ccw"),
            )
        if kind == "polyline":
            return PolyLine(spec["vertices"], closed=spec.get("closed", True))
        if kind == "rect_loop":
            return RectLoop(spec["n"])
        if kind == "composite":
            parts = [self.build_curve(p, _stack + (name,)) for p in spec["parts"]]
            return CompositeCurve(parts)
        raise SceneFormatError(f"curve {name!r}: unknown kind {kind!r}")

    def build_patch(self, name: str):
        spec = self.surfaces[name]
        if spec["kind"] == "planar_rect":
            return PlanarRect(spec["corner"], spec["edge_a"], spec["edge_b"])
        return Disk(spec["center"], spec["radius"], spec["axis"])

    def build_mesh(self, name: str):
        spec = self.surfaces[name]
        m, n = spec.get("mesh", [15, 15])
        return mesh_surface(self.build_patch(name), m, n)

    def build_scene(self, name: str) -> LinkScene:
        spec = self.scenes[name]
        mesh = None
        if "spanning_surface" in spec:
            mesh = self.build_mesh(spec["spanning_surface"])
        return LinkScene(
            self.build_curve(spec["curve_c"]),
            self.build_curve(spec["curve_l"]),
            mesh,
            name=name,
        )

    def to_dict(self) -> dict:
        out = {"version": self.version}
        if self.constants:
            out["constants"] = dict(self.constants)
        if self.quadrature:
            out["quadrature"] = dict(self.quadrature)
        if self.curves:
            out["curves"] = {k: dict(v) for k, v in self.curves.items()}
        if self.surfaces:
            out["surfaces"] = {k: dict(v) for k, v in self.surfaces.items()}
        if self.scenes:
            out["scenes"] = {k: dict(v) for k, v in self.scenes.items()}
        if self.experiments:
            out["experiments"] = [dict(e) for e in self.experiments]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Parsing / validation
# ---------------------------------------------------------------------------


def _parse_constants(obj, where="constants") -> dict:
    _check_keys(obj, set(), _CONSTANT_KEYS, where)
    return {k: _as_number(v, f"{where}.{k}") for k, v in obj.items()}


def _parse_quadrature(obj, where="quadrature") -> dict:
    _check_keys(obj, set(), _QUADRATURE_KEYS, where)
    out = {}
    for k, v in obj.items():
        if k in ("nodes_per_cell", "max_depth"):
            out[k] = _as_int(v, f"{where}.{k}")
        elif k == "min_distance_guard" and v is None:
            out[k] = None
        else:
            out[k] = _as_number(v, f"{where}.{k}")
    return out


def _parse_curve(name: str, obj) -> dict:
    where = f"curves.{name}"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SceneFormatError(f"{where}: missing 'kind'")
    kind = obj["kind"]
    if kind not in _CURVE_KINDS:
        raise SceneFormatError(f"{where}: unknown kind {kind!r}")
    required, optional = _CURVE_KINDS[kind]
    _check_keys(obj, required | {"kind"}, optional, where)
    out = {"kind": kind}
    if kind == "circle":
        out["center"] = _as_vec(obj["center"], f"{where}.center")
        out["radius"] = _as_number(obj["radius"], f"{where}.radius")
        out["axis"] = _as_vec(obj["axis"], f"{where}.axis")
        orientation = obj.get("orientation", "ccw")
        if orientation not in ("ccw", "cw"):
            raise SceneFormatError(f"{where}.orientation: must be 'ccw' or 'cw'")
        out["orientation"] = orientation
    elif kind == "polyline":
        verts = obj["vertices"]
        if not isinstance(verts, list) or len(verts) < 2:
            raise SceneFormatError(f"{where}.vertices: need at least 2 vertices")
        out["vertices"] = [_as_vec(v, f"{where}.vertices[{i}]") for i, v in enumerate(verts)]
        closed = obj.get("closed", True)
        if not isinstance(closed, bool):
            raise SceneFormatError(f"{where}.closed: expected a boolean")
        out["closed"] = closed
    elif kind == "rect_loop":
        n = _as_int(obj["n"], f"{where}.n")
        if n < 1:
            raise SceneFormatError(f"{where}.n: must be positive")
        out["n"] = n
    else:  # composite
        parts = obj["parts"]
        if not isinstance(parts, list) or not parts:
            raise SceneFormatError(f"{where}.parts: need at least one part name")
        out["parts"] = [_as_name(p, f"{where}.parts[{i}]") for i, p in enumerate(parts)]
    return out


def _parse_surface(name: str, obj) -> dict:
    where = f"surfaces.{name}"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SceneFormatError(f"{where}: missing 'kind'")
    kind = obj["kind"]
    if kind not in _SURFACE_KINDS:
        raise SceneFormatError(f"{where}: unknown kind {kind!r}")
    required, optional = _SURFACE_KINDS[kind]
    _check_keys(obj, required | {"kind"}, optional, where)
    out = {"kind": kind}
    if kind == "planar_rect":
        for key in ("corner", "edge_a", "edge_b"):
            out[key] = _as_vec(obj[key], f"{where}.{key}")
    else:
        out["center"] = _as_vec(obj["center"], f"{where}.center")
        out["radius"] = _as_number(obj["radius"], f"{where}.radius")
        out["axis"] = _as_vec(obj["axis"], f"{where}.axis")
    if "mesh" in obj:
        mesh = obj["mesh"]
        if not isinstance(mesh, list) or len(mesh) != 2:
            raise SceneFormatError(f"{where}.mesh: expected [M, N]")
        m, n = (_as_int(v, f"{where}.mesh") for v in mesh)
        if m < 1 or n < 1:
            raise SceneFormatError(f"{where}.mesh: dimensions must be >= 1")
        out["mesh"] = [m, n]
    return out


def _parse_scene(name: str, obj, curves: dict, surfaces: dict) -> dict:
    where = f"scenes.{name}"
    _check_keys(obj, {"curve_c", "curve_l"}, {"spanning_surface"}, where)
    out = {}
    for key in ("curve_c", "curve_l"):
        ref = _as_name(obj[key], f"{where}.{key}")
        if ref not in curves:
            raise SceneFormatError(f"{where}.{key}: unknown curve {ref!r}")
        out[key] = ref
    if "spanning_surface" in obj:
        ref = _as_name(obj["spanning_surface"], f"{where}.spanning_surface")
        if ref not in surfaces:
            raise SceneFormatError(f"{where}.spanning_surface: unknown surface {ref!r}")
        out["spanning_surface"] = ref
    return out


def _parse_experiment(idx: int, obj, curves: dict, surfaces: dict, scenes: dict) -> dict:
    where = f"experiments[{idx}]"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SceneFormatError(f"{where}: missing 'kind'")
    kind = obj["kind"]
    if kind not in _EXPERIMENT_KINDS:
        raise SceneFormatError(f"{where}: unknown kind {kind!r}")
    required, optional = _EXPERIMENT_KINDS[kind]
    _check_keys(obj, required | {"kind"}, optional, where)
    out = {"kind": kind}

    def ref(key, table, table_name):
        name = _as_name(obj[key], f"{where}.{key}")
        if name not in table:
            raise SceneFormatError(f"{where}.{key}: unknown {table_name} {name!r}")
        out[key] = name

    if kind in ("link", "lk"):
        ref("scene", scenes, "scene")
    elif kind == "ampere":
        if "scenes" in obj:
            names = obj["scenes"]
            if not isinstance(names, list) or not names:
                raise SceneFormatError(f"{where}.scenes: need at least one scene name")
            for i, name in enumerate(names):
                if _as_name(name, f"{where}.scenes[{i}]") not in scenes:
                    raise SceneFormatError(f"{where}.scenes[{i}]: unknown scene {name!r}")
            out["scenes"] = list(names)
    elif kind == "linelimit":
        ns = obj["n"]
        if not isinstance(ns, list) or not ns:
            raise SceneFormatError(f"{where}.n: need at least one value")
        out["n"] = [_as_int(v, f"{where}.n") for v in ns]
    elif kind == "similitude":
        ref("surface", surfaces, "surface")
        out["r"] = _as_vec(obj["r"], f"{where}.r")
        out["h"] = _as_number(obj["h"], f"{where}.h")
        sizes = obj.get("mesh_sizes", [8, 16, 32, 64])
        if not isinstance(sizes, list) or len(sizes) < 3:
            raise SceneFormatError(f"{where}.mesh_sizes: need at least 3 sizes")
        out["mesh_sizes"] = [_as_int(v, f"{where}.mesh_sizes") for v in sizes]
    elif kind == "maxwell":
        ref("surface", surfaces, "surface")
        out["sigma"] = _as_number(obj["sigma"], f"{where}.sigma")
        out["points"] = [_as_vec(p, f"{where}.points") for p in obj["points"]]
        out["steps"] = [_as_number(s, f"{where}.steps") for s in obj["steps"]]
        if "dipole_separation" in obj:
            out["dipole_separation"] = _as_number(
                obj["dipole_separation"], f"{where}.dipole_separation"
            )
    elif kind == "curl":
        ref("curve", curves, "curve")
        out["points"] = [_as_vec(p, f"{where}.points") for p in obj["points"]]
        out["steps"] = [_as_number(s, f"{where}.steps") for s in obj["steps"]]
    else:  # field
        if ("curve" in obj) == ("surface" in obj):
            raise SceneFormatError(f"{where}: give exactly one of 'curve' or 'surface'")
        if "curve" in obj:
            ref("curve", curves, "curve")
        else:
            ref("surface", surfaces, "surface")
            out["sigma"] = _as_number(obj.get("sigma", 1.0), f"{where}.sigma")
        out["points"] = [_as_vec(p, f"{where}.points") for p in obj["points"]]
    if "out" in obj:
        out["out"] = _as_name(obj["out"], f"{where}.out")
    return out


def parse_scene_dict(data) -> SceneFile:
    _check_keys(
        data,
        {"version"},
        {"constants", "quadrature", "curves", "surfaces", "scenes", "experiments"},
        "scene file",
    )
    version = _as_int(data["version"], "version")
    if version != SCENE_VERSION:
        raise SceneFormatError(f"unsupported scene file version {version}")

    constants = _parse_constants(data.get("constants", {}))
    quadrature = _parse_quadrature(data.get("quadrature", {}))

    raw_curves = data.get("curves", {})
    if not isinstance(raw_curves, dict):
        raise SceneFormatError("curves: expected an object of named curves")
    curves = {name: _parse_curve(name, spec) for name, spec in raw_curves.items()}
    for name, spec in curves.items():
        if spec["kind"] == "composite":
            for part in spec["parts"]:
                if part not in curves:
                    raise SceneFormatError(f"curves.{name}: unknown part {part!r}")

    raw_surfaces = data.get("surfaces", {})
    if not isinstance(raw_surfaces, dict):
        raise SceneFormatError("surfaces: expected an object of named surfaces")
    surfaces = {name: _parse_surface(name, spec) for name, spec in raw_surfaces.items()}

    raw_scenes = data.get("scenes", {})
    if not isinstance(raw_scenes, dict):
        raise SceneFormatError("scenes: expected an object of named scenes")
    scenes = {
        name: _parse_scene(name, spec, curves, surfaces)
        for name, spec in raw_scenes.items()
    }

    raw_experiments = data.get("experiments", [])
    if not isinstance(raw_experiments, list):
        raise SceneFormatError("experiments: expected a list")
    experiments = [
        _parse_experiment(i, spec, curves, surfaces, scenes)
        for i, spec in enumerate(raw_experiments)
    ]

    scene_file = SceneFile(version, constants, quadrature, curves, surfaces, scenes, experiments)
    # constructible check: bad numeric combinations surface at parse time
    try:
        scene_file.field_constants()
        scene_file.quadrature_spec()
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc
    return scene_file


def parse_scene_file(path) -> SceneFile:
    path = Path(path)
    if not path.exists():
        raise SceneFormatError(f"scene file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scene_dict(data)
