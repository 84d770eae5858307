"""Biot-Savart fields, dipole sheets, and dual-route linking numbers.

The package computes static fields of current loops and charged sheets
by deterministic adaptive quadrature, counts signed crossings through
spanning surfaces, and ships experiment drivers that verify the
dipole/loop similitude and the circulation law A = Lk at desk scale.
"""

from .errors import (
    CurvesTooClose,
    DegenerateBase,
    DegenerateIntersection,
    DegeneratePatch,
    LoopfieldError,
    NearSingular,
    NoConvergence,
    NonTransversal,
    NotUnit,
    ParamOutOfRange,
    SceneFormatError,
)
from .geometry import (
    Circle,
    CompositeCurve,
    Curve,
    Disk,
    Panel,
    PlanarRect,
    PolyLine,
    RectLoop,
    ShiftedPatch,
    SurfaceMesh,
    SurfacePatch,
    as_vec3,
    bounding_box_diagonal,
    eval_curve,
    mesh_boundary,
    mesh_surface,
    segment_panel_intersection,
)
from .quadrature import QuadratureSpec, integrate_1d, integrate_2d
from .fields import (
    DipoleSheetSpec,
    FieldConstants,
    biot_savart,
    coulomb_surface_field,
    cross_projection_identity,
    differential_probe,
    dipole_mesh_field,
    dipole_panel_field,
    dipole_sheet_field_exact,
    taylor_probe,
)
from .linking import (
    LinkScene,
    combinatorial_lk,
    curve_min_distance,
    gauss_linking,
    gauss_pair_integral,
    vector_area,
)
from .experiments import (
    CatalogRow,
    ConvergenceReport,
    ReportRow,
    ampere_catalog,
    curl_vanishing,
    default_catalog,
    line_limit_study,
    maxwell_probe,
    similitude_general,
    similitude_infinitesimal,
    symmetry_sweep,
)

__version__ = "0.1.0"
