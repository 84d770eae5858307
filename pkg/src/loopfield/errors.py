"""Exception hierarchy shared by all loopfield modules."""


class LoopfieldError(Exception):
    """Base class for every error raised by this package."""


class ParamOutOfRange(LoopfieldError, ValueError):
    """Curve parameter lies outside the curve's parameter interval."""


class DegeneratePatch(LoopfieldError, ValueError):
    """Surface patch or panel mesh has (near-)vanishing orientation."""


class DegenerateIntersection(LoopfieldError):
    """Segment/panel crossing too ambiguous to sign reliably.

    Raised when a crossing lands within tolerance of a panel edge or a
    sample endpoint sits on the panel plane.  Callers should refine or
    perturb their sampling; the library never guesses.
    """


class NonTransversal(DegenerateIntersection):
    """Crossing direction nearly parallel to the panel plane."""


class NoConvergence(LoopfieldError):
    """Adaptive quadrature hit max_depth with the error estimate above tolerance."""


class NearSingular(LoopfieldError):
    """Field evaluation point lies within the guard distance of a source."""


class CurvesTooClose(LoopfieldError):
    """Curve pair violates the minimum separation required by the Gauss integral."""


class NotUnit(LoopfieldError, ValueError):
    """Vector expected to have unit norm does not."""


class DegenerateBase(LoopfieldError, ValueError):
    """Base point of a Taylor probe is the origin."""


class SceneFormatError(LoopfieldError, ValueError):
    """Scene file fails schema validation."""
