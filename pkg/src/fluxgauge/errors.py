"""Exception types shared across the package.

Every exception carries a stable ``code`` string so the CLI and reports can
surface machine-readable failure reasons.
"""

from __future__ import annotations


class FluxgaugeError(Exception):
    """Base class for all package errors."""

    code = "RUNTIME_FAILURE"


class BadParamsError(FluxgaugeError):
    """Constructor or operation parameters outside the documented range."""

    code = "BAD_PARAMS"


class DimensionMismatchError(FluxgaugeError):
    """Operands live in different ambient dimensions."""

    code = "DIMENSION_MISMATCH"


class EmptyBoundaryError(FluxgaugeError):
    """No level-set crossing found inside the bounding box."""

    code = "EMPTY_BOUNDARY"


class ResolutionTooCoarseError(FluxgaugeError):
    """The grid pitch cannot resolve the boundary topology."""

    code = "RESOLUTION_TOO_COARSE"


class EmptyMeshError(FluxgaugeError):
    """A surface mesh with no facets or zero total area was supplied."""

    code = "EMPTY_MESH"


class NotDivergenceFreeError(FluxgaugeError):
    """A divergence-free hypothesis failed a sample check."""

    code = "NOT_DIVERGENCE_FREE"


class NotConvexError(FluxgaugeError):
    """A convexity hypothesis failed a midpoint sample check."""

    code = "NOT_CONVEX"


class NotSimpleError(FluxgaugeError):
    """A closed curve self-intersects where a Jordan curve is required."""

    code = "NOT_SIMPLE"


class DegenerateGradientError(FluxgaugeError):
    """The level-function gradient vanished where a normal was needed."""

    code = "DEGENERATE_GRADIENT"


class StepUnderflowError(FluxgaugeError):
    """The adaptive integrator could not meet the tolerance."""

    code = "STEP_UNDERFLOW"


class CrossingUnresolvedError(FluxgaugeError):
    """Bisection failed to separate membership crossings along an orbit."""

    code = "CROSSING_UNRESOLVED"


class PreconditionFailedError(FluxgaugeError):
    """A study precondition (monotone sequence, ordering, ...) failed."""

    code = "PRECONDITION_FAILED"


class ConfigInvalidError(FluxgaugeError):
    """An experiment configuration failed schema validation."""

    code = "CONFIG_INVALID"
