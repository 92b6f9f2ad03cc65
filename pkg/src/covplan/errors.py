"""Exception types raised across the planning pipeline."""


class CovPlanError(Exception):
    """Base class for all covplan errors."""


class InvalidSpecError(CovPlanError, ValueError):
    """A footprint, grid, or parameter block violates its invariants."""


class InvalidROIError(CovPlanError, ValueError):
    """Polygon rings are not simple, holes escape the outer ring, or holes overlap."""


class EmptyRegionError(CovPlanError):
    """Rasterization retained no cells."""


class FallbackCutError(CovPlanError):
    """No interior grid line exists on the axis chosen for a cut."""


class SolverLimitError(CovPlanError):
    """Too many partitions for the exact subset DP; use the GA instead."""


class CoverageError(CovPlanError):
    """A stitched plan left part of the region under the coverage threshold."""

    def __init__(self, message, ratio=None, diagnostics=None):
        super().__init__(message)
        self.ratio = ratio
        self.diagnostics = diagnostics or {}


class IncompleteMatrixError(CovPlanError):
    """Benchmark records are missing for some (polygon, pipeline) pair."""
