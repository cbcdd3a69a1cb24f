"""Custom exceptions for lcflab."""


class LcfLabError(Exception):
    """Base exception for the application."""

    pass


class DimensionError(LcfLabError):
    """Raised when tensor dimensions disagree or are out of the supported range."""

    pass


class SymmetryError(LcfLabError):
    """Raised when an input lacks a required symmetry or self-adjointness."""

    pass


class ConsistencyError(LcfLabError):
    """Raised when redundant inputs disagree, e.g. a scalar curvature that is not the trace."""

    pass


class DegenerateInputError(LcfLabError):
    """Raised for zero vectors, degenerate planes and singular metrics."""

    pass


class DomainGuardError(LcfLabError):
    """Raised when a point leaves the admissible coordinate ball of a metric field."""

    pass


class StepSizeError(LcfLabError):
    """Raised when geodesic integration drifts beyond the allowed speed error."""

    pass


class ClusterAssignmentError(LcfLabError):
    """Raised when frame vectors cannot be matched to a unique eigenvalue cluster."""

    pass


class PartitionError(LcfLabError):
    """Raised when a multiplicity partition is malformed."""

    pass


class CandidateError(LcfLabError):
    """Raised when spectrum candidate values repeat or vanish."""

    pass


class ConfigurationError(LcfLabError):
    """Raised when there's a configuration error."""

    pass


class SpecFileError(ConfigurationError):
    """Raised when a metric spec file cannot be read or validated."""

    pass
