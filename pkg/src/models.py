"""Domain models for tangent-space curvature, metric scans and spectrum classification."""
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from typing import Any, Optional

import numpy as np

from .exceptions import CandidateError, DegenerateInputError, DimensionError, PartitionError, SymmetryError
from .settings import settings


def _frozen_array(values: Any, ndim: int, name: str) -> np.ndarray:
    """Copy values into a read-only float array with equal-length axes."""
    array = np.array(values, dtype=float)
    if array.ndim != ndim or len(set(array.shape)) != 1:
        raise DimensionError(f"{name} must have {ndim} axes of equal length, got shape {array.shape}")
    array.setflags(write=False)
    return array


def _asymmetry(matrix: np.ndarray) -> float:
    """Relative size of the antisymmetric part of a square matrix."""
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    return float(np.max(np.abs(matrix - matrix.T))) / scale if matrix.size else 0.0


########################################################################
# Tangent-space algebra
########################################################################
@dataclass(frozen=True)
class PointMetric:
    """A positive-definite inner product g_ij on one tangent space."""

    components: np.ndarray

    def __post_init__(self):
        g = _frozen_array(self.components, 2, "PointMetric")
        if g.shape[0] < 2:
            raise DimensionError(f"PointMetric needs dimension >= 2, got {g.shape[0]}")
        if _asymmetry(g) > settings.SYMMETRY_TOL:
            raise SymmetryError("PointMetric components are not symmetric")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as e:
            raise DegenerateInputError("PointMetric is not positive definite") from e
        object.__setattr__(self, "components", g)

    @classmethod
    def identity(cls, dim: int) -> "PointMetric":
        """Get the Euclidean inner product of the given dimension."""
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        """Get g^ij."""
        inverse = np.linalg.inv(self.components)
        return (inverse + inverse.T) / 2

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Get the lower factor L with g = L L^T."""
        return np.linalg.cholesky(self.components)

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.asarray(x, dtype=float) @ self.components @ np.asarray(y, dtype=float))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(x, x), 0.0)))


@dataclass(frozen=True)
class RicciTensor:
    """A symmetric (0,2) tensor Ric_ij."""

    components: np.ndarray

    def __post_init__(self):
        ric = _frozen_array(self.components, 2, "RicciTensor")
        if _asymmetry(ric) > settings.SYMMETRY_TOL:
            raise SymmetryError("RicciTensor components are not symmetric")
        object.__setattr__(self, "components", ric)

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def trace(self, g: PointMetric) -> float:
        """Get the g-trace, i.e. the scalar curvature."""
        return float(np.einsum("ij,ij->", g.inverse, self.components))


@dataclass(frozen=True)
class Riemann4:
    """A (0,4) curvature tensor R(x, y, z, u) = g(R(x, y)z, u)."""

    components: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", _frozen_array(self.components, 4, "Riemann4"))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def norm(self) -> float:
        """Get the Frobenius norm of the component array."""
        return float(np.sqrt(np.sum(self.components**2)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))

    def symmetry_violation(self) -> float:
        """Largest violation of the four algebraic curvature identities, relative to max(1, max|R|)."""
        r = self.components
        residuals = (
            r + np.einsum("jikl->ijkl", r),
            r + np.einsum("ijlk->ijkl", r),
            r - np.einsum("klij->ijkl", r),
            r + np.einsum("jkil->ijkl", r) + np.einsum("kijl->ijkl", r),
        )
        worst = max(float(np.max(np.abs(residual))) for residual in residuals)
        return worst / max(1.0, self.max_abs())


@dataclass(frozen=True)
class SymOperator:
    """A linear operator on a tangent space, self-adjoint with respect to its metric."""

    matrix: np.ndarray
    metric: PointMetric

    def __post_init__(self):
        matrix = _frozen_array(self.matrix, 2, "SymOperator")
        if matrix.shape[0] != self.metric.dim:
            raise DimensionError(f"operator dimension {matrix.shape[0]} != metric dimension {self.metric.dim}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def lowered(self) -> np.ndarray:
        """Get the bilinear form g(A., .) as a matrix."""
        return self.metric.components @ self.matrix

    def self_adjointness_violation(self) -> float:
        return _asymmetry(self.lowered())


@dataclass(frozen=True)
class Cluster:
    """A group of numerically coincident eigenvalues."""

    value: float
    low: float
    high: float
    multiplicity: int
    indices: tuple[int, ...]


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues, their clusters and optionally g-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    clusters: tuple[Cluster, ...]
    eigenvectors: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)
        if self.eigenvectors is not None:
            vectors = np.array(self.eigenvectors, dtype=float)
            vectors.setflags(write=False)
            object.__setattr__(self, "eigenvectors", vectors)
        if sum(cluster.multiplicity for cluster in self.clusters) != len(values):
            raise DimensionError("cluster multiplicities must sum to the number of eigenvalues")

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(cluster.multiplicity for cluster in self.clusters)

    @property
    def distinct_values(self) -> tuple[float, ...]:
        return tuple(cluster.value for cluster in self.clusters)


########################################################################
# Metric fields and scans
########################################################################
@dataclass(frozen=True)
class GeodesicState:
    """Chart position, velocity and arc parameter of a geodesic."""

    position: np.ndarray
    velocity: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        position = np.array(self.position, dtype=float)
        velocity = np.array(self.velocity, dtype=float)
        if position.shape != velocity.shape or position.ndim != 1:
            raise DimensionError("position and velocity must be vectors of the same length")
        position.setflags(write=False)
        velocity.setflags(write=False)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "velocity", velocity)


@dataclass(frozen=True)
class GeodesicPath:
    """Integrated geodesic samples with the observed relative speed drift."""

    states: tuple[GeodesicState, ...]
    drift: float
    truncated: bool = False
    reason: Optional[str] = None

    @property
    def steps_completed(self) -> int:
        return len(self.states) - 1


class Verdict(StrEnum):
    CONSTANT = "constant"
    NON_CONSTANT = "non-constant"


@dataclass(frozen=True)
class ScanReport:
    """Sampled spectra with the worst deviation from constancy.

    Verdicts hold at sampled resolution only; they corroborate, never prove.
    """

    kind: str
    metric: dict[str, Any]
    seed: Optional[int]
    h: Optional[float]
    steps: Optional[int]
    samples: list[dict[str, Any]]
    deviation: float
    tolerance: float
    verdict: Verdict = field(init=False)
    resolution: str = "sampled"

    def __post_init__(self):
        if not self.deviation >= 0:
            raise ValueError(f"deviation must be non-negative, got {self.deviation}")
        verdict = Verdict.CONSTANT if self.deviation < self.tolerance else Verdict.NON_CONSTANT
        object.__setattr__(self, "verdict", verdict)


@dataclass(frozen=True)
class FrameConnectionReport:
    """Residuals of the eigenframe connection identities at one point."""

    exchange_max: float
    diagonal_max: float
    frame_eigenvalues: list[float]
    cluster_count: int


@dataclass(frozen=True)
class MetricCheckReport:
    """Pointwise curvature diagnostics of one metric field."""

    metric: dict[str, Any]
    points: list[list[float]]
    weyl_max: Optional[float]
    codazzi_max: float
    nabla_ricci_max: float
    radial_nabla_max: float
    spectra: list[list[float]]


@dataclass(frozen=True)
class CalibrationRow:
    """One calibration measurement against its acceptance threshold."""

    name: str
    value: float
    threshold: float
    comparison: str = "<"

    @property
    def passed(self) -> bool:
        return self.value < self.threshold if self.comparison == "<" else self.value > self.threshold


########################################################################
# Spectrum classification
########################################################################
class Rule(StrEnum):
    L3_QUADRATIC = "l3_quadratic"
    DOMINANT_MULTIPLICITY = "dominant_multiplicity"
    L_BOUND = "l_bound"
    CUBIC_ROOT_COUNT = "cubic_root_count"
    RESIDUAL_NONZERO = "residual_nonzero"
    U_NONZERO = "u_nonzero"
    EINSTEIN = "einstein"
    PRODUCT_WITNESS = "product_witness"


class CertificateVerdict(StrEnum):
    ADMITTED = "admitted"
    REJECTED = "rejected"


def _rationals(values: Any) -> Optional[tuple[Fraction, ...]]:
    return None if values is None else tuple(Fraction(value) for value in values)


@dataclass(frozen=True)
class SpectrumCandidate:
    """Exact multiplicity data (and optionally values) of a constant Ricci spectrum."""

    n: int
    m: tuple[int, ...]
    u: Optional[tuple[Fraction, ...]] = None
    r: Optional[tuple[Fraction, ...]] = None
    s: Optional[Fraction] = None

    def __post_init__(self):
        m = tuple(int(part) for part in self.m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "u", _rationals(self.u))
        object.__setattr__(self, "r", _rationals(self.r))
        if self.s is not None:
            object.__setattr__(self, "s", Fraction(self.s))

        if self.n < 4:
            raise PartitionError(f"candidate dimension must be >= 4, got {self.n}")
        if not m or any(part < 1 for part in m) or sum(m) != self.n:
            raise PartitionError(f"multiplicities {m} are not a partition of {self.n}")
        for name, values in (("u", self.u), ("r", self.r)):
            if values is None:
                continue
            if len(values) != len(m):
                raise CandidateError(f"{name} has {len(values)} entries for {len(m)} multiplicities")
            if len(set(values)) != len(values):
                raise CandidateError(f"{name} values must be pairwise distinct: {values}")
        if self.u is not None and any(value == 0 for value in self.u):
            raise CandidateError(f"u values must be nonzero: {self.u}")

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.m)

    def ratios(self, reference: int = 0) -> Optional[tuple[Fraction, ...]]:
        """Get x_i = u_i / u_reference."""
        if self.u is None:
            return None
        return tuple(value / self.u[reference] for value in self.u)


@dataclass(frozen=True)
class IdentityCheck:
    """Exact values of the balance identities implied by the constraint system."""

    a: Fraction
    b: Fraction
    c: tuple[Fraction, ...]
    d: Fraction

    @property
    def vanishes(self) -> bool:
        return self.a == 0 and self.b == 0 and all(value == 0 for value in self.c) and self.d == 0


@dataclass(frozen=True)
class Certificate:
    """Why a candidate shape was admitted or rejected, with exact witness values."""

    candidate: SpectrumCandidate
    verdict: CertificateVerdict
    rule: Rule
    witness: dict[str, Any]
    note: str = ""


@dataclass(frozen=True)
class AdmittedShape:
    l: int  # noqa: E741
    m: tuple[int, ...]
    family: str
    basis: str
    certificate: Certificate


@dataclass(frozen=True)
class UndecidedShape:
    l: int  # noqa: E741
    m: tuple[int, ...]
    reason: str
    candidates: tuple[dict[str, Any], ...] = ()


@dataclass(frozen=True)
class ClassificationReport:
    """Outcome for every enumerated multiplicity shape of one dimension."""

    n: int
    l_max: int
    enumerated: int
    admitted: tuple[AdmittedShape, ...]
    rejected: tuple[Certificate, ...]
    undecided: tuple[UndecidedShape, ...]
    summary: str

    def __post_init__(self):
        if len(self.admitted) + len(self.rejected) + len(self.undecided) != self.enumerated:
            raise PartitionError("admitted, rejected and undecided shapes must cover the enumeration")
