"""Catalog of coordinate-chart metric fields.

Every field evaluates its metric on a batch of points, shape (..., n) -> (..., n, n), so that
finite-difference stencils cost one vectorized call. All catalog metrics are diagonal in
their chart, which gives each of them a closed-form orthonormal frame.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from .exceptions import DimensionError, DomainGuardError
from .models import PointMetric
from .settings import settings


def _points(points: Any, dim: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.shape[-1:] != (dim,):
        raise DimensionError(f"points of shape {points.shape} do not live in dimension {dim}")
    return points


class MetricField(ABC):
    """A Riemannian metric on a coordinate ball."""

    kind: str
    dim: int

    @abstractmethod
    def _metric(self, points: np.ndarray) -> np.ndarray:
        """Evaluate g on points already known to be inside the guard."""

    @abstractmethod
    def contains(self, points: Any) -> np.ndarray:
        """Get a boolean mask of points strictly inside the domain guard."""

    @abstractmethod
    def to_spec(self) -> dict[str, Any]:
        """Get the JSON metric spec that rebuilds this field."""

    def metric(self, points: Any) -> np.ndarray:
        """Evaluate g_ij on a batch of points."""
        points = _points(points, self.dim)
        inside = np.asarray(self.contains(points)).reshape(-1)
        if not np.all(inside):
            outside = points.reshape(-1, self.dim)[~inside][0]
            raise DomainGuardError(f"{self.kind} field evaluated outside its domain guard at {outside.tolist()}")
        return self._metric(points)

    def metric_at(self, p: Any) -> PointMetric:
        return PointMetric(self.metric(_points(p, self.dim)))

    def _ball(self, points: np.ndarray, radius: float) -> np.ndarray:
        return np.sum(points**2, axis=-1) < radius**2


def _eye(points: np.ndarray, dim: int) -> np.ndarray:
    return np.broadcast_to(np.eye(dim), points.shape[:-1] + (dim, dim))


@dataclass(frozen=True)
class FlatField(MetricField):
    dim: int
    radius: float = field(default_factory=lambda: settings.GUARD_RADIUS)
    kind: str = field(default="flat", init=False)

    def _metric(self, points):
        return _eye(points, self.dim).copy()

    def contains(self, points):
        return self._ball(_points(points, self.dim), self.radius)

    def to_spec(self):
        return {"kind": self.kind, "dim": self.dim, "params": {"radius": self.radius}}


@dataclass(frozen=True)
class SpaceFormField(MetricField):
    """g = (1 + (K/4)|x|^2)^(-2) delta, constant sectional curvature K."""

    dim: int
    curvature: Fraction
    radius: float = field(default_factory=lambda: settings.GUARD_RADIUS)
    kind: str = field(default="space_form", init=False)

    def __post_init__(self):
        object.__setattr__(self, "curvature", Fraction(self.curvature))

    @property
    def guard_radius(self) -> float:
        if self.curvature < 0:
            return min(self.radius, float(np.sqrt(4 / -float(self.curvature))))
        return self.radius

    def _metric(self, points):
        factor = (1 + float(self.curvature) / 4 * np.sum(points**2, axis=-1)) ** -2
        return factor[..., None, None] * _eye(points, self.dim)

    def contains(self, points):
        return self._ball(_points(points, self.dim), self.guard_radius)

    def to_spec(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": {"curvature": str(self.curvature), "radius": self.radius},
        }


@dataclass(frozen=True)
class ProductField(MetricField):
    """Block-diagonal Riemannian product; coordinates are the factors' coordinates in order."""

    factors: tuple[MetricField, ...]
    kind: str = field(default="product", init=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise DimensionError("a product needs at least one factor")

    @property
    def dim(self) -> int:
        return sum(factor.dim for factor in self.factors)

    @property
    def slices(self) -> list[slice]:
        slices, offset = [], 0
        for factor in self.factors:
            slices.append(slice(offset, offset + factor.dim))
            offset += factor.dim
        return slices

    def _metric(self, points):
        g = np.zeros(points.shape[:-1] + (self.dim, self.dim))
        for factor, block in zip(self.factors, self.slices):
            g[..., block, block] = factor._metric(points[..., block])
        return g

    def contains(self, points):
        points = _points(points, self.dim)
        inside = np.ones(points.shape[:-1], dtype=bool)
        for factor, block in zip(self.factors, self.slices):
            inside &= factor.contains(points[..., block])
        return inside

    def to_spec(self):
        return {"kind": self.kind, "dim": self.dim, "params": {"factors": [f.to_spec() for f in self.factors]}}


PROFILES = ("linear", "quadratic", "gaussian")


@dataclass(frozen=True)
class ConformalField(MetricField):
    """g = exp(2 f) delta with a catalog profile f.

    linear:    f = sum_i c_i x_i
    quadratic: f = sum_i c_i x_i^2
    gaussian:  f = a exp(-|x|^2 / w^2), coefficients (a,) or (a, w)
    """

    dim: int
    profile: str
    coefficients: tuple[float, ...]
    radius: float = field(default_factory=lambda: settings.GUARD_RADIUS)
    kind: str = field(default="conformal", init=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.profile not in PROFILES:
            raise ValueError(f"unknown conformal profile {self.profile!r}; expected one of {PROFILES}")
        expected = (1, 2) if self.profile == "gaussian" else (self.dim,)
        if len(self.coefficients) not in expected:
            raise DimensionError(f"{self.profile} profile takes {expected} coefficients, got {len(self.coefficients)}")

    def f(self, points: Any) -> np.ndarray:
        points = _points(points, self.dim)
        c = np.array(self.coefficients)
        if self.profile == "linear":
            return points @ c
        if self.profile == "quadratic":
            return points**2 @ c
        width = c[1] if len(c) > 1 else 1.0
        return c[0] * np.exp(-np.sum(points**2, axis=-1) / width**2)

    def _metric(self, points):
        return np.exp(2 * self.f(points))[..., None, None] * _eye(points, self.dim)

    def contains(self, points):
        return self._ball(_points(points, self.dim), self.radius)

    def to_spec(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": {"profile": self.profile, "coefficients": list(self.coefficients), "radius": self.radius},
        }


@dataclass(frozen=True)
class PerturbationField(MetricField):
    """g = delta + epsilon x_1^2 (dx_2)^2, a non-conformally-flat test metric."""

    dim: int
    epsilon: float
    radius: float = field(default_factory=lambda: settings.GUARD_RADIUS)
    kind: str = field(default="perturbation", init=False)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self.dim < 2:
            raise DimensionError("the perturbation needs at least two coordinates")

    def _metric(self, points):
        g = _eye(points, self.dim).copy()
        g[..., 1, 1] += self.epsilon * points[..., 0] ** 2
        return g

    def contains(self, points):
        points = _points(points, self.dim)
        inside = self._ball(points, self.radius)
        if self.epsilon < 0:
            inside &= 1 + self.epsilon * points[..., 0] ** 2 > 0
        return inside

    def to_spec(self):
        return {"kind": self.kind, "dim": self.dim, "params": {"epsilon": self.epsilon, "radius": self.radius}}


@dataclass(frozen=True)
class FrameField:
    """The coordinate-aligned orthonormal frame E_i = d_i / sqrt(g_ii) of a diagonal metric."""

    metric_field: MetricField

    def vectors(self, points: Any) -> np.ndarray:
        """Get E with E[..., i, :] the chart components of E_i."""
        g = self.metric_field.metric(points)
        scale = 1 / np.sqrt(np.diagonal(g, axis1=-2, axis2=-1))
        return scale[..., :, None] * np.eye(self.metric_field.dim)

    def gram(self, p: Any) -> np.ndarray:
        frame = self.vectors(p)
        return frame @ self.metric_field.metric(p) @ frame.T


def space_form(dim: int, curvature: Any, radius: Optional[float] = None) -> SpaceFormField:
    return SpaceFormField(dim, Fraction(curvature), radius if radius is not None else settings.GUARD_RADIUS)


def product(*factors: MetricField) -> ProductField:
    return ProductField(tuple(factors))


def opposite_forms(m: int, dim: int, curvature: Any = 1) -> ProductField:
    """M^m(K) x M^(dim-m)(-K)."""
    return product(space_form(m, curvature), space_form(dim - m, -Fraction(curvature)))


def form_times_line(dim: int, curvature: Any = 1) -> ProductField:
    """M^(dim-1)(K) x R."""
    return product(space_form(dim - 1, curvature), FlatField(1))


def conformal_fields(dim: int = 4) -> list[ConformalField]:
    """The conformal-factor members of the catalog."""
    return [
        ConformalField(dim, "quadratic", tuple([1.0] + [0.0] * (dim - 1))),
        ConformalField(dim, "gaussian", (1.0,)),
        ConformalField(dim, "linear", tuple(0.3 * (i + 1) for i in range(dim))),
    ]
