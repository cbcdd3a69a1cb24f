"""Wire schema of metric spec files.

A spec is {"kind": ..., "dim": n, "params": {...}}; products nest full specs in
params.factors. Unknown keys are rejected at every level.
"""
from fractions import Fraction
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, TypeAdapter, field_validator, model_validator

MAX_DIM = 16


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def rational_text(value: Any) -> str:
    """Normalize an int, float or "p/q" string to the canonical str(Fraction)."""
    if isinstance(value, bool):
        raise ValueError("a boolean is not a rational number")
    if isinstance(value, float):
        value = repr(value)
    try:
        return str(Fraction(value))
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(f"{value!r} is not a rational number") from e


########################################################################
# Parameters
########################################################################
class FlatParams(_Strict):
    radius: Optional[PositiveFloat] = None


class SpaceFormParams(_Strict):
    curvature: Union[int, float, str]
    radius: Optional[PositiveFloat] = None

    @field_validator("curvature")
    @classmethod
    def _rational(cls, value: Any) -> str:
        return rational_text(value)


class ProductParams(_Strict):
    factors: list["MetricSpec"] = Field(min_length=1)


class ConformalParams(_Strict):
    profile: Literal["linear", "quadratic", "gaussian"]
    coefficients: list[float] = Field(min_length=1)
    radius: Optional[PositiveFloat] = None


class PerturbationParams(_Strict):
    epsilon: float
    radius: Optional[PositiveFloat] = None


########################################################################
# Specs
########################################################################
class FlatSpec(_Strict):
    kind: Literal["flat"]
    dim: int = Field(ge=1, le=MAX_DIM)
    params: FlatParams = FlatParams()


class SpaceFormSpec(_Strict):
    kind: Literal["space_form"]
    dim: int = Field(ge=1, le=MAX_DIM)
    params: SpaceFormParams


class ProductSpec(_Strict):
    kind: Literal["product"]
    dim: int = Field(ge=2, le=MAX_DIM)
    params: ProductParams

    @model_validator(mode="after")
    def _dims_add_up(self) -> "ProductSpec":
        total = sum(factor.dim for factor in self.params.factors)
        if total != self.dim:
            raise ValueError(f"factor dimensions sum to {total}, not dim={self.dim}")
        return self


class ConformalSpec(_Strict):
    kind: Literal["conformal"]
    dim: int = Field(ge=2, le=MAX_DIM)
    params: ConformalParams


class PerturbationSpec(_Strict):
    kind: Literal["perturbation"]
    dim: int = Field(ge=2, le=MAX_DIM)
    params: PerturbationParams


MetricSpec = Annotated[
    Union[FlatSpec, SpaceFormSpec, ProductSpec, ConformalSpec, PerturbationSpec],
    Field(discriminator="kind"),
]

ProductParams.model_rebuild()

metric_spec_adapter: TypeAdapter = TypeAdapter(MetricSpec)
