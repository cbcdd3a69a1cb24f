"""Read metric spec files into catalog metric fields."""
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from .exceptions import LcfLabError, SpecFileError
from .metric_catalog import ConformalField, FlatField, MetricField, PerturbationField, ProductField, SpaceFormField
from .schema import ConformalSpec, FlatSpec, PerturbationSpec, ProductSpec, SpaceFormSpec, metric_spec_adapter
from .settings import settings

logger = logging.getLogger(__name__)


def describe_validation_error(error: ValidationError) -> str:
    """Render pydantic errors as 'key.path: message' lines."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


class MetricSpecLoader:
    """Validate metric specs and build the matching MetricField."""

    def __init__(self, guard_radius: float = settings.GUARD_RADIUS):
        self.guard_radius = guard_radius

    def process_file(self, file_path: Path) -> MetricField:
        """Read, validate and build a metric spec file."""
        data = self._read_file(Path(file_path))
        field = self.build(data, source=str(file_path))
        logger.info("Loaded %s metric of dimension %d from %s", field.kind, field.dim, file_path)
        return field

    def build(self, data: Any, source: str = "<spec>") -> MetricField:
        """Validate an in-memory spec and build its field."""
        try:
            spec = metric_spec_adapter.validate_python(data)
        except ValidationError as e:
            raise SpecFileError(f"{source}: {describe_validation_error(e)}") from e

        try:
            return self._build_field(spec)
        except LcfLabError as e:
            raise SpecFileError(f"{source}: {e}") from e
        except ValueError as e:
            raise SpecFileError(f"{source}: {e}") from e

    def _read_file(self, file_path: Path) -> Any:
        """Read a UTF-8 JSON file."""
        try:
            with file_path.open("r", encoding="utf-8") as f:
                return json.load(f)
        except OSError as e:
            raise SpecFileError(f"cannot read metric spec {file_path}: {e}") from e
        except json.JSONDecodeError as e:
            raise SpecFileError(f"{file_path} is not valid JSON: {e}") from e

    def _radius(self, radius: float | None) -> float:
        return self.guard_radius if radius is None else radius

    def _build_field(self, spec: Any) -> MetricField:
        match spec:
            case FlatSpec():
                return FlatField(spec.dim, self._radius(spec.params.radius))
            case SpaceFormSpec():
                return SpaceFormField(spec.dim, spec.params.curvature, self._radius(spec.params.radius))
            case ProductSpec():
                return ProductField(tuple(self._build_field(factor) for factor in spec.params.factors))
            case ConformalSpec():
                params = spec.params
                return ConformalField(spec.dim, params.profile, tuple(params.coefficients), self._radius(params.radius))
            case PerturbationSpec():
                return PerturbationField(spec.dim, spec.params.epsilon, self._radius(spec.params.radius))
        raise SpecFileError(f"unsupported metric kind {spec!r}")
