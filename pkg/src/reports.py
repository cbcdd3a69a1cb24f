"""Deterministic JSON encoding of reports.

Rationals become "p/q" strings, non-finite floats become "inf", "-inf" or "nan",
and keys are sorted so identical runs give identical bytes.
"""
import dataclasses
import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .models import AdmittedShape, Certificate, ClassificationReport, UndecidedShape
from .settings import settings

TOOL = "lcflab"


def _float(value: float) -> Any:
    if math.isfinite(value):
        return value
    return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")


def to_jsonable(obj: Any) -> Any:
    """Convert reports, numpy values and rationals into plain JSON values."""
    match obj:
        case Certificate():
            return certificate_json(obj)
        case ClassificationReport():
            return classification_json(obj)
        case Enum():
            return obj.value
        case bool() | None | str() | int():
            return obj
        case Fraction():
            return str(obj)
        case float() | np.floating():
            return _float(float(obj))
        case np.integer():
            return int(obj)
        case np.ndarray():
            return to_jsonable(obj.tolist())
        case dict():
            return {str(key): to_jsonable(value) for key, value in obj.items()}
        case list() | tuple():
            return [to_jsonable(value) for value in obj]
        case _ if dataclasses.is_dataclass(obj):
            return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def certificate_json(certificate: Certificate) -> dict[str, Any]:
    candidate = certificate.candidate
    data = {
        "l": candidate.l,
        "m": list(candidate.m),
        "rule": certificate.rule.value,
        "verdict": certificate.verdict.value,
        "witness": to_jsonable(certificate.witness),
        "note": certificate.note,
    }
    for name in ("u", "r", "s"):
        value = getattr(candidate, name)
        if value is not None:
            data[name] = to_jsonable(value)
    return data


def _admitted_json(shape: AdmittedShape) -> dict[str, Any]:
    return {
        "l": shape.l,
        "m": list(shape.m),
        "family": shape.family,
        "basis": shape.basis,
        "certificate": certificate_json(shape.certificate),
    }


def _undecided_json(shape: UndecidedShape) -> dict[str, Any]:
    return {"l": shape.l, "m": list(shape.m), "reason": shape.reason, "candidates": to_jsonable(shape.candidates)}


def classification_json(report: ClassificationReport) -> dict[str, Any]:
    return {
        "n": report.n,
        "l_max": report.l_max,
        "enumerated": report.enumerated,
        "admitted": [_admitted_json(shape) for shape in report.admitted],
        "rejected": [certificate_json(certificate) for certificate in report.rejected],
        "undecided": [_undecided_json(shape) for shape in report.undecided],
        "summary": report.summary,
    }


def envelope(command: str, config: dict[str, Any], seed: Optional[int], report: Any) -> dict[str, Any]:
    """Wrap a report with the tool version, config echo, seed and tolerances."""
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": to_jsonable(config),
        "seed": seed,
        "tolerances": to_jsonable(settings.tolerances),
        "report": to_jsonable(report),
    }


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(data: Any, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
