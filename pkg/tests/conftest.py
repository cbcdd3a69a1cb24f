import json

import numpy as np
import pytest

from src.metric_catalog import ConformalField, PerturbationField, form_times_line, opposite_forms, space_form
from src.models import PointMetric
from src.tensor_core import product_tensor

OPPOSITE_SPEC = {
    "kind": "product",
    "dim": 4,
    "params": {
        "factors": [
            {"kind": "space_form", "dim": 2, "params": {"curvature": 1}},
            {"kind": "space_form", "dim": 2, "params": {"curvature": "-1"}},
        ]
    },
}


@pytest.fixture
def identity4():
    return PointMetric.identity(4)


@pytest.fixture
def sphere4():
    return space_form(4, 1)


@pytest.fixture
def opposite_product():
    """S^2(1) x H^2(-1)."""
    return opposite_forms(2, 4)


@pytest.fixture
def sphere_times_line():
    return form_times_line(4)


@pytest.fixture
def quadratic_conformal():
    """exp(2 x_1^2) delta on a 4-ball."""
    return ConformalField(4, "quadratic", (1.0, 0.0, 0.0, 0.0))


@pytest.fixture
def perturbation():
    return PerturbationField(4, 0.1)


@pytest.fixture
def opposite_curvature():
    return product_tensor([(2, 1.0), (2, -1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def opposite_spec_file(write_json):
    return write_json("opposite.json", OPPOSITE_SPEC)
