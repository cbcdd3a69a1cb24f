"""Calibration suite for the curvature algebra and the finite-difference pipeline."""
import logging
from typing import Callable

import numpy as np

from .logging import log_operation
from .metric_catalog import conformal_fields, form_times_line, opposite_forms, space_form
from .metric_lab import riemann_at, sample_points
from .models import CalibrationRow, PointMetric, RicciTensor
from .tensor_core import (
    jacobi_operator,
    lcf_curvature_from_ricci,
    product_tensor,
    ricci_contract,
    ricci_operator,
    sectional,
    sym_eigen,
    weyl_tensor,
)

logger = logging.getLogger(__name__)

ALGEBRA_TOL = 1e-9
FD_TOL = 1e-4
DIMENSIONS = range(4, 9)


def random_metric(rng: np.random.Generator, n: int) -> PointMetric:
    a = rng.standard_normal((n, n))
    return PointMetric(a @ a.T + n * np.eye(n))


def random_ricci(rng: np.random.Generator, n: int) -> RicciTensor:
    a = rng.standard_normal((n, n))
    return RicciTensor((a + a.T) / 2)


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


class Calibration:
    """Runs each check and collects one row per check."""

    def __init__(self, seed: int = 0, samples: int = 100, points: int = 20):
        self.seed = seed
        self.samples = samples
        self.points = points

    def _random_inputs(self, n: int):
        rng = np.random.default_rng([self.seed, n])
        for _ in range(self.samples):
            g = random_metric(rng, n)
            yield rng, g, random_ricci(rng, n)

    def roundtrip(self) -> float:
        worst = 0.0
        for n in DIMENSIONS:
            for _, g, ric in self._random_inputs(n):
                contracted, s = ricci_contract(lcf_curvature_from_ricci(ric, None, g), g)
                worst = max(worst, _relative(contracted.components, ric.components), abs(s - ric.trace(g)))
        return worst

    def weyl_split(self) -> float:
        worst = 0.0
        for n in DIMENSIONS:
            for _, g, ric in self._random_inputs(n):
                R = lcf_curvature_from_ricci(ric, None, g)
                worst = max(worst, weyl_tensor(R, g).max_abs() / max(1.0, R.max_abs()))
        return worst

    def symmetries(self) -> float:
        worst = 0.0
        for n in DIMENSIONS:
            for _, g, ric in self._random_inputs(n):
                worst = max(worst, lcf_curvature_from_ricci(ric, None, g).symmetry_violation())
        return worst

    def jacobi_trace(self) -> float:
        worst = 0.0
        for n in DIMENSIONS:
            for rng, g, ric in self._random_inputs(n):
                x = rng.standard_normal(n)
                trace = float(np.trace(jacobi_operator(lcf_curvature_from_ricci(ric, None, g), x, g).matrix))
                expected = float(x @ ric.components @ x) / g.inner(x, x)
                worst = max(worst, abs(trace - expected) / max(1.0, abs(expected)))
        return worst

    def product_weyl(self) -> float:
        """Weyl size of S^2(1) x S^2(1), which is not conformally flat."""
        g = PointMetric.identity(4)
        return float(np.sqrt(np.sum(weyl_tensor(product_tensor([(2, 1.0), (2, 1.0)]), g).components ** 2)))

    def sphere_sectional(self) -> float:
        field = space_form(4, 1)
        worst = 0.0
        for p in sample_points(field, 5, self.seed):
            R = riemann_at(field, p)
            g = field.metric_at(p)
            for i in range(4):
                for j in range(i + 1, 4):
                    worst = max(worst, abs(sectional(R, np.eye(4)[i], np.eye(4)[j], g) - 1))
        return worst

    def product_spectra(self) -> float:
        worst = 0.0
        for field, expected in ((opposite_forms(2, 4), [-1, -1, 1, 1]), (form_times_line(4), [0, 2, 2, 2])):
            for p in sample_points(field, 3, self.seed):
                g = field.metric_at(p)
                ric, _ = ricci_contract(riemann_at(field, p), g)
                values = sym_eigen(ricci_operator(ric, g)).eigenvalues
                worst = max(worst, float(np.max(np.abs(values - expected))))
        return worst

    def _conformal_samples(self):
        for field in conformal_fields(4):
            for p in sample_points(field, self.points, self.seed):
                yield riemann_at(field, p), field.metric_at(p)

    def conformal_oracle(self) -> float:
        """Largest gap between the finite-difference tensor and its conformally flat synthesis."""
        worst = 0.0
        for R, g in self._conformal_samples():
            ric, s = ricci_contract(R, g)
            worst = max(worst, float(np.max(np.abs(lcf_curvature_from_ricci(ric, s, g).components - R.components))))
        return worst

    def conformal_weyl(self) -> float:
        return max(float(np.sqrt(np.sum(weyl_tensor(R, g).components ** 2))) for R, g in self._conformal_samples())

    def checks(self) -> list[tuple[str, Callable[[], float], float, str]]:
        return [
            ("roundtrip", self.roundtrip, ALGEBRA_TOL, "<"),
            ("weyl_split", self.weyl_split, ALGEBRA_TOL, "<"),
            ("symmetries", self.symmetries, ALGEBRA_TOL, "<"),
            ("jacobi_trace", self.jacobi_trace, ALGEBRA_TOL, "<"),
            ("product_weyl", self.product_weyl, 0.1, ">"),
            ("sphere_sectional", self.sphere_sectional, FD_TOL, "<"),
            ("product_spectra", self.product_spectra, FD_TOL, "<"),
            ("conformal_oracle", self.conformal_oracle, FD_TOL, "<"),
            ("conformal_weyl", self.conformal_weyl, FD_TOL, "<"),
        ]

    @log_operation(logger)
    def run(self) -> list[CalibrationRow]:
        rows = []
        for name, check, threshold, comparison in self.checks():
            row = CalibrationRow(name, check(), threshold, comparison)
            logger.info("%s: %.3e (%s %g) %s", name, row.value, comparison, threshold, "pass" if row.passed else "FAIL")
            rows.append(row)
        return rows


def format_table(rows: list[CalibrationRow]) -> str:
    width = max(len(row.name) for row in rows)
    lines = [f"{'check':<{width}}  {'value':>10}  {'threshold':>11}  result"]
    for row in rows:
        threshold = f"{row.comparison} {row.threshold:g}"
        lines.append(f"{row.name:<{width}}  {row.value:>10.3e}  {threshold:>11}  {'pass' if row.passed else 'FAIL'}")
    return "\n".join(lines)
