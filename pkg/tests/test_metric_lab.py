"""Tests for finite-difference geometry, geodesics and scans on catalog fields."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.exceptions import ClusterAssignmentError, DegenerateInputError, DomainGuardError
from src.metric_catalog import (
    ConformalField,
    FlatField,
    FrameField,
    conformal_fields,
    product,
    space_form,
)
from src.metric_lab import (
    check_metric,
    christoffel,
    codazzi_residual,
    cross_cluster_balance,
    cspace_scan,
    frame_connection_check,
    integrate_geodesic,
    metric_at,
    nabla_ricci,
    ricci_constancy_scan,
    riemann_at,
    sample_points,
)
from src.models import GeodesicState, Verdict
from src.tensor_core import lcf_curvature_from_ricci, ricci_contract, ricci_operator, sectional, sym_eigen, weyl_tensor


def ricci_eigenvalues(field, p):
    g = metric_at(field, p)
    ric, _ = ricci_contract(riemann_at(field, p), g)
    return sym_eigen(ricci_operator(ric, g)).eigenvalues


class TestChristoffel:
    def test_flat_is_exactly_zero(self):
        assert not np.any(christoffel(FlatField(4), [0.3, -0.2, 0.1, 0.4]))

    def test_linear_conformal_closed_form(self):
        c = np.array([0.3, -0.1, 0.2, 0.5])
        field = ConformalField(4, "linear", tuple(c))
        delta = np.eye(4)
        expected = (
            np.einsum("ik,j->ijk", delta, c) + np.einsum("jk,i->ijk", delta, c) - np.einsum("ij,k->ijk", delta, c)
        )
        assert_allclose(christoffel(field, [0.1, 0.2, -0.3, 0.05]), expected, atol=1e-6)

    def test_space_form_origin(self):
        assert_allclose(christoffel(space_form(4, 1), np.zeros(4)), 0.0, atol=1e-10)

    def test_symmetric_lower_pair(self, quadratic_conformal):
        gamma = christoffel(quadratic_conformal, [0.3, 0.1, 0.0, -0.2])
        assert_allclose(gamma, np.swapaxes(gamma, 0, 1), atol=1e-12)


class TestRiemann:
    def test_flat_is_exactly_zero(self):
        assert riemann_at(FlatField(4), [0.5, 0.1, 0.0, 0.2]).max_abs() == 0.0

    def test_sphere_sectional_curvatures(self, sphere4):
        for p in sample_points(sphere4, 3, seed=7):
            R = riemann_at(sphere4, p)
            g = metric_at(sphere4, p)
            for i in range(4):
                for j in range(i + 1, 4):
                    assert sectional(R, np.eye(4)[i], np.eye(4)[j], g) == pytest.approx(1.0, abs=1e-4)
            assert R.symmetry_violation() < 1e-5

    def test_opposite_product_ricci(self, opposite_product):
        for p in sample_points(opposite_product, 3, seed=3):
            assert_allclose(ricci_eigenvalues(opposite_product, p), [-1, -1, 1, 1], atol=1e-4)

    @pytest.mark.parametrize("field", conformal_fields(4), ids=lambda f: f.profile)
    def test_conformal_fields_are_weyl_free(self, field):
        for p in sample_points(field, 20, seed=11):
            R = riemann_at(field, p)
            g = metric_at(field, p)
            ric, s = ricci_contract(R, g)
            assert_allclose(lcf_curvature_from_ricci(ric, s, g).components, R.components, atol=1e-4)
            assert np.linalg.norm(weyl_tensor(R, g).components) < 1e-4


class TestNablaRicci:
    def test_space_form(self):
        field = space_form(4, -1)
        assert_allclose(nabla_ricci(field, [0.3, 0.1, -0.2, 0.0]), 0.0, atol=1e-4)

    def test_opposite_product(self, opposite_product):
        assert_allclose(nabla_ricci(opposite_product, [0.2, -0.1, 0.3, 0.1]), 0.0, atol=1e-4)

    def test_quadratic_conformal_is_not_parallel(self, quadratic_conformal):
        nabla = nabla_ricci(quadratic_conformal, [0.3, 0.0, 0.0, 0.0])
        assert np.max(np.abs(np.einsum("iii->i", nabla))) > 1e-2
        assert_allclose(nabla, np.swapaxes(nabla, 1, 2), atol=1e-12)


class TestCodazzi:
    @pytest.mark.parametrize("field", conformal_fields(4), ids=lambda f: f.profile)
    def test_conformal_fields(self, field):
        for p in sample_points(field, 20, seed=5):
            assert codazzi_residual(field, p) < 1e-4

    def test_product_of_spheres_passes(self):
        field = product(space_form(2, 1), space_form(2, 1))
        assert codazzi_residual(field, [0.1, 0.2, -0.3, 0.1]) < 1e-4

    def test_perturbation_fails(self, perturbation):
        assert codazzi_residual(perturbation, [0.2, 0.2, 0.0, 0.0]) > 1e-3


class TestGeodesics:
    def test_flat_straight_line(self):
        path = integrate_geodesic(FlatField(4), GeodesicState(np.zeros(4), np.eye(4)[0]), 0.1, 10)
        positions = np.array([state.position for state in path.states])
        assert_allclose(positions, 0.1 * np.arange(11)[:, None] * np.eye(4)[0], atol=1e-12)
        assert path.steps_completed == 10
        assert path.states[-1].t == pytest.approx(1.0)
        assert not path.truncated

    def test_radial_geodesic_of_sphere_chart(self):
        path = integrate_geodesic(space_form(2, 1), GeodesicState(np.zeros(2), [1.0, 0.0]), 0.01, 100)
        positions = np.array([state.position for state in path.states])
        assert_allclose(positions[:, 1], 0.0, atol=1e-12)
        assert np.all(np.diff(positions[:, 0]) > 0)
        assert path.drift < 1e-6

    def test_product_decouples(self):
        sphere, hyperbolic = space_form(2, 1), space_form(2, -1)
        field = product(sphere, hyperbolic)
        x0, v0 = np.array([0.1, -0.2, 0.3, 0.1]), np.array([0.5, 0.3, -0.4, 0.6])

        full = integrate_geodesic(field, GeodesicState(x0, v0), 0.01, 50)
        first = integrate_geodesic(sphere, GeodesicState(x0[:2], v0[:2]), 0.01, 50)
        second = integrate_geodesic(hyperbolic, GeodesicState(x0[2:], v0[2:]), 0.01, 50)

        positions = np.array([state.position for state in full.states])
        assert_allclose(positions[:, :2], [state.position for state in first.states], atol=1e-8)
        assert_allclose(positions[:, 2:], [state.position for state in second.states], atol=1e-8)

    def test_leaving_the_guard_truncates(self):
        field = FlatField(2, radius=0.5)
        path = integrate_geodesic(field, GeodesicState(np.zeros(2), [1.0, 0.0]), 0.1, 20)
        assert path.truncated
        assert path.steps_completed < 20
        assert "guard" in path.reason

    def test_zero_velocity(self):
        with pytest.raises(DegenerateInputError):
            integrate_geodesic(FlatField(2), GeodesicState(np.zeros(2), np.zeros(2)), 0.1, 5)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            integrate_geodesic(FlatField(2), GeodesicState(np.zeros(2), [1.0, 0.0]), 0.0, 5)


class TestSamplePoints:
    def test_reproducible_and_inside_ball(self, sphere4):
        first = sample_points(sphere4, 10, seed=42, radius=0.5)
        assert first.shape == (10, 4)
        assert np.all(np.linalg.norm(first, axis=1) < 0.5)
        assert_allclose(first, sample_points(sphere4, 10, seed=42, radius=0.5))

    def test_radius_beyond_guard(self):
        with pytest.raises(DomainGuardError):
            sample_points(FlatField(2, radius=1.0), 50, seed=0, radius=5.0)


class TestCspaceScan:
    @pytest.mark.parametrize("curvature, expected", [(1, [0, 1, 1, 1]), (-1, [-1, -1, -1, 0])])
    def test_space_forms_are_cspaces(self, curvature, expected):
        report = cspace_scan(space_form(4, curvature), 20, seed=0, h=0.01, steps=100)
        assert report.verdict == Verdict.CONSTANT
        assert report.deviation < 1e-5
        assert len(report.samples) == 20
        for sample in report.samples:
            assert_allclose(sample["eigenvalues"], expected, atol=1e-5)
            assert sample["steps_completed"] == 100

    def test_opposite_product_random_directions(self, opposite_product):
        report = cspace_scan(opposite_product, 20, seed=0, h=0.01, steps=100)
        assert report.verdict == Verdict.CONSTANT
        assert report.deviation < 1e-5

    def test_opposite_product_equal_split(self, opposite_product):
        report = cspace_scan(opposite_product, 3, seed=1, velocity=[1.0, 0.0, 1.0, 0.0])
        assert report.deviation < 1e-5
        assert_allclose(report.samples[0]["eigenvalues"], [-0.5, 0, 0, 0.5], atol=1e-5)

    def test_quadratic_conformal_is_not(self, quadratic_conformal):
        report = cspace_scan(quadratic_conformal, 4, seed=2)
        assert report.deviation > 1e-2
        assert report.verdict == Verdict.NON_CONSTANT

    def test_thread_count_does_not_change_report(self, sphere4):
        serial = cspace_scan(sphere4, 4, seed=9, steps=10, threads=1)
        parallel = cspace_scan(sphere4, 4, seed=9, steps=10, threads=3)
        assert serial.samples == parallel.samples
        assert serial.deviation == parallel.deviation

    def test_metadata(self, sphere4):
        report = cspace_scan(sphere4, 2, seed=5, h=0.02, steps=10, tol=1e-3)
        assert (report.kind, report.seed, report.h, report.steps, report.tolerance) == ("cspace", 5, 0.02, 10, 1e-3)
        assert report.metric == sphere4.to_spec()

    def test_bad_velocity(self, sphere4):
        with pytest.raises(DegenerateInputError):
            cspace_scan(sphere4, 2, seed=0, velocity=[0.0, 0.0, 0.0, 0.0])


class TestRicciScan:
    def test_space_form(self, sphere4):
        report = ricci_constancy_scan(sphere4, sample_points(sphere4, 5, seed=0))
        assert report.deviation < 1e-4
        assert_allclose(report.samples[0]["eigenvalues"], [3, 3, 3, 3], atol=1e-4)

    def test_sphere_times_line(self, sphere_times_line):
        report = ricci_constancy_scan(sphere_times_line, sample_points(sphere_times_line, 5, seed=0))
        assert report.verdict == Verdict.CONSTANT
        assert_allclose(report.samples[-1]["eigenvalues"], [0, 2, 2, 2], atol=1e-4)

    def test_quadratic_conformal_is_not_constant(self, quadratic_conformal):
        report = ricci_constancy_scan(quadratic_conformal, sample_points(quadratic_conformal, 20, seed=0))
        assert report.verdict == Verdict.NON_CONSTANT
        assert report.deviation > 1e-2

    def test_gaussian_conformal(self):
        field = ConformalField(4, "gaussian", (1.0,))
        report = ricci_constancy_scan(field, sample_points(field, 10, seed=0))
        assert report.deviation > 1e-2


class TestFrameConnection:
    @pytest.mark.parametrize("fixture", ["opposite_product", "sphere_times_line"])
    def test_products(self, fixture, request):
        field = request.getfixturevalue(fixture)
        frame = FrameField(field)
        for p in sample_points(field, 3, seed=4):
            report = frame_connection_check(field, frame, p)
            assert report.exchange_max < 1e-5
            assert report.diagonal_max < 1e-5
            assert report.cluster_count == 2
            assert cross_cluster_balance(field, frame, p) < 1e-5

    def test_flat(self):
        field = FlatField(4)
        report = frame_connection_check(field, FrameField(field), [0.1, 0.2, 0.3, 0.4])
        assert report.exchange_max < 1e-12
        assert report.diagonal_max < 1e-12

    def test_rotated_frame_is_not_an_eigenframe(self, opposite_product):
        class RotatedFrame(FrameField):
            def vectors(self, points):
                frame = super().vectors(points)
                rotation = np.eye(4)
                rotation[[1, 1, 2, 2], [1, 2, 1, 2]] = np.array([1.0, 1.0, -1.0, 1.0]) / np.sqrt(2)
                return rotation @ frame

        with pytest.raises(ClusterAssignmentError):
            frame_connection_check(opposite_product, RotatedFrame(opposite_product), [0.0, 0.0, 0.0, 0.0])


class TestCheckMetric:
    def test_opposite_product(self, opposite_product):
        report = check_metric(opposite_product, sample_points(opposite_product, 3, seed=0))
        assert report.weyl_max < 1e-7
        assert report.codazzi_max < 1e-4
        assert report.nabla_ricci_max < 1e-4
        assert_allclose(report.spectra, [[-1, -1, 1, 1]] * 3, atol=1e-4)

    def test_perturbation(self, perturbation):
        report = check_metric(perturbation, [[0.2, 0.2, 0.0, 0.0]])
        assert report.codazzi_max > 1e-3
        assert report.weyl_max > 1e-3

    def test_weyl_skipped_below_four(self):
        field = space_form(3, 1)
        report = check_metric(field, [[0.1, 0.0, 0.2]])
        assert report.weyl_max is None
        assert report.codazzi_max < 1e-4
