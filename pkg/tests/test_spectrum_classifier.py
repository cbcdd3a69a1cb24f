"""Tests for the exact multiplicity classification."""
from fractions import Fraction

import pytest

from src.exceptions import CandidateError, DimensionError, PartitionError
from src.models import CertificateVerdict, Rule, SpectrumCandidate
from src.rational_poly import RationalPoly, sturm_real_root_count
from src.spectrum_classifier import (
    FORM_TIMES_LINE,
    OPPOSITE_FORMS,
    assess_candidate,
    balance_sum,
    check_identities,
    classify,
    exclude_l3,
    multiplicity_filters,
    partitions,
    product_spectrum,
    residual_system,
    search_candidates,
    simple_triple_cubic,
    to_u,
    verify_certificate,
)

F = Fraction


CURVATURES = (F(1), F(2), F(1, 3))


def catalog_witnesses():
    for K in CURVATURES:
        for n in range(4, 9):
            yield product_spectrum(FORM_TIMES_LINE, n, K=K)
            for m in range(2, n - 1):
                yield product_spectrum(OPPOSITE_FORMS, n, m, K=K)


class TestTransform:
    @pytest.mark.parametrize(
        "r, m, n, expected",
        [
            ((2, 0), (3, 1), 4, (2, -2)),
            ((1, -1), (2, 2), 4, (2, -2)),
            ((1, -2), (2, 3), 5, (3, -3)),
        ],
    )
    def test_to_u(self, r, m, n, expected):
        assert to_u(r, m, n) == tuple(F(value) for value in expected)

    def test_multiplicity_mismatch(self):
        with pytest.raises(PartitionError):
            to_u((1, 2), (2, 1), 4)


class TestResidualSystem:
    def test_witnesses_vanish(self):
        assert residual_system((2, -2), (3, 1), 4) == (0, 0)
        assert residual_system((3, -3), (2, 3), 5) == (0, 0)

    def test_nonzero(self):
        residual = residual_system((2, -1), (2, 2), 4)
        assert residual[0] == F(-2, 3)
        assert residual[1] != 0

    def test_scale_invariance(self):
        u, m = (F(5), F(-1, 3), F(2, 7)), (3, 2, 2)
        for c in (F(-3), F(1, 11), F(7, 2)):
            assert residual_system(tuple(c * value for value in u), m, 7) == residual_system(u, m, 7)

    @pytest.mark.parametrize("u", [(1, 1), (0, 2)])
    def test_invalid_values(self, u):
        with pytest.raises(CandidateError):
            residual_system(u, (2, 2), 4)


class TestIdentities:
    def test_witness(self):
        check = check_identities((2, -2), (3, 1), 4)
        assert (check.a, check.b, check.c, check.d) == (0, 0, (0, 0), 0)
        assert check.vanishes

    def test_second_witness(self):
        assert check_identities((3, -3), (2, 3), 5).vanishes

    def test_non_solution(self):
        check = check_identities((1, -2), (2, 2), 4)
        assert check.a == -4
        assert not check.vanishes

    def test_every_catalog_witness(self):
        for candidate in catalog_witnesses():
            assert all(value == 0 for value in residual_system(candidate.u, candidate.m, candidate.n))
            assert check_identities(candidate.u, candidate.m, candidate.n).vanishes
            assert all(balance_sum(candidate.u, candidate.m, candidate.n, t) == 0 for t in range(2))

    def test_balance_sum_tracks_residual(self):
        u, m, n = (F(2), F(-1)), (2, 2), 4
        residual = residual_system(u, m, n)
        assert [balance_sum(u, m, n, t) for t in range(2)] == [-value / (n - 2) for value in residual]


class TestExcludeL3:
    @pytest.mark.parametrize(
        "n, m, p, q",
        [(4, (2, 1, 1), 9, 20), (5, (3, 1, 1), 16, 28), (8, (3, 3, 2), 180, 504)],
    )
    def test_coefficients(self, n, m, p, q):
        certificate = exclude_l3(n, m)
        assert certificate.verdict == CertificateVerdict.REJECTED
        assert certificate.rule == Rule.L3_QUADRATIC
        first = certificate.witness["labelings"][0]
        assert (first["P"], first["Q"]) == (p, q)
        assert len(certificate.witness["labelings"]) == 3
        assert verify_certificate(certificate)

    def test_every_three_part_partition(self):
        for n in range(4, 31):
            for m in partitions(n, 3):
                certificate = exclude_l3(n, m)
                assert certificate.verdict == CertificateVerdict.REJECTED
                assert all(item["P"] > 0 and item["Q"] > 0 for item in certificate.witness["labelings"])
                assert verify_certificate(certificate)

    def test_malformed(self):
        with pytest.raises(PartitionError):
            exclude_l3(5, (2, 2, 2))
        with pytest.raises(PartitionError):
            exclude_l3(4, (2, 2))


class TestMultiplicityFilters:
    def test_no_dominant_class(self):
        certificate = multiplicity_filters(8, 4, (4, 2, 1, 1))
        assert certificate.rule == Rule.DOMINANT_MULTIPLICITY
        assert verify_certificate(certificate)

    def test_simple_triple_passes(self):
        assert multiplicity_filters(7, 4, (4, 1, 1, 1)) is None

    def test_class_count_bound(self):
        certificate = multiplicity_filters(6, 4, (3, 1, 1, 1))
        assert certificate.rule == Rule.L_BOUND
        assert certificate.witness["bound"] == 3
        assert verify_certificate(certificate)

    def test_three_classes_use_quadratic(self):
        assert multiplicity_filters(7, 3, (5, 1, 1)).rule == Rule.L3_QUADRATIC

    def test_two_classes_pass(self):
        assert multiplicity_filters(6, 2, (3, 3)) is None

    def test_l_mismatch(self):
        with pytest.raises(PartitionError):
            multiplicity_filters(7, 3, (4, 1, 1, 1))


class TestCubic:
    def test_n7(self):
        cubic = simple_triple_cubic(7)
        assert cubic == RationalPoly.of(1, 2, 2, 1)
        assert str(cubic) == "x**3 + 2*x**2 + 2*x + 1"

    def test_n8_and_n4(self):
        assert simple_triple_cubic(8) == RationalPoly.of(1, F(15, 7), F(15, 7), 1)
        assert simple_triple_cubic(4) == RationalPoly.of(1, 1, 1, 1)

    def test_one_real_root_always(self):
        for n in range(4, 201):
            cubic = simple_triple_cubic(n)
            assert cubic(-1) == 0
            assert sturm_real_root_count(cubic) == 1

    def test_small_dimension(self):
        with pytest.raises(DimensionError):
            simple_triple_cubic(3)


class TestProductSpectrum:
    def test_form_times_line(self):
        candidate = product_spectrum(FORM_TIMES_LINE, 4)
        assert (candidate.r, candidate.m, candidate.u, candidate.s) == ((2, 0), (3, 1), (2, -2), 6)

    def test_opposite_forms(self):
        assert product_spectrum(OPPOSITE_FORMS, 4, 2).u == (2, -2)
        candidate = product_spectrum(OPPOSITE_FORMS, 5, 2)
        assert (candidate.r, candidate.m, candidate.u) == ((1, -2), (2, 3), (3, -3))

    def test_curvature_scale(self):
        assert product_spectrum(OPPOSITE_FORMS, 6, 3, K=F(1, 2)).r == (1, -1)

    def test_out_of_range(self):
        with pytest.raises(PartitionError):
            product_spectrum(OPPOSITE_FORMS, 5, 1)
        with pytest.raises(ValueError):
            product_spectrum("torus", 5)


class TestPartitions:
    def test_descending_order(self):
        assert list(partitions(7, 3)) == [(5, 1, 1), (4, 2, 1), (3, 3, 1), (3, 2, 2)]

    def test_counts(self):
        assert len(list(partitions(8, 4))) == 5
        assert list(partitions(4, 4)) == [(1, 1, 1, 1)]
        assert list(partitions(3, 4)) == []


class TestAssessCandidate:
    def test_rejects_nonzero_residual(self):
        certificate = assess_candidate(SpectrumCandidate(4, (2, 2), u=(2, -1)))
        assert certificate.rule == Rule.RESIDUAL_NONZERO
        assert certificate.verdict == CertificateVerdict.REJECTED
        assert verify_certificate(certificate)

    def test_admits_product_spectrum(self):
        certificate = assess_candidate(SpectrumCandidate(4, (3, 1), r=(2, 0), s=6))
        assert certificate.verdict == CertificateVerdict.ADMITTED
        assert certificate.rule == Rule.PRODUCT_WITNESS

    def test_zero_u_value_is_rejected(self):
        candidate = SpectrumCandidate(4, (3, 1), r=(1, 3))
        assert to_u(candidate.r, candidate.m, candidate.n) == (0, 4)
        certificate = assess_candidate(candidate)
        assert certificate.verdict == CertificateVerdict.REJECTED
        assert certificate.rule == Rule.U_NONZERO
        assert certificate.witness["zero"] == [0]
        assert certificate.witness["residual"] == [1]
        assert verify_certificate(certificate)

    def test_zero_u_witness_is_rechecked(self):
        certificate = assess_candidate(SpectrumCandidate(4, (3, 1), r=(1, 3)))
        certificate.witness["zero"] = [1]
        assert not verify_certificate(certificate)

    def test_shape_only(self):
        assert assess_candidate(SpectrumCandidate(7, (4, 1, 1, 1))).rule == Rule.CUBIC_ROOT_COUNT

    def test_undecided_shape(self):
        assert assess_candidate(SpectrumCandidate(9, (5, 2, 1, 1))) is None


class TestVerifyCertificate:
    def test_tampered_witness(self):
        certificate = exclude_l3(5, (3, 1, 1))
        certificate.witness["labelings"][0]["P"] = 15
        assert not verify_certificate(certificate)

    def test_every_rejection_rechecks(self):
        for n in range(4, 10):
            for certificate in classify(n).rejected:
                assert verify_certificate(certificate), certificate


class TestClassify:
    def test_dimension_four(self):
        report = classify(4)
        assert [(shape.l, shape.m) for shape in report.admitted] == [(1, (4,)), (2, (3, 1)), (2, (2, 2))]
        assert [(c.candidate.m, c.rule) for c in report.rejected] == [
            ((2, 1, 1), Rule.L3_QUADRATIC),
            ((1, 1, 1, 1), Rule.L_BOUND),
        ]
        assert report.undecided == ()
        assert report.enumerated == 5

    def test_dimension_seven(self):
        report = classify(7)
        rules = {c.candidate.m: c.rule for c in report.rejected}
        for m in [(5, 1, 1), (4, 2, 1), (3, 3, 1), (3, 2, 2)]:
            assert rules[m] == Rule.L3_QUADRATIC
        assert rules[(4, 1, 1, 1)] == Rule.CUBIC_ROOT_COUNT
        assert all(rule == Rule.L_BOUND for m, rule in rules.items() if len(m) >= 5)

    def test_dimension_eight_cubic(self):
        cubic = next(c for c in classify(8).rejected if c.candidate.m == (5, 1, 1, 1))
        assert cubic.rule == Rule.CUBIC_ROOT_COUNT
        assert cubic.witness["coefficients"] == [1, F(15, 7), F(15, 7), 1]
        assert cubic.witness["sturm_count"] == 1
        assert cubic.witness["rejecting_count"] == 1
        assert verify_certificate(cubic)

    def test_cubic_witness_with_wrong_count_fails(self):
        cubic = next(c for c in classify(7).rejected if c.rule == Rule.CUBIC_ROOT_COUNT)
        cubic.witness["sturm_count"] = 3
        assert not verify_certificate(cubic)

    @pytest.mark.parametrize("n", range(4, 9))
    def test_low_dimensions_fully_decided(self, n):
        report = classify(n)
        assert report.undecided == ()
        expected = [(n,), (n - 1, 1)] + [(n - m, m) for m in range(2, n // 2 + 1)]
        assert sorted(shape.m for shape in report.admitted) == sorted(expected)
        assert len(report.admitted) + len(report.rejected) == report.enumerated
        families = {shape.m: shape.family for shape in report.admitted}
        assert families[(n - 1, 1)] == FORM_TIMES_LINE

    def test_l_max(self):
        report = classify(6, l_max=2)
        assert report.enumerated == 1 + 3
        assert report.rejected == ()

    def test_dimension_nine_is_undecided_somewhere(self):
        report = classify(9, l_max=4)
        assert (5, 2, 1, 1) in [shape.m for shape in report.undecided]
        assert "undecided" in report.summary

    def test_search_attaches_candidates(self):
        report = classify(9, l_max=4, search_trials=2, seed=3)
        for shape in report.undecided:
            assert all(candidate["note"].startswith("numeric candidate") for candidate in shape.candidates)

    def test_needs_dimension_four(self):
        with pytest.raises(DimensionError):
            classify(3)


class TestSearchCandidates:
    def test_form_times_line(self):
        found = search_candidates(4, (3, 1), trials=20, seed=0)
        assert found
        for candidate in found:
            assert candidate["u"] == pytest.approx([1.0, -1.0], abs=1e-8)
            assert candidate["rational"] == [1, -1]
            assert candidate["exact"]

    def test_opposite_forms(self):
        found = search_candidates(5, (2, 3), trials=20, seed=1)
        assert found
        assert found[0]["u"] == pytest.approx([1.0, -1.0], abs=1e-8)

    def test_simple_triple_has_no_solution(self):
        assert search_candidates(7, (4, 1, 1, 1), trials=50, seed=0) == []

    def test_no_trials(self):
        assert search_candidates(7, (4, 1, 1, 1), trials=0) == []

    def test_needs_two_classes(self):
        with pytest.raises(PartitionError):
            search_candidates(5, (5,), trials=3)
