"""Exact classification of constant Ricci spectra of conformally flat metrics.

Work happens in the shifted variables u_k = 2 r_k - s/(n-1), where the constraint
system reads

    n - m_k = 2 u_k sum_{j != k} m_j / (u_k - u_j).

Every rejection carries a certificate whose witness values are enough to re-check
it. Arithmetic is exact throughout; only search_candidates uses floats.
"""
import logging
from fractions import Fraction
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .exceptions import CandidateError, ConsistencyError, DimensionError, PartitionError
from .logging import log_operation
from .models import (
    AdmittedShape,
    Certificate,
    CertificateVerdict,
    ClassificationReport,
    IdentityCheck,
    Rule,
    SpectrumCandidate,
    UndecidedShape,
)
from .rational_poly import RationalPoly, sturm_real_root_count

logger = logging.getLogger(__name__)

FORM_TIMES_LINE = "form_times_line"
OPPOSITE_FORMS = "opposite_forms"
EINSTEIN = "einstein"

CUBIC_REQUIRED_ROOTS = 3
CUBIC_REJECTING_COUNT = 1
SEARCH_TOLERANCE = 1e-10
SEARCH_ITERATIONS = 100
MAX_DENOMINATOR = 1000
NUMERIC_NOTE = "numeric candidate - no exactness claim"


def _check_partition(m: Sequence[int], n: int) -> tuple[int, ...]:
    m = tuple(int(part) for part in m)
    if not m or any(part < 1 for part in m) or sum(m) != n:
        raise PartitionError(f"multiplicities {m} are not a partition of {n}")
    return m


def _check_u(u: Sequence[Any], m: Sequence[int], n: int) -> tuple[tuple[Fraction, ...], tuple[int, ...]]:
    m = _check_partition(m, n)
    u = tuple(Fraction(value) for value in u)
    if len(u) != len(m):
        raise CandidateError(f"{len(u)} u values for {len(m)} multiplicities")
    if len(m) < 2:
        raise PartitionError("the constraint system needs at least two distinct values")
    if any(value == 0 for value in u):
        raise CandidateError(f"u values must be nonzero: {[str(value) for value in u]}")
    if len(set(u)) != len(u):
        raise CandidateError(f"u values must be pairwise distinct: {[str(value) for value in u]}")
    return u, m


def to_u(r: Sequence[Any], m: Sequence[int], n: int) -> tuple[Fraction, ...]:
    """u_k = 2 r_k - s/(n-1) with s = sum m_k r_k."""
    m = _check_partition(m, n)
    r = tuple(Fraction(value) for value in r)
    if len(r) != len(m):
        raise PartitionError(f"{len(r)} eigenvalues for {len(m)} multiplicities")
    s = sum((mk * rk for mk, rk in zip(m, r)), Fraction(0))
    return tuple(2 * rk - s / (n - 1) for rk in r)


def residual_system(u: Sequence[Any], m: Sequence[int], n: int) -> tuple[Fraction, ...]:
    """Residuals (n - m_k) - 2 u_k sum_{j != k} m_j / (u_k - u_j); all zero for admissible spectra."""
    u, m = _check_u(u, m, n)
    return tuple(
        (n - mk) - 2 * uk * sum((mj / (uk - uj) for j, (mj, uj) in enumerate(zip(m, u)) if j != k), Fraction(0))
        for k, (mk, uk) in enumerate(zip(m, u))
    )


def check_identities(u: Sequence[Any], m: Sequence[int], n: int) -> IdentityCheck:
    """Evaluate the weighted sums the constraint system forces to vanish."""
    u, m = _check_u(u, m, n)
    a = sum(((n - mk) * mk * uk for mk, uk in zip(m, u)), Fraction(0))
    b = sum(((n - mk) * mk / uk for mk, uk in zip(m, u)), Fraction(0))
    c = tuple(
        (n - mk) - 2 * sum((mj * uj / (uj - uk) for j, (mj, uj) in enumerate(zip(m, u)) if j != k), Fraction(0))
        for k, (mk, uk) in enumerate(zip(m, u))
    )
    weighted = sum((mk * uk for mk, uk in zip(m, u)), Fraction(0))
    d = sum(((n - 2 * mk) * mk * uk**2 for mk, uk in zip(m, u)), Fraction(0)) + weighted**2
    return IdentityCheck(a=a, b=b, c=c, d=d)


def balance_sum(u: Sequence[Any], m: Sequence[int], n: int, t: int) -> Fraction:
    """Eigenframe sum of R_ijji / (r_i - r_j) over j outside class t, for i in class t.

    Contracting the conformally flat curvature form gives
    (1/(n-2)) sum_{k != t} m_k (u_t + u_k) / (u_t - u_k), which equals -residual_t / (n-2).
    """
    u, m = _check_u(u, m, n)
    if not 0 <= t < len(m):
        raise PartitionError(f"class index {t} out of range for {len(m)} classes")
    total = sum(
        (mk * (u[t] + uk) / (u[t] - uk) for k, (mk, uk) in enumerate(zip(m, u)) if k != t),
        Fraction(0),
    )
    return total / (n - 2)


def _l3_coefficients(n: int, m: tuple[int, ...], odd: int) -> tuple[int, int]:
    b, c = (index for index in range(3) if index != odd)
    p = (n - m[b]) * m[b] * (n - m[c]) * m[c]
    q = 4 * m[odd] * m[b] * m[c] * (n - m[odd]) + 4 * m[b] ** 2 * m[c] ** 2
    return p, q


def exclude_l3(n: int, m: Sequence[int]) -> Certificate:
    """Reject three distinct values for every choice of the class of opposite sign.

    For the pair (b, c) sharing a sign, P (x_b - x_c)^2 + Q x_b x_c = 0 must hold,
    which P > 0 and Q > 0 forbid.
    """
    if n < 4:
        raise DimensionError(f"classification needs n >= 4, got {n}")
    m = _check_partition(m, n)
    if len(m) != 3:
        raise PartitionError(f"expected three multiplicities, got {m}")

    labelings = []
    for odd in range(3):
        p, q = _l3_coefficients(n, m, odd)
        labelings.append({"odd": odd, "pair": [index for index in range(3) if index != odd], "P": p, "Q": q})

    if not all(labeling["P"] > 0 and labeling["Q"] > 0 for labeling in labelings):
        raise ConsistencyError(f"non-positive quadratic coefficients for {m}")
    return Certificate(
        candidate=SpectrumCandidate(n, m),
        verdict=CertificateVerdict.REJECTED,
        rule=Rule.L3_QUADRATIC,
        witness={"labelings": labelings},
        note="P (x_b - x_c)^2 + Q x_b x_c > 0 whenever x_b x_c > 0",
    )


def _l_bound(n: int) -> int:
    return n // 2 if n % 2 == 0 else (n + 1) // 2


def multiplicity_filters(n: int, l: int, m: Sequence[int]) -> Optional[Certificate]:  # noqa: E741
    """Apply the multiplicity filters; None means the shape passes.

    Order: three classes go to exclude_l3; four or more are checked against the
    class-count bound, then n >= 7, then for a single dominant class m_k > n/2.
    """
    m = _check_partition(m, n)
    if l != len(m):
        raise PartitionError(f"l={l} does not match multiplicities {m}")
    if l <= 2:
        return None
    if l == 3:
        return exclude_l3(n, m)

    candidate = SpectrumCandidate(n, m)
    bound = _l_bound(n)
    if l > bound:
        return Certificate(
            candidate, CertificateVerdict.REJECTED, Rule.L_BOUND, {"n": n, "l": l, "bound": bound}, "l exceeds bound"
        )
    if n < 7:
        return Certificate(
            candidate, CertificateVerdict.REJECTED, Rule.L_BOUND, {"n": n, "l": l, "min_n": 7}, "l >= 4 needs n >= 7"
        )

    dominant = sum(1 for part in m if 2 * part > n)
    if dominant != 1:
        return Certificate(
            candidate,
            CertificateVerdict.REJECTED,
            Rule.DOMINANT_MULTIPLICITY,
            {"n": n, "m": list(m), "half": Fraction(n, 2), "dominant": dominant},
            "sum (n - 2 m_k) m_k u_k^2 = -(sum m_k u_k)^2 needs exactly one m_k > n/2",
        )
    return None


def simple_triple_cubic(n: int) -> RationalPoly:
    """Cubic whose roots are the ratios x_i = u_i / u_dominant for the shape (n-3, 1, 1, 1).

    The elementary symmetric values are rebuilt from the two balance identities and
    the dominant-class equation, then compared with the closed form.
    """
    if n < 4:
        raise DimensionError(f"the simple-triple cubic needs n >= 4, got {n}")
    dominant = n - 3
    c = Fraction(3 * dominant, n - 1)

    # with u_dominant = 1: sum x_i = -c, sum 1/x_i = -c, 3 - e1 - e2 + 3 e3 = 0
    e1 = Fraction(-(n - dominant) * dominant, n - 1)
    e3 = (e1 - 3) / (3 + c)
    e2 = -c * e3
    derived = RationalPoly.of(1, -e1, e2, -e3)

    closed_form = RationalPoly.of(1, c, c, 1)
    if derived != closed_form:
        raise ConsistencyError(f"derived cubic {derived} differs from {closed_form}")
    return closed_form


def _cubic_certificate(n: int, m: tuple[int, ...]) -> Optional[Certificate]:
    """Reject when the cubic has exactly one distinct real root; None otherwise."""
    cubic = simple_triple_cubic(n)
    count = sturm_real_root_count(cubic)
    if count != CUBIC_REJECTING_COUNT:
        logger.warning("Cubic for n=%d has %d distinct real roots; shape %s left open", n, count, m)
        return None
    return Certificate(
        candidate=SpectrumCandidate(n, m),
        verdict=CertificateVerdict.REJECTED,
        rule=Rule.CUBIC_ROOT_COUNT,
        witness={
            "coefficients": list(cubic.coefficients),
            "sturm_count": count,
            "rejecting_count": CUBIC_REJECTING_COUNT,
            "required": CUBIC_REQUIRED_ROOTS,
        },
        note="three distinct real ratios are needed, the cubic has exactly one real root",
    )


def product_spectrum(kind: str, n: int, m: Optional[int] = None, K: Any = 1) -> SpectrumCandidate:
    """Exact spectrum of M^(n-1)(K) x R or M^m(K) x M^(n-m)(-K)."""
    K = Fraction(K)
    if kind == FORM_TIMES_LINE:
        r = ((n - 2) * K, Fraction(0))
        parts = (n - 1, 1)
    elif kind == OPPOSITE_FORMS:
        if m is None or not 2 <= m <= n - 2:
            raise PartitionError(f"opposite forms need 2 <= m <= n-2, got m={m} for n={n}")
        r = ((m - 1) * K, -(n - m - 1) * K)
        parts = (m, n - m)
    else:
        raise ValueError(f"unknown product family {kind!r}")

    s = sum((part * value for part, value in zip(parts, r)), Fraction(0))
    return SpectrumCandidate(n=n, m=parts, u=to_u(r, parts, n), r=r, s=s)


def partitions(n: int, l: int) -> Iterator[tuple[int, ...]]:  # noqa: E741
    """Partitions of n into exactly l non-increasing parts, descending lexicographic."""
    if n < 1 or l < 1:
        raise PartitionError(f"cannot partition {n} into {l} parts")
    yield from _partitions(n, l, n)


def _partitions(n: int, l: int, largest: int) -> Iterator[tuple[int, ...]]:  # noqa: E741
    if l == 1:
        if 1 <= n <= largest:
            yield (n,)
        return
    for first in range(min(n - (l - 1), largest), 0, -1):
        if first * l < n:
            break
        for rest in _partitions(n - first, l - 1, first):
            yield (first,) + rest


def _admitted(candidate: SpectrumCandidate, rule: Rule, witness: dict[str, Any], note: str) -> Certificate:
    return Certificate(candidate, CertificateVerdict.ADMITTED, rule, witness, note)


def _product_certificate(candidate: SpectrumCandidate, kind: str) -> Certificate:
    residual = residual_system(candidate.u, candidate.m, candidate.n)
    witness = {
        "kind": kind,
        "m": list(candidate.m),
        "r": list(candidate.r) if candidate.r is not None else None,
        "u": list(candidate.u),
        "residual": list(residual),
    }
    verdict = CertificateVerdict.ADMITTED if all(value == 0 for value in residual) else CertificateVerdict.REJECTED
    return Certificate(candidate, verdict, Rule.PRODUCT_WITNESS, witness, "witness check, not a criterion")


def _shape_certificate(n: int, m: tuple[int, ...]) -> Optional[Certificate]:
    """Decide a multiplicity shape without spectrum values; None means undecided."""
    l = len(m)  # noqa: E741
    if l == 1:
        return _admitted(SpectrumCandidate(n, m), Rule.EINSTEIN, {"n": n, "l": 1}, "Einstein, hence a real space form")
    if l == 2:
        if m[1] == 1:
            return _product_certificate(product_spectrum(FORM_TIMES_LINE, n), FORM_TIMES_LINE)
        return _product_certificate(product_spectrum(OPPOSITE_FORMS, n, m[0]), OPPOSITE_FORMS)

    certificate = multiplicity_filters(n, l, m)
    if certificate is not None:
        return certificate
    if m == (n - 3, 1, 1, 1):
        return _cubic_certificate(n, m)
    return None


def assess_candidate(candidate: SpectrumCandidate) -> Optional[Certificate]:
    """Certify an explicit candidate; None means no exact rule decides it."""
    n, m = candidate.n, candidate.m
    u = candidate.u
    if candidate.r is not None:
        if candidate.s is not None:
            s = sum((mk * rk for mk, rk in zip(m, candidate.r)), Fraction(0))
            if s != candidate.s:
                raise ConsistencyError(f"s = {candidate.s} but sum m_k r_k = {s}")
        from_r = to_u(candidate.r, m, n)
        if u is not None and tuple(u) != from_r:
            raise ConsistencyError("u values do not match the u-transform of r")
        u = from_r

    if u is not None and len(m) >= 2:
        zero = [k for k, value in enumerate(u) if value == 0]
        if zero:
            return Certificate(
                candidate,
                CertificateVerdict.REJECTED,
                Rule.U_NONZERO,
                {"u": list(u), "m": list(m), "n": n, "zero": zero, "residual": [n - m[k] for k in zero]},
                "u_k = 0 leaves residual n - m_k, which never vanishes",
            )
        residual = residual_system(u, m, n)
        if any(value != 0 for value in residual):
            return Certificate(
                candidate,
                CertificateVerdict.REJECTED,
                Rule.RESIDUAL_NONZERO,
                {"u": list(u), "m": list(m), "n": n, "residual": list(residual)},
                "constraint system violated",
            )
        if len(m) == 2:
            return _product_certificate(SpectrumCandidate(n, m, u, candidate.r, candidate.s), "explicit")

    return _shape_certificate(n, tuple(sorted(m, reverse=True)))


def verify_certificate(certificate: Certificate) -> bool:
    """Re-derive the verdict from the witness values alone."""
    witness = certificate.witness
    candidate = certificate.candidate
    n, m = candidate.n, candidate.m
    rejected = certificate.verdict == CertificateVerdict.REJECTED

    match certificate.rule:
        case Rule.L3_QUADRATIC:
            labelings = witness["labelings"]
            expected = [_l3_coefficients(n, m, odd) for odd in range(3)]
            recorded = [(int(item["P"]), int(item["Q"])) for item in labelings]
            return rejected and recorded == expected and all(p > 0 and q > 0 for p, q in recorded)
        case Rule.L_BOUND:
            l = len(m)  # noqa: E741
            if "bound" in witness:
                return rejected and int(witness["bound"]) == _l_bound(n) and l > int(witness["bound"])
            return rejected and l >= 4 and n < int(witness["min_n"])
        case Rule.DOMINANT_MULTIPLICITY:
            dominant = sum(1 for part in witness["m"] if 2 * int(part) > n)
            return rejected and dominant == int(witness["dominant"]) and dominant != 1
        case Rule.CUBIC_ROOT_COUNT:
            cubic = RationalPoly(tuple(Fraction(c) for c in witness["coefficients"]))
            count = sturm_real_root_count(cubic)
            return (
                rejected
                and count == int(witness["sturm_count"]) == CUBIC_REJECTING_COUNT
                and cubic == simple_triple_cubic(n)
            )
        case Rule.RESIDUAL_NONZERO:
            residual = residual_system(witness["u"], witness["m"], int(witness["n"]))
            return rejected and any(value != 0 for value in residual)
        case Rule.U_NONZERO:
            u = [Fraction(value) for value in witness["u"]]
            parts = [int(part) for part in witness["m"]]
            zero = [k for k, value in enumerate(u) if value == 0]
            residual = [Fraction(value) for value in witness["residual"]]
            return (
                rejected
                and len(parts) >= 2
                and sum(parts) == n
                and bool(zero)
                and zero == [int(k) for k in witness["zero"]]
                and residual == [n - parts[k] for k in zero]
                and all(value != 0 for value in residual)
            )
        case Rule.EINSTEIN:
            return not rejected and len(m) == 1
        case Rule.PRODUCT_WITNESS:
            residual = residual_system(witness["u"], witness["m"], n)
            return rejected != all(value == 0 for value in residual)
    return False


########################################################################
# Numeric exploration
########################################################################
def _residual_float(u: np.ndarray, m: np.ndarray, n: int) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return (n - m) - 2 * u * np.sum(m[None, :] / diff, axis=1)


def _jacobian_float(u: np.ndarray, m: np.ndarray) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    jacobian = -2 * u[:, None] * m[None, :] / diff**2
    np.fill_diagonal(jacobian, 2 * np.sum(m[None, :] * u[None, :] / diff**2, axis=1))
    return jacobian


def _gauss_newton(u: np.ndarray, m: np.ndarray, n: int) -> Optional[np.ndarray]:
    """Minimize the residual with u_1 fixed to 1; None when the start diverges."""
    residual = _residual_float(u, m, n)
    for _ in range(SEARCH_ITERATIONS):
        norm = float(np.linalg.norm(residual))
        if norm < SEARCH_TOLERANCE:
            return u
        try:
            step, *_ = np.linalg.lstsq(_jacobian_float(u, m)[:, 1:], -residual, rcond=None)
        except np.linalg.LinAlgError:
            return None

        scale = 1.0
        while scale > 1e-6:
            trial = u.copy()
            trial[1:] += scale * step
            with np.errstate(divide="ignore", invalid="ignore"):
                trial_residual = _residual_float(trial, m, n)
            if np.all(np.isfinite(trial_residual)) and np.linalg.norm(trial_residual) < norm:
                break
            scale /= 2
        else:
            return None

        u, residual = trial, trial_residual
        if np.max(np.abs(u)) > 1e6:
            return None
    return u if float(np.linalg.norm(residual)) < SEARCH_TOLERANCE else None


def _reconstruct(u: np.ndarray, m: tuple[int, ...], n: int) -> tuple[Optional[list[Fraction]], bool]:
    rational = [Fraction(float(value)).limit_denominator(MAX_DENOMINATOR) for value in u]
    try:
        exact = all(value == 0 for value in residual_system(rational, m, n))
    except CandidateError:
        return None, False
    return rational, exact


def search_candidates(n: int, m: Sequence[int], trials: int, seed: int = 0) -> list[dict[str, Any]]:
    """Look for numeric solutions of the constraint system from seeded random starts.

    Solutions are normalized to u_1 = 1 and deduplicated; each carries a rational
    reconstruction and whether it satisfies the system exactly.
    """
    m = _check_partition(m, n)
    if len(m) < 2:
        raise PartitionError("the constraint system needs at least two distinct values")

    rng = np.random.default_rng(seed)
    weights = np.array(m, dtype=float)
    found: dict[tuple[float, ...], dict[str, Any]] = {}
    for _ in range(trials):
        start = np.concatenate([[1.0], rng.uniform(-3.0, 3.0, len(m) - 1)])
        with np.errstate(divide="ignore", invalid="ignore"):
            solution = _gauss_newton(start, weights, n)
        if solution is None:
            continue

        key = tuple(np.round(solution, 8).tolist())
        if key in found:
            continue
        rational, exact = _reconstruct(solution, m, n)
        found[key] = {
            "u": solution.tolist(),
            "residual": float(np.linalg.norm(_residual_float(solution, weights, n))),
            "rational": rational,
            "exact": exact,
            "note": NUMERIC_NOTE,
        }

    logger.debug("Search over %s found %d candidates in %d trials", m, len(found), trials)
    return [found[key] for key in sorted(found)]


########################################################################
# Classification
########################################################################
def _family(m: tuple[int, ...]) -> tuple[str, str]:
    if len(m) == 1:
        return EINSTEIN, "Einstein, and conformally flat Einstein metrics are real space forms"
    if m[1] == 1:
        return FORM_TIMES_LINE, "M^(n-1)(K) x R, witness check"
    return OPPOSITE_FORMS, "M^m(K) x M^(n-m)(-K), witness check"


def _summary(n: int, undecided: int) -> str:
    if undecided:
        return f"{undecided} shapes undecided; the exact filters do not reach them"
    return (
        f"n={n}: constant Ricci eigenvalues force a real space form, M^{n - 1}(K) x R "
        f"or M^m(K) x M^({n}-m)(-K)"
    )


@log_operation(logger)
def classify(n: int, l_max: Optional[int] = None, search_trials: int = 0, seed: int = 0) -> ClassificationReport:
    """Decide every multiplicity shape of dimension n with at most l_max classes."""
    if n < 4:
        raise DimensionError(f"classification needs n >= 4, got {n}")
    l_max = n if l_max is None else l_max
    if l_max < 1:
        raise PartitionError(f"l_max must be positive, got {l_max}")

    admitted, rejected, undecided = [], [], []
    enumerated = 0
    for l in range(1, min(l_max, n) + 1):  # noqa: E741
        for m in partitions(n, l):
            enumerated += 1
            certificate = _shape_certificate(n, m)
            if certificate is None:
                candidates = tuple(search_candidates(n, m, search_trials, seed)) if search_trials else ()
                undecided.append(UndecidedShape(l, m, "beyond the exact filters", candidates))
            elif certificate.verdict == CertificateVerdict.ADMITTED:
                family, basis = _family(m)
                admitted.append(AdmittedShape(l, m, family, basis, certificate))
            else:
                rejected.append(certificate)

    logger.info(
        "Classified n=%d: %d admitted, %d rejected, %d undecided", n, len(admitted), len(rejected), len(undecided)
    )
    return ClassificationReport(
        n=n,
        l_max=l_max,
        enumerated=enumerated,
        admitted=tuple(admitted),
        rejected=tuple(rejected),
        undecided=tuple(undecided),
        summary=_summary(n, len(undecided)),
    )
