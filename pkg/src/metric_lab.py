"""Finite-difference geometry on catalog metric fields.

All derivatives use the five-point central stencil with a per-point step
h * (1 + |p|). Points are processed in batches of shape (count, n) so each
stencil level costs a single vectorized metric evaluation.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .exceptions import ClusterAssignmentError, DegenerateInputError, DomainGuardError, StepSizeError
from .logging import log_operation
from .metric_catalog import FrameField, MetricField
from .models import (
    FrameConnectionReport,
    GeodesicPath,
    GeodesicState,
    MetricCheckReport,
    PointMetric,
    RicciTensor,
    Riemann4,
    ScanReport,
)
from .settings import settings
from .tensor_core import jacobi_operator, ricci_operator, sym_eigen, weyl_tensor

logger = logging.getLogger(__name__)

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])

ASSIGNMENT_TOL = 1e-6


def _batch(field: MetricField, points: Any) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, field.dim)


def fd_steps(points: np.ndarray, base: float) -> np.ndarray:
    """Get the finite-difference step base * (1 + |p|) for every point."""
    return base * (1 + np.linalg.norm(points, axis=-1))


def _differentiate(func: Callable[[np.ndarray, np.ndarray], np.ndarray], points: np.ndarray, step: np.ndarray):
    """Differentiate func along every coordinate axis.

    func receives the stencil points together with the step of the base point each
    one belongs to, so nested differentiation keeps one step per base point. The
    result has the derivative index right after the batch axis.
    """
    count, n = points.shape
    shifts = _OFFSETS[:, None, None] * np.eye(n)
    stencil = points[:, None, None, :] + step[:, None, None, None] * shifts
    inner_step = np.broadcast_to(step[:, None, None], (count, len(_OFFSETS), n)).reshape(-1)

    values = func(stencil.reshape(-1, n), inner_step)
    values = values.reshape((count, len(_OFFSETS), n) + values.shape[1:])
    # symmetric pairs first so constant fields cancel exactly
    derivative = (8 * (values[:, 2] - values[:, 1]) - (values[:, 3] - values[:, 0])) / 12
    return derivative / step.reshape((count,) + (1,) * (derivative.ndim - 1))


def christoffel_batch(field: MetricField, points: np.ndarray, step: Optional[np.ndarray] = None) -> np.ndarray:
    """gamma[b, i, j, k] = Gamma^k_ij at every point of the batch."""
    step = fd_steps(points, settings.FD_STEP) if step is None else step
    g = field.metric(points)
    dg = _differentiate(lambda stencil, _: field.metric(stencil), points, step)
    g_inv = np.linalg.inv(g)
    lowered = dg + np.einsum("bjim->bijm", dg) - np.einsum("bmij->bijm", dg)
    return 0.5 * np.einsum("bkm,bijm->bijk", g_inv, lowered)


def riemann_batch(field: MetricField, points: np.ndarray, step: Optional[np.ndarray] = None) -> np.ndarray:
    """R[b, i, j, k, u] = R(d_i, d_j, d_k, d_u) at every point of the batch."""
    step = fd_steps(points, settings.FD_STEP) if step is None else step
    gamma = christoffel_batch(field, points, step)
    d_gamma = _differentiate(lambda stencil, inner: christoffel_batch(field, stencil, inner), points, step)

    raised = (
        d_gamma
        - np.einsum("bjikl->bijkl", d_gamma)
        + np.einsum("biml,bjkm->bijkl", gamma, gamma)
        - np.einsum("bjml,bikm->bijkl", gamma, gamma)
    )
    return np.einsum("bijkl,blu->bijku", raised, field.metric(points))


def _contract(g: np.ndarray, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g_inv = np.linalg.inv(g)
    ric = np.einsum("bad,bayzd->byz", g_inv, R)
    ric = (ric + np.swapaxes(ric, 1, 2)) / 2
    return ric, np.einsum("byz,byz->b", g_inv, ric)


def _ricci_packed(field: MetricField, points: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Ric_jk flattened with s appended, one row per point."""
    ric, s = _contract(field.metric(points), riemann_batch(field, points, step))
    return np.concatenate([ric.reshape(len(points), -1), s[:, None]], axis=1)


def _ricci_derivatives(field: MetricField, points: np.ndarray):
    """Get g, Gamma, Ric, d Ric and d s on a batch."""
    n = field.dim
    inner = fd_steps(points, settings.FD_STEP)
    outer = fd_steps(points, settings.OUTER_FD_STEP)
    ratio = settings.FD_STEP / settings.OUTER_FD_STEP

    g = field.metric(points)
    gamma = christoffel_batch(field, points, inner)
    ric, _ = _contract(g, riemann_batch(field, points, inner))
    packed = _differentiate(lambda stencil, st: _ricci_packed(field, stencil, st * ratio), points, outer)
    d_ric = packed[..., : n * n].reshape(len(points), n, n, n)
    return g, gamma, ric, d_ric, packed[..., -1]


def _nabla(gamma: np.ndarray, ric: np.ndarray, d_ric: np.ndarray) -> np.ndarray:
    nabla = d_ric - np.einsum("bijm,bmk->bijk", gamma, ric) - np.einsum("bikm,bjm->bijk", gamma, ric)
    return (nabla + np.swapaxes(nabla, 2, 3)) / 2


def _codazzi(g: np.ndarray, nabla: np.ndarray, ds: np.ndarray) -> np.ndarray:
    n = g.shape[-1]
    scalar_part = np.einsum("bi,bjk->bijk", ds, g) - np.einsum("bj,bik->bijk", ds, g)
    residual = nabla - np.swapaxes(nabla, 1, 2) - scalar_part / (2 * (n - 1))
    return np.max(np.abs(residual.reshape(len(g), -1)), axis=1)


def metric_at(field: MetricField, p: Any) -> PointMetric:
    return field.metric_at(p)


def christoffel(field: MetricField, p: Any) -> np.ndarray:
    """Get Gamma[i, j, k] = Gamma^k_ij at p."""
    return christoffel_batch(field, _batch(field, p))[0]


def riemann_at(field: MetricField, p: Any) -> Riemann4:
    return Riemann4(riemann_batch(field, _batch(field, p))[0])


def nabla_ricci(field: MetricField, p: Any) -> np.ndarray:
    """Get (nabla_i Ric)_jk at p."""
    _, gamma, ric, d_ric, _ = _ricci_derivatives(field, _batch(field, p))
    return _nabla(gamma, ric, d_ric)[0]


def codazzi_residual(field: MetricField, p: Any) -> float:
    """Largest coordinate component of the Codazzi defect of the Ricci tensor at p."""
    g, gamma, ric, d_ric, ds = _ricci_derivatives(field, _batch(field, p))
    return float(_codazzi(g, _nabla(gamma, ric, d_ric), ds)[0])


########################################################################
# Geodesics
########################################################################
def _speed(field: MetricField, x: np.ndarray, v: np.ndarray) -> float:
    g = field.metric(x[None])[0]
    return float(np.sqrt(max(v @ g @ v, 0.0)))


def _rk4_step(acceleration, x: np.ndarray, v: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    k1x, k1v = v, acceleration(x, v)
    k2x, k2v = v + 0.5 * h * k1v, acceleration(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, acceleration(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, acceleration(x + h * k3x, v + h * k3v)
    return (
        x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
        v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v),
    )


def integrate_geodesic(field: MetricField, state0: GeodesicState, h: float, steps: int) -> GeodesicPath:
    """Integrate x'' = -Gamma(x', x') with fixed-step RK4.

    Leaving the domain guard truncates the path; a relative speed drift above
    DRIFT_LIMIT raises StepSizeError.
    """
    if h <= 0 or steps < 1:
        raise ValueError(f"need h > 0 and steps >= 1, got h={h}, steps={steps}")

    def acceleration(x: np.ndarray, v: np.ndarray) -> np.ndarray:
        gamma = christoffel_batch(field, x[None])[0]
        return -np.einsum("ijk,i,j->k", gamma, v, v)

    x, v = state0.position, state0.velocity
    speed0 = _speed(field, x, v)
    if speed0 == 0:
        raise DegenerateInputError("geodesic needs a nonzero initial velocity")

    states, drift = [state0], 0.0
    for step in range(1, steps + 1):
        try:
            x, v = _rk4_step(acceleration, x, v, h)
            speed = _speed(field, x, v)
        except DomainGuardError as e:
            logger.warning("Geodesic truncated after %d of %d steps: %s", step - 1, steps, e)
            return GeodesicPath(tuple(states), drift, truncated=True, reason=str(e))

        drift = max(drift, abs(speed - speed0) / speed0)
        if drift > settings.DRIFT_LIMIT:
            raise StepSizeError(f"relative speed drift {drift:.3e} exceeds {settings.DRIFT_LIMIT} at step {step}")
        states.append(GeodesicState(x, v, state0.t + step * h))

    return GeodesicPath(tuple(states), drift)


########################################################################
# Scans
########################################################################
def _ball_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    return direction * radius * rng.random() ** (1 / dim)


def sample_points(field: MetricField, count: int, seed: int, radius: float = 0.5) -> np.ndarray:
    """Draw count points uniformly from the coordinate ball of the given radius."""
    rng = np.random.default_rng(seed)
    points = np.array([_ball_point(rng, field.dim, radius) for _ in range(count)]).reshape(count, field.dim)
    if not np.all(field.contains(points)):
        raise DomainGuardError(f"sampling radius {radius} reaches outside the {field.kind} domain guard")
    return points


def _unit_velocity(field: MetricField, p: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Map a frame direction to a unit-speed chart velocity, v = L^-T w / |w|."""
    lower = np.linalg.cholesky(field.metric(p[None])[0])
    return np.linalg.solve(lower.T, direction) / np.linalg.norm(direction)


def _riemann_along(field: MetricField, positions: np.ndarray) -> np.ndarray:
    try:
        return riemann_batch(field, positions)
    except DomainGuardError:
        tensors = []
        for p in positions:
            try:
                tensors.append(riemann_batch(field, p[None])[0])
            except DomainGuardError:
                break
        return np.array(tensors).reshape((len(tensors),) + (field.dim,) * 4)


def _jacobi_eigenvalues(field: MetricField, R: np.ndarray, positions: np.ndarray, velocities: np.ndarray):
    metrics = field.metric(positions)
    return np.array(
        [
            sym_eigen(jacobi_operator(Riemann4(r), v, PointMetric(g))).eigenvalues
            for r, v, g in zip(R, velocities, metrics)
        ]
    )


def _scan_geodesic(
    field: MetricField,
    index: int,
    stream: np.random.SeedSequence,
    h: float,
    steps: int,
    radius: float,
    velocity: Optional[np.ndarray],
) -> dict[str, Any]:
    rng = np.random.default_rng(stream)
    start = _ball_point(rng, field.dim, radius)
    direction = rng.standard_normal(field.dim) if velocity is None else velocity
    v0 = _unit_velocity(field, start, direction)
    sample: dict[str, Any] = {"geodesic": index, "start": start.tolist(), "velocity": v0.tolist()}

    try:
        path = integrate_geodesic(field, GeodesicState(start, v0), h, steps)
    except StepSizeError as e:
        logger.warning("Geodesic %d failed: %s", index, e)
        return sample | {"error": str(e), "deviation": float("inf")}

    positions = np.array([state.position for state in path.states])
    velocities = np.array([state.velocity for state in path.states])
    R = _riemann_along(field, positions)
    eigenvalues = _jacobi_eigenvalues(field, R, positions[: len(R)], velocities[: len(R)])
    deviation = float(np.max(np.abs(eigenvalues - eigenvalues[0]))) if len(eigenvalues) else float("inf")

    return sample | {
        "eigenvalues": eigenvalues[0].tolist() if len(eigenvalues) else [],
        "final_eigenvalues": eigenvalues[-1].tolist() if len(eigenvalues) else [],
        "deviation": deviation,
        "steps_completed": len(eigenvalues) - 1,
        "drift": path.drift,
        "truncated": path.truncated or len(R) < len(positions),
        "reason": path.reason,
    }


@log_operation(logger)
def cspace_scan(
    field: MetricField,
    count: int,
    seed: int,
    h: float = 0.01,
    steps: int = 100,
    tol: float = 1e-5,
    radius: float = 0.5,
    velocity: Optional[Sequence[float]] = None,
    threads: Optional[int] = None,
) -> ScanReport:
    """Track sorted Jacobi-operator spectra along seeded random geodesics.

    Each geodesic draws from its own stream spawned from the seed, so the report is
    the same for any thread count.
    """
    threads = settings.THREADS if threads is None else threads
    direction = None if velocity is None else np.asarray(velocity, dtype=float)
    if direction is not None and (direction.shape != (field.dim,) or not np.any(direction)):
        raise DegenerateInputError(f"fixed velocity must be a nonzero vector of length {field.dim}")

    streams = np.random.SeedSequence(seed).spawn(count)

    def task(index: int) -> dict[str, Any]:
        return _scan_geodesic(field, index, streams[index], h, steps, radius, direction)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(task, range(count)))
    else:
        samples = [task(index) for index in range(count)]

    deviation = max((sample["deviation"] for sample in samples), default=0.0)
    logger.info("C-space scan of %s: %d geodesics, deviation %.3e", field.kind, count, deviation)
    return ScanReport(
        kind="cspace",
        metric=field.to_spec(),
        seed=seed,
        h=h,
        steps=steps,
        samples=samples,
        deviation=deviation,
        tolerance=tol,
    )


def _ricci_spectra(field: MetricField, points: np.ndarray) -> np.ndarray:
    g = field.metric(points)
    ric, _ = _contract(g, riemann_batch(field, points))
    return np.array(
        [
            sym_eigen(ricci_operator(RicciTensor(r), PointMetric(metric))).eigenvalues
            for r, metric in zip(ric, g)
        ]
    )


@log_operation(logger)
def ricci_constancy_scan(
    field: MetricField, points: Any, tol: float = 1e-5, seed: Optional[int] = None
) -> ScanReport:
    """Compare sorted Ricci-operator spectra across sample points."""
    points = _batch(field, points)
    spectra = _ricci_spectra(field, points)
    deviation = float(np.max(np.ptp(spectra, axis=0))) if len(spectra) else 0.0
    return ScanReport(
        kind="ricci",
        metric=field.to_spec(),
        seed=seed,
        h=None,
        steps=None,
        samples=[{"point": p.tolist(), "eigenvalues": e.tolist()} for p, e in zip(points, spectra)],
        deviation=deviation,
        tolerance=tol,
    )


########################################################################
# Eigenframe checks
########################################################################
def _eigenframe(field: MetricField, frame: FrameField, p: np.ndarray):
    """Get g, R, E and the Ricci cluster value of each frame vector at one point.

    Every E_i must be a Ricci eigenvector whose Rayleigh quotient falls into exactly
    one eigenvalue cluster.
    """
    g = field.metric(p)[0]
    R = riemann_batch(field, p)[0]
    E = frame.vectors(p)[0]
    ric, _ = _contract(g[None], R[None])
    rho = ricci_operator(RicciTensor(ric[0]), PointMetric(g))
    spectrum = sym_eigen(rho)
    scale = max(1.0, float(np.max(np.abs(spectrum.eigenvalues))))

    values = []
    for i, vector in enumerate(E):
        rayleigh = float(vector @ ric[0] @ vector)
        defect = rho.matrix @ vector - rayleigh * vector
        if np.sqrt(max(defect @ g @ defect, 0.0)) > ASSIGNMENT_TOL * scale:
            raise ClusterAssignmentError(f"frame vector E_{i} is not a Ricci eigenvector at {p[0].tolist()}")

        matches = [
            cluster
            for cluster in spectrum.clusters
            if cluster.low - ASSIGNMENT_TOL * scale <= rayleigh <= cluster.high + ASSIGNMENT_TOL * scale
        ]
        if len(matches) != 1:
            raise ClusterAssignmentError(
                f"frame vector E_{i} with Ricci value {rayleigh:.9g} matches {len(matches)} clusters"
            )
        values.append(matches[0].value)

    return g, R, E, np.array(values), len(spectrum.clusters)


def frame_connection_check(field: MetricField, frame: FrameField, p: Any) -> FrameConnectionReport:
    """Evaluate the eigenframe connection identities of a constant-Ricci metric at p.

    With omega[i, j, k] = g(nabla_{E_i} E_j, E_k) the residuals are
    (r_k - r_l) omega[i, k, l] - (r_i - r_l) omega[k, i, l] over all (i, k, l) and
    (r_k - r_l) omega[k, k, l] over all (k, l).
    """
    p = _batch(field, p)[:1]
    g, _, E, r, cluster_count = _eigenframe(field, frame, p)
    gamma = christoffel_batch(field, p)[0]
    dE = _differentiate(lambda stencil, _: frame.vectors(stencil), p, fd_steps(p, settings.FD_STEP))[0]

    covariant = np.einsum("ia,ajc->ijc", E, dE) + np.einsum("ia,abc,jb->ijc", E, gamma, E)
    omega = np.einsum("ijc,cd,kd->ijk", covariant, g, E)

    gap = r[:, None] - r[None, :]
    exchange = gap[None, :, :] * omega - gap[:, None, :] * np.swapaxes(omega, 0, 1)
    diagonal = gap * np.einsum("kkl->kl", omega)
    return FrameConnectionReport(
        exchange_max=float(np.max(np.abs(exchange))),
        diagonal_max=float(np.max(np.abs(diagonal))),
        frame_eigenvalues=r.tolist(),
        cluster_count=cluster_count,
    )


def cross_cluster_balance(field: MetricField, frame: FrameField, p: Any) -> float:
    """max_i |sum over j outside the cluster of i of R(E_i, E_j, E_j, E_i) / (r_i - r_j)|."""
    p = _batch(field, p)[:1]
    _, R, E, r, _ = _eigenframe(field, frame, p)
    sectional = np.einsum("abcd,ia,jb,jc,id->ij", R, E, E, E, E)
    gap = r[:, None] - r[None, :]
    outside = gap != 0
    terms = np.divide(sectional, gap, out=np.zeros_like(sectional), where=outside)
    return float(np.max(np.abs(terms.sum(axis=1))))


@log_operation(logger)
def check_metric(field: MetricField, points: Any) -> MetricCheckReport:
    """Weyl, Codazzi and Ricci diagnostics over a set of points."""
    points = _batch(field, points)
    g, gamma, ric, d_ric, ds = _ricci_derivatives(field, points)
    nabla = _nabla(gamma, ric, d_ric)
    R = riemann_batch(field, points)

    weyl_max = None
    if field.dim >= 4:
        weyl_max = max(weyl_tensor(Riemann4(r), PointMetric(metric)).max_abs() for r, metric in zip(R, g))

    radial = np.einsum("biii->bi", nabla)
    return MetricCheckReport(
        metric=field.to_spec(),
        points=points.tolist(),
        weyl_max=weyl_max,
        codazzi_max=float(np.max(_codazzi(g, nabla, ds))),
        nabla_ricci_max=float(np.max(np.abs(nabla))),
        radial_nabla_max=float(np.max(np.abs(radial))),
        spectra=_ricci_spectra(field, points).tolist(),
    )
