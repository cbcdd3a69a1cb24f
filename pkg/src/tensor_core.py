"""Pointwise curvature algebra on a single tangent space.

Conventions: R(x, y, z, u) = g(R(x, y)z, u) with R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y],
Ric(y, z) = sum_a R(e_a, y, z, e_a) over a g-orthonormal basis, so the unit sphere has
sectional curvature +1 and the Weyl-free curvature form contracts back to Ric.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConsistencyError, DegenerateInputError, DimensionError, SymmetryError
from .models import Cluster, PointMetric, RicciTensor, Riemann4, Spectrum, SymOperator
from .settings import settings

logger = logging.getLogger(__name__)

MAX_DIM = 16
MAX_SWEEPS = 64
OFF_DIAGONAL_TOL = 1e-13

N3_WARNING = "not an lcf criterion in n=3"


def _check_dims(*dims: int) -> int:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")
    if dims[0] > MAX_DIM:
        raise DimensionError(f"dimension {dims[0]} exceeds the supported maximum {MAX_DIM}")
    return dims[0]


def _kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a . b)(x, y, z, u) = a(y,z)b(x,u) - a(x,z)b(y,u) + b(y,z)a(x,u) - b(x,z)a(y,u)."""
    return (
        np.einsum("yz,xu->xyzu", a, b)
        - np.einsum("xz,yu->xyzu", a, b)
        + np.einsum("yz,xu->xyzu", b, a)
        - np.einsum("xz,yu->xyzu", b, a)
    )


def lcf_curvature_from_ricci(ric: RicciTensor, s: Optional[float], g: PointMetric) -> Riemann4:
    """Build the unique curvature tensor with vanishing Weyl part and the given Ricci data."""
    n = _check_dims(ric.dim, g.dim)
    if n < 3:
        raise DimensionError(f"the conformally flat curvature form needs n >= 3, got {n}")

    trace = ric.trace(g)
    if s is None:
        s = trace
    elif abs(s - trace) > settings.SYMMETRY_TOL * max(1.0, abs(trace)):
        raise ConsistencyError(f"scalar curvature {s} differs from the trace of Ric {trace}")

    warnings: tuple[str, ...] = ()
    if n == 3:
        logger.warning("Curvature synthesis in dimension 3: %s", N3_WARNING)
        warnings = (N3_WARNING,)

    gc, rc = g.components, ric.components
    # g . g has the factor 2 absorbed: (g . g)/2 = g(y,z)g(x,u) - g(x,z)g(y,u)
    components = -s / ((n - 1) * (n - 2)) * _kulkarni_nomizu(gc, gc) / 2 + _kulkarni_nomizu(rc, gc) / (n - 2)
    return Riemann4(components, warnings=warnings)


def ricci_contract(R: Riemann4, g: PointMetric) -> tuple[RicciTensor, float]:
    """Contract Ric(y, z) = g^ad R(a, y, z, d) and s = g^yz Ric(y, z)."""
    _check_dims(R.dim, g.dim)
    ric = np.einsum("ad,ayzd->yz", g.inverse, R.components)
    ric = (ric + ric.T) / 2
    s = float(np.einsum("yz,yz->", g.inverse, ric))
    return RicciTensor(ric), s


def weyl_tensor(R: Riemann4, g: PointMetric) -> Riemann4:
    """Get W = R minus the conformally flat tensor built from the contraction of R."""
    n = _check_dims(R.dim, g.dim)
    if n < 4:
        raise DimensionError(f"the Weyl tensor is only meaningful for n >= 4, got {n}")
    ric, s = ricci_contract(R, g)
    return Riemann4(R.components - lcf_curvature_from_ricci(ric, s, g).components)


def constant_curvature_tensor(g: PointMetric, curvature: float) -> Riemann4:
    """R(x, y, z, u) = K (g(y,z)g(x,u) - g(x,z)g(y,u))."""
    gc = g.components
    return Riemann4(curvature * (np.einsum("yz,xu->xyzu", gc, gc) - np.einsum("xz,yu->xyzu", gc, gc)))


def product_tensor(factors: Sequence[tuple[int, float]]) -> Riemann4:
    """Curvature of a product of space forms (dim, K) on an orthonormal tangent space."""
    n = sum(dim for dim, _ in factors)
    components = np.zeros((n, n, n, n))
    offset = 0
    for dim, curvature in factors:
        block = slice(offset, offset + dim)
        if dim > 1:
            components[block, block, block, block] = constant_curvature_tensor(
                PointMetric.identity(dim), curvature
            ).components
        offset += dim
    return Riemann4(components)


def _unit(x: np.ndarray, g: PointMetric) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim,):
        raise DimensionError(f"vector of shape {x.shape} does not live in dimension {g.dim}")
    length = g.norm(x)
    if length < 1e-300:
        raise DegenerateInputError("the Jacobi operator needs a nonzero direction")
    return x / length


def jacobi_operator(R: Riemann4, x: np.ndarray, g: PointMetric) -> SymOperator:
    """Get lambda_x(y) = R(y, x)x for the unit vector along x."""
    _check_dims(R.dim, g.dim)
    x = _unit(x, g)
    form = np.einsum("jabk,a,b->jk", R.components, x, x)
    form = (form + form.T) / 2
    return SymOperator(g.inverse @ form, g)


def ricci_operator(ric: RicciTensor, g: PointMetric) -> SymOperator:
    """Get rho with g(rho(x), y) = Ric(x, y)."""
    _check_dims(ric.dim, g.dim)
    return SymOperator(g.inverse @ ric.components, g)


def sectional(R: Riemann4, x: np.ndarray, y: np.ndarray, g: PointMetric) -> float:
    """K(x, y) = R(x, y, y, x) / (g(x,x)g(y,y) - g(x,y)^2)."""
    _check_dims(R.dim, g.dim)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    area = g.inner(x, x) * g.inner(y, y) - g.inner(x, y) ** 2
    if area < 1e-12:
        raise DegenerateInputError(f"degenerate plane (area {area:.3e})")
    return float(np.einsum("abcd,a,b,c,d->", R.components, x, y, y, x)) / area


def _jacobi_rotations(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix in fixed (p, q) sweep order."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(float(np.linalg.norm(a)), 1e-300)

    for _ in range(MAX_SWEEPS):
        off = math.sqrt(max(float(np.sum(a**2) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= OFF_DIAGONAL_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                phi = 0.5 * math.atan2(2 * apq, a[q, q] - a[p, p])
                c, s = math.cos(phi), math.sin(phi)

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning("Jacobi rotations stopped after %d sweeps", MAX_SWEEPS)

    return np.diag(a).copy(), v


def cluster_eigenvalues(values: np.ndarray, tol: Optional[float] = None) -> tuple[Cluster, ...]:
    """Group ascending eigenvalues whose consecutive gaps do not exceed tol."""
    tol = settings.CLUSTER_TOL if tol is None else tol
    groups: list[list[int]] = []
    for index, value in enumerate(values):
        if groups and value - values[groups[-1][-1]] <= tol:
            groups[-1].append(index)
        else:
            groups.append([index])

    return tuple(
        Cluster(
            value=float(np.mean(values[group])),
            low=float(values[group[0]]),
            high=float(values[group[-1]]),
            multiplicity=len(group),
            indices=tuple(group),
        )
        for group in groups
    )


def sym_eigen(A: SymOperator, g: Optional[PointMetric] = None, cluster_tol: Optional[float] = None) -> Spectrum:
    """Diagonalize a g-self-adjoint operator; eigenvectors come back g-orthonormal."""
    g = A.metric if g is None else g
    _check_dims(A.dim, g.dim)
    form = g.components @ A.matrix
    if SymOperator(A.matrix, g).self_adjointness_violation() > settings.SYMMETRY_TOL:
        raise SymmetryError("operator is not self-adjoint with respect to the metric")

    lower = g.cholesky
    inv_lower = np.linalg.inv(lower)
    symmetric = inv_lower @ form @ inv_lower.T
    symmetric = (symmetric + symmetric.T) / 2

    values, vectors = _jacobi_rotations(symmetric)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = inv_lower.T @ vectors[:, order]

    return Spectrum(eigenvalues=values, clusters=cluster_eigenvalues(values, cluster_tol), eigenvectors=vectors)
