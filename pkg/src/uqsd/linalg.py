"""Dense complex linear algebra for the tiny matrices this package works with.

Vectors are 1-D complex ndarrays. A "Hermitian matrix" is a read-only 2-D
complex ndarray produced by :func:`hermitian`, which keeps the strict lower
triangle, mirrors it, and takes the real part of the diagonal, so the
Hermitian symmetry is exact rather than approximate.

Eigenvalues use closed forms for dimension <= 2 and cyclic complex Jacobi
rotations for dimensions 3 and 4; no LAPACK call is involved.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    LinearlyDependent,
    NotPSD,
    UnnormalizedState,
)

MAX_DIM = 4
# accept as PSD when lambda_min >= -PSD_TOL * max(1, ||A||)
PSD_TOL = 1e-9
# Gram matrices with lambda_min at or below this are rejected as dependent
INDEPENDENCE_TOL = 1e-10
NORM_TOL = 1e-9
CHOLESKY_PIVOT_TOL = 1e-12
JACOBI_TOL = 1e-14
_MAX_SWEEPS = 60


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def hermitian(a) -> np.ndarray:
    """Build a Hermitian matrix from the lower triangle and real diagonal of ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    lower = np.tril(a, -1)
    h = lower + lower.conj().T + np.diag(a.diagonal().real).astype(complex)
    return _frozen(h)


def norm(a) -> float:
    """Frobenius norm, scaled so tiny entries do not underflow when squared."""
    mags = np.abs(np.asarray(a))
    big = float(mags.max(initial=0.0))
    if big == 0.0:
        return 0.0
    return big * float(np.sqrt(np.sum((mags / big) ** 2)))


def psd_tolerance(a) -> float:
    return PSD_TOL * max(1.0, norm(a))


def _pow2_scale(v: np.ndarray, exponent: int) -> np.ndarray:
    # exact scaling by 2**exponent that neither overflows nor underflows on the way
    return np.ldexp(v.real, exponent) + 1j * np.ldexp(v.imag, exponent)


def _eigen_2x2(a: np.ndarray) -> EigenDecomposition:
    big = float(np.abs(a).max())
    if big == 0.0:
        return EigenDecomposition(np.zeros(2), np.eye(2, dtype=complex))
    # work on a copy scaled to unit size so subnormal entries stay representable
    shift = -math.frexp(big)[1]
    a = _pow2_scale(a, shift)
    p, q, b = a[0, 0].real, a[1, 1].real, complex(a[0, 1])
    mean, half = 0.5 * (p + q), 0.5 * (p - q)
    g = abs(b)
    r = math.hypot(half, g)
    values = np.ldexp(np.array([mean - r, mean + r]), -shift)
    if g == 0.0:
        vecs = np.eye(2, dtype=complex) if p <= q else np.array([[0, 1], [1, 0]], dtype=complex)
        return EigenDecomposition(values, vecs)
    # pick the cancellation-free form for each case
    if half >= 0.0:
        hi = np.array([half + r, b.conjugate()])
        lo = np.array([-b, half + r])
    else:
        lo = np.array([half - r, b.conjugate()])
        hi = np.array([-b, half - r])
    # bring each vector to unit size before normalizing so the norm cannot underflow
    lo = _pow2_scale(lo, -math.frexp(float(np.abs(lo).max()))[1])
    hi = _pow2_scale(hi, -math.frexp(float(np.abs(hi).max()))[1])
    lo = lo / np.linalg.norm(lo)
    hi = hi / np.linalg.norm(hi)
    return EigenDecomposition(values, np.column_stack([lo, hi]))


def _eigen_jacobi(a: np.ndarray) -> EigenDecomposition:
    n = a.shape[0]
    m = [[complex(a[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    target = JACOBI_TOL * norm(a)

    def off() -> float:
        return math.sqrt(sum(abs(m[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))

    for _ in range(_MAX_SWEEPS):
        if off() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                g = abs(apq)
                if g == 0.0:
                    continue
                # unit phase from an exactly rescaled copy; subnormal apq would round |e| away from 1
                big = math.frexp(max(abs(apq.real), abs(apq.imag)))[1]
                u = complex(math.ldexp(apq.real, -big), math.ldexp(apq.imag, -big))
                e = u / abs(u)
                app, aqq = m[p][p].real, m[q][q].real
                # real Jacobi rotation on the phase-stripped block [[app, g], [g, aqq]]
                theta = (aqq - app) / (2.0 * g)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ec = e.conjugate()
                # J restricted to (p, q) = [[c, s], [-s*conj(e), c*conj(e)]]
                jqp, jqq = -s * ec, c * ec
                for k in range(n):
                    mkp, mkq = m[k][p], m[k][q]
                    m[k][p] = mkp * c + mkq * jqp
                    m[k][q] = mkp * s + mkq * jqq
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = vkp * c + vkq * jqp
                    v[k][q] = vkp * s + vkq * jqq
                jqp_c, jqq_c = jqp.conjugate(), jqq.conjugate()
                for k in range(n):
                    mpk, mqk = m[p][k], m[q][k]
                    m[p][k] = c * mpk + jqp_c * mqk
                    m[q][k] = s * mpk + jqq_c * mqk
                m[p][q] = m[q][p] = 0j
                m[p][p] = complex(app - t * g)
                m[q][q] = complex(aqq + t * g)

    values = np.array([m[i][i].real for i in range(n)])
    vecs = np.array(v, dtype=complex)
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], vecs[:, order])


def eigen(a) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix of dimension at most 4."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > MAX_DIM:
        raise DimensionMismatch(f"eigen supports dimension <= {MAX_DIM}, got {n}")
    if n == 1:
        return EigenDecomposition(np.array([a[0, 0].real]), np.ones((1, 1), dtype=complex))
    if n == 2:
        return _eigen_2x2(a)
    return _eigen_jacobi(a)


def min_eigenvalue(a) -> float:
    return float(eigen(a).eigenvalues[0])


def is_psd(a) -> bool:
    return min_eigenvalue(a) >= -psd_tolerance(a)


def det(a) -> float:
    """Determinant of a Hermitian matrix, as the product of its eigenvalues."""
    return float(np.prod(eigen(a).eigenvalues))


def inverse(a) -> np.ndarray:
    """Inverse of a positive-definite Hermitian matrix via its eigen-decomposition."""
    vals, vecs = eigen(a)
    if vals[0] <= 0.0:
        raise LinearlyDependent(f"matrix is singular (lambda_min = {vals[0]:.3g})")
    return hermitian((vecs / vals) @ vecs.conj().T)


def normalize_states(states: Sequence) -> list[np.ndarray]:
    """Return unit-norm copies, rejecting states whose norm is off by more than NORM_TOL."""
    vecs = [np.asarray(s, dtype=complex).ravel() for s in states]
    if not vecs:
        raise DimensionMismatch("no states given")
    dim = vecs[0].shape[0]
    out = []
    for i, v in enumerate(vecs):
        if v.shape[0] != dim:
            raise DimensionMismatch(f"state {i} has dimension {v.shape[0]}, expected {dim}")
        length = float(np.linalg.norm(v))
        if abs(length - 1.0) > NORM_TOL:
            raise UnnormalizedState(f"state {i} has norm {length!r}")
        out.append(_frozen(v / length))
    return out


def gram(states: Sequence) -> np.ndarray:
    """Gram matrix N[i, j] = <state_i|state_j> with an exact unit diagonal."""
    vecs = normalize_states(states)
    phi = np.column_stack(vecs)
    n = phi.conj().T @ phi
    np.fill_diagonal(n, 1.0)
    return hermitian(n)


def reciprocal_states(states: Sequence) -> list[np.ndarray]:
    """Dual basis |rec_i> = sum_j (N^-1)_{ji} |state_j>, so <rec_i|state_j> = delta_ij."""
    vecs = normalize_states(states)
    n = gram(vecs)
    if min_eigenvalue(n) <= INDEPENDENCE_TOL:
        raise LinearlyDependent("states are linearly dependent")
    rec = np.column_stack(vecs) @ inverse(n)
    return [_frozen(rec[:, i].copy()) for i in range(rec.shape[1])]


def states_from_gram(n_mat) -> list[np.ndarray]:
    """Vectors whose Gram matrix is ``n_mat``, from a diagonally pivoted Cholesky factorization.

    The factorization stops once every remaining pivot is below
    CHOLESKY_PIVOT_TOL, so a rank-r input yields vectors of dimension r.
    The leftover Schur complement is PSD with a diagonal below the
    tolerance, which bounds every entry of the reconstruction error by it.
    """
    a = hermitian(n_mat)
    if min_eigenvalue(a) < -psd_tolerance(a):
        raise NotPSD("Gram matrix is not positive semidefinite")
    dim = a.shape[0]
    schur = np.array(a, dtype=complex)
    remaining = list(range(dim))
    columns = []
    while remaining:
        # largest pivot first; argmax breaks ties toward the smallest index
        k = remaining[int(np.argmax(schur.diagonal().real[remaining]))]
        pivot = schur[k, k].real
        if pivot < CHOLESKY_PIVOT_TOL:
            break
        col = schur[:, k] / math.sqrt(pivot)
        col[k] = math.sqrt(pivot)
        remaining.remove(k)
        col[[j for j in range(dim) if j not in remaining and j != k]] = 0.0
        schur = schur - np.outer(col, col.conj())
        schur[k, :] = 0.0
        schur[:, k] = 0.0
        columns.append(col)
    low = np.column_stack(columns) if columns else np.zeros((dim, 0), dtype=complex)
    # N = L L^dagger, so the i-th vector is the i-th column of L^dagger
    return [_frozen(low[i].conj().copy()) for i in range(dim)]
