"""Brute-force maximizer of sum(eta_i x_i) over {x in [0,1]^n : N - diag(x) >= 0}.

Independent of the closed-form solver: it only evaluates feasibility. The
first n-1 coordinates are scanned on a grid; for each grid point the largest
feasible last coordinate follows from a Schur complement, after a leading
principal minor test (vectorized over the grid). The final incumbent is
re-checked with ``linalg.min_eigenvalue``.

The feasible set is closed under decreasing any coordinate, so rounding the
true optimum down onto a grid of spacing h loses at most sum(eta_i) h <= h.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .ensemble import Ensemble
from .errors import UnsupportedCase, WrongArity
from .solver import solve

COARSE_POINTS = 41  # spacing 1/40 over [0, 1]
SHRINK = 4
# refinement boxes hold 2*REFINE_HALF+1 points per axis, i.e. +-2 old spacings
REFINE_HALF = 8
MIN_ACCURACY = 1e-8
MAX_BOX_MOVES = 200
PHASE_GRID = 64


@dataclass(frozen=True)
class OracleResult:
    x: np.ndarray
    p: float
    grid_spacing: float
    refinement_rounds: int
    history: tuple[float, ...] = field(default=())  # incumbent p after each round


def _last_coordinate(gram: np.ndarray, heads: np.ndarray) -> np.ndarray:
    """Largest feasible x_n for each row of (x_1..x_{n-1}); NaN where none exists.

    With B = N[:-1, :-1] - diag(heads) positive definite, N - diag(x) >= 0
    exactly when x_n <= N_nn - b^dagger B^-1 b (Schur complement), b = N[:-1, -1].
    B is shifted by half the PSD tolerance tau before the leading-minor test and the
    solve, so accepted points satisfy N - diag(x) >= -tau I and p overshoots
    the true optimum by at most tau.
    """
    n = gram.shape[0]
    k = heads.shape[0]
    if n == 1:
        return np.ones(k)
    block = np.broadcast_to(gram[:-1, :-1], (k, n - 1, n - 1)).copy()
    idx = np.arange(n - 1)
    block[:, idx, idx] += 0.5 * linalg.psd_tolerance(gram) - heads
    ok = np.ones(k, dtype=bool)
    for m in range(1, n):
        ok &= np.linalg.det(block[:, :m, :m]).real > 0.0
    b = gram[:-1, -1]
    tail = np.full(k, np.nan)
    if ok.any():
        sol = np.linalg.solve(block[ok], np.broadcast_to(b, (int(ok.sum()), n - 1))[..., None])[..., 0]
        tail[ok] = gram[-1, -1].real - np.einsum("i,ki->k", b.conj(), sol).real
    return np.minimum(tail, 1.0)


def _scan(e: Ensemble, axes: list[np.ndarray]) -> tuple[np.ndarray, float]:
    if e.n == 1:
        heads = np.zeros((1, 0))
    else:
        heads = np.array(list(itertools.product(*axes)))
    tail = _last_coordinate(np.asarray(e.gram), heads)
    values = heads @ e.priors[:-1] + e.priors[-1] * tail
    values = np.where(tail >= 0.0, values, -np.inf)
    best = int(np.argmax(values))
    if not np.isfinite(values[best]):
        # x = 0 is always feasible, but the axes may not contain it
        return np.zeros(e.n), 0.0
    return np.append(heads[best], tail[best]), float(values[best])


def _box_axes(center: np.ndarray, h: float) -> list[np.ndarray]:
    offsets = h * np.arange(-REFINE_HALF, REFINE_HALF + 1)
    axes = []
    for c in center:
        ax = c + offsets
        ax = ax[(ax >= 0.0) & (ax <= 1.0)]
        axes.append(np.unique(np.append(ax, c)))
    return axes


def _on_open_edge(x: np.ndarray, axes: list[np.ndarray]) -> bool:
    """True when x sits on a box face that is not also a face of [0, 1]^n."""
    for xi, ax in zip(x, axes):
        if (xi == ax[0] and xi > 0.0) or (xi == ax[-1] and xi < 1.0):
            return True
    return False


def _refine(e: Ensemble, target_accuracy: float) -> OracleResult:
    h = 1.0 / (COARSE_POINTS - 1)
    best_x, best_p = _scan(e, [np.linspace(0.0, 1.0, COARSE_POINTS)] * (e.n - 1))
    history = [best_p]
    rounds = 0
    while h > target_accuracy:
        h /= SHRINK
        rounds += 1
        for _ in range(MAX_BOX_MOVES):
            axes = _box_axes(best_x[:-1], h)
            x, p = _scan(e, axes)
            if p > best_p:
                best_x, best_p = x, p
            # the optimum may lie beyond the box; follow it at the same spacing
            if not (p >= best_p and _on_open_edge(x[:-1], axes)):
                break
        history.append(best_p)
    return OracleResult(best_x, best_p, h, rounds, tuple(history))


def _permuted(e: Ensemble, order: list[int]) -> Ensemble:
    gram = np.asarray(e.gram)[np.ix_(order, order)]
    return Ensemble(priors=e.priors[order], gram=gram)


def brute_force(e: Ensemble, target_accuracy: float = 1e-5) -> OracleResult:
    """Grid maximization with a box shrinking by SHRINK around the incumbent each round.

    The search is repeated with each coordinate in turn as the one solved
    exactly. An optimum with x_j = 0 sits on a kink of the scanned function
    when j is the solved coordinate, where grid refinement can stall; with
    another coordinate solved, x_j = 0 is a face of the grid instead.
    """
    if e.n > 3:
        raise WrongArity(f"oracle handles at most 3 states, got {e.n}")
    if not target_accuracy >= MIN_ACCURACY:
        raise ValueError(f"target_accuracy must be >= {MIN_ACCURACY}, got {target_accuracy}")

    best = None
    for last in range(e.n):
        order = [i for i in range(e.n) if i != last] + [last]
        r = _refine(_permuted(e, order), target_accuracy)
        if best is None or r.p > best[0].p:
            x = np.empty(e.n)
            x[order] = r.x
            best = (r, x)
    r, x = best

    lam = linalg.min_eigenvalue(linalg.hermitian(np.asarray(e.gram) - np.diag(x)))
    assert lam >= -linalg.psd_tolerance(e.gram), "oracle incumbent is infeasible"
    x.setflags(write=False)
    return OracleResult(x, float(e.priors @ x), r.grid_spacing, r.refinement_rounds, r.history)


def _phase_scan_bound(e: Ensemble) -> float:
    """min over unit phases chi of tr(Y N) with y_i = sqrt(eta_i) exp(i chi_i).

    Every such Y is dual feasible, so the value is an upper bound on the optimum.
    """
    gram = np.asarray(e.gram)
    root = np.sqrt(e.priors)

    def value(chi2, chi3):
        v = np.stack([np.full_like(chi2, root[0], dtype=complex),
                      root[1] * np.exp(-1j * chi2),
                      root[2] * np.exp(-1j * chi3)])
        return np.einsum("i...,ij,j...->...", v.conj(), gram, v).real

    grid = np.linspace(0.0, 2.0 * math.pi, PHASE_GRID, endpoint=False)
    c2, c3 = np.meshgrid(grid, grid, indexing="ij")
    vals = value(c2, c3)
    k = np.unravel_index(np.argmin(vals), vals.shape)
    center = np.array([grid[k[0]], grid[k[1]]])
    best = float(vals[k])
    step = 2.0 * math.pi / PHASE_GRID
    local = np.linspace(-1.0, 1.0, 21)
    while step > 1e-10:
        a2, a3 = np.meshgrid(center[0] + step * local, center[1] + step * local, indexing="ij")
        vals = value(a2, a3)
        k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[k] <= best:
            best = float(vals[k])
            center = np.array([a2[k], a3[k]])
        step /= 5.0
    return best


def certify_with_duality(e: Ensemble, r: OracleResult) -> float:
    """Upper bound tr(Y N) on the optimum, to sandwich the oracle's p.

    Uses the analytic certificate when one exists; for complex Gamma with
    unequal alpha_i*sqrt(eta_i) it falls back to the best rank-one phase vector.
    """
    try:
        s = solve(e)
    except UnsupportedCase:
        return _phase_scan_bound(e)
    return s.certificate.d_value
