"""Closed-form optimal unambiguous discrimination for one, two and three states.

The pipeline: solve the relaxed problem (x >= 0 dropped) in closed form; if
every relaxed coefficient is non-negative it is optimal, otherwise some state
with a negative relaxed coefficient is never identified and the problem
reduces to one with that state projected out. With several negative
coefficients each reduction is tried and the best kept.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import certificate as cert
from .certificate import DualCertificate
from .ensemble import (
    Ensemble,
    GammaClass,
    PhaseProfile,
    ensemble_from_gram,
    phase_profile,
    triangle_condition,
)
from .errors import DegenerateReduction, NotEquilateral, UnsupportedComplexCase, WrongArity

# relaxed coefficients in [-NEGATIVE_CLAMP, 0) count as zero
NEGATIVE_CLAMP = 1e-12
EQUILATERAL_TOL = 1e-9
DEGENERATE_Q = 1e-12
TIE_TOL = 1e-12


class Branch(str, enum.Enum):
    ONE_STATE = "ONE_STATE"
    TWO_STATE = "TWO_STATE"
    THREE_NEG_GAMMA = "THREE_NEG_GAMMA"
    THREE_POS_TRIANGLE = "THREE_POS_TRIANGLE"
    THREE_POS_NO_TRIANGLE = "THREE_POS_NO_TRIANGLE"
    COMPLEX_EQUILATERAL = "COMPLEX_EQUILATERAL"


@dataclass(frozen=True)
class RelaxedSolution:
    x_relaxed: np.ndarray
    d_min: float
    branch: Branch


@dataclass(frozen=True)
class ReductionStep:
    dropped_index: int
    reduced_priors: tuple[float, ...]
    reduced_overlaps: tuple[float, ...]


@dataclass(frozen=True)
class Solution:
    """Optimal success coefficients; indices in ``reduction_trace`` refer to the input ensemble."""

    x: np.ndarray
    p_max: float
    branch: Branch
    reduction_trace: tuple[ReductionStep, ...] = ()
    certificate: Optional[DualCertificate] = None
    relaxed: Optional[RelaxedSolution] = None

    @property
    def tag(self) -> str:
        """Branch name with the dropped states appended, e.g. ``THREE_NEG_GAMMA+DROP2``."""
        if not self.reduction_trace:
            return self.branch.value
        return self.branch.value + "+DROP" + "".join(str(r.dropped_index) for r in self.reduction_trace)


@dataclass(frozen=True)
class Reduction:
    ensemble: Ensemble
    dropped: int
    kept: tuple[int, ...]
    q_factors: np.ndarray  # <phi_i|Q|phi_i> for the kept states
    scale: float  # sum_k eta_k <phi_k|Q|phi_k>


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _upper_overlaps(gram) -> tuple[float, ...]:
    n = gram.shape[0]
    return tuple(float(abs(gram[i, j])) for i in range(n) for j in range(i + 1, n))


def reduce_problem(e: Ensemble, drop_index: int) -> Reduction:
    """Project out state ``drop_index``; the reduced ensemble is built from the Gram matrix alone."""
    if e.n < 2:
        raise WrongArity("cannot reduce a one-state problem")
    n_mat = np.asarray(e.gram)
    kept = tuple(i for i in range(e.n) if i != drop_index)
    k = drop_index
    proj = np.array([[n_mat[i, j] - n_mat[i, k] * n_mat[k, j] for j in kept] for i in kept])
    q = proj.diagonal().real.copy()
    if q.min() <= DEGENERATE_Q:
        raise DegenerateReduction(f"a kept state coincides with state {drop_index}")
    new_gram = proj / np.sqrt(np.outer(q, q))
    weights = e.priors[list(kept)] * q
    scale = float(weights.sum())
    reduced = ensemble_from_gram(new_gram, weights / scale)
    return Reduction(reduced, drop_index, kept, _frozen(q), scale)


def _lift(e: Ensemble, red: Reduction, sub: Solution) -> tuple[np.ndarray, float, tuple[ReductionStep, ...], DualCertificate]:
    x = np.zeros(e.n)
    x[list(red.kept)] = red.q_factors * sub.x
    p = red.scale * sub.p_max
    assert abs(p - float(e.priors @ x)) <= 1e-12, "reduced success probability does not re-sum"
    step = ReductionStep(red.dropped, tuple(red.ensemble.priors.tolist()), _upper_overlaps(red.ensemble.gram))
    inner = tuple(
        ReductionStep(red.kept[s.dropped_index], s.reduced_priors, s.reduced_overlaps)
        for s in sub.reduction_trace
    )
    c = cert.lift_certificate(e, sub.certificate, red.dropped, red.kept, red.q_factors, red.scale)
    return x, p, (step,) + inner, c


def _finish(e: Ensemble, x, p: float, branch: Branch, trace=(), c=None, relaxed=None) -> Solution:
    x = _frozen(x)
    if c is not None:
        c = cert.with_residuals(e, c, x, p)
    return Solution(x, float(p), branch, tuple(trace), c, relaxed)


def _solve_one(e: Ensemble) -> Solution:
    c = cert.build_certificate(e, Branch.ONE_STATE)
    return _finish(e, [1.0], float(e.priors[0]), Branch.ONE_STATE, c=c)


def solve_two_state(e: Ensemble) -> Solution:
    """Two-state optimum from the three regimes of the ratio sqrt(eta_2/eta_1) against |<1|2>|."""
    if e.n != 2:
        raise WrongArity(f"two-state solver got {e.n} states")
    eta1, eta2 = e.priors
    s = abs(e.overlap(0, 1))
    ratio = math.sqrt(eta2 / eta1)
    xr = np.array([1.0 - ratio * s, 1.0 - s / ratio])
    relaxed = RelaxedSolution(_frozen(xr), 1.0 - 2.0 * math.sqrt(eta1 * eta2) * s, Branch.TWO_STATE)

    if ratio < s:
        drop, x, p = 1, [1.0 - s * s, 0.0], eta1 * (1.0 - s * s)
    elif s > 0.0 and ratio > 1.0 / s:
        drop, x, p = 0, [0.0, 1.0 - s * s], eta2 * (1.0 - s * s)
    else:
        c = cert.build_certificate(e, Branch.TWO_STATE)
        return _finish(e, xr, relaxed.d_min, Branch.TWO_STATE, c=c, relaxed=relaxed)

    red = reduce_problem(e, drop)
    sub = _solve_one(red.ensemble)
    _, _, trace, c = _lift(e, red, sub)
    return _finish(e, x, p, Branch.TWO_STATE, trace, c, relaxed)


def _sqrt_priors(e: Ensemble) -> np.ndarray:
    return np.sqrt(e.priors)


def relaxed_three_neg(e: Ensemble, phase: Optional[PhaseProfile] = None) -> RelaxedSolution:
    """Relaxed optimum when Gamma <= 0 (inner products can be made real and non-positive)."""
    phase = phase or phase_profile(e)
    s12, s23, s31 = phase.overlaps
    r1, r2, r3 = _sqrt_priors(e)
    x = [
        1.0 - (r2 * s12 + r3 * s31) / r1,
        1.0 - (r1 * s12 + r3 * s23) / r2,
        1.0 - (r1 * s31 + r2 * s23) / r3,
    ]
    d = 1.0 - 2.0 * (r1 * r2 * s12 + r2 * r3 * s23 + r3 * r1 * s31)
    return RelaxedSolution(_frozen(x), d, Branch.THREE_NEG_GAMMA)


def relaxed_three_pos(e: Ensemble, phase: Optional[PhaseProfile] = None) -> RelaxedSolution:
    """Relaxed optimum when Gamma > 0, split on the triangle condition."""
    phase = phase or phase_profile(e)
    alpha = np.array(phase.alphas)
    root = _sqrt_priors(e)
    if triangle_condition(alpha, e.priors):
        x = 1.0 - alpha**2
        return RelaxedSolution(_frozen(x), 1.0 - float(e.priors @ alpha**2), Branch.THREE_POS_TRIANGLE)

    lengths = alpha * root
    # largest length first (stable sort keeps the smaller index on ties), then the rest in order
    order = sorted(range(3), key=lambda i: -lengths[i])
    perm = [order[0]] + sorted(order[1:])
    a1, a2, a3 = alpha[perm]
    r1, r2, r3 = root[perm]
    l1, l2, l3 = lengths[perm]
    xp = [
        1.0 - (a1 / r1) * (l2 + l3),
        1.0 - (a2 / r2) * (l1 - l3),
        1.0 - (a3 / r3) * (l1 - l2),
    ]
    d = 1.0 - 2.0 * r1 * r2 * a1 * a2 + 2.0 * r2 * r3 * a2 * a3 - 2.0 * r3 * r1 * a3 * a1
    x = np.empty(3)
    x[perm] = xp
    return RelaxedSolution(_frozen(x), d, Branch.THREE_POS_NO_TRIANGLE)


def relaxed_complex_equilateral(e: Ensemble, phase: Optional[PhaseProfile] = None) -> RelaxedSolution:
    """Relaxed optimum for complex Gamma when all alpha_i*sqrt(eta_i) coincide."""
    phase = phase or phase_profile(e)
    if phase.alphas is None:
        raise NotEquilateral("alphas are undefined when an overlap vanishes")
    alpha = np.array(phase.alphas)
    lengths = alpha * _sqrt_priors(e)
    if lengths.max() - lengths.min() > EQUILATERAL_TOL * lengths.max():
        raise NotEquilateral(f"alpha_i*sqrt(eta_i) differ: {lengths.tolist()}")
    c = math.cos(phase.theta + 2.0 * math.pi / 3.0)
    x = 1.0 + 2.0 * alpha**2 * c
    d = 1.0 + 2.0 * c * float(e.priors @ alpha**2)
    return RelaxedSolution(_frozen(x), d, Branch.COMPLEX_EQUILATERAL)


def relax_three(e: Ensemble, phase: Optional[PhaseProfile] = None) -> RelaxedSolution:
    phase = phase or phase_profile(e)
    if phase.gamma_class is GammaClass.NEGATIVE_OR_ZERO:
        return relaxed_three_neg(e, phase)
    if phase.gamma_class is GammaClass.POSITIVE:
        return relaxed_three_pos(e, phase)
    try:
        return relaxed_complex_equilateral(e, phase)
    except NotEquilateral as exc:
        raise UnsupportedComplexCase(
            f"complex Gamma (theta = {phase.theta:.6g}) without equal alpha_i*sqrt(eta_i) "
            "has no closed form; use the numerical oracle"
        ) from exc


def _solve_three(e: Ensemble) -> Solution:
    phase = phase_profile(e)
    relaxed = relax_three(e, phase)
    xr = relaxed.x_relaxed
    negative = [i for i in range(3) if xr[i] < -NEGATIVE_CLAMP]
    if not negative:
        c = cert.build_certificate(e, relaxed.branch, phase)
        return _finish(e, np.maximum(xr, 0.0), relaxed.d_min, relaxed.branch, c=c, relaxed=relaxed)

    best = None
    for i in negative:
        red = reduce_problem(e, i)
        sub = solve(red.ensemble)
        x, p, trace, c = _lift(e, red, sub)
        if best is None or p > best[1] + TIE_TOL:
            best = (x, p, trace, c)
        elif abs(p - best[1]) <= TIE_TOL:
            # the optimum is unique, so tied candidates must agree
            assert np.allclose(x, best[0], atol=1e-9), "tied reductions disagree on x"
    x, p, trace, c = best
    return _finish(e, x, p, relaxed.branch, trace, c, relaxed)


def solve(e: Ensemble) -> Solution:
    """Optimal measurement coefficients for 1, 2 or 3 linearly independent states."""
    if e.n == 1:
        return _solve_one(e)
    if e.n == 2:
        return solve_two_state(e)
    if e.n == 3:
        return _solve_three(e)
    raise WrongArity(f"analytic solver handles 1-3 states, got {e.n}")
