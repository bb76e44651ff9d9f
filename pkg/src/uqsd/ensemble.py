"""Discrimination problem instances and their phase-invariant parameters."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import (
    BadPriors,
    DimensionMismatch,
    LinearlyDependent,
    NotHermitian,
    UnnormalizedState,
    WrongArity,
)

MAX_STATES = 4
PRIOR_SUM_TOL = 1e-9
# |Im Gamma| <= REAL_GAMMA_TOL * |Gamma| counts as real
REAL_GAMMA_TOL = 1e-10
ZERO_OVERLAP_TOL = 1e-12
TRIANGLE_TOL = 1e-12

# (i, j) index pairs in the order <1|2>, <2|3>, <3|1>
CYCLE = ((0, 1), (1, 2), (2, 0))


class GammaClass(str, enum.Enum):
    NEGATIVE_OR_ZERO = "NEGATIVE_OR_ZERO"
    POSITIVE = "POSITIVE"
    COMPLEX = "COMPLEX"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ensemble:
    """n pure states with prior probabilities.

    ``states`` is None for ensembles known only through their Gram matrix
    (for instance the reduced problems produced during solving).
    """

    priors: np.ndarray
    gram: np.ndarray
    states: Optional[tuple[np.ndarray, ...]] = field(default=None)

    @property
    def n(self) -> int:
        return self.priors.shape[0]

    def overlap(self, i: int, j: int) -> complex:
        return complex(self.gram[i, j])


def _check_priors(priors, n: int) -> np.ndarray:
    eta = np.asarray(priors, dtype=float).ravel()
    if eta.shape[0] != n:
        raise DimensionMismatch(f"got {eta.shape[0]} priors for {n} states")
    if not np.all(np.isfinite(eta)) or np.any(eta <= 0.0):
        raise BadPriors(f"priors must be positive, got {eta.tolist()}")
    total = float(eta.sum())
    if abs(total - 1.0) > PRIOR_SUM_TOL:
        raise BadPriors(f"priors sum to {total!r}, not 1")
    return _frozen(eta / total)


def _check_arity(n: int) -> None:
    if not 1 <= n <= MAX_STATES:
        raise WrongArity(f"ensembles hold 1..{MAX_STATES} states, got {n}")


def _check_independent(n_mat: np.ndarray) -> None:
    lam = linalg.min_eigenvalue(n_mat)
    if lam <= linalg.INDEPENDENCE_TOL:
        raise LinearlyDependent(f"states are linearly dependent (Gram lambda_min = {lam:.3g})")


def build_ensemble(states: Sequence, priors: Sequence[float]) -> Ensemble:
    """Validate states and priors; states within NORM_TOL of unit norm are renormalized."""
    _check_arity(len(states))
    eta = _check_priors(priors, len(states))
    vecs = linalg.normalize_states(states)
    n_mat = linalg.gram(vecs)
    _check_independent(n_mat)
    return Ensemble(priors=eta, gram=n_mat, states=tuple(vecs))


def ensemble_from_gram(gram, priors: Sequence[float]) -> Ensemble:
    """Ensemble specified by its Gram matrix alone (unit diagonal required)."""
    a = np.asarray(gram, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Gram matrix must be square, got shape {a.shape}")
    _check_arity(a.shape[0])
    if np.abs(a - a.conj().T).max() > 1e-12:
        raise NotHermitian("Gram matrix is not Hermitian")
    diag = a.diagonal()
    if np.abs(diag - 1.0).max() > linalg.NORM_TOL:
        raise UnnormalizedState(f"Gram diagonal must be 1, got {diag.real.tolist()}")
    eta = _check_priors(priors, a.shape[0])
    n_mat = a.copy()
    np.fill_diagonal(n_mat, 1.0)
    n_mat = linalg.hermitian(n_mat)
    _check_independent(n_mat)
    return Ensemble(priors=eta, gram=n_mat)


def example_states(phi2: float, phi3: float, theta3: float) -> list[np.ndarray]:
    """The three real unit vectors used in the sweep examples."""
    return [
        np.array([1.0, 0.0, 0.0]),
        np.array([math.cos(phi2), math.sin(phi2), 0.0]),
        np.array([math.cos(phi3) * math.sin(theta3), math.sin(phi3) * math.sin(theta3), math.cos(theta3)]),
    ]


@dataclass(frozen=True)
class PhaseProfile:
    """Phase-invariant description of a three-state Gram matrix.

    ``overlaps`` are |<1|2>|, |<2|3>|, |<3|1>|; ``alphas`` satisfy
    alpha_i * alpha_j = |<i|j>| and are None when any overlap vanishes.
    """

    gamma: complex
    gamma_modulus: float
    theta: float
    overlaps: tuple[float, float, float]
    alphas: Optional[tuple[float, float, float]]
    gamma_class: GammaClass


def phase_profile(e: Ensemble) -> PhaseProfile:
    if e.n != 3:
        raise WrongArity(f"phase profile needs exactly 3 states, got {e.n}")
    pairs = [e.overlap(i, j) for i, j in CYCLE]
    s12, s23, s31 = (abs(z) for z in pairs)
    overlaps = (s12, s23, s31)
    if min(overlaps) <= ZERO_OVERLAP_TOL:
        return PhaseProfile(0j, 0.0, math.pi / 3, overlaps, None, GammaClass.NEGATIVE_OR_ZERO)

    gamma = pairs[0] * pairs[1] * pairs[2]
    modulus = abs(gamma)
    alphas = (
        math.sqrt(s12 * s31 / s23),
        math.sqrt(s12 * s23 / s31),
        math.sqrt(s23 * s31 / s12),
    )
    if abs(gamma.imag) <= REAL_GAMMA_TOL * max(modulus, 1e-30):
        if gamma.real > 0.0:
            return PhaseProfile(gamma, modulus, 0.0, overlaps, alphas, GammaClass.POSITIVE)
        return PhaseProfile(gamma, modulus, math.pi / 3, overlaps, alphas, GammaClass.NEGATIVE_OR_ZERO)

    theta = (cmath.phase(gamma) / 3.0) % (2.0 * math.pi / 3.0)
    return PhaseProfile(gamma, modulus, theta, overlaps, alphas, GammaClass.COMPLEX)


def triangle_condition(alphas: Sequence[float], priors: Sequence[float]) -> bool:
    """True when the lengths alpha_i*sqrt(eta_i) form a (possibly degenerate) triangle."""
    a = [al * math.sqrt(et) for al, et in zip(alphas, priors)]
    slack = TRIANGLE_TOL * max(a)
    return all(a[i] <= a[(i + 1) % 3] + a[(i + 2) % 3] + slack for i in range(3))
