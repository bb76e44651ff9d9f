"""Explicit measurement operators for a solved ensemble.

E_i = x_i |rec_i><rec_i| with |rec_i> the reciprocal states, and the
inconclusive element E_? = I - sum_i E_i. Ensembles given by a Gram matrix
alone are realized in an n-dimensional frame via ``linalg.states_from_gram``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .ensemble import Ensemble


@dataclass(frozen=True)
class PovmResiduals:
    completeness: float  # max |E_? + sum E_i - I|
    no_error: float  # max over i != j of |<phi_j|E_i|phi_j>|
    positivity: float  # max(0, -lambda_min) over all elements

    def worst(self) -> float:
        return max(self.completeness, self.no_error, self.positivity)


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...]
    inconclusive: np.ndarray
    residuals: PovmResiduals
    frame: str  # "ambient" for the input vectors, "span" for synthesized ones


def _frame(e: Ensemble) -> tuple[list[np.ndarray], str]:
    if e.states is not None and e.states[0].shape[0] <= linalg.MAX_DIM:
        return list(e.states), "ambient"
    return linalg.states_from_gram(e.gram), "span"


def build_povm(e: Ensemble, s) -> Povm:
    """POVM realizing the success coefficients ``s.x``."""
    states, frame = _frame(e)
    dim = states[0].shape[0]
    rec = linalg.reciprocal_states(states)
    elements = tuple(linalg.hermitian(float(xi) * np.outer(r, r.conj())) for xi, r in zip(s.x, rec))
    identity = np.eye(dim, dtype=complex)
    inconclusive = linalg.hermitian(identity - sum(elements))

    completeness = float(np.abs(inconclusive + sum(elements) - identity).max())
    leaks = [
        abs(complex(states[j].conj() @ el @ states[j]))
        for i, el in enumerate(elements)
        for j in range(len(states))
        if i != j
    ]
    lowest = min(linalg.min_eigenvalue(m) for m in elements + (inconclusive,))
    residuals = PovmResiduals(completeness, max(leaks, default=0.0), max(0.0, -lowest))
    return Povm(elements, inconclusive, residuals, frame)
