"""Dual certificates for the discrimination SDP.

The dual of "maximize sum(eta_i x_i) s.t. N - diag(x) >= 0" is
"minimize tr(Y N) s.t. Y >= 0, Y_ii = eta_i". Every certificate built here is
rank one, Y_ij = conj(y_i) y_j, so (N - X) Y = 0 is the same statement as
(N - X) conj(y) = 0.

When the x >= 0 constraints are active (a state is never identified), the
dual diagonal condition relaxes to Y_ii >= eta_i on those indices; the
residuals below account for that.
"""
from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .ensemble import CYCLE, Ensemble, PhaseProfile, ZERO_OVERLAP_TOL
from .errors import TriangleClosureFailure, UnsupportedCase

PSD_THRESHOLD = -1e-9
DIAGONAL_THRESHOLD = 1e-10
ATTAINABILITY_THRESHOLD = 1e-9
GAP_THRESHOLD = 1e-9
TRIANGLE_CLOSURE_TOL = 1e-10

OMEGA = cmath.exp(2j * math.pi / 3)


@dataclass(frozen=True)
class Residuals:
    psd: float  # smallest eigenvalue of Y
    diagonal: float
    attainability: float  # max |((N - X) Y)_ij|
    gap: float  # |tr(Y N) - p|

    def failures(self) -> list[str]:
        out = []
        if self.psd < PSD_THRESHOLD:
            out.append("psd")
        if self.diagonal > DIAGONAL_THRESHOLD:
            out.append("diagonal")
        if self.attainability > ATTAINABILITY_THRESHOLD:
            out.append("attainability")
        if self.gap > GAP_THRESHOLD:
            out.append("gap")
        return out


@dataclass(frozen=True)
class DualCertificate:
    y: np.ndarray
    y_matrix: np.ndarray
    d_value: float
    residuals: Optional[Residuals] = field(default=None)


@dataclass(frozen=True)
class VerificationReport:
    residuals: Residuals
    primal_min_eigenvalue: float
    min_x: float
    p_recomputed: float
    failures: tuple[str, ...]

    @property
    def certified(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        return "CERTIFIED" if self.certified else "NOT_CERTIFIED"


def dual_value(y_matrix, gram) -> float:
    """tr(Y N) summed entrywise."""
    return float(np.sum(np.asarray(y_matrix) * np.asarray(gram).T).real)


def dual_value_from_vector(y, gram) -> float:
    """tr(Y N) as the quadratic form v^dagger N v with v = conj(y)."""
    v = np.conj(np.asarray(y, dtype=complex))
    return float((v.conj() @ np.asarray(gram) @ v).real)


def certificate_from_vector(e: Ensemble, y) -> DualCertificate:
    y = np.asarray(y, dtype=complex)
    y.setflags(write=False)
    y_matrix = linalg.hermitian(np.outer(y.conj(), y))
    return DualCertificate(y=y, y_matrix=y_matrix, d_value=dual_value(y_matrix, e.gram))


def _gauge(gram: np.ndarray, psi: float) -> np.ndarray:
    """Unit phases c with conj(c_a) N_ab c_b = |N_ab| e^{i psi} on every cyclic pair (a, b).

    For three states this closes consistently when e^{3 i psi} is the phase of
    Gamma; pairs with vanishing overlap are unconstrained.
    """
    n = gram.shape[0]
    edges = [(0, 1)] if n == 2 else list(CYCLE) if n == 3 else []
    edges = [(a, b) for a, b in edges if abs(gram[a, b]) > ZERO_OVERLAP_TOL]
    want = cmath.exp(1j * psi)
    c: list[Optional[complex]] = [None] * n
    for root in range(n):
        if c[root] is not None:
            continue
        c[root] = 1.0 + 0j
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for a, b in edges:
                ph = gram[a, b] / abs(gram[a, b])
                if a == node and c[b] is None:
                    c[b] = c[a] * want / ph
                    queue.append(b)
                elif b == node and c[a] is None:
                    c[a] = c[b] * ph / want
                    queue.append(a)
    return np.array(c, dtype=complex)


def _closing_triangle(lengths: Sequence[float]) -> np.ndarray:
    """Complex numbers u_i with |u_i| = lengths[i] and u_1 + u_2 + u_3 = 0."""
    a1, a2, a3 = lengths
    cos2 = (a3 * a3 - a1 * a1 - a2 * a2) / (2.0 * a1 * a2)
    angle = math.acos(min(1.0, max(-1.0, cos2)))
    u1 = complex(a1, 0.0)
    u2 = a2 * cmath.exp(1j * angle)
    u3 = -(u1 + u2)
    if abs(abs(u3) - a3) > TRIANGLE_CLOSURE_TOL * max(1.0, a1, a2, a3):
        raise TriangleClosureFailure(f"lengths {lengths} do not close a triangle")
    if abs(u3) > 0.0:
        u3 *= a3 / abs(u3)
    return np.array([u1, u2, u3])


def build_certificate(e: Ensemble, branch, phase: Optional[PhaseProfile] = None) -> DualCertificate:
    """Rank-one dual certificate for an un-reduced analytic branch.

    ``branch`` is a :class:`uqsd.solver.Branch` (or its string value). The
    canonical y-vector is written in the gauge where the inner products share
    one phase, then rotated back to the ensemble's actual phases.
    """
    name = getattr(branch, "value", branch)
    root = np.sqrt(e.priors)
    if name == "ONE_STATE":
        return certificate_from_vector(e, root.astype(complex))
    if name == "TWO_STATE":
        psi, y0 = math.pi, root.astype(complex)
    elif phase is None:
        raise ValueError(f"branch {name} needs a phase profile")
    elif name == "THREE_NEG_GAMMA":
        psi, y0 = math.pi, root.astype(complex)
    elif name == "THREE_POS_TRIANGLE":
        alphas = np.array(phase.alphas)
        psi, y0 = 0.0, _closing_triangle(alphas * root) / alphas
    elif name == "THREE_POS_NO_TRIANGLE":
        lengths = np.array(phase.alphas) * root
        largest = int(np.argmax(lengths))
        y0 = -root.astype(complex)
        y0[largest] = root[largest]
        psi = 0.0
    elif name == "COMPLEX_EQUILATERAL":
        psi = phase.theta
        y0 = root * np.array([1.0, OMEGA**2, OMEGA])
    else:
        raise UnsupportedCase(f"no certificate recipe for branch {name}")
    c = _gauge(np.asarray(e.gram), psi)
    return certificate_from_vector(e, np.conj(c) * y0)


def lift_certificate(e: Ensemble, reduced: DualCertificate, drop: int, kept: Sequence[int],
                     q_factors: Sequence[float], scale: float) -> DualCertificate:
    """Certificate for ``e`` given one for the problem with state ``drop`` removed.

    If v' spans the kernel of N' - X' for the reduced problem, then
    u = sqrt(scale) * v' / sqrt(q) spans the kernel of the projected block, and
    (u, -N[drop, kept] u) spans the kernel of N - X with x_drop = 0.
    """
    v_red = np.conj(reduced.y)
    u = math.sqrt(scale) * v_red / np.sqrt(np.asarray(q_factors))
    n_mat = np.asarray(e.gram)
    v = np.zeros(e.n, dtype=complex)
    v[list(kept)] = u
    v[drop] = -n_mat[drop, list(kept)] @ u
    return certificate_from_vector(e, np.conj(v))


def compute_residuals(e: Ensemble, y_matrix, x, p: float) -> Residuals:
    y_matrix = np.asarray(y_matrix)
    x = np.asarray(x, dtype=float)
    eta = e.priors
    diag = y_matrix.diagonal().real
    # equality where the state is identified, Y_ii >= eta_i where x_i = 0
    diag_res = np.where(x > 0.0, np.abs(diag - eta), np.maximum(0.0, eta - diag))
    slack = (np.asarray(e.gram) - np.diag(x)) @ y_matrix
    return Residuals(
        psd=linalg.min_eigenvalue(linalg.hermitian(y_matrix)),
        diagonal=float(diag_res.max()),
        attainability=float(np.abs(slack).max()),
        gap=abs(dual_value(y_matrix, e.gram) - float(p)),
    )


def with_residuals(e: Ensemble, c: DualCertificate, x, p: float) -> DualCertificate:
    return DualCertificate(c.y, c.y_matrix, c.d_value, compute_residuals(e, c.y_matrix, x, p))


def verify(e: Ensemble, s, c: DualCertificate) -> VerificationReport:
    """Recheck a solution against a certificate from scratch.

    ``s`` needs ``x`` and ``p_max`` attributes. Failures are reported, never raised.
    """
    x = np.asarray(s.x, dtype=float)
    if x.shape[0] != e.n or np.asarray(c.y_matrix).shape != (e.n, e.n):
        raise ValueError("solution, certificate and ensemble dimensions disagree")
    p = float(e.priors @ x)
    res = compute_residuals(e, c.y_matrix, x, p)
    primal = np.asarray(e.gram) - np.diag(x)
    lam = linalg.min_eigenvalue(linalg.hermitian(primal))
    failures = res.failures()
    if lam < -linalg.psd_tolerance(e.gram):
        failures.append("primal_feasibility")
    if x.min() < 0.0:
        failures.append("negative_x")
    if abs(p - float(s.p_max)) > GAP_THRESHOLD:
        failures.append("p_mismatch")
    return VerificationReport(res, lam, float(x.min()), p, tuple(failures))
