import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqsd import linalg
from uqsd.ensemble import build_ensemble, ensemble_from_gram, example_states
from uqsd.errors import NotEquilateral, UnsupportedComplexCase, WrongArity
from uqsd.solver import (
    Branch,
    reduce_problem,
    relaxed_complex_equilateral,
    relaxed_three_neg,
    relaxed_three_pos,
    solve,
    solve_two_state,
)

from generators import BRANCHES, _gram3, complex_general, instances

PHI2, PHI3 = math.pi / 3, math.pi / 4


def two(s, eta1):
    return ensemble_from_gram([[1, s], [s, 1]], [eta1, 1 - eta1])


def sym(moduli, phases, priors=(1 / 3,) * 3):
    return ensemble_from_gram(_gram3(moduli, phases), priors)


def test_one_state():
    s = solve(ensemble_from_gram([[1]], [1.0]))
    assert s.x.tolist() == [1.0] and s.p_max == 1.0 and s.branch is Branch.ONE_STATE


def test_two_state_orthogonal():
    s = solve_two_state(two(0.0, 0.5))
    assert s.x.tolist() == [1.0, 1.0] and s.p_max == 1.0


def test_two_state_regime_ii():
    s = solve_two_state(two(0.6, 0.5))
    assert s.x == pytest.approx([0.4, 0.4], abs=1e-15)
    assert s.p_max == pytest.approx(0.4, abs=1e-15)
    assert s.tag == "TWO_STATE"


def test_two_state_regime_i():
    s = solve_two_state(two(0.5, 0.9))
    assert s.x == pytest.approx([0.75, 0.0], abs=1e-15)
    assert s.p_max == pytest.approx(0.675, abs=1e-15)
    assert s.tag == "TWO_STATE+DROP1"


def test_two_state_regime_iii_mirrors_regime_i():
    s = solve_two_state(two(0.5, 0.1))
    assert s.x == pytest.approx([0.0, 0.75], abs=1e-15)
    assert s.p_max == pytest.approx(0.675, abs=1e-15)


def test_two_state_depends_only_on_modulus():
    a = solve(ensemble_from_gram([[1, 0.4j], [-0.4j, 1]], [0.3, 0.7]))
    b = solve(two(0.4, 0.3))
    assert a.x == pytest.approx(b.x, abs=1e-15)


def test_relaxed_three_neg_examples():
    r = relaxed_three_neg(sym((0, 0, 0), (0, 0, 0)))
    assert r.x_relaxed.tolist() == [1.0, 1.0, 1.0] and r.d_min == 1.0
    r = relaxed_three_neg(sym((0.2, 0.2, 0.2), (math.pi, 0, 0)))
    assert r.x_relaxed == pytest.approx([0.6] * 3, abs=1e-15)
    assert r.d_min == pytest.approx(0.6, abs=1e-15)


def test_relaxed_three_neg_forces_reduction():
    e = sym((0.4, 0.05, 0.4), (math.pi, 0, 0), (0.1, 0.45, 0.45))
    r = relaxed_three_neg(e)
    expected = 1 - (math.sqrt(0.45) * 0.4 * 2) / math.sqrt(0.1)
    assert r.x_relaxed[0] == pytest.approx(expected, abs=1e-14) and r.x_relaxed[0] < 0
    s = solve(e)
    assert s.x[0] == 0.0 and len(s.reduction_trace) == 1 and s.reduction_trace[0].dropped_index == 0
    # the reduced problem is a symmetric two-state problem with overlap
    # |N23 - N21 N13| / (1 - 0.16) = (0.05 + 0.16) / 0.84 = 0.25
    assert s.reduction_trace[0].reduced_overlaps == pytest.approx((0.25,), abs=1e-14)
    assert s.x == pytest.approx([0.0, 0.84 * 0.75, 0.84 * 0.75], abs=1e-14)
    assert s.p_max == pytest.approx(0.567, abs=1e-14)


def test_relaxed_three_pos_triangle_example():
    r = relaxed_three_pos(sym((0.3, 0.3, 0.3), (0, 0, 0)))
    assert r.branch is Branch.THREE_POS_TRIANGLE
    assert r.x_relaxed == pytest.approx([0.7] * 3, abs=1e-15)
    assert r.d_min == pytest.approx(0.7, abs=1e-15)


def test_relaxed_three_pos_example_one():
    theta3 = math.pi / 5
    r = relaxed_three_pos(build_ensemble(example_states(PHI2, PHI3, theta3), [1 / 3] * 3))
    x1 = 1 - math.cos(PHI2) * math.cos(PHI3) / math.cos(PHI2 - PHI3)
    x2 = 1 - math.cos(PHI2) * math.cos(PHI2 - PHI3) / math.cos(PHI3)
    x3 = 1 - math.cos(PHI3) * math.cos(PHI2 - PHI3) / math.cos(PHI2) * math.sin(theta3) ** 2
    assert r.x_relaxed == pytest.approx([x1, x2, x3], abs=1e-14)
    assert (x1, x2) == pytest.approx((0.633975, 0.316987), abs=1e-6)


def test_relaxed_three_pos_no_triangle_signs():
    # alpha*sqrt(eta) = (0.6, 0.2, 0.2) with equal priors: alpha = lengths * sqrt(3)
    a = np.array([0.6, 0.2, 0.2]) * math.sqrt(3)
    e = sym((a[0] * a[1], a[1] * a[2], a[2] * a[0]), (0, 0, 0))
    r = relaxed_three_pos(e)
    assert r.branch is Branch.THREE_POS_NO_TRIANGLE
    root = math.sqrt(1 / 3)
    expected = [
        1 - a[0] / root * (0.2 + 0.2),
        1 - a[1] / root * (0.6 - 0.2),
        1 - a[2] / root * (0.6 - 0.2),
    ]
    assert r.x_relaxed == pytest.approx(expected, abs=1e-14)
    assert linalg.min_eigenvalue(e.gram - np.diag(r.x_relaxed)) == pytest.approx(0.0, abs=1e-12)
    assert float(e.priors @ r.x_relaxed) == pytest.approx(r.d_min, abs=1e-12)


def test_relaxed_no_triangle_is_permutation_covariant():
    rng = np.random.default_rng(3)
    for e in instances("THREE_POS_NO_TRIANGLE", 50, seed=11):
        perm = rng.permutation(3)
        g = np.asarray(e.gram)[np.ix_(perm, perm)]
        other = relaxed_three_pos(ensemble_from_gram(g, e.priors[perm]))
        assert other.x_relaxed == pytest.approx(relaxed_three_pos(e).x_relaxed[perm], abs=1e-12)


def test_relaxed_complex_equilateral_example():
    r = relaxed_complex_equilateral(sym((0.3, 0.3, 0.3), (math.pi / 6,) * 3))
    assert r.x_relaxed == pytest.approx([1 + 0.6 * math.cos(5 * math.pi / 6)] * 3, abs=1e-14)
    assert r.x_relaxed[0] == pytest.approx(0.48038, abs=1e-5)


def test_symmetric_states_formula():
    gamma, theta = 0.2, 0.5
    s = solve(sym((gamma,) * 3, (theta,) * 3))
    assert s.p_max == pytest.approx(1 + 2 * gamma * math.cos(theta + 2 * math.pi / 3), abs=1e-14)


def test_complex_equilateral_limit_matches_triangle_branch():
    near = relaxed_complex_equilateral(sym((0.3,) * 3, (1e-9,) * 3))
    at = relaxed_three_pos(sym((0.3,) * 3, (0, 0, 0)))
    assert near.x_relaxed == pytest.approx(at.x_relaxed, abs=1e-9)


def test_not_equilateral():
    with pytest.raises(NotEquilateral):
        relaxed_complex_equilateral(sym((0.3, 0.2, 0.3), (0.4, 0.4, 0.4)))


def test_complex_non_equilateral_is_unsupported():
    e = complex_general(np.random.default_rng(0))
    with pytest.raises(UnsupportedComplexCase):
        solve(e)


def test_four_states_rejected():
    with pytest.raises(WrongArity):
        solve(ensemble_from_gram(np.eye(4), [0.25] * 4))


def test_reduce_two_states_gives_regime_i_value():
    e = two(0.5, 0.9)
    red = reduce_problem(e, 1)
    assert red.ensemble.n == 1
    assert red.scale == pytest.approx(0.9 * 0.75, abs=1e-15)


def test_reduce_orthogonal_states():
    red = reduce_problem(ensemble_from_gram(np.eye(3), [0.2, 0.3, 0.5]), 0)
    assert np.array_equal(red.ensemble.gram, np.eye(2))
    assert red.ensemble.priors == pytest.approx([0.375, 0.625], abs=1e-15)


def test_reduce_matches_explicit_projection():
    theta3 = 1.4
    states = example_states(PHI2, PHI3, theta3)
    e = build_ensemble(states, [1 / 3] * 3)
    red = reduce_problem(e, 2)
    n = np.asarray(e.gram)
    expected = abs(n[0, 1] - n[0, 2] * n[2, 1]) / math.sqrt((1 - abs(n[0, 2]) ** 2) * (1 - abs(n[1, 2]) ** 2))
    assert abs(red.ensemble.gram[0, 1]) == pytest.approx(expected, abs=1e-14)
    # explicit vectors: project out |phi_3> and renormalize
    q = np.eye(3) - np.outer(states[2], states[2].conj())
    v1, v2 = (q @ states[0]), (q @ states[1])
    v1, v2 = v1 / np.linalg.norm(v1), v2 / np.linalg.norm(v2)
    assert red.ensemble.gram[0, 1] == pytest.approx(np.vdot(v1, v2), abs=1e-14)


@pytest.mark.parametrize("branch", BRANCHES)
def test_solution_invariants(branch):
    for e in instances(branch, 200, seed=5):
        s = solve(e)
        assert s.x.min() >= 0.0
        assert linalg.min_eigenvalue(e.gram - np.diag(s.x)) >= -1e-9
        assert s.p_max == pytest.approx(float(e.priors @ s.x), abs=1e-12)
        assert s.relaxed.d_min >= s.p_max - 1e-12
        assert s.certificate.d_value == pytest.approx(s.p_max, abs=1e-10)
        assert s.relaxed.branch.value == branch
        relaxed_min = linalg.min_eigenvalue(e.gram - np.diag(s.relaxed.x_relaxed))
        assert relaxed_min == pytest.approx(0.0, abs=1e-10)
        assert float(e.priors @ s.relaxed.x_relaxed) == pytest.approx(s.relaxed.d_min, abs=1e-10)
        for step in s.reduction_trace:
            assert s.x[step.dropped_index] == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.floats(0, 2 * math.pi), min_size=3, max_size=3))
def test_solution_is_gauge_invariant(seed, gauge):
    rng = np.random.default_rng(seed)
    e = instances(BRANCHES[seed % len(BRANCHES)], 1, seed=seed)[0]
    c = np.exp(1j * np.array(gauge[: e.n]))
    g = np.conj(c)[:, None] * np.asarray(e.gram) * c[None, :]
    perm = rng.permutation(e.n)
    other = solve(ensemble_from_gram(g[np.ix_(perm, perm)], e.priors[perm]))
    assert other.x == pytest.approx(solve(e).x[perm], abs=1e-9)


def test_theta_sweep_is_continuous():
    # second differences of p_max along theta3 stay at the O(h^2) level everywhere,
    # including across branch changes
    h = 1e-6
    for t in np.linspace(0.01, 1.55, 400):
        p = [solve(build_ensemble(example_states(PHI2, PHI3, t + k * h), [1 / 3] * 3)).p_max for k in (-1, 0, 1)]
        assert abs(p[0] - 2 * p[1] + p[2]) <= 1e-8
        assert abs(p[2] - p[0]) <= 2e-5
