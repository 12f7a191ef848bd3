import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import linear_data, random_stable
from oracles import mp_memory_columns
from opcontrol.baselines import dmdc_fit_known_b, dmdc_fit_unknown_b
from opcontrol.errors import ModeError
from opcontrol.opc import (
    gradient_known_b,
    gradient_unknown_b,
    objective_known_b,
    objective_unknown_b,
    value_and_grad_known_b,
    value_and_grad_unknown_b,
)
from opcontrol.snapshots import SnapshotSet, corrected_targets

seeds = st.integers(0, 2**32 - 1)


def well_posed_A(rng, d=2):
    """Random A away from the eigenvalues +-1 where the objective is singular."""
    while True:
        A = rng.standard_normal((d, d)) * 0.6
        ev = np.linalg.eigvals(A)
        if np.min(np.abs(ev - 1)) > 0.2 and np.min(np.abs(ev + 1)) > 0.2:
            return A


def noisy_set(rng, m=40, p=None, d=2):
    X = rng.standard_normal((d, m))
    if p is None:
        return SnapshotSet(0.1, X[:, :-1], X[:, 1:], W=rng.standard_normal((d, m - 1)))
    return SnapshotSet(0.1, X[:, :-1], X[:, 1:], V_c=rng.standard_normal((p, m - 1)))


def direct_residual(A, target, X_minus, n, dt):
    m = X_minus.shape[1] + 1
    F = mp_memory_columns(A, n, m)
    return target - A @ X_minus + dt * dt * np.linalg.solve(A - np.eye(A.shape[0]), F)


def central_diff(f, X, h=1e-5):
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (f(X + E) - f(X - E)) / (2 * h)
    return G


def five_point_diff(f, X, h=1e-4):
    """Fourth-order stencil; stays accurate where the objective grows fast in A."""
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (-f(X + 2 * E) + 8 * f(X + E) - 8 * f(X - E) + f(X - 2 * E)) / (12 * h)
    return G


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_zero_seed_gives_dmdc_residual(seed):
    rng = np.random.default_rng(seed)
    s = noisy_set(rng)
    A = rng.standard_normal((2, 2))
    ref = np.sum((corrected_targets(s) - A @ s.X_minus) ** 2)
    assert objective_known_b(A, s, np.zeros(2)) == pytest.approx(ref, rel=1e-12)
    su = noisy_set(rng, p=3)
    B = rng.standard_normal((2, 3))
    refu = np.sum((su.X_plus - A @ su.X_minus - B @ su.V_c) ** 2)
    assert objective_unknown_b(A, B, su, np.zeros(2)) == pytest.approx(refu, rel=1e-12)


def test_exact_memoryless_data_has_zero_objective(rng):
    A = random_stable(rng, 2)
    s = linear_data(rng, A, 30)
    assert objective_known_b(A, s, np.zeros(2)) < 1e-28


def test_scalar_direct_formula():
    a, n, dt = 0.9, 0.1, 0.1
    X_minus = np.array([[1.0, 0.9]])
    Y_plus = np.array([[0.9, 0.81]])
    s = SnapshotSet(dt, X_minus, Y_plus, W=np.zeros((1, 2)))
    mu = 1 - 2 * (a - 1) / (a + 1)
    F = np.array([0.0, np.exp(a - 1) * (mu - 1) * n])
    R = Y_plus[0] - a * X_minus[0] + dt * dt * F / (a - 1)
    expected = float(np.sum(R * R))
    got = objective_known_b(np.array([[a]]), s, np.array([n]))
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_objectives_match_high_precision_direct(rng):
    for _ in range(5):
        A = well_posed_A(rng)
        n = rng.standard_normal(2)
        s = noisy_set(rng, m=25)
        R = direct_residual(A, corrected_targets(s), s.X_minus, n, s.dt)
        assert objective_known_b(A, s, n) == pytest.approx(np.sum(R * R), rel=1e-12)
        su = noisy_set(rng, m=25, p=3)
        B = rng.standard_normal((2, 3))
        Ru = direct_residual(A, su.X_plus - B @ su.V_c, su.X_minus, n, su.dt)
        assert objective_unknown_b(A, B, su, n) == pytest.approx(np.sum(Ru * Ru), rel=1e-12)


def test_unknown_b_with_zero_b_equals_known_b_with_zero_w(rng):
    A = well_posed_A(rng)
    n = rng.standard_normal(2)
    su = noisy_set(rng, p=3)
    sk = SnapshotSet(su.dt, su.X_minus, su.X_plus, W=np.zeros_like(su.X_minus))
    assert objective_unknown_b(A, np.zeros((2, 3)), su, n) == objective_known_b(A, sk, n)


def test_gradient_vanishes_at_memoryless_minimum(rng):
    s = noisy_set(rng)
    A = dmdc_fit_known_b(s).A
    assert np.linalg.norm(gradient_known_b(A, s, np.zeros(2))) < 1e-8
    su = noisy_set(rng, p=2)
    fit = dmdc_fit_unknown_b(su)
    GA, GB = gradient_unknown_b(fit.A, fit.B, su, np.zeros(2))
    assert np.linalg.norm(GA) < 1e-8 and np.linalg.norm(GB) < 1e-8


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_known_b_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    A = well_posed_A(rng)
    n = rng.standard_normal(2)
    s = noisy_set(rng, m=30)
    fd = five_point_diff(lambda X: objective_known_b(X, s, n), A)
    assert rel_err(gradient_known_b(A, s, n), fd) < 1e-5


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_unknown_b_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    A = well_posed_A(rng)
    B = rng.standard_normal((2, 3))
    n = rng.standard_normal(2)
    s = noisy_set(rng, m=30, p=3)
    GA, GB = gradient_unknown_b(A, B, s, n)
    assert rel_err(GA, five_point_diff(lambda X: objective_unknown_b(X, B, s, n), A)) < 1e-5
    # J is quadratic in B, so a central difference is exact for any step; a
    # wide step keeps the roundoff of a large J out of the comparison
    assert rel_err(GB, central_diff(lambda X: objective_unknown_b(A, X, s, n), B, h=0.5)) < 1e-5


def test_gradient_where_memory_term_explodes():
    # E M has eigenvalues ~2.1 here, so the objective is ~1e15; this case
    # exposed a precision loss in the exponential's derivative for large
    # adjoint directions
    rng = np.random.default_rng(16)
    A = well_posed_A(rng)
    n = rng.standard_normal(2)
    s = noisy_set(rng, m=30)
    assert objective_known_b(A, s, n) > 1e14
    fd = five_point_diff(lambda X: objective_known_b(X, s, n), A, h=1e-5)
    assert rel_err(gradient_known_b(A, s, n), fd) < 1e-6


def test_b_gradient_closed_form(rng):
    A = well_posed_A(rng)
    B = rng.standard_normal((2, 3))
    n = rng.standard_normal(2)
    s = noisy_set(rng, p=3)
    R = direct_residual(A, s.X_plus - B @ s.V_c, s.X_minus, n, s.dt)
    _, _, GB = value_and_grad_unknown_b(A, B, s, n)
    assert np.allclose(GB, -2 * R @ s.V_c.T, rtol=1e-10, atol=1e-12)


def test_value_and_grad_consistency(rng):
    A = well_posed_A(rng)
    n = rng.standard_normal(2)
    s = noisy_set(rng)
    J, G = value_and_grad_known_b(A, s, n)
    assert J == objective_known_b(A, s, n)
    assert np.array_equal(G, gradient_known_b(A, s, n))


def test_gradient_larger_system(rng):
    A = well_posed_A(rng, d=3)
    n = rng.standard_normal(3)
    s = noisy_set(rng, m=20, d=3)
    fd = central_diff(lambda X: objective_known_b(X, s, n), A)
    assert rel_err(gradient_known_b(A, s, n), fd) < 1e-5


def test_mode_errors(rng):
    s = noisy_set(rng)
    su = noisy_set(rng, p=2)
    with pytest.raises(ModeError):
        objective_known_b(np.eye(2), su, np.zeros(2))
    with pytest.raises(ModeError):
        objective_unknown_b(np.eye(2), np.zeros((2, 2)), s, np.zeros(2))
