import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_mec.channel import ChannelRealization, effective_channel
from ris_mec.mud import mmse_weights
from ris_mec.phase import (QuadraticModel, build_quadratic, build_wmse_quadratic,
                           exhaustive_phase_search, is_unit_modulus, minorizer_shift,
                           mm_ascend, power_iteration, random_phases, surrogate)

from conftest import cn, random_channel


def unit(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


def random_model(rng, N, rank=None):
    B = cn(rng, rank or N, N)
    S = cn(rng, N, N)
    phi = B.conj().T @ B - (S + S.conj().T) / 2
    return QuadraticModel((phi + phi.conj().T) / 2, cn(rng, N), rng.standard_normal())


def direct_objective(chan, W, p, mu, theta):
    H = effective_channel(chan, theta)
    gains = p * np.abs(W.conj().T @ H) ** 2
    K = gains.shape[0]
    off = ~np.eye(K, dtype=bool)
    return np.trace(gains).real - mu * gains[off].sum()


def test_scalar_expansion():
    hd, g, hr = 0.3 - 0.2j, 1.1 + 0.4j, -0.5 + 0.9j
    chan = ChannelRealization(np.array([[hd]]), np.array([[hr]]), np.array([[g]]))
    m = build_quadratic(chan, np.ones((1, 1)), 1.0)
    # |hd + g hr theta|^2 = |g hr|^2 + 2 Re(conj(hd) g hr theta) + |hd|^2
    assert m.phi[0, 0] == pytest.approx(abs(g * hr) ** 2)
    assert m.v[0] == pytest.approx(np.conj(np.conj(hd) * g * hr))
    assert m.c == pytest.approx(abs(hd) ** 2)


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 3.0])
def test_quadratic_matches_direct_evaluation(rng, mu):
    chan = random_channel(rng, M=3, N=5, K=3)
    W = cn(rng, 3, 3)
    m = build_quadratic(chan, W, 0.8, mu)
    for _ in range(10):
        theta = unit(rng, 5)
        assert m.value(theta) == pytest.approx(direct_objective(chan, W, 0.8, mu, theta), rel=1e-10)


def test_single_device_objective_is_signal_power(rng):
    chan = random_channel(rng, M=2, N=3, K=1)
    W = cn(rng, 2, 1)
    m = build_quadratic(chan, W, 1.5, mu=0.0)
    theta = unit(rng, 3)
    H = effective_channel(chan, theta)
    assert m.value(theta) == pytest.approx(1.5 * abs(np.vdot(W[:, 0], H[:, 0])) ** 2, rel=1e-12)


def test_wmse_quadratic_matches_direct_evaluation(rng):
    chan = random_channel(rng, M=4, N=6, K=3)
    p, noise = 0.7, 0.2
    u = rng.uniform(0.5, 2.0, 3)
    for _ in range(5):
        theta = unit(rng, 6)
        H = effective_channel(chan, theta)
        W = mmse_weights(H, p, noise)
        m = build_wmse_quadratic(chan, W, p, u)
        cross = W.conj().T @ H
        mse = (p * np.abs(cross) ** 2).sum(axis=1) - 2 * np.sqrt(p) * np.diag(cross).real
        assert m.value(theta) == pytest.approx(-np.sum(u * mse), rel=1e-10)


def test_quadratic_model_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        QuadraticModel(np.array([[0, 1], [0, 0]], complex), np.zeros(2))


def test_linear_objective_one_step():
    v = np.array([1 + 1j, -2.0, 0.5j])
    res = mm_ascend(QuadraticModel(np.zeros((3, 3)), v), np.ones(3))
    np.testing.assert_allclose(res.theta, np.exp(1j * np.angle(v)), atol=1e-15)
    assert res.objective == pytest.approx(2 * np.abs(v).sum())


def test_isotropic_objective_constant():
    theta0 = unit(np.random.default_rng(0), 4)
    res = mm_ascend(QuadraticModel(np.eye(4), np.zeros(4)), theta0)
    assert is_unit_modulus(res.theta)
    assert res.objective == pytest.approx(4.0)


def test_mm_input_validation():
    m = QuadraticModel(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError, match="unit-modulus"):
        mm_ascend(m, np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        mm_ascend(m, np.ones(2), tol=0.0)
    with pytest.raises(ValueError):
        mm_ascend(m, np.ones(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_mm_monotone_and_unit_modulus(seed, N):
    rng = np.random.default_rng(seed)
    m = random_model(rng, N)
    res = mm_ascend(m, unit(rng, N), tol=1e-9, max_iter=100)
    h = np.array(res.history)
    assert np.all(np.diff(h) >= -1e-9 * np.maximum(1.0, np.abs(h[1:])))
    assert is_unit_modulus(res.theta)
    assert res.objective == pytest.approx(m.value(res.theta))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_surrogate_touches_and_minorizes(seed, N):
    rng = np.random.default_rng(seed)
    m = random_model(rng, N)
    lam = minorizer_shift(m.phi)
    theta_t = unit(rng, N)
    s = surrogate(m, theta_t, lam)
    assert s(theta_t) == pytest.approx(m.value(theta_t), rel=1e-9, abs=1e-9)
    for _ in range(20):
        theta = unit(rng, N)
        assert s(theta) <= m.value(theta) + 1e-9 * max(1.0, abs(m.value(theta)))


def test_rotation_equivariance(rng):
    m = random_model(rng, 6)
    theta0 = unit(rng, 6)
    rot = np.exp(0.7j)
    a = mm_ascend(m, theta0)
    b = mm_ascend(QuadraticModel(m.phi, rot * m.v, m.c), rot * theta0)
    np.testing.assert_allclose(b.theta, rot * a.theta, atol=1e-9)
    assert b.objective == pytest.approx(a.objective, rel=1e-12)


def test_power_iteration_matches_eigvalsh(rng):
    for n in (1, 3, 8, 20):
        B = cn(rng, n, n)
        A = B.conj().T @ B
        assert power_iteration(A) == pytest.approx(np.linalg.eigvalsh(A)[-1], rel=1e-6)


def test_minorizer_shift_bounds_spectrum(rng):
    m = random_model(rng, 7)
    lam = minorizer_shift(m.phi)
    assert np.linalg.eigvalsh(m.phi + lam * np.eye(7))[0] >= -1e-9
    assert minorizer_shift(np.zeros((3, 3))) == 0.0


def test_random_phases():
    a = random_phases(1, np.random.default_rng(42))
    b = random_phases(1, np.random.default_rng(42))
    assert a.tobytes() == b.tobytes()
    draws = random_phases(10_000, np.random.default_rng(1))
    assert np.all(np.abs(np.abs(draws) - 1.0) <= 1e-15)
    assert abs(draws.real.mean()) < 0.05 and abs(draws.imag.mean()) < 0.05
    with pytest.raises(ValueError):
        random_phases(0, np.random.default_rng(0))


def test_exhaustive_four_levels():
    v = np.array([0.2 - 1.0j])
    best = exhaustive_phase_search(QuadraticModel(np.zeros((1, 1)), v), levels=4)
    # 2 Re(conj(v) theta) over {1, i, -1, -i} peaks at theta = -i
    assert best[0] == pytest.approx(-1j)


def test_exhaustive_single_level():
    best = exhaustive_phase_search(QuadraticModel(np.eye(3), np.ones(3)), levels=1)
    np.testing.assert_array_equal(best, np.ones(3))


def test_exhaustive_matches_brute_force(rng):
    m = random_model(rng, 2)
    alphabet = np.exp(2j * np.pi * np.arange(8) / 8)
    vals = [m.value(np.array([a, b])) for a in alphabet for b in alphabet]
    assert m.value(exhaustive_phase_search(m, 8)) == pytest.approx(max(vals))


def test_exhaustive_overflow():
    m = QuadraticModel(np.zeros((6, 6)), np.zeros(6))
    with pytest.raises(ValueError, match="limit of 1000000"):
        exhaustive_phase_search(m, 16)
