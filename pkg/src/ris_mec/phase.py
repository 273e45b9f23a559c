"""RIS reflection design under the unit-modulus constraint.

The phase objective is the quadratic form

    g(theta) = theta^H Phi theta + 2 Re(v^H theta) + c

maximized over ``|theta_n| = 1`` by majorization-minimization: each step
maximizes a linear minorizer that touches ``g`` at the current iterate.
"""

from dataclasses import dataclass, field

import numpy as np

UNIT_MODULUS_TOL = 1e-12
MAX_EXHAUSTIVE = 10**6


@dataclass
class QuadraticModel:
    phi: np.ndarray
    v: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=complex)
        self.v = np.asarray(self.v, dtype=complex)
        n = self.v.shape[0]
        if self.phi.shape != (n, n):
            raise ValueError(f"Phi has shape {self.phi.shape}, v has length {n}")
        scale = max(np.max(np.abs(self.phi), initial=0.0), 1.0)
        if np.max(np.abs(self.phi - self.phi.conj().T), initial=0.0) > 1e-12 * scale:
            raise ValueError("Phi must be Hermitian")

    @property
    def size(self):
        return self.v.shape[0]

    def value(self, theta):
        """Objective at ``theta``; accepts a single vector or a batch ``(B, N)``."""
        theta = np.asarray(theta)
        if theta.ndim == 1:
            quad = np.vdot(theta, self.phi @ theta).real
            return float(quad + 2 * np.vdot(self.v, theta).real + self.c)
        quad = np.einsum("bi,ij,bj->b", theta.conj(), self.phi, theta).real
        return quad + 2 * (theta @ self.v.conj()).real + self.c


@dataclass
class MMResult:
    theta: np.ndarray
    objective: float
    iterations: int
    history: list = field(default_factory=list)


def is_unit_modulus(theta, tol=UNIT_MODULUS_TOL):
    return bool(np.all(np.abs(np.abs(theta) - 1.0) <= tol))


def random_phases(N, rng):
    """I.i.d. uniform reflection phases."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, N))


def _coupling(chan, W):
    """Split ``w_k^H h_j(theta)`` into ``a[k, j] + b[k, j, :] @ theta``."""
    M, N = chan.G.shape
    K = chan.h_direct.shape[1]
    if W.shape != (M, K):
        raise ValueError(f"W has shape {W.shape}, expected {(M, K)}")
    a = W.conj().T @ chan.h_direct
    b = (W.conj().T @ chan.G)[:, None, :] * chan.h_dr.T[None, :, :]
    return a, b


def _quadratic_from_terms(a, b, s):
    """Model of ``sum_kj s[k, j] |a[k, j] + b[k, j] @ theta|^2``."""
    K, _, N = b.shape
    bf = b.reshape(K * K, N)
    sf = s.reshape(K * K)
    af = a.reshape(K * K)
    phi = (bf.conj().T * sf) @ bf
    phi = (phi + phi.conj().T) / 2
    v = (sf * af) @ bf.conj()
    c = float(np.sum(sf * np.abs(af) ** 2))
    return phi, v, c


def build_quadratic(chan, W, tx_power, mu=1.0, weights=None):
    """Quadratic model of detector-matched signal power minus weighted leakage.

    Encodes ``sum_k p_k |w_k^H h_k(theta)|^2 - mu sum_k sum_{j!=k} p_j |w_k^H h_j(theta)|^2``
    with ``h_j(theta) = h_direct_j + G diag(theta) h_dr_j``. Optional
    per-device ``weights`` scale every term of detector output ``k``.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    a, b = _coupling(chan, W)
    K = a.shape[0]
    p = np.broadcast_to(np.asarray(tx_power, dtype=float), (K,))
    s = np.where(np.eye(K, dtype=bool), 1.0, -mu) * p[None, :]
    if weights is not None:
        s = s * np.asarray(weights, dtype=float)[:, None]
    return QuadraticModel(*_quadratic_from_terms(a, b, s))


def build_wmse_quadratic(chan, W, tx_power, mse_weights):
    """Negated weighted mean-square error of the detector outputs.

    With unit-power symbols, ``e_k = sum_j p_j |w_k^H h_j|^2
    - 2 sqrt(p_k) Re(w_k^H h_k) + noise ||w_k||^2 + 1``. The model encodes
    ``-sum_k u_k e_k`` up to the theta-independent noise and unit terms, so
    it is concave in theta and maximizing it lowers the weighted MSE. With
    MMSE ``W`` and ``u_k = omega_k / e_k`` a step on this model is a step on
    the weighted sum-rate ``sum_k omega_k log(1 + sinr_k)``.
    """
    a, b = _coupling(chan, W)
    K = a.shape[0]
    p = np.broadcast_to(np.asarray(tx_power, dtype=float), (K,))
    u = np.asarray(mse_weights, dtype=float)
    phi, v, c = _quadratic_from_terms(a, b, -u[:, None] * p[None, :])
    idx = np.arange(K)
    lin = u * np.sqrt(p)
    v = v + lin @ b[idx, idx, :].conj()
    c += float(2 * np.sum(lin * a[idx, idx].real))
    return QuadraticModel(phi, v, c)


def power_iteration(A, tol=1e-8, max_iter=10000, rng=None):
    """Dominant eigenvalue of a Hermitian matrix via the Rayleigh quotient.

    Intended for positive semidefinite input, where the dominant eigenvalue
    is also the largest one.
    """
    n = A.shape[0]
    if rng is None:
        rng = np.random.default_rng(0)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = A @ x
        new = np.vdot(x, y).real
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if abs(new - est) <= tol * abs(new):
            return new
        est = new
    return est


def minorizer_shift(phi, tol=1e-8, margin=1e-6):
    """Smallest-ish ``lam`` with ``Phi + lam I`` positive semidefinite.

    Computed as the top eigenvalue of ``-Phi`` through power iteration on the
    PSD matrix ``s I - Phi`` (``s`` a Gershgorin bound), plus a relative
    safety margin.
    """
    s = float(np.max(np.sum(np.abs(phi), axis=1), initial=0.0))
    if s == 0.0:
        return 0.0
    top = power_iteration(s * np.eye(phi.shape[0]) - phi, tol=tol)
    return top - s + margin * s


def surrogate(model, theta_t, lam):
    """Linear minorizer of ``g`` at ``theta_t`` (valid on the unit-modulus set)."""
    A = model.phi + lam * np.eye(model.size)
    At = A @ theta_t
    const = -np.vdot(theta_t, At).real - lam * model.size + model.c

    def s(theta):
        return float(2 * np.vdot(At + model.v, theta).real + const)

    return s


def mm_ascend(model, theta0, tol=1e-4, max_iter=200):
    """Majorization-minimization ascent of ``model`` from ``theta0``.

    Each step sets ``theta <- exp(j arg((Phi + lam I) theta + v))`` with ``lam``
    large enough that ``Phi + lam I`` is PSD, so ``g`` never decreases.
    Iteration stops when the relative gain drops below ``tol``. The best
    iterate is returned together with the objective trace.
    """
    theta = np.asarray(theta0, dtype=complex)
    if theta.shape != (model.size,):
        raise ValueError(f"theta0 has shape {theta.shape}, expected ({model.size},)")
    if not is_unit_modulus(theta):
        raise ValueError("theta0 must be unit-modulus")
    if tol <= 0:
        raise ValueError("tol must be positive")

    lam = minorizer_shift(model.phi)
    A = model.phi + lam * np.eye(model.size)
    g = model.value(theta)
    history = [g]
    best, best_g = theta, g
    it = 0
    for it in range(1, max_iter + 1):
        z = A @ theta + model.v
        mag = np.abs(z)
        # zero entries leave the surrogate flat in that coordinate
        theta = np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), theta)
        g_new = model.value(theta)
        history.append(g_new)
        if g_new > best_g:
            best, best_g = theta, g_new
        gain = g_new - g
        g = g_new
        if gain <= tol * max(abs(g), np.finfo(float).tiny):
            break
    return MMResult(best, best_g, it, history)


def exhaustive_phase_search(model, levels=16):
    """Global maximizer of ``model`` over ``levels``-level quantized phases."""
    N = model.size
    if levels < 1:
        raise ValueError("levels must be >= 1")
    total = levels ** N
    if total > MAX_EXHAUSTIVE:
        raise ValueError(
            f"search space levels**N = {total} exceeds the limit of {MAX_EXHAUSTIVE}")
    alphabet = np.exp(2j * np.pi * np.arange(levels) / levels)
    best, best_g = None, -np.inf
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.stack(np.unravel_index(idx, (levels,) * N), axis=1)
        cand = alphabet[digits]
        vals = model.value(cand)
        i = int(np.argmax(vals))
        if vals[i] > best_g:
            best, best_g = cand[i].copy(), float(vals[i])
    return best
