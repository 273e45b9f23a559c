"""Linear MMSE multi-user detection at the AP."""

import numpy as np


def _powers(tx_power, K):
    p = np.broadcast_to(np.asarray(tx_power, dtype=float), (K,))
    if np.any(p < 0):
        raise ValueError("transmit powers must be nonnegative")
    return p


def mmse_weights(H, tx_power, noise_power):
    """MMSE combining matrix.

    Parameters
    ----------
    H : ndarray, shape (M, K)
        Effective channels, one column per device.
    tx_power : float or ndarray, shape (K,)
        Per-device transmit power.
    noise_power : float
        Receiver noise variance, must be positive.

    Returns
    -------
    W : ndarray, shape (M, K)
        Column ``k`` is ``sqrt(p_k) (sum_j p_j h_j h_j^H + noise I)^-1 h_k``.
    """
    if not noise_power > 0:
        raise ValueError("noise_power must be positive")
    M, K = H.shape
    p = _powers(tx_power, K)
    cov = (H * p) @ H.conj().T + noise_power * np.eye(M)
    return np.linalg.solve(cov, H * np.sqrt(p))


def sinr(H, W, tx_power, noise_power):
    """Per-device post-detection SINR for explicit combining vectors."""
    M, K = H.shape
    if W.shape != (M, K):
        raise ValueError(f"W has shape {W.shape}, expected {(M, K)}")
    p = _powers(tx_power, K)
    norms = np.sum(np.abs(W) ** 2, axis=0)
    if np.any(norms == 0):
        raise ValueError("combining vector with zero norm")
    gains = np.abs(W.conj().T @ H) ** 2 * p[None, :]  # [k, j] = p_j |w_k^H h_j|^2
    signal = np.diag(gains).copy()
    interference = np.where(np.eye(K, dtype=bool), 0.0, gains).sum(axis=1)
    return signal / (interference + noise_power * norms)


def rates(sinr_values, bandwidth):
    """Shannon rate in bit/s."""
    s = np.asarray(sinr_values, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be nonnegative")
    return bandwidth * np.log2(1.0 + s)


def mmse_rates(H, tx_power, noise_power, bandwidth):
    """Convenience: MMSE weights plus the rates they support."""
    W = mmse_weights(H, tx_power, noise_power)
    return W, rates(sinr(H, W, tx_power, noise_power), bandwidth)
