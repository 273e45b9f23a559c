"""Node placement and channel synthesis for the RIS-assisted uplink.

All channel blocks use column-per-device storage so they compose directly
with matrix products at the access point:

* ``h_direct`` -- ``(M, K)``, column ``k`` is device ``k`` -> AP,
* ``h_dr``     -- ``(N, K)``, column ``k`` is device ``k`` -> RIS,
* ``G``        -- ``(M, N)``, RIS -> AP.
"""

from dataclasses import dataclass

import numpy as np

from .params import SystemParams

DISTANCE_FLOOR = 0.1


class GeometryError(ValueError):
    """Raised when the node layout is degenerate."""


@dataclass
class Geometry:
    ap_position: np.ndarray
    ris_position: np.ndarray
    device_positions: np.ndarray  # (K, 2)
    cluster_center: np.ndarray


@dataclass
class ChannelRealization:
    h_direct: np.ndarray
    h_dr: np.ndarray
    G: np.ndarray

    @property
    def shape(self):
        M, N = self.G.shape
        return M, N, self.h_direct.shape[1]


def path_loss(distance, exponent, ref_loss):
    """Large-scale power gain ``ref_loss * distance**-exponent``.

    Distances below ``DISTANCE_FLOOR`` are clamped to it. Works elementwise
    on arrays.
    """
    if np.any(np.asarray(exponent) <= 0):
        raise ValueError("path-loss exponent must be positive")
    dist = np.maximum(np.asarray(distance, dtype=float), DISTANCE_FLOOR)
    out = ref_loss * dist ** (-np.asarray(exponent, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _uniform_disc(rng, count, radius):
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    angles = rng.uniform(0.0, 2 * np.pi, count)
    return np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))


def place_nodes(params: SystemParams, rng: np.random.Generator) -> Geometry:
    """Top-view layout: AP at the origin, RIS on the +x axis at distance R,
    devices uniform in a disc of radius ``r_cluster`` centred on the axis at
    distance ``d`` from the AP.

    Devices landing inside the 0.1 m keep-out around the RIS are redrawn; a
    layout where the whole disc lies inside the keep-out is rejected.
    """
    if params.d < 0:
        raise GeometryError(f"cluster distance d must be >= 0, got {params.d}")
    ap = np.zeros(2)
    ris = np.array([params.R, 0.0])
    center = np.array([params.d, 0.0])
    if abs(params.R - params.d) + params.r_cluster < DISTANCE_FLOOR:
        raise GeometryError(
            f"device cluster (d={params.d}, r={params.r_cluster}) coincides with the RIS")

    devices = center + _uniform_disc(rng, params.K, params.r_cluster)
    for _ in range(1000):
        bad = np.linalg.norm(devices - ris, axis=1) < DISTANCE_FLOOR
        if not bad.any():
            break
        devices[bad] = center + _uniform_disc(rng, int(bad.sum()), params.r_cluster)
    else:
        raise GeometryError("could not place devices outside the RIS keep-out zone")
    return Geometry(ap, ris, devices, center)


def _ula(center, count, spacing):
    """Uniform linear array along the y axis, centred at ``center``."""
    offsets = (np.arange(count) - (count - 1) / 2) * spacing
    return np.column_stack((np.full(count, center[0]), center[1] + offsets))


def _los(tx, rx, wavelength):
    """Unit-modulus LoS matrix ``exp(-j 2 pi dist / wavelength)``, shape (len(rx), len(tx))."""
    dist = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=-1)
    return np.exp(-2j * np.pi * dist / wavelength)


def _cn(rng, shape):
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _rician_weights(k):
    if np.isinf(k):
        return 1.0, 0.0
    return np.sqrt(k / (1 + k)), np.sqrt(1 / (1 + k))


def draw_direct(geom: Geometry, params: SystemParams, rng) -> np.ndarray:
    """Rayleigh device -> AP block, ``(M, K)``."""
    dist = np.linalg.norm(geom.device_positions - geom.ap_position, axis=1)
    gain = path_loss(dist, params.alpha_direct, params.ref_loss)
    return _cn(rng, (params.M, params.K)) * np.sqrt(gain)[None, :]


def draw_reflected(geom: Geometry, params: SystemParams, rng):
    """Rician device -> RIS ``(N, K)`` and RIS -> AP ``(M, N)`` blocks."""
    lam = params.wavelength
    ap_array = _ula(geom.ap_position, params.M, lam / 2)
    ris_array = _ula(geom.ris_position, params.N, lam / 2)
    w_los, w_nlos = _rician_weights(params.rician_k)

    dr_dist = np.linalg.norm(geom.device_positions - geom.ris_position, axis=1)
    dr_gain = path_loss(dr_dist, params.alpha_ris, params.ref_loss)
    dr_los = _los(geom.device_positions, ris_array, lam)
    h_dr = (w_los * dr_los + w_nlos * _cn(rng, (params.N, params.K))) * np.sqrt(dr_gain)[None, :]

    ra_gain = path_loss(np.linalg.norm(geom.ris_position - geom.ap_position),
                        params.alpha_ris, params.ref_loss)
    ra_los = _los(ris_array, ap_array, lam)
    G = (w_los * ra_los + w_nlos * _cn(rng, (params.M, params.N))) * np.sqrt(ra_gain)
    return h_dr, G


def draw_channels(geom: Geometry, params: SystemParams, rng, rng_reflected=None) -> ChannelRealization:
    """Draw one channel realization.

    ``rng_reflected`` optionally feeds the RIS blocks from a separate stream
    so the direct link does not depend on the element count.
    """
    h_direct = draw_direct(geom, params, rng)
    h_dr, G = draw_reflected(geom, params, rng if rng_reflected is None else rng_reflected)
    return ChannelRealization(h_direct, h_dr, G)


def effective_channel(chan: ChannelRealization, theta) -> np.ndarray:
    """Composite uplink ``h_direct + G diag(theta) h_dr``, shape ``(M, K)``."""
    theta = np.asarray(theta)
    M, N = chan.G.shape
    if theta.shape != (N,) or chan.h_dr.shape[0] != N or chan.h_direct.shape[0] != M \
            or chan.h_dr.shape[1] != chan.h_direct.shape[1]:
        raise ValueError(
            f"dimension mismatch: G {chan.G.shape}, h_dr {chan.h_dr.shape}, "
            f"h_direct {chan.h_direct.shape}, theta {theta.shape}")
    return chan.h_direct + chan.G @ (theta[:, None] * chan.h_dr)
