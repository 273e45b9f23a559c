"""Offloading volume and edge CPU allocation for min-max processing latency.

Each device ``k`` splits its ``L_k``-bit task: ``L_k - l_k`` bits are computed
locally while ``l_k`` bits are sent at rate ``r_k`` and then processed at the
edge with clock ``f_k``. Local and offloaded parts run in parallel; the
offloaded part is transmit-then-compute.

For a latency target ``T`` the least offload that finishes the local part in
time is ``l_k* = max(0, L_k - f_local T / c_local)``. Offloading more only
raises the edge clock needed to finish by ``T`` (``c_edge l / (T - l / r)``
is increasing in ``l``), so ``l_k*`` decides feasibility and the feasible set
of ``T`` is an up-set, which is what the bisection relies on.
"""

from dataclasses import dataclass

import numpy as np

from .params import SystemParams


class UnservableDeviceError(ValueError):
    """Raised when some device can finish neither locally nor at the edge."""


@dataclass
class AllocationPlan:
    offload_bits: np.ndarray
    edge_freq: np.ndarray
    latency: float


def draw_tasks(params: SystemParams, rng) -> np.ndarray:
    return rng.uniform(params.task_bits_min, params.task_bits_max, params.K)


def _component_times(offload, edge_freq, rates, tasks, params):
    offload = np.asarray(offload, dtype=float)
    rates = np.asarray(rates, dtype=float)
    edge_freq = np.asarray(edge_freq, dtype=float)
    remaining = np.asarray(tasks, dtype=float) - offload
    with np.errstate(divide="ignore", invalid="ignore"):
        if params.f_local > 0:
            local = params.cycles_per_bit_local * remaining / params.f_local
        else:
            local = np.where(remaining > 0, np.inf, 0.0)
        active = offload > 0
        tx = np.where(active, offload / np.where(rates > 0, rates, 1.0), 0.0)
        tx = np.where(active & (rates <= 0), np.inf, tx)
        edge = np.where(active, params.cycles_per_bit_edge * offload / np.where(edge_freq > 0, edge_freq, 1.0), 0.0)
        edge = np.where(active & (edge_freq <= 0), np.inf, edge)
    return local, tx + edge


def latency_of(plan: AllocationPlan, rates, tasks, params: SystemParams) -> float:
    """Worst-device latency of ``plan``; ``inf`` when offloaded bits have no
    rate or no edge clock."""
    local, remote = _component_times(plan.offload_bits, plan.edge_freq, rates, tasks, params)
    if local.size == 0:
        return 0.0
    return float(np.max(np.maximum(local, remote)))


def minimal_offload(T, tasks, params):
    tasks = np.asarray(tasks, dtype=float)
    return np.maximum(0.0, tasks - params.f_local * T / params.cycles_per_bit_local) \
        if params.cycles_per_bit_local > 0 else np.zeros_like(tasks)


def feasible(T, rates, tasks, params: SystemParams):
    """Can every device finish within ``T`` seconds?

    Returns
    -------
    ok : bool
    edge_freq : ndarray
        Edge clock each device needs at the minimal offload (``inf`` where a
        device cannot make it at any clock).
    offload : ndarray
        The minimal offload volumes.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    rates = np.asarray(rates, dtype=float)
    offload = minimal_offload(T, tasks, params)
    need = offload > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(need, offload / np.where(rates > 0, rates, 1.0), 0.0)
        tx = np.where(need & (rates <= 0), np.inf, tx)
        slack = T - tx
        freq = np.where(need, params.cycles_per_bit_edge * offload / np.where(slack > 0, slack, 1.0), 0.0)
    freq = np.where(need & ~(slack > 0), np.inf, freq)
    ok = bool(np.all(np.isfinite(freq)) and freq.sum() <= params.f_edge_max)
    return ok, freq, offload


def latency_upper_bound(rates, tasks, params: SystemParams) -> float:
    """A latency that is always feasible: the better of all-local and all-offload."""
    tasks = np.asarray(tasks, dtype=float)
    rates = np.asarray(rates, dtype=float)
    bounds = []
    if params.f_local > 0:
        bounds.append(float(np.max(params.cycles_per_bit_local * tasks / params.f_local, initial=0.0)))
    busy = tasks > 0
    if np.all(rates[busy] > 0):
        # full offload with edge clock shared in proportion to task size
        bounds.append(float(np.max(tasks[busy] / rates[busy], initial=0.0)
                            + params.cycles_per_bit_edge * tasks.sum() / params.f_edge_max))
    if not bounds:
        bad = np.flatnonzero(busy & (rates <= 0))
        raise UnservableDeviceError(
            f"devices {bad.tolist()} have zero rate and no local CPU")
    return min(bounds)


def min_latency_allocation(rates, tasks, params: SystemParams, tol=1e-6) -> AllocationPlan:
    """Bisection on the latency target with the minimal-offload feasibility test."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0):
        raise ValueError("rates must be nonnegative")
    tasks = np.asarray(tasks, dtype=float)
    hi = latency_upper_bound(rates, tasks, params)
    lo = 0.0
    ok, freq, offload = feasible(hi, rates, tasks, params)
    if hi == 0.0:
        return AllocationPlan(offload, freq, 0.0)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        ok_mid, f_mid, l_mid = feasible(mid, rates, tasks, params)
        if ok_mid:
            hi, freq, offload = mid, f_mid, l_mid
        else:
            lo = mid
    plan = AllocationPlan(offload, freq, 0.0)
    plan.latency = latency_of(plan, rates, tasks, params)
    return plan


def _edge_latency(offload, rates, params, iters=64):
    """Smallest ``T`` with ``sum c_e l_k / (T - l_k / r_k) <= F`` per candidate row.

    ``offload`` has shape ``(B, K)``; solved by vectorized bisection.
    """
    c, F = params.cycles_per_bit_edge, params.f_edge_max
    active = offload > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(active, offload / rates[None, :], 0.0)
    tx = np.where(active & (rates[None, :] <= 0), np.inf, tx)
    lo = np.max(tx, axis=1)
    hi = lo + c * offload.sum(axis=1) / F
    finite = np.isfinite(hi)
    lo, hi = np.where(finite, lo, 0.0), np.where(finite, hi, 0.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        slack = mid[:, None] - tx
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(active, c * offload / slack, 0.0)
        terms = np.where(active & ~(slack > 0), np.inf, terms)
        ok = terms.sum(axis=1) <= F
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(finite, hi, np.inf), tx


def grid_alloc_oracle(rates, tasks, params: SystemParams, grid_points=200, refine=0):
    """Brute-force reference allocation for small ``K``.

    Every combination of offload volumes on a uniform grid over ``[0, L_k]``
    is scored with its optimal edge-clock split (the clocks that make every
    offloading device finish simultaneously). ``refine`` extra passes re-grid
    the box spanning the neighbouring cells of the incumbent with at most
    21 points per axis, shrinking the spacing about tenfold per pass.
    """
    rates = np.asarray(rates, dtype=float)
    tasks = np.asarray(tasks, dtype=float)
    K = tasks.size
    if K > 3:
        raise ValueError(f"grid oracle supports K <= 3, got {K}")
    if not 2 <= grid_points <= 200:
        raise ValueError(f"grid_points must be in [2, 200], got {grid_points}")

    lows, highs = np.zeros(K), tasks.copy()
    best_T, best_l = np.inf, None
    points = grid_points
    for _ in range(refine + 1):
        axes = [np.linspace(lows[k], highs[k], points) for k in range(K)]
        cand = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        local, _ = _component_times(cand, np.ones_like(cand), rates[None, :], tasks[None, :], params)
        edge_T, _ = _edge_latency(cand, rates, params)
        T = np.maximum(np.max(local, axis=1), edge_T)
        i = int(np.argmin(T))
        if T[i] <= best_T:
            best_T, best_l = float(T[i]), cand[i].copy()
        step = (highs - lows) / (points - 1)
        lows = np.maximum(0.0, best_l - step)
        highs = np.minimum(tasks, best_l + step)
        points = min(grid_points, 21)

    edge_T, tx = _edge_latency(best_l[None, :], rates, params)
    slack = edge_T[0] - tx[0]
    active = best_l > 0
    freq = np.zeros(K)
    freq[active] = params.cycles_per_bit_edge * best_l[active] / slack[active]
    plan = AllocationPlan(best_l, freq, 0.0)
    plan.latency = latency_of(plan, rates, tasks, params)
    return plan
