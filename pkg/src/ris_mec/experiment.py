"""Scheme comparison runs: seeded trials, sweeps and CSV output."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import logging
import math
import os

import numpy as np
from scipy import stats

from . import allocation, channel, mud, phase
from .params import SystemParams

log = logging.getLogger(__name__)

SCHEMES = ("without_ris", "random_phase", "optimized")
PHASE_OBJECTIVES = ("wmse", "leakage")
SWEEP_AXES = ("n", "d")
RESULT_HEADER = ["scheme", "sweep_axis", "sweep_value", "trial", "latency_ms",
                 "outer_iters", "objective", "mean_rate_bps"]
SUMMARY_HEADER = ["scheme", "sweep_axis", "sweep_value", "trials",
                  "mean_latency_ms", "ci95_half_ms"]

# spawn-key tags for the named random substreams
_STREAMS = {"geometry": 1, "direct": 2, "reflected": 3, "tasks": 4, "phases": 5}


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams = field(default_factory=SystemParams)
    scheme: str = "all"
    sweep_axis: str = "n"
    sweep_values: tuple = (10, 20, 30, 40, 50)
    trials: int = 100
    seed: int = 0
    outer_tol: float = 1e-3
    outer_max_iter: int = 20
    phase_objective: str = "wmse"
    mu: float = 1.0
    mm_tol: float = 1e-4
    mm_max_iter: int = 200
    alloc_tol: float = 1e-6
    workers: int = 1
    output: str = "results.csv"

    def __post_init__(self):
        if self.scheme != "all" and self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected all or one of {SCHEMES}")
        if self.phase_objective not in PHASE_OBJECTIVES:
            raise ValueError(f"unknown phase_objective {self.phase_objective!r}; "
                             f"expected one of {PHASE_OBJECTIVES}")
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.sweep_axis!r}; expected n or d")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep_values:
            raise ValueError("sweep_values must not be empty")
        if self.outer_max_iter < 0 or self.mm_max_iter < 1:
            raise ValueError("iteration limits must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for value in self.sweep_values:
            self.params_at(value)  # validates each sweep point

    @property
    def schemes(self):
        return SCHEMES if self.scheme == "all" else (self.scheme,)

    def params_at(self, value):
        if self.sweep_axis == "n":
            if value != int(value):
                raise ValueError(f"element count must be an integer, got {value}")
            return replace(self.params, N=int(value))
        return replace(self.params, d=float(value))


@dataclass
class SchemeResult:
    scheme: str
    sweep_axis: str
    sweep_value: float
    trial: int
    latency: float = math.nan
    outer_iters: int = 0
    objective: float = math.nan
    rates: np.ndarray = None
    plan: allocation.AllocationPlan = None
    latency_history: list = field(default_factory=list)
    error: str = ""

    @property
    def ok(self):
        return not self.error


def substream(seed, purpose, axis, value, trial):
    """Independent generator for one (purpose, sweep point, trial)."""
    key = (_STREAMS[purpose], SWEEP_AXES.index(axis), int(round(float(value) * 1000)), int(trial))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def draw_instance(cfg: ExperimentConfig, sweep_value, trial_index):
    """Geometry, channels, tasks and the random-phase candidate for one trial.

    Every scheme sees the same draw; the direct link has its own stream so
    it does not depend on the element count.
    """
    params = cfg.params_at(sweep_value)

    def rng(purpose):
        return substream(cfg.seed, purpose, cfg.sweep_axis, sweep_value, trial_index)

    geom = channel.place_nodes(params, rng("geometry"))
    chan = channel.draw_channels(geom, params, rng("direct"), rng("reflected"))
    tasks = allocation.draw_tasks(params, rng("tasks"))
    theta_rand = phase.random_phases(params.N, rng("phases"))
    return params, chan, tasks, theta_rand


def _evaluate(chan, theta, tasks, params, cfg):
    H = channel.effective_channel(chan, theta)
    W, r = mud.mmse_rates(H, params.tx_power, params.noise_power, params.bandwidth)
    plan = allocation.min_latency_allocation(r, tasks, params, tol=cfg.alloc_tol)
    return W, r, plan


def phase_model(chan, W, rates, params, cfg):
    """Quadratic phase surrogate for one outer iteration.

    ``wmse``: weighted MSE with rate weights ``1 / r_k^2`` (the gradient of
    the summed transmit times ``sum_k L_k / r_k`` up to task size), turned
    into MSE weights through ``u_k = omega_k (1 + sinr_k)``.
    ``leakage``: matched signal power minus ``mu`` times leakage.
    """
    if cfg.phase_objective == "leakage":
        return phase.build_quadratic(chan, W, params.tx_power, cfg.mu)
    omega = 1.0 / np.maximum(rates, 1.0) ** 2
    omega /= omega.sum()
    sinr = 2.0 ** (np.asarray(rates) / params.bandwidth) - 1.0
    return phase.build_wmse_quadratic(chan, W, params.tx_power, omega * (1.0 + sinr))


def _alternate(chan, tasks, params, cfg, candidates):
    """Alternating MMSE / MM-phase / allocation loop; the best latency is kept."""
    best = None
    for theta in candidates:
        W, r, plan = _evaluate(chan, theta, tasks, params, cfg)
        if best is None or plan.latency < best[3].latency:
            best = (theta, W, r, plan)
    theta, W, r = best[:3]
    history = [best[3].latency]
    iters = 0
    for iters in range(1, cfg.outer_max_iter + 1):
        model = phase_model(chan, W, r, params, cfg)
        theta = phase.mm_ascend(model, theta, tol=cfg.mm_tol, max_iter=cfg.mm_max_iter).theta
        W, r, plan = _evaluate(chan, theta, tasks, params, cfg)
        prev = best[3].latency
        if plan.latency < prev:
            best = (theta, W, r, plan)
        history.append(best[3].latency)
        if prev - plan.latency < cfg.outer_tol * prev:
            break
    return best, iters, history


def run_trial(cfg: ExperimentConfig, sweep_value, trial_index, scheme=None) -> SchemeResult:
    """Run one scheme on one seeded draw.

    ``scheme`` defaults to ``cfg.scheme``, which must then name a single scheme.
    """
    scheme = scheme or cfg.scheme
    if scheme not in SCHEMES:
        raise ValueError(f"run_trial needs a single scheme, got {scheme!r}")
    params, chan, tasks, theta_rand = draw_instance(cfg, sweep_value, trial_index)
    res = SchemeResult(scheme, cfg.sweep_axis, float(sweep_value), int(trial_index))

    try:
        if scheme == "without_ris":
            theta = np.zeros(params.N, dtype=complex)  # reflected path switched off
            W, r, plan = _evaluate(chan, theta, tasks, params, cfg)
            history = [plan.latency]
        elif scheme == "random_phase":
            theta = theta_rand
            W, r, plan = _evaluate(chan, theta, tasks, params, cfg)
            history = [plan.latency]
        else:
            candidates = [np.ones(params.N, dtype=complex), theta_rand]
            (theta, W, r, plan), res.outer_iters, history = _alternate(
                chan, tasks, params, cfg, candidates)
    except allocation.UnservableDeviceError as exc:
        raise allocation.UnservableDeviceError(
            f"{exc} (scheme={scheme}, {cfg.sweep_axis}={sweep_value}, trial={trial_index})") from exc

    res.latency = plan.latency
    res.plan = plan
    res.rates = r
    res.latency_history = history
    res.objective = phase_model(chan, W, r, params, cfg).value(theta)
    return res


def _run_point(args):
    cfg, value, trial = args
    out = []
    for scheme in cfg.schemes:
        try:
            out.append(run_trial(cfg, value, trial, scheme))
        except Exception as exc:  # flagged row, sweep carries on
            log.warning("trial failed: %s", exc)
            out.append(SchemeResult(scheme, cfg.sweep_axis, float(value), trial, error=str(exc)))
    return out


def sweep(cfg: ExperimentConfig, workers=None):
    """All schemes x sweep values x trials, ordered by (scheme, value, trial)."""
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg, v, t) for v in cfg.sweep_values for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        chunks = [_run_point(job) for job in jobs]
    rows = [r for chunk in chunks for r in chunk]
    # jobs are already in (value, trial) order; a stable sort groups by scheme
    rows.sort(key=lambda r: SCHEMES.index(r.scheme))
    return rows


def _fmt(x):
    return format(float(x), ".9g")


def summarize(table):
    """Mean latency (ms) and 95% Student-t half-width per (scheme, sweep value)."""
    groups = {}
    for row in table:
        groups.setdefault((row.scheme, row.sweep_axis, row.sweep_value), []).append(row)
    out = []
    for (scheme, axis, value), rows in groups.items():
        lat = np.array([r.latency for r in rows if r.ok]) * 1e3
        n = lat.size
        mean = lat.mean() if n else math.nan
        half = stats.t.ppf(0.975, n - 1) * lat.std(ddof=1) / math.sqrt(n) if n > 1 else math.nan
        out.append((scheme, axis, value, n, mean, half))
    return out


def emit_results(table, path):
    """Write the per-trial CSV at ``path`` and a summary next to it.

    Returns the two paths written.
    """
    if not table:
        raise ValueError("result table is empty; nothing written")
    root, ext = os.path.splitext(path)
    summary_path = f"{root}_summary{ext or '.csv'}"
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_HEADER)
            for r in table:
                mean_rate = np.mean(r.rates) if r.rates is not None else math.nan
                w.writerow([r.scheme, r.sweep_axis, _fmt(r.sweep_value), r.trial,
                            _fmt(r.latency * 1e3), r.outer_iters, _fmt(r.objective),
                            _fmt(mean_rate)])
        with open(summary_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            for scheme, axis, value, n, mean, half in summarize(table):
                w.writerow([scheme, axis, _fmt(value), n, _fmt(mean), _fmt(half)])
    except OSError as exc:
        raise OSError(f"cannot write results to {exc.filename or path}: {exc.strerror}") from exc
    return path, summary_path
