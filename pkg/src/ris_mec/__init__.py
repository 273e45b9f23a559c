"""Latency-minimizing RIS phase design for multi-user edge offloading."""

from .params import SystemParams
from .channel import (ChannelRealization, Geometry, GeometryError, draw_channels,
                      effective_channel, path_loss, place_nodes)
from .mud import mmse_rates, mmse_weights, rates, sinr
from .phase import (QuadraticModel, build_quadratic, build_wmse_quadratic,
                    exhaustive_phase_search, mm_ascend)
from .allocation import (AllocationPlan, UnservableDeviceError, feasible,
                         grid_alloc_oracle, latency_of, min_latency_allocation)
from .experiment import ExperimentConfig, emit_results, run_trial, summarize, sweep

__version__ = "0.1.0"
