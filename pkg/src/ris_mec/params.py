"""System constants shared by every stage of the simulator."""

from dataclasses import dataclass, fields
import math


@dataclass(frozen=True)
class SystemParams:
    """Scalar constants of one RIS-assisted MEC cell.

    Distances are in metres, powers in watts, frequencies in hertz and task
    sizes in bits. Geometry, exponents, bandwidth, task range and edge clock
    follow the reference scenario. Powers, reference loss, Rician factor,
    wavelength and CPU figures have no published value; the defaults put the
    links in a low-SNR regime where offloading rate, not compute, limits
    latency.
    """

    M: int = 5
    K: int = 4
    N: int = 30
    R: float = 300.0
    r_cluster: float = 10.0
    d: float = 280.0
    bandwidth: float = 1e6
    tx_power: float = 3e-5
    noise_power: float = 1e-13
    alpha_direct: float = 3.5
    alpha_ris: float = 2.2
    ref_loss: float = 0.1
    rician_k: float = 10.0
    wavelength: float = 0.1
    cycles_per_bit_local: float = 1000.0
    cycles_per_bit_edge: float = 1000.0
    f_local: float = 2e9
    f_edge_max: float = 50e9
    task_bits_min: float = 250e3
    task_bits_max: float = 350e3

    def __post_init__(self):
        for name in ("M", "K", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        positive = ("R", "bandwidth", "tx_power", "noise_power", "ref_loss",
                    "wavelength", "cycles_per_bit_edge", "f_edge_max")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        # zero is allowed here: degenerate collocation and edge-only devices
        for name in ("r_cluster", "d", "f_local", "cycles_per_bit_local", "task_bits_min"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not (self.alpha_direct >= self.alpha_ris > 0):
            raise ValueError("path-loss exponents must satisfy alpha_direct >= alpha_ris > 0")
        if self.task_bits_min > self.task_bits_max:
            raise ValueError("task_bits_min must not exceed task_bits_max")
        if not self.rician_k >= 0 or math.isnan(self.rician_k):
            raise ValueError("rician_k must be >= 0")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
