"""Single Ramsey experiments: outcome statistics, sampling, time bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SensorParams:
    """Qubit sensor characteristics.

    tau0 is the minimum sensing time (sets the unambiguous band 1/(2*tau0));
    K the largest usable sensing-time index (tau_k = 2^k*tau0); t2star the
    Gaussian dephasing time; xi0/xi1 the read-out fidelities for outcomes 0/1;
    t_overhead the dead time per Ramsey (initialization, control, read-out).
    """

    tau0: float = 20e-9
    K: int = 7
    t2star: float = 100e-6
    xi0: float = 1.0
    xi1: float = 1.0
    t_overhead: float = 0.0

    def __post_init__(self):
        if self.tau0 <= 0:
            raise ValueError(f"tau0 must be > 0, got {self.tau0}")
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.t2star <= 0:
            raise ValueError(f"t2star must be > 0, got {self.t2star}")
        for name in ("xi0", "xi1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.t_overhead < 0:
            raise ValueError(f"t_overhead must be >= 0, got {self.t_overhead}")

    def sensing_time(self, k: int) -> float:
        """tau_k = 2^k * tau0."""
        if not 0 <= k <= self.K:
            raise ValueError(f"sensing index k={k} outside [0, {self.K}]")
        return (1 << k) * self.tau0


def outcome_probability(phi_acc: float, theta: float, tau: float,
                        params: SensorParams) -> float:
    """P(mu=0) for accumulated phase phi_acc, read-out phase theta, sensing time tau.

    P = (1+xi0-xi1)/2 + ((xi0+xi1-1)/2) * exp(-(tau/T2*)^2) * cos(phi_acc + theta).
    P(mu=1) is the complement. The result lies in [0, 1] for valid fidelities;
    floating dust within 1e-12 of the bounds is clipped.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    a = 0.5 * (1.0 + params.xi0 - params.xi1)
    b = 0.5 * (params.xi0 + params.xi1 - 1.0)
    p = a + b * math.exp(-((tau / params.t2star) ** 2)) * math.cos(phi_acc + theta)
    if p < 0.0:
        if p < -1e-12:
            raise ValueError(f"probability {p} out of range; inconsistent params")
        p = 0.0
    elif p > 1.0:
        if p > 1.0 + 1e-12:
            raise ValueError(f"probability {p} out of range; inconsistent params")
        p = 1.0
    return p


def simulate_ramsey(path, t: float, k: int, theta: float, params: SensorParams,
                    rng: np.random.Generator) -> tuple[int, float]:
    """One Ramsey experiment starting at time t with sensing index k.

    Advances the truth path through the sensing window (fine steps of tau0)
    and the overhead gap (one step), accumulates the actual phase, and draws
    the outcome. Returns (mu, t_next) with t_next = t + 2^k*tau0 + t_overhead.
    """
    tau = params.sensing_time(k)
    t_mid = t + tau
    path.advance(t_mid, params.tau0)
    phi = path.accumulated_phase(t, tau)
    p0 = outcome_probability(phi, theta, tau, params)
    mu = 0 if rng.random() < p0 else 1
    t_next = t_mid + params.t_overhead
    if params.t_overhead > 0.0:
        path.advance(t_next, params.t_overhead)
    return mu, t_next
