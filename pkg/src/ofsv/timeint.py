"""Explicit Runge-Kutta steppers and the damping-aware time-step rule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

# CFL value quoted for the published runs; its normalisation is not stated.
REFERENCE_CFL = 2.4
DEFAULT_CFL = 0.2


@dataclass
class StepControl:
    cfl: float = DEFAULT_CFL
    t_final: float = 0.0
    dt: Optional[float] = None
    # dt ~ dx**dt_exponent; >1 shrinks steps on fine meshes for accuracy studies
    dt_exponent: float = 1.0
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError("CFL must be positive")
        if self.t_final < 0:
            raise ValueError("final time must be non-negative")


def compute_dt(alpha: Sequence[float], a0: float, dx: Sequence[float], ctrl: StepControl,
               t: float = 0.0) -> float:
    """Step size dt = CFL * dx / (alpha + a0), clamped to land on t_final.

    ``alpha`` and ``dx`` hold one entry per axis; in 2D the bound reads
    CFL / (ax/dx + ay/dy + a0/min(dx, dy)).
    """
    remaining = ctrl.t_final - t
    if ctrl.dt is not None:
        return min(ctrl.dt, remaining)
    dxmin = min(dx)
    rate = sum(a / h for a, h in zip(alpha, dx)) + a0 / dxmin
    if rate <= 0.0:
        return remaining
    dt = ctrl.cfl / rate
    if ctrl.dt_exponent != 1.0:
        dt *= dxmin ** (ctrl.dt_exponent - 1.0)
    if not np.isfinite(dt):
        raise FloatingPointError("non-finite time step")
    # avoid a sliver of a final step
    if dt >= remaining or remaining - dt < 1e-12 * max(1.0, ctrl.t_final):
        return remaining
    return dt


Rhs = Callable[[np.ndarray, float], np.ndarray]


def rk4_step(u: np.ndarray, t: float, dt: float, rhs: Rhs, k1: Optional[np.ndarray] = None):
    """Classical four-stage Runge-Kutta step.  ``k1`` may be supplied precomputed."""
    if k1 is None:
        k1 = rhs(u, t)
    k2 = rhs(u + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(u + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(u + dt * k3, t + dt)
    return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Shu-Osher form: u_i = a_i u0 + b_i (u_{i-1} + dt L(u_{i-1}))
SSPRK3_COEFFS = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))
_SSPRK3_TIMES = (0.0, 1.0, 0.5)


def ssprk3_step(u: np.ndarray, t: float, dt: float, rhs: Rhs, k1: Optional[np.ndarray] = None):
    """Three-stage third-order SSP Runge-Kutta step."""
    v = u
    for stage, ((a, b), c) in enumerate(zip(SSPRK3_COEFFS, _SSPRK3_TIMES)):
        L = k1 if (stage == 0 and k1 is not None) else rhs(v, t + c * dt)
        v = a * u + b * (v + dt * L)
    return v


STEPPERS = {"rk4": rk4_step, "ssprk3": ssprk3_step}
