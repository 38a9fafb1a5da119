"""Initial data for the benchmark problems.

Every builder takes a params dict and the conservation law and returns a
:class:`Problem`: a callable producing conservative variables, the
preferred initialisation mode and, where known, the exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .physics import GAMMA, Euler


@dataclass
class Problem:
    initial: Callable
    mode: str = "interpolate"  # or "average"
    exact: Optional[Callable] = None  # exact(coords..., t) -> conservative components


def _prim_to_cons(law, rho, vel, p):
    return law.conservative(np.stack([rho, *vel, p]))


def sine_wave(params, law):
    mean = params.get("mean", 1.0)
    amp = params.get("amplitude", 0.2)
    kwave = params.get("wavenumber", np.pi)
    vel = getattr(law, "velocity", (1.0,) * law.dim)

    if law.dim == 1:
        def exact(x, t):
            return mean + amp * np.sin(kwave * (x - vel[0] * t))
        return Problem(lambda x: exact(x, 0.0), "interpolate", exact)

    def exact2(x, y, t):
        return mean + amp * np.sin(kwave * ((x - vel[0] * t) + (y - vel[1] * t)))
    return Problem(lambda x, y: exact2(x, y, 0.0), "interpolate", exact2)


def density_wave(params, law):
    """rho = 1 + A sin(k (x [+ y] - (u [+ v]) t)), uniform velocity and pressure."""
    amp = params.get("amplitude", 0.2)
    kwave = params.get("wavenumber", np.pi)
    vel = tuple(params.get("velocity", (1.0,) * law.dim))
    p0 = params.get("pressure", 1.0)

    def exact(*args):
        *xs, t = args
        phase = sum(x - v * t for x, v in zip(xs, vel))
        rho = 1.0 + amp * np.sin(kwave * phase)
        ones = np.ones_like(rho)
        return _prim_to_cons(law, rho, [v * ones for v in vel], p0 * ones)

    return Problem(lambda *xs: exact(*xs, 0.0), "interpolate", exact)


def riemann1d(params, law):
    left = np.asarray(params["left"], dtype=float)
    right = np.asarray(params["right"], dtype=float)
    x0 = params.get("x0", 0.5)

    def init(x):
        W = np.where(x < x0, left.reshape(-1, *([1] * np.ndim(x))),
                     right.reshape(-1, *([1] * np.ndim(x))))
        return law.conservative(W)

    def exact(x, t):
        from .analysis import exact_riemann_euler
        W = exact_riemann_euler(left, right, (np.asarray(x) - x0) / max(t, 1e-300),
                                law.gamma) if t > 0 else \
            np.where(np.asarray(x) < x0, left.reshape(-1, *([1] * np.ndim(x))),
                     right.reshape(-1, *([1] * np.ndim(x))))
        return law.conservative(W)

    return Problem(init, "average", exact)


def shu_osher(params, law):
    left = np.asarray(params.get("left", (3.857134, 2.629369, 10.33333)), dtype=float)
    x0 = params.get("x0", -4.0)
    amp = params.get("amplitude", 0.2)
    kwave = params.get("wavenumber", 5.0)

    def init(x):
        x = np.asarray(x, dtype=float)
        rho = np.where(x <= x0, left[0], 1.0 + amp * np.sin(kwave * x))
        u = np.where(x <= x0, left[1], 0.0)
        p = np.where(x <= x0, left[2], 1.0)
        return law.conservative(np.stack([rho, u, p]))

    return Problem(init, "average")


def titarev_toro(params, law):
    p = dict(left=(1.515695, 0.523346, 1.805), x0=-4.5, amplitude=0.1, wavenumber=20 * np.pi)
    p.update(params)
    return shu_osher(p, law)


def riemann2d(params, law):
    """Four constant quadrants meeting at (x0, y0); states given as (rho, u, v, p)."""
    s = {key: np.asarray(params["states"][key], dtype=float) for key in ("ne", "nw", "sw", "se")}
    x0, y0 = params.get("x0", 0.5), params.get("y0", 0.5)

    def init(x, y):
        shape = np.broadcast(x, y).shape
        W = np.empty((4,) + shape)
        east, north = np.broadcast_to(x > x0, shape), np.broadcast_to(y > y0, shape)
        for key, mask in (("ne", east & north), ("nw", ~east & north),
                          ("sw", ~east & ~north), ("se", east & ~north)):
            W[:, mask] = s[key][:, None]
        return law.conservative(W)

    return Problem(init, "average")


def normal_shock_downstream(rho1, u1, p1, gamma=GAMMA):
    """Post-shock (rho, u, p) behind a stationary normal shock."""
    c1 = np.sqrt(gamma * p1 / rho1)
    M2 = (u1 / c1) ** 2
    rho2 = rho1 * (gamma + 1.0) * M2 / ((gamma - 1.0) * M2 + 2.0)
    p2 = p1 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (M2 - 1.0))
    return rho2, u1 * rho1 / rho2, p2


def shock_vortex_states(params, gamma=GAMMA):
    mach = params.get("mach", 1.1)
    up = (mach ** 2, np.sqrt(gamma), 1.0)
    return up, normal_shock_downstream(*up, gamma)


def shock_vortex(params, law: Euler):
    g = law.gamma
    (r1, u1, p1), (r2, u2, p2) = shock_vortex_states(params, g)
    xs = params.get("shock_x", 0.5)
    xc, yc = params.get("center", (0.25, 0.5))
    kappa = params.get("kappa", 0.3)
    mu = params.get("mu", 0.204)
    rc = params.get("rc", 0.05)

    def init(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        dx, dy = x - xc, y - yc
        eta = np.hypot(dx, dy) / rc
        theta = np.arctan2(dy, dx)
        amp = kappa * eta * np.exp(mu * (1.0 - eta ** 2))
        du, dv = amp * np.sin(theta), -amp * np.cos(theta)
        dT = -(g - 1.0) * kappa ** 2 / (4.0 * mu * g) * np.exp(2.0 * mu * (1.0 - eta ** 2))
        T1 = p1 / r1
        rho_v = r1 * ((T1 + dT) / T1) ** (1.0 / (g - 1.0))
        p_v = rho_v * (T1 + dT)
        up = x < xs
        rho = np.where(up, rho_v, r2)
        u = np.where(up, u1 + du, u2)
        v = np.where(up, dv, 0.0)
        p = np.where(up, p_v, p2)
        return law.conservative(np.stack([rho, u, v, p]))

    return Problem(init, "average")


def double_mach(params, law):
    from .solver import DMR_POST, DMR_PRE, dmr_shock_x
    post = np.asarray(DMR_POST)
    pre = np.asarray(DMR_PRE)

    def init(x, y):
        shape = np.broadcast(x, y).shape
        behind = np.broadcast_to(x < dmr_shock_x(y, 0.0), shape)
        W = np.where(behind, post.reshape(4, *([1] * len(shape))), pre.reshape(4, *([1] * len(shape))))
        return law.conservative(W)

    return Problem(init, "average")


def uniform(params, law):
    W = np.asarray(params["state"], dtype=float)

    def init(*xs):
        shape = np.broadcast(*xs).shape
        if law.m == 1:
            return np.full(shape, float(W.ravel()[0]))
        return law.conservative(np.broadcast_to(W.reshape(-1, *([1] * len(shape))), (law.m,) + shape))

    return Problem(init, "interpolate", lambda *a: init(*a[:-1]))


PROBLEMS = {
    "sine": sine_wave,
    "density_wave": density_wave,
    "riemann1d": riemann1d,
    "shu_osher": shu_osher,
    "titarev_toro": titarev_toro,
    "riemann2d": riemann2d,
    "shock_vortex": shock_vortex,
    "double_mach": double_mach,
    "uniform": uniform,
}


def build_problem(name, params, law) -> Problem:
    key = name.lower().replace("-", "_")
    try:
        return PROBLEMS[key](params or {}, law)
    except KeyError:
        raise ValueError(f"unknown initial condition {name!r}") from None
