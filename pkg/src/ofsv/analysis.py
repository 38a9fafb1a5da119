"""Error norms, convergence orders and verification oracles.

Exact-solution callables take physical coordinates (x, or x and y) and
return components-first arrays; a scalar-shaped result means one component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

from .basis import SolutionState, build_reconstruction_operator, legendre_matrix
from .geometry import Mesh2D, build_cv_layout, build_uniform_mesh_1d, gauss_rule
from .physics import GAMMA


class DegenerateError(ValueError):
    pass


class VacuumError(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


def _components(values, shape):
    values = np.asarray(values, dtype=float)
    return values[None] if values.shape == tuple(shape) else values


def _cv_quadrature(state: SolutionState, n: int):
    """Points and weights of an n-point Gauss rule on every CV along each axis.

    Returns (ref, phys, w) per axis: reference SV coordinates (K*n,),
    physical coordinates (N, K*n) and physical weights (N, K*n).
    """
    rule = gauss_rule(n)
    b = state.layout.cv_bounds
    half = 0.5 * (b[1:] - b[:-1])
    ref = (b[:-1, None] + half[:, None] * (rule.nodes + 1.0)).ravel()
    wref = (half[:, None] * rule.weights).ravel()
    axes = [state.mesh] if state.dim == 1 else [state.mesh.x, state.mesh.y]
    out = []
    for m1 in axes:
        phys = m1.edges[:-1, None] + 0.5 * m1.widths[:, None] * (ref + 1.0)
        out.append((ref, phys, 0.5 * m1.widths[:, None] * wref))
    return out


def sample_traces(state: SolutionState, ref_points, op=None) -> np.ndarray:
    """Reconstruction evaluated at reference points of every SV.

    1D: (m, N, P).  2D: ``ref_points`` is used on both axes, giving
    (m, Nx, Ny, P, P).
    """
    c = state.modal(op)
    V = legendre_matrix(np.asarray(ref_points, dtype=float), state.layout.k)
    if state.dim == 1:
        return c @ V.T
    return np.einsum("pa,qb,...ab->...pq", V, V, c, optimize=True)


def l2_error(state: SolutionState, exact: Callable, quad_points: Optional[int] = None,
             component: int = 0) -> float:
    """sqrt(sum over CVs of the integral of (u_h - u)^2), per-CV Gauss quadrature."""
    n = quad_points or state.layout.k + 2
    q = _cv_quadrature(state, n)
    uh = sample_traces(state, q[0][0])[component]
    if state.dim == 1:
        _, x, w = q[0]
        ue = _components(exact(x), x.shape)[component]
        return float(np.sqrt(np.sum(w * (uh - ue) ** 2)))
    (_, x, wx), (_, y, wy) = q
    X = x[:, None, :, None] + 0.0 * y[None, :, None, :]
    Y = y[None, :, None, :] + 0.0 * x[:, None, :, None]
    ue = _components(exact(X, Y), X.shape)[component]
    W = wx[:, None, :, None] * wy[None, :, None, :]
    return float(np.sqrt(np.sum(W * (uh - ue) ** 2)))


def _exact_sv_means(state: SolutionState, exact: Callable, n: int, component: int):
    rule = gauss_rule(n)
    w = rule.weights / 2.0
    if state.dim == 1:
        m1 = state.mesh
        x = m1.edges[:-1, None] + 0.5 * m1.widths[:, None] * (rule.nodes + 1.0)
        return _components(exact(x), x.shape)[component] @ w
    mx, my = state.mesh.x, state.mesh.y
    x = mx.edges[:-1, None] + 0.5 * mx.widths[:, None] * (rule.nodes + 1.0)
    y = my.edges[:-1, None] + 0.5 * my.widths[:, None] * (rule.nodes + 1.0)
    X = x[:, None, :, None] + 0.0 * y[None, :, None, :]
    Y = y[None, :, None, :] + 0.0 * x[:, None, :, None]
    vals = _components(exact(X, Y), X.shape)[component]
    return np.einsum("ijab,a,b->ij", vals, w, w)


def cell_average_error(state: SolutionState, exact: Callable, quad_points: int = 12,
                       component: int = 0) -> float:
    """RMS over SVs of the error in SV means."""
    diff = state.sv_means()[component] - _exact_sv_means(state, exact, quad_points, component)
    return float(np.sqrt(np.mean(diff ** 2)))


def downwind_point_error(state: SolutionState, exact: Callable, component: int = 0) -> float:
    """RMS of the error of left-limit traces at the downwind SV face (corner in 2D).

    Assumes flow in the positive coordinate directions.
    """
    c = state.modal()[component]
    if state.dim == 1:
        uh = c.sum(axis=-1)  # L_m(1) = 1
        x = state.mesh.edges[1:]
        ue = _components(exact(x), x.shape)[component]
        return float(np.sqrt(np.mean((uh - ue) ** 2)))
    uh = c.sum(axis=(-2, -1))
    X, Y = np.meshgrid(state.mesh.x.edges[1:], state.mesh.y.edges[1:], indexing="ij")
    ue = _components(exact(X, Y), X.shape)[component]
    return float(np.sqrt(np.mean((uh - ue) ** 2)))


def convergence_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    """log_ratio(e_coarse / e_fine)."""
    if not (e_coarse > 0 and e_fine > 0):
        raise DegenerateError("convergence order needs two positive errors")
    return float(np.log(e_coarse / e_fine) / np.log(ratio))


def orders(errors: Sequence[float], ratio: float = 2.0) -> List[Optional[float]]:
    """Order column of a refinement table: None for the first row."""
    return [None] + [convergence_order(a, b, ratio) for a, b in zip(errors[:-1], errors[1:])]


# ---------------------------------------------------------------------------
# exact Riemann solver for the Euler equations


def _pressure_function(p, rho, pk, ck, gamma):
    """Toro's f_K(p) and its derivative."""
    A = 2.0 / ((gamma + 1.0) * rho)
    B = (gamma - 1.0) / (gamma + 1.0) * pk
    if p > pk:
        s = np.sqrt(A / (p + B))
        return (p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (B + p))
    ratio = p / pk
    f = 2.0 * ck / (gamma - 1.0) * (ratio ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = 1.0 / (rho * ck) * ratio ** (-(gamma + 1.0) / (2.0 * gamma))
    return f, df


def star_state(left, right, gamma: float = GAMMA, tol: float = 1e-12, maxiter: int = 100):
    """(p*, u*) for primitive states (rho, u, p)."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    if min(rl, rr, pl, pr) <= 0.0:
        raise ValueError("Riemann data must have positive density and pressure")
    cl, cr = np.sqrt(gamma * pl / rl), np.sqrt(gamma * pr / rr)
    if 2.0 * (cl + cr) / (gamma - 1.0) <= ur - ul:
        raise VacuumError("initial data generate vacuum")
    # two-rarefaction guess, bounded below
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((cl + cr - 0.5 * (gamma - 1.0) * (ur - ul)) / (cl / pl ** z + cr / pr ** z)) ** (1.0 / z)
    p = max(p, 1e-8 * min(pl, pr))
    for _ in range(maxiter):
        fl, dfl = _pressure_function(p, rl, pl, cl, gamma)
        fr, dfr = _pressure_function(p, rr, pr, cr, gamma)
        step = (fl + fr + ur - ul) / (dfl + dfr)
        p_new = max(p - step, 1e-3 * p)
        if abs(p_new - p) <= tol * 0.5 * (p_new + p):
            p = p_new
            fl, _ = _pressure_function(p, rl, pl, cl, gamma)
            fr, _ = _pressure_function(p, rr, pr, cr, gamma)
            return p, 0.5 * (ul + ur) + 0.5 * (fr - fl)
        p = p_new
    raise NoConvergence("star pressure iteration did not converge")


def exact_riemann_euler(left, right, xi, gamma: float = GAMMA) -> np.ndarray:
    """Self-similar solution at xi = x/t; returns primitive (rho, u, p) arrays."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    ps, us = star_state(left, right, gamma)
    xi = np.asarray(xi, dtype=float)
    g = gamma
    gm, gp = g - 1.0, g + 1.0
    cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
    out = np.empty((3,) + xi.shape)

    def fill(mask, rho, u, p):
        out[0][mask], out[1][mask], out[2][mask] = (np.broadcast_to(v, xi.shape)[mask]
                                                    for v in (rho, u, p))

    # left of contact
    L = xi <= us
    if ps > pl:
        rho_s = rl * (ps / pl + gm / gp) / (gm / gp * ps / pl + 1.0)
        s = ul - cl * np.sqrt(gp / (2 * g) * ps / pl + gm / (2 * g))
        fill(L & (xi < s), rl, ul, pl)
        fill(L & (xi >= s), rho_s, us, ps)
    else:
        rho_s = rl * (ps / pl) ** (1.0 / g)
        head, tail = ul - cl, us - cl * (ps / pl) ** (gm / (2 * g))
        fill(L & (xi < head), rl, ul, pl)
        fan = L & (xi >= head) & (xi < tail)
        c = 2.0 / gp * (cl + gm / 2.0 * (ul - xi))
        u = 2.0 / gp * (cl + gm / 2.0 * ul + xi)
        rho = rl * (c / cl) ** (2.0 / gm)
        fill(fan, rho, u, pl * (c / cl) ** (2.0 * g / gm))
        fill(L & (xi >= tail), rho_s, us, ps)
    R = ~L
    if ps > pr:
        rho_s = rr * (ps / pr + gm / gp) / (gm / gp * ps / pr + 1.0)
        s = ur + cr * np.sqrt(gp / (2 * g) * ps / pr + gm / (2 * g))
        fill(R & (xi > s), rr, ur, pr)
        fill(R & (xi <= s), rho_s, us, ps)
    else:
        rho_s = rr * (ps / pr) ** (1.0 / g)
        head, tail = ur + cr, us + cr * (ps / pr) ** (gm / (2 * g))
        fill(R & (xi > head), rr, ur, pr)
        fan = R & (xi <= head) & (xi > tail)
        c = 2.0 / gp * (cr - gm / 2.0 * (ur - xi))
        u = 2.0 / gp * (-cr + gm / 2.0 * ur + xi)
        rho = rr * (c / cr) ** (2.0 / gm)
        fill(fan, rho, u, pr * (c / cr) ** (2.0 * g / gm))
        fill(R & (xi <= tail), rho_s, us, ps)
    return out


# ---------------------------------------------------------------------------
# independent upwind DG oracle for periodic linear advection


@dataclass
class ModalDG:
    """Upwind modal DG for u_t + a u_x = 0 (a > 0) on a periodic uniform mesh.

    Coefficients are (N, k+1) in the Legendre basis.  With ``damping`` the
    same oscillation-damping term is added, computed here from scratch.
    """

    k: int
    h: float
    a: float = 1.0
    damping: bool = False

    def __post_init__(self):
        K = self.k + 1
        # S[n, m] = int L_m L_n' over [-1, 1] (row n is the test function)
        S = np.zeros((K, K))
        for n in range(K):
            for m in range(n - 1, -1, -2):
                S[n, m] = 2.0
        self.stiff = S
        self.inv_mass = (2 * np.arange(K) + 1) / self.h
        self.sign = (-1.0) ** np.arange(K)  # L_m(-1)
        # derivative endpoint values per order l: Dp[l, m] = L_m^(l)(1), Dm for -1
        eye = np.eye(K)
        self.Dp = np.array([[npleg.legval(1.0, npleg.legder(eye[m], l)) if l else 1.0
                             for m in range(K)] for l in range(K)])
        self.Dm = np.array([[npleg.legval(-1.0, npleg.legder(eye[m], l)) if l else self.sign[m]
                             for m in range(K)] for l in range(K)])

    def sigma(self, c):
        k, h = self.k, self.h
        scale = (2.0 / h) ** np.arange(k + 1)
        right = (c @ self.Dp.T) * scale  # derivatives at the right end of each cell
        left = (c @ self.Dm.T) * scale
        jump = np.roll(left, -1, axis=0) - right  # at x_{i+1/2}
        j2 = jump ** 2
        rms = np.sqrt(0.5 * (j2 + np.roll(j2, 1, axis=0)))
        pre = np.array([2.0 * (2 * l + 1) / (2 * k - 1) * h ** l / np.prod(np.arange(1, l + 1))
                        for l in range(k + 1)])
        return rms * pre

    def rate(self, c, t=0.0):
        a = self.a
        up = a * c.sum(axis=1)  # upwind flux at x_{i+1/2}
        flux_in = np.roll(up, 1)
        vol = a * c @ self.stiff.T
        r = vol - up[:, None] + flux_in[:, None] * self.sign[None, :]
        r = r * self.inv_mass
        if self.damping and self.k >= 1:
            cum = np.cumsum(self.sigma(c), axis=1)
            cum[:, 0] = 0.0
            r -= cum / self.h * c
        return r


def dg_equivalence_check(k: int, n: int, t_final: float, init: Callable, family="radau",
                         damping: bool = False, cfl: float = 0.1, domain=(0.0, 1.0)) -> float:
    """Max over steps of the L2 distance between the SV run and the DG oracle."""
    from .physics import LinearAdvection
    from .basis import interpolate_initial
    from .solver import BoundaryCondition, SV1D
    from .timeint import StepControl, compute_dt, rk4_step

    mesh = build_uniform_mesh_1d(domain[0], domain[1], n)
    layout = build_cv_layout(k, family)
    state = interpolate_initial(init, mesh, layout)
    disc = SV1D(LinearAdvection((1.0,)), mesh, layout, BoundaryCondition(), BoundaryCondition(),
                damping=damping)
    op = build_reconstruction_operator(layout)
    h = mesh.widths[0]
    dg = ModalDG(k, h, 1.0, damping)
    u = state.u
    c = op.to_modal(u)[0]
    ctrl = StepControl(cfl, t_final)
    norm = h / (2 * np.arange(k + 1) + 1)
    worst = 0.0
    t = 0.0
    while t < t_final:
        k1 = disc.rate(u, t)
        a0 = disc.last_damping.a0 if disc.last_damping is not None else 0.0
        dt = compute_dt(disc.last_alpha, a0, disc.dx, ctrl, t)
        u = rk4_step(u, t, dt, disc.rate, k1)
        c = rk4_step(c, t, dt, dg.rate)
        t = t_final if t_final - (t + dt) <= 1e-14 else t + dt
        d = op.to_modal(u)[0] - c
        worst = max(worst, float(np.sqrt(np.sum(norm * d * d))))
    return worst


# ---------------------------------------------------------------------------
# discontinuous-problem metrics


def cv_bound_traces(state: SolutionState, component: int = 0):
    """Reconstruction at every CV bound (both one-sided values at SV faces).

    Returns physical coordinates and values, each (N, k+2), 1D only.
    """
    vals = sample_traces(state, state.layout.cv_bounds)[component]
    return state.mesh.cv_edges(state.layout), vals


def overshoot_metric(state: SolutionState, reference, component: int = 0):
    """(max(u_h) - max(ref), min(ref) - min(u_h)) over CV-bound traces.

    ``reference`` is a callable of x or an array of reference values.
    """
    x, vals = cv_bound_traces(state, component)
    ref = reference(x) if callable(reference) else np.asarray(reference)
    if callable(reference):
        ref = _components(ref, x.shape)[component]
    return float(np.max(vals) - np.max(ref)), float(np.min(ref) - np.min(vals))


def l1_distance(state: SolutionState, reference, component: int = 0, quad_points: int = 8) -> float:
    """Integral of |u_h - ref| over the 1D domain.

    ``reference`` is a callable of x or another 1D SolutionState on the same
    domain (sampled through its own reconstruction).
    """
    (ref_pts, x, w), = _cv_quadrature(state, quad_points)
    uh = sample_traces(state, ref_pts)[component]
    if isinstance(reference, SolutionState):
        ur = sample_state(reference, x, component)
    else:
        ur = _components(reference(x), x.shape)[component]
    return float(np.sum(w * np.abs(uh - ur)))


def sample_state(state: SolutionState, x, component: int = 0) -> np.ndarray:
    """Piecewise reconstruction of a 1D state at arbitrary points."""
    x = np.asarray(x, dtype=float)
    edges = state.mesh.edges
    i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, state.mesh.n - 1)
    xi = 2.0 * (x - edges[i]) / state.mesh.widths[i] - 1.0
    c = state.modal()[component]
    V = legendre_matrix(xi.ravel(), state.layout.k)
    return np.sum(c[i.ravel()] * V, axis=1).reshape(x.shape)


# ---------------------------------------------------------------------------
# convergence studies


@dataclass
class ConvergenceRow:
    mesh: int
    e0: float
    ec: float
    en: float
    e0_order: Optional[float] = None
    ec_order: Optional[float] = None
    en_order: Optional[float] = None
    steps: int = 0
    seconds: float = 0.0


def convergence_study(config, meshes: Sequence[int], damping: Optional[bool] = None,
                      component: int = 0) -> List[ConvergenceRow]:
    """Run a smooth-solution config on each mesh and tabulate e0, e_c, e_n."""
    from .config import build_simulation, load_config

    cfg = load_config(config)
    rows: List[ConvergenceRow] = []
    for n in meshes:
        disc_over = {} if damping is None else {"damping": bool(damping)}
        sim = build_simulation(cfg.with_overrides(mesh={"cells": [int(n)] * cfg.dim},
                                                  discretization=disc_over))
        if sim.problem.exact is None:
            from .config import ConfigError
            raise ConfigError("convergence studies need a problem with an exact solution")
        final, diag = sim.run()
        T = final.t

        def exact(*xs):
            return sim.problem.exact(*xs, T)

        rows.append(ConvergenceRow(int(n), l2_error(final, exact, component=component),
                                   cell_average_error(final, exact, component=component),
                                   downwind_point_error(final, exact, component=component),
                                   steps=diag.steps, seconds=diag.wall_time))
    for name in ("e0", "ec", "en"):
        col = orders([getattr(r, name) for r in rows])
        for r, o in zip(rows, col):
            setattr(r, name + "_order", o)
    return rows
