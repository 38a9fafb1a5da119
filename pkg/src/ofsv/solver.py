"""Semi-discrete OFSV residual on 1D and 2D structured meshes, and the run loop.

Per control volume tau_j*:

    d/dt int_{tau_j*} U = - sum_faces int F_hat . n  - sum_l sigma^l/h int (U - P^{l-1} U)

Faces strictly inside an SV use the analytic flux of the (single-valued)
reconstruction; SV faces use a Riemann flux between neighbouring traces.
Unknowns are CV averages, so the stepper works with integral rates divided
by CV volumes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .basis import SolutionState, apply_tensor, build_reconstruction_operator, legendre_matrix
from .damping import DampingField, modal_factors, sigma_1d, sigma_2d
from .geometry import CVLayout, Mesh1D, Mesh2D, gauss_rule
from .numflux import get_riemann_flux
from .physics import ConservationLaw, Euler, InvalidState
from .timeint import STEPPERS, StepControl, compute_dt

log = logging.getLogger(__name__)

SQRT3 = np.sqrt(3.0)
DMR_POST = (8.0, 4.125 * SQRT3, -4.125, 116.5)
DMR_PRE = (1.4, 0.0, 0.0, 1.0)
DMR_X0 = 1.0 / 6.0
DMR_SHOCK_SPEED = 10.0


class BlowUp(FloatingPointError):
    pass


@dataclass
class BoundaryCondition:
    """One domain side.

    kind: periodic | transmissive | wall | inflow | dmr_bottom | dmr_top.
    ``state`` is a primitive tuple for Euler inflow or a scalar for advection;
    ``func(t)`` overrides it with a time-dependent value.
    """

    kind: str = "periodic"
    state: Optional[tuple] = None
    func: Optional[Callable] = None

    def __post_init__(self):
        aliases = {"reflecting": "wall", "reflective": "wall", "outflow": "transmissive",
                   "non_reflecting": "transmissive", "dirichlet": "inflow",
                   "double_mach_bottom": "dmr_bottom", "double_mach_top": "dmr_top"}
        self.kind = aliases.get(self.kind, self.kind)
        if self.kind not in ("periodic", "transmissive", "wall", "inflow", "dmr_bottom", "dmr_top"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")


def dmr_shock_x(y, t):
    """x-position of the Mach-10 incident shock at height y and time t."""
    return DMR_X0 + (y + 2.0 * DMR_SHOCK_SPEED * t) / SQRT3


def ghost_state(bc: BoundaryCondition, law: ConservationLaw, U, normal_axis: int, sign: float,
                position=None, t: float = 0.0):
    """Exterior trace for a boundary face.

    ``U`` is the interior trace (components on axis 0), ``sign`` the sign of
    the outward normal along ``normal_axis``, ``position`` the coordinates
    (x, y) of the face points (2D) or x (1D).
    """
    U = np.asarray(U, dtype=float)
    kind = bc.kind
    if kind == "transmissive":
        return U.copy()
    if kind == "wall":
        G = U.copy()
        G[1 + normal_axis] = -G[1 + normal_axis]
        return G
    if kind == "inflow":
        val = bc.func(t) if bc.func is not None else bc.state
        if isinstance(law, Euler):
            W = np.asarray(val, dtype=float).reshape((law.m,) + (1,) * (U.ndim - 1))
            return np.broadcast_to(law.conservative(W), U.shape).copy()
        return np.broadcast_to(np.asarray(val, dtype=float), U.shape).copy()
    if kind in ("dmr_bottom", "dmr_top"):
        x, y = position
        post = _const(law, DMR_POST, U.shape)
        if kind == "dmr_bottom":
            wall = ghost_state(BoundaryCondition("wall"), law, U, normal_axis, sign)
            return np.where(np.asarray(x) < DMR_X0, post, wall)
        pre = _const(law, DMR_PRE, U.shape)
        return np.where(np.asarray(x) < dmr_shock_x(y, t), post, pre)
    raise ValueError(f"boundary kind {kind!r} has no ghost state")


def _const(law, prim, shape):
    W = np.asarray(prim, dtype=float).reshape((law.m,) + (1,) * (len(shape) - 1))
    return np.broadcast_to(law.conservative(W), shape)


class _Base:
    law: ConservationLaw
    layout: CVLayout

    def __init__(self, law, layout, flux=None, damping=True, positivity_floor=None):
        self.law = law
        self.layout = layout
        self.k = layout.k
        self.op = build_reconstruction_operator(layout)
        self.riemann = get_riemann_flux(flux, law)
        self.damping = bool(damping) and layout.k >= 1
        self.positivity_floor = positivity_floor
        self.bounds_vander = legendre_matrix(layout.cv_bounds, layout.k)  # (k+2, k+1)
        self.last_alpha = (0.0,)
        self.last_damping: Optional[DampingField] = None

    def _check_traces(self, U, where):
        """Traces must be finite with positive density.

        Trace pressure is not checked: interior faces use the analytic flux
        and the Riemann solver clips its sound speeds, so only the CV
        averages (the evolved state) are required to stay physical.
        """
        nonfinite = ~np.all(np.isfinite(U), axis=0)
        if np.any(nonfinite):
            idx = tuple(int(i[0]) for i in np.nonzero(nonfinite))
            raise BlowUp(f"non-finite {where} trace in SV {idx[:1 + (U.ndim > 3)]}")
        if isinstance(self.law, Euler):
            bad = ~(U[0] > 0.0)
            if np.any(bad):
                idx = tuple(int(i[0]) for i in np.nonzero(bad))
                raise InvalidState(f"invalid {where} trace", idx[:1 + (U.ndim > 3)])

    def rate(self, u, t=0.0):
        """d/dt of the CV averages."""
        return self.residual(u, t) / self.volumes

    def floor(self, u):
        """Optional positivity floor on CV averages (off unless configured)."""
        if self.positivity_floor is None or not isinstance(self.law, Euler):
            return u
        eps = self.positivity_floor
        rho = np.maximum(u[0], eps)
        kin = 0.5 * sum(u[1 + d] ** 2 for d in range(self.law.dim)) / rho
        emin = kin + eps / (self.law.gamma - 1.0)
        if np.any(rho != u[0]) or np.any(u[-1] < emin):
            log.info("positivity floor applied")
        u = u.copy()
        u[0] = rho
        u[-1] = np.maximum(u[-1], emin)
        return u


class SV1D(_Base):
    """OFSV discretisation on a 1D mesh; ``u`` has shape (m, N, k+1)."""

    def __init__(self, law, mesh: Mesh1D, layout: CVLayout, left: BoundaryCondition,
                 right: BoundaryCondition, flux=None, damping=True, positivity_floor=None):
        super().__init__(law, layout, flux, damping, positivity_floor)
        self.mesh = mesh
        self.left, self.right = left, right
        self.periodic = left.kind == "periodic"
        if (left.kind == "periodic") != (right.kind == "periodic"):
            raise ValueError("periodic sides must come in pairs")
        self.volumes = 0.5 * mesh.widths[:, None] * layout.cv_widths[None, :]
        self.dx = (float(np.min(mesh.widths)),)

    def modal(self, u):
        return self.op.to_modal(u)

    def sigma(self, c) -> DampingField:
        return sigma_1d(self.law, c, self.mesh.widths, self.periodic)

    def residual(self, u, t=0.0):
        law = self.law
        c = self.op.to_modal(u)
        ub = c @ self.bounds_vander.T  # (m, N, k+2)
        self._check_traces(ub, "CV-bound")
        K = self.k + 1
        F = np.empty_like(ub)
        if K > 1:
            F[..., 1:K] = law.flux(ub[..., 1:K], 0, check=False)
        right_tr, left_tr = ub[..., K], ub[..., 0]
        if self.periodic:
            UL, UR = right_tr, np.roll(left_tr, -1, axis=1)
            face = self.riemann(law, UL, UR, 0)  # face i+1/2
            F[..., K] = face
            F[..., 0] = np.roll(face, 1, axis=1)
            speeds = (UL, UR)
        else:
            gl = ghost_state(self.left, law, left_tr[:, :1], 0, -1.0, self.mesh.a, t)
            gr = ghost_state(self.right, law, right_tr[:, -1:], 0, 1.0, self.mesh.b, t)
            UL = np.concatenate([gl, right_tr], axis=1)
            UR = np.concatenate([left_tr, gr], axis=1)
            face = self.riemann(law, UL, UR, 0)  # faces 0..N
            F[..., K] = face[:, 1:]
            F[..., 0] = face[:, :-1]
            speeds = (UL, UR)
        self.last_alpha = (float(max(np.max(law.max_wavespeed(s, 0, check=False)) for s in speeds)),)
        res = -(F[..., 1:] - F[..., :-1])
        if self.damping:
            damp = self.sigma(c)
            self.last_damping = damp
            fac = modal_factors(damp.sigma, 1)  # (N, K)
            h = self.mesh.widths[:, None]
            res -= self.op.to_averages(c * (fac / h)) * self.volumes
        else:
            self.last_damping = None
        return res


class SV2D(_Base):
    """OFSV on a rectangle mesh; ``u`` has shape (m, Nx, Ny, k+1, k+1)."""

    def __init__(self, law, mesh: Mesh2D, layout: CVLayout, bcs: Dict[str, BoundaryCondition],
                 flux=None, damping=True, positivity_floor=None):
        super().__init__(law, layout, flux, damping, positivity_floor)
        self.mesh = mesh
        self.bcs = bcs
        self.periodic = (bcs["left"].kind == "periodic", bcs["bottom"].kind == "periodic")
        for a, b in (("left", "right"), ("bottom", "top")):
            if (bcs[a].kind == "periodic") != (bcs[b].kind == "periodic"):
                raise ValueError("periodic sides must come in pairs")
        K = layout.k + 1
        rule = gauss_rule(K)
        lo, hi = layout.cv_bounds[:-1], layout.cv_bounds[1:]
        half = 0.5 * (hi - lo)
        # face quadrature points of every CV segment along one SV side
        self.seg_nodes = (lo[:, None] + half[:, None] * (rule.nodes + 1.0)).ravel()  # (K*G,)
        self.seg_weights = np.zeros((K, K * rule.n))
        for b in range(K):
            self.seg_weights[b, b * rule.n:(b + 1) * rule.n] = rule.weights * half[b]
        self.seg_vander = legendre_matrix(self.seg_nodes, layout.k)  # (KG, K)
        B, V = self.bounds_vander, self.seg_vander
        # modal (p, q) -> traces on CV-bound lines (line, face point), per axis
        self.trace_x = np.einsum("ap,gq->agpq", B, V).reshape(B.shape[0] * V.shape[0], K * K)
        self.trace_y = np.einsum("bq,gp->bgpq", B, V).reshape(B.shape[0] * V.shape[0], K * K)
        w = layout.cv_widths
        hx, hy = mesh.x.widths, mesh.y.widths
        vx = 0.5 * hx[:, None] * w[None, :]
        vy = 0.5 * hy[:, None] * w[None, :]
        self.volumes = vx[:, None, :, None] * vy[None, :, None, :]
        self.dx = (float(np.min(hx)), float(np.min(hy)))
        self.h_tau = mesh.sv_sizes()
        # physical coordinates of face quadrature points, for position-dependent ghosts
        self.xseg = mesh.x.edges[:-1, None] + 0.5 * hx[:, None] * (self.seg_nodes + 1.0)
        self.yseg = mesh.y.edges[:-1, None] + 0.5 * hy[:, None] * (self.seg_nodes + 1.0)

    def modal(self, u):
        return self.op.to_modal_2d(u)

    def sigma(self, c) -> DampingField:
        return sigma_2d(self.law, c, self.mesh.x.widths, self.mesh.y.widths, self.periodic)

    def _axis_fluxes(self, c, axis, t):
        """Flux integrals over every CV face normal to ``axis``.

        Returns (m, Nx, Ny, k+2, k+1): index -2 runs over face lines along
        the axis, index -1 over CV rows of the transverse axis.
        """
        law = self.law
        K = self.k + 1
        # (m, Nx, Ny, line, g): lines normal to ``axis``, g face points along the other axis
        ub = apply_tensor(c, self.trace_x if axis == 0 else self.trace_y, K + 1)
        self._check_traces(ub, "CV-bound")
        F = np.empty_like(ub)
        if K > 1:
            F[..., 1:K, :] = law.flux(ub[..., 1:K, :], axis, check=False)
        hi_tr, lo_tr = ub[..., K, :], ub[..., 0, :]
        ax = 1 + axis
        names = ("left", "right") if axis == 0 else ("bottom", "top")
        if self.periodic[axis]:
            UL, UR = hi_tr, np.roll(lo_tr, -1, axis=ax)
            face = self.riemann(law, UL, UR, axis)
            F[..., K, :] = face
            F[..., 0, :] = np.roll(face, 1, axis=ax)
        else:
            lo_first = np.take(lo_tr, [0], axis=ax)
            hi_last = np.take(hi_tr, [-1], axis=ax)
            mx, my = self.mesh.x, self.mesh.y
            if axis == 0:
                pos_lo = (mx.a, self.yseg[None, :, :])
                pos_hi = (mx.b, self.yseg[None, :, :])
            else:
                pos_lo = (self.xseg[:, None, :], my.a)
                pos_hi = (self.xseg[:, None, :], my.b)
            g_lo = ghost_state(self.bcs[names[0]], law, lo_first, axis, -1.0, pos_lo, t)
            g_hi = ghost_state(self.bcs[names[1]], law, hi_last, axis, 1.0, pos_hi, t)
            UL = np.concatenate([g_lo, hi_tr], axis=ax)
            UR = np.concatenate([lo_tr, g_hi], axis=ax)
            face = self.riemann(law, UL, UR, axis)
            n = face.shape[ax]
            F[..., K, :] = np.take(face, np.arange(1, n), axis=ax)
            F[..., 0, :] = np.take(face, np.arange(0, n - 1), axis=ax)
        alpha = max(np.max(law.max_wavespeed(UL, axis, check=False)),
                    np.max(law.max_wavespeed(UR, axis, check=False)))
        h_t = self.mesh.y.widths[None, :] if axis == 0 else self.mesh.x.widths[:, None]
        FI = (F.reshape(-1, F.shape[-1]) @ self.seg_weights.T).reshape(F.shape[:-1] + (K,))
        FI *= (0.5 * h_t)[None, :, :, None, None]
        return FI, float(alpha)

    def residual(self, u, t=0.0):
        c = self.op.to_modal_2d(u)
        FX, ax_ = self._axis_fluxes(c, 0, t)
        FY, ay_ = self._axis_fluxes(c, 1, t)
        self.last_alpha = (ax_, ay_)
        # FX[..., a, b]: x-face line a, CV row b.  FY[..., b, a]: y-face line b, CV column a
        res = -(FX[..., 1:, :] - FX[..., :-1, :])
        res -= np.swapaxes(FY[..., 1:, :] - FY[..., :-1, :], -1, -2)
        if self.damping:
            damp = self.sigma(c)
            self.last_damping = damp
            fac = modal_factors(damp.sigma, 2) / self.h_tau[:, :, None, None]
            res -= self.op.to_averages_2d(c * fac) * self.volumes
        else:
            self.last_damping = None
        return res


@dataclass
class Diagnostics:
    t: List[float] = field(default_factory=list)
    dt: List[float] = field(default_factory=list)
    a0: List[float] = field(default_factory=list)
    mass: List[np.ndarray] = field(default_factory=list)
    min_rho: List[float] = field(default_factory=list)
    min_p: List[float] = field(default_factory=list)
    wall_time: float = 0.0

    def record(self, t, dt, a0, mass, min_rho, min_p):
        self.t.append(float(t))
        self.dt.append(float(dt))
        self.a0.append(float(a0))
        self.mass.append(np.asarray(mass, dtype=float))
        self.min_rho.append(float(min_rho))
        self.min_p.append(float(min_p))

    @property
    def steps(self) -> int:
        return max(len(self.t) - 1, 0)

    def as_rows(self):
        for i in range(len(self.t)):
            yield [self.t[i], self.dt[i], self.a0[i], *self.mass[i], self.min_rho[i], self.min_p[i]]


def make_discretization(law, mesh, layout, bcs, flux=None, damping=True, positivity_floor=None):
    if isinstance(mesh, Mesh2D):
        return SV2D(law, mesh, layout, bcs, flux, damping, positivity_floor)
    return SV1D(law, mesh, layout, bcs["left"], bcs["right"], flux, damping, positivity_floor)


def compute_residual(state: SolutionState, disc) -> np.ndarray:
    """Rate of change of every CV integral."""
    return disc.residual(state.u, state.t)


def _extrema(law, state_u, op, dim):
    if not isinstance(law, Euler):
        return np.nan, np.nan
    return float(np.min(state_u[0])), float(np.min(law.pressure(state_u)))


def _sv_means(u, layout, dim):
    w = layout.cv_widths / 2.0
    if dim == 1:
        return u @ w
    return np.einsum("...ab,a,b->...", u, w, w)


def integrate(state: SolutionState, disc, ctrl: StepControl, integrator: str = "rk4",
              snapshots=(), on_snapshot=None, on_step=None,
              diagnostics: Optional[Diagnostics] = None) -> tuple:
    """Advance ``state`` to ``ctrl.t_final``; returns (state, Diagnostics).

    Raises BlowUp on NaN and InvalidState on loss of positivity of SV means,
    both carrying the time of failure in the message.  Pass ``diagnostics``
    to keep the partial time series when a run fails.
    """
    stepper = STEPPERS[integrator]
    law = disc.law
    dim = 2 if isinstance(disc, SV2D) else 1
    u = state.u.copy()
    t = float(state.t)
    diag = diagnostics if diagnostics is not None else Diagnostics()
    pending = sorted(s for s in snapshots if s > t)
    start = time.perf_counter()

    def totals(v):
        axes = tuple(range(1, v.ndim))
        return np.sum(v * disc.volumes, axis=axes)

    mn = _extrema(law, u, disc.op, dim)
    diag.record(t, 0.0, 0.0, totals(u), *mn)
    if on_snapshot and state.t in snapshots:
        on_snapshot(state.copy(u, t))
    nsteps = 0
    while t < ctrl.t_final:
        target = min([ctrl.t_final] + pending)
        sub = StepControl(ctrl.cfl, target, ctrl.dt, ctrl.dt_exponent)
        try:
            k1 = disc.rate(u, t)
            a0 = disc.last_damping.a0 if disc.last_damping is not None else 0.0
            dt = compute_dt(disc.last_alpha, a0, disc.dx, sub, t)
            if dt <= 0.0:
                break
            u = stepper(u, t, dt, disc.rate, k1)
        except InvalidState as exc:
            raise type(exc)(f"{exc.msg} at t={t:.6g}", exc.index) from exc
        except FloatingPointError as exc:
            raise BlowUp(f"{exc} at t={t:.6g}") from exc
        u = disc.floor(u)
        t = target if abs(target - (t + dt)) <= 1e-14 * max(1.0, abs(target)) else t + dt
        if not np.all(np.isfinite(u)):
            raise BlowUp(f"non-finite solution at t={t:.6g}")
        if isinstance(law, Euler):
            means = _sv_means(u, disc.layout, dim)
            rho, p = means[0], law.pressure(means)
            if np.any(rho <= 0.0) or np.any(p <= 0.0):
                bad = np.argwhere((rho <= 0.0) | (p <= 0.0))[0]
                raise InvalidState(f"positivity lost at t={t:.6g}", tuple(int(i) for i in bad))
        diag.record(t, dt, a0, totals(u), *_extrema(law, u, disc.op, dim))
        nsteps += 1
        if on_step:
            on_step(t, u)
        if pending and t >= pending[0] - 1e-14:
            pending.pop(0)
            if on_snapshot:
                on_snapshot(state.copy(u, t))
        if nsteps >= ctrl.max_steps:
            raise BlowUp(f"step limit {ctrl.max_steps} reached at t={t:.6g}")
    diag.wall_time = time.perf_counter() - start
    return state.copy(u, t), diag
