"""Modal Legendre representation of the solution inside each SV.

The evolved unknowns are CV averages.  Every residual evaluation maps them
to Legendre coefficients with a precomputed (k+1)x(k+1) matrix (applied
along both axes in 2D), works with the modal polynomial, and maps back.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.polynomial import legendre as npleg

from .geometry import CVLayout, Mesh1D, Mesh2D, gauss_rule


def legendre_matrix(x, k: int, deriv: int = 0) -> np.ndarray:
    """V[i, m] = d^deriv/dx^deriv L_m(x_i) on the reference interval."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((len(x), k + 1))
    for m in range(deriv, k + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        out[:, m] = npleg.legval(x, npleg.legder(c, deriv) if deriv else c)
    return out


def legendre_antiderivative(x, k: int) -> np.ndarray:
    """A[i, m] = int_{-1}^{x_i} L_m."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((len(x), k + 1))
    for m in range(k + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        out[:, m] = npleg.legval(x, npleg.legint(c, lbnd=-1.0))
    return out


def cv_integrals(layout: CVLayout) -> np.ndarray:
    """I[j, m] = integral of L_m over reference CV j."""
    anti = legendre_antiderivative(layout.cv_bounds, layout.k)
    return np.diff(anti, axis=0)


@dataclass(frozen=True)
class ReconstructionOperator:
    layout: CVLayout
    averaging: np.ndarray  # modal -> CV averages
    matrix: np.ndarray  # CV averages -> modal

    def to_modal(self, averages: np.ndarray) -> np.ndarray:
        """Apply along the last axis (1D data)."""
        return averages @ self.matrix.T

    def to_averages(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.averaging.T

    @cached_property
    def _kron_modal(self):
        return np.kron(self.matrix, self.matrix)

    @cached_property
    def _kron_averaging(self):
        return np.kron(self.averaging, self.averaging)

    def to_modal_2d(self, averages: np.ndarray) -> np.ndarray:
        """Apply along the last two axes (tensor SV)."""
        return apply_tensor(averages, self._kron_modal, self.matrix.shape[0])

    def to_averages_2d(self, coeffs: np.ndarray) -> np.ndarray:
        return apply_tensor(coeffs, self._kron_averaging, self.averaging.shape[0])


def apply_tensor(x: np.ndarray, M: np.ndarray, rows: int) -> np.ndarray:
    """Contract the last two axes of ``x`` with a Kronecker-structured matrix.

    ``M`` maps the flattened trailing (K, K) block to ``rows`` x (M.shape[0] // rows)
    outputs; one GEMM instead of two batched small products.
    """
    lead = x.shape[:-2]
    out = np.reshape(x, (-1, x.shape[-2] * x.shape[-1])) @ M.T
    return out.reshape(lead + (rows, M.shape[0] // rows))


def build_reconstruction_operator(layout: CVLayout) -> ReconstructionOperator:
    averaging = cv_integrals(layout) / layout.cv_widths[:, None]
    matrix = np.linalg.inv(averaging)
    assert np.all(np.isfinite(matrix)), "singular averaging operator"
    return ReconstructionOperator(layout, averaging, matrix)


@dataclass(frozen=True)
class ModalPoly:
    """Legendre coefficients on one or many SVs.

    ``coeffs`` has trailing shape (k+1,) in 1D or (k+1, k+1) in 2D; any
    leading axes (components, SV indices) broadcast.  ``h`` is the SV width
    (1D) or the pair (hx, hy) (2D).
    """

    coeffs: np.ndarray
    h: object = 2.0
    dim: int = 1

    @property
    def k(self) -> int:
        return self.coeffs.shape[-1] - 1


def evaluate(p: ModalPoly, x, deriv=0):
    """Physical-space derivative of ``p`` at reference point(s) ``x``.

    In 2D ``x`` is a pair (xi, eta) of scalars and ``deriv`` a pair of orders.
    """
    if p.dim == 1:
        v = legendre_matrix(x, p.k, deriv) * (2.0 / p.h) ** deriv
        out = p.coeffs @ v.T
        return out[..., 0] if np.ndim(x) == 0 else out
    (xi, eta), (dx, dy) = x, deriv
    hx, hy = p.h
    vx = legendre_matrix(xi, p.k, dx)[0] * (2.0 / hx) ** dx
    vy = legendre_matrix(eta, p.k, dy)[0] * (2.0 / hy) ** dy
    return np.einsum("...pq,p,q->...", p.coeffs, vx, vy)


def truncation_mask(k: int, level: int, dim: int = 1) -> np.ndarray:
    """Boolean mask of modes kept by the L2 projection onto degree ``level``.

    Level -1 is treated as level 0.  In 2D the kept space is Q_level, i.e.
    modes with max(m, n) <= level.
    """
    level = max(level, 0)
    m = np.arange(k + 1)
    if dim == 1:
        return m <= level
    return np.maximum(m[:, None], m[None, :]) <= level


def project_truncate(p: ModalPoly, level: int) -> ModalPoly:
    mask = truncation_mask(p.k, level, p.dim)
    return ModalPoly(np.where(mask, p.coeffs, 0.0), p.h, p.dim)


def damping_moment(p: ModalPoly, level: int, j: int, layout: CVLayout):
    """Integral over CV ``j`` of p - P^{level-1} p (physical measure).

    1D only; for 2D SVs ``j`` is a pair (a, b) of CV indices.
    """
    removed = ~truncation_mask(p.k, level - 1, p.dim)
    integrals = cv_integrals(layout)
    if p.dim == 1:
        return 0.5 * p.h * (np.where(removed, p.coeffs, 0.0) @ integrals[j])
    a, b = j
    hx, hy = p.h
    c = np.where(removed, p.coeffs, 0.0)
    return 0.25 * hx * hy * np.einsum("...pq,p,q->...", c, integrals[a], integrals[b])


@dataclass
class SolutionState:
    """CV averages on the dual partition.

    1D: ``u`` has shape (m, N, k+1).  2D: (m, Nx, Ny, k+1, k+1), with the
    last two axes the CV indices along x and y.
    """

    t: float
    u: np.ndarray
    mesh: object
    layout: CVLayout

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.mesh, Mesh2D) else 1

    @property
    def m(self) -> int:
        return self.u.shape[0]

    def copy(self, u: Optional[np.ndarray] = None, t: Optional[float] = None) -> "SolutionState":
        return SolutionState(self.t if t is None else t, (self.u if u is None else u).copy(),
                             self.mesh, self.layout)

    def cv_volumes(self) -> np.ndarray:
        w = self.layout.cv_widths
        if self.dim == 1:
            return 0.5 * self.mesh.widths[:, None] * w[None, :]
        vx = 0.5 * self.mesh.x.widths[:, None] * w[None, :]
        vy = 0.5 * self.mesh.y.widths[:, None] * w[None, :]
        return vx[:, None, :, None] * vy[None, :, None, :]

    def totals(self) -> np.ndarray:
        """Integral of each component over the domain."""
        axes = tuple(range(1, self.u.ndim))
        return np.sum(self.u * self.cv_volumes(), axis=axes)

    def modal(self, op: Optional[ReconstructionOperator] = None) -> np.ndarray:
        op = op or build_reconstruction_operator(self.layout)
        return op.to_modal(self.u) if self.dim == 1 else op.to_modal_2d(self.u)

    def sv_means(self) -> np.ndarray:
        w = self.layout.cv_widths / 2.0
        if self.dim == 1:
            return self.u @ w
        return np.einsum("...ab,a,b->...", self.u, w, w)

    def cv_centers(self):
        """CV midpoints; 1D array (N*(k+1),) or pair of axis arrays in 2D."""
        if self.dim == 1:
            e = self.mesh.cv_edges(self.layout)
            return (0.5 * (e[:, 1:] + e[:, :-1])).ravel()
        ex = self.mesh.x.cv_edges(self.layout)
        ey = self.mesh.y.cv_edges(self.layout)
        return (0.5 * (ex[:, 1:] + ex[:, :-1])).ravel(), (0.5 * (ey[:, 1:] + ey[:, :-1])).ravel()

    def flat_fields(self) -> np.ndarray:
        """CV averages laid out along physical axes: (m, N*(k+1)) or (m, Nx*K, Ny*K)."""
        if self.dim == 1:
            return self.u.reshape(self.m, -1)
        m, nx, ny, kk, _ = self.u.shape
        return self.u.transpose(0, 1, 3, 2, 4).reshape(m, nx * kk, ny * kk)


def _as_components(values, shape):
    values = np.asarray(values, dtype=float)
    if values.shape == shape:
        return values[None]
    return values


def interpolation_nodes(layout: CVLayout) -> np.ndarray:
    """Interior subdivision points plus the right SV edge."""
    return np.append(layout.interior_points, 1.0)


def interpolate_initial(f, mesh, layout: CVLayout, t: float = 0.0) -> SolutionState:
    """CV averages of the degree-k interpolant of ``f`` per SV.

    ``f`` maps coordinates (x in 1D, (x, y) in 2D) to an array whose
    leading axis enumerates components; a scalar-shaped result means m=1.
    """
    nodes = interpolation_nodes(layout)
    vinv = np.linalg.inv(legendre_matrix(nodes, layout.k))
    op = build_reconstruction_operator(layout)
    if isinstance(mesh, Mesh2D):
        x = mesh.x.edges[:-1, None] + 0.5 * mesh.x.widths[:, None] * (nodes + 1.0)
        y = mesh.y.edges[:-1, None] + 0.5 * mesh.y.widths[:, None] * (nodes + 1.0)
        X = x[:, None, :, None] + 0.0 * y[None, :, None, :]
        Y = y[None, :, None, :] + 0.0 * x[:, None, :, None]
        vals = _as_components(f(X, Y), X.shape)
        coeffs = np.einsum("pa,qb,...ab->...pq", vinv, vinv, vals, optimize=True)
        return SolutionState(t, op.to_averages_2d(coeffs), mesh, layout)
    x = mesh.edges[:-1, None] + 0.5 * mesh.widths[:, None] * (nodes + 1.0)
    vals = _as_components(f(x), x.shape)
    coeffs = vals @ vinv.T
    return SolutionState(t, op.to_averages(coeffs), mesh, layout)


def average_initial(f, mesh, layout: CVLayout, quad_points: Optional[int] = None,
                    t: float = 0.0) -> SolutionState:
    """CV averages of ``f`` by Gauss quadrature on every CV."""
    n = quad_points or layout.k + 2
    if n < layout.k + 2:
        raise ValueError("average_initial needs at least k+2 quadrature points")
    rule = gauss_rule(n)
    w = rule.weights / 2.0

    def axis_points(m1: Mesh1D):
        e = m1.cv_edges(layout)
        return e[:, :-1, None] + 0.5 * (e[:, 1:, None] - e[:, :-1, None]) * (rule.nodes + 1.0)

    if isinstance(mesh, Mesh2D):
        px, py = axis_points(mesh.x), axis_points(mesh.y)  # (N, K, n)
        X = px[:, None, :, None, :, None] + 0.0 * py[None, :, None, :, None, :]
        Y = py[None, :, None, :, None, :] + 0.0 * px[:, None, :, None, :, None]
        vals = _as_components(f(X, Y), X.shape)
        return SolutionState(t, np.einsum("...abgh,g,h->...ab", vals, w, w, optimize=True),
                             mesh, layout)
    x = axis_points(mesh)
    vals = _as_components(f(x), x.shape)
    return SolutionState(t, vals @ w, mesh, layout)
