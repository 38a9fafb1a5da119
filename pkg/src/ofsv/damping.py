"""Oscillation-damping coefficients and the damping contribution to CV rates.

For an SV tau with degree-k data the coefficients are

    sigma^l = 2(2l+1)/(2k-1) * h^l/l! * max_s sum_{|alpha|=l}
              sqrt( (1/N_e) sum_v [[d^alpha V_s]]_v^2 )

where V are characteristic variables of the Roe-averaged interface state,
[[.]]_v is the jump across the interface at vertex v, N_e = 2 (interval)
or 4 (rectangle).  The damping rate removes the modes of degree >= max(l, 1)
at speed sigma^l/h, which makes it diagonal in the Legendre basis:
mode m decays at (sigma^0 + ... + sigma^m)/h for m >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .basis import ModalPoly, damping_moment, legendre_matrix
from .geometry import CVLayout, UnsupportedDegree
from .physics import ConservationLaw, Euler


@dataclass(frozen=True)
class DampingField:
    """sigma has shape (N, k+1) in 1D or (Nx, Ny, k+1) in 2D."""

    sigma: np.ndarray

    @property
    def a0(self) -> float:
        return float(np.max(np.sum(self.sigma, axis=-1))) if self.sigma.size else 0.0


def prefactors(k: int, h) -> np.ndarray:
    """2(2l+1)/(2k-1) * h^l / l! for l = 0..k (``h`` may be an array)."""
    if k < 1:
        raise UnsupportedDegree("damping needs k >= 1")
    h = np.asarray(h, dtype=float)
    return np.stack([2.0 * (2 * l + 1) / (2 * k - 1) * h ** l / factorial(l)
                     for l in range(k + 1)], axis=-1)


def _char_inverse(law, UL, UR, normal):
    """R^-1 at the Roe average of two (possibly slightly unphysical) traces."""
    if not isinstance(law, Euler):
        return None
    UL = UL.copy()
    UR = UR.copy()
    tiny = 1e-14
    UL[0] = np.maximum(UL[0], tiny)
    UR[0] = np.maximum(UR[0], tiny)
    _, vel, H, c = law.roe_quantities(UL, UR)
    c = np.maximum(c, 1e-8 * (1.0 + np.sqrt(sum(v * v for v in vel))))
    _, L = law.eig_from_roe(vel, H, c, normal)
    return L


def _normal(law, axis):
    if not isinstance(law, Euler):
        return None  # scalar laws: V = u
    n = [0.0] * law.dim
    n[axis] = 1.0
    return tuple(n)


def _char_jump_axis(law, UL, UR, jump, axis):
    L = _char_inverse(law, UL, UR, _normal(law, axis))
    if L is None:
        return jump
    extra = jump.ndim - UL.ndim
    Lx = L.reshape(L.shape[:-2] + (1,) * extra + L.shape[-2:])
    return np.moveaxis(np.einsum("...st,t...->...s", Lx, jump), -1, 0)


def vertex_jump(law: ConservationLaw, left: ModalPoly, right: ModalPoly, deriv: int):
    """Jump of the ``deriv``-th derivative of V across a 1D vertex.

    ``left`` lives on the SV to the left of the vertex, ``right`` on the SV
    to its right; coefficient arrays are (m, k+1).
    """
    k = left.k
    ul = left.coeffs @ legendre_matrix(1.0, k)[0]
    ur = right.coeffs @ legendre_matrix(-1.0, k)[0]
    dl = left.coeffs @ legendre_matrix(1.0, k, deriv)[0] * (2.0 / left.h) ** deriv
    dr = right.coeffs @ legendre_matrix(-1.0, k, deriv)[0] * (2.0 / right.h) ** deriv
    return _char_jump_axis(law, ul, ur, dr - dl, 0)


def endpoint_derivatives(k: int, side: float) -> np.ndarray:
    """E[l, m] = L_m^{(l)}(side) for l = 0..k."""
    return np.stack([legendre_matrix(side, k, l)[0] for l in range(k + 1)])


def sigma_1d(law, coeffs, widths, periodic=True, h=None) -> DampingField:
    """Damping coefficients for 1D modal data ``coeffs`` (m, N, k+1)."""
    m, n, kk = coeffs.shape
    k = kk - 1
    pre = prefactors(k, widths if h is None else h)
    scale = (2.0 / widths)[:, None] ** np.arange(kk)  # (N, k+1)
    dr = (coeffs @ endpoint_derivatives(k, 1.0).T) * scale  # right end of each SV
    dl = (coeffs @ endpoint_derivatives(k, -1.0).T) * scale  # left end
    if periodic:
        left_side, right_side = dr, np.roll(dl, -1, axis=1)  # face i+1/2, i=0..N-1
    else:
        left_side, right_side = dr[:, :-1], dl[:, 1:]
    J = _char_jump_axis(law, left_side[..., 0], right_side[..., 0], right_side - left_side, 0)
    J2 = J * J
    if periodic:
        right_face = J2
        left_face = np.roll(J2, 1, axis=1)
    else:
        zero = np.zeros((m, 1, kk))
        right_face = np.concatenate([J2, zero], axis=1)
        left_face = np.concatenate([zero, J2], axis=1)
    rms = np.sqrt(0.5 * (left_face + right_face))
    return DampingField(pre * np.max(rms, axis=0))


def _char_apply(law, states, jump, axis):
    """Characteristic jumps.  ``states`` (m, ...) pairs of traces, ``jump`` (..., n, m)."""
    UL, UR = states
    L = _char_inverse(law, UL, UR, _normal(law, axis))
    if L is None:
        return jump
    return jump @ np.swapaxes(L, -1, -2)


def sigma_2d(law, coeffs, hx, hy, periodic=(True, True)) -> DampingField:
    """Damping coefficients for tensor modal data (m, Nx, Ny, k+1, k+1).

    Each rectangle vertex contributes the jumps across the two faces of the
    SV that meet there (x-face and y-face neighbours), normalised by N_e = 4.
    ``hx``/``hy`` are per-column / per-row SV widths.
    """
    m, nx, ny, kk, _ = coeffs.shape
    k = kk - 1
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    E = np.concatenate([endpoint_derivatives(k, -1.0), endpoint_derivatives(k, 1.0)])  # (2K, K)
    # D[..., cx, a, cy, b]: d^a_x d^b_y at corner (cx, cy), cx/cy 0 = low end, 1 = high end
    D = (E @ coeffs @ E.T).reshape(m, nx, ny, 2, kk, 2, kk)
    sx = (2.0 / hx)[:, None] ** np.arange(kk)
    sy = (2.0 / hy)[:, None] ** np.arange(kk)
    D *= sx[None, :, None, None, :, None, None] * sy[None, None, :, None, None, None, :]
    # components last: (Nx, Ny, cx, cy, a, b, m)
    D = D.transpose(1, 2, 3, 5, 4, 6, 0)
    S = np.zeros((nx, ny, kk * kk, m))

    for axis in (0, 1):
        ax = axis
        if axis == 0:
            hi, lo = D[:, :, 1], D[:, :, 0]  # (Nx, Ny, cy, a, b, m)
        else:
            hi, lo = D[:, :, :, 1], D[:, :, :, 0]  # (Nx, Ny, cx, a, b, m)
        if periodic[axis]:
            a, b = hi, np.roll(lo, -1, axis=ax)
        else:
            n = hi.shape[ax]
            a, b = np.take(hi, np.arange(n - 1), axis=ax), np.take(lo, np.arange(1, n), axis=ax)
        shape = a.shape
        jump = (b - a).reshape(shape[:3] + (kk * kk, m))
        states = (np.moveaxis(a[..., 0, 0, :], -1, 0), np.moveaxis(b[..., 0, 0, :], -1, 0))
        J = _char_apply(law, states, jump, axis)
        J2 = np.sum(J * J, axis=2)  # both vertices of the face
        if periodic[axis]:
            S += J2 + np.roll(J2, 1, axis=ax)
        else:
            pad = [(0, 0)] * J2.ndim
            pad[ax] = (0, 1)
            S += np.pad(J2, pad)
            pad[ax] = (1, 0)
            S += np.pad(J2, pad)

    rms = np.sqrt(0.25 * S)  # (Nx, Ny, K*K, m)
    order = np.add.outer(np.arange(kk), np.arange(kk)).ravel()
    M = (order[None, :] == np.arange(kk)[:, None]).astype(float)  # (K, K*K)
    summed = M @ rms  # (Nx, Ny, K, m)
    h_tau = np.maximum(hx[:, None], hy[None, :])
    return DampingField(prefactors(k, h_tau) * np.max(summed, axis=-1))


def modal_factors(sigma: np.ndarray, dim: int = 1) -> np.ndarray:
    """Decay speed times h for every Legendre mode.

    1D: f[..., m] = sigma^0 + ... + sigma^m for m >= 1, zero for m = 0.
    2D: the same with m replaced by max(p, q).
    """
    cum = np.cumsum(sigma, axis=-1)
    cum[..., 0] = 0.0
    if dim == 1:
        return cum
    kk = sigma.shape[-1]
    deg = np.maximum.outer(np.arange(kk), np.arange(kk))
    return cum[..., deg]


def damping_rate(poly: ModalPoly, sigmas, h_tau: float, j, layout: CVLayout):
    """Damping contribution to d/dt of the integral over CV ``j``."""
    return -sum(s / h_tau * damping_moment(poly, l, j, layout) for l, s in enumerate(sigmas))


def sigma_coefficients(law, coeffs, mesh, periodic=True) -> DampingField:
    from .geometry import Mesh2D
    if isinstance(mesh, Mesh2D):
        per = periodic if isinstance(periodic, tuple) else (periodic, periodic)
        return sigma_2d(law, coeffs, mesh.x.widths, mesh.y.widths, per)
    return sigma_1d(law, coeffs, mesh.widths, periodic)
