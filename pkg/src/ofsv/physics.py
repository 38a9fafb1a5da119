"""Governing systems: scalar linear advection and the compressible Euler equations.

State arrays put components first: ``U[s, ...]``.  Euler ordering is
(rho, rho*u[, rho*v], rho*E).
"""

from __future__ import annotations

import numpy as np

GAMMA = 1.4


class InvalidState(ValueError):
    """Non-finite state, or non-positive density/pressure."""

    def __init__(self, msg, index=None):
        super().__init__(msg if index is None else f"{msg} (at {index})")
        self.msg = msg
        self.index = index


class ConservationLaw:
    m: int
    dim: int
    label: str

    def flux(self, U, axis=0, check=True):
        raise NotImplementedError

    def max_wavespeed(self, U, axis=0, check=True):
        raise NotImplementedError

    def eig_matrices(self, U, normal=None):
        raise NotImplementedError

    def normal_flux(self, U, normal):
        return sum(n * self.flux(U, ax, check=False) for ax, n in enumerate(normal) if n != 0.0)


class LinearAdvection(ConservationLaw):
    """u_t + a . grad u = 0 with constant velocity ``a``."""

    m = 1

    def __init__(self, velocity=(1.0,)):
        self.velocity = tuple(float(v) for v in np.atleast_1d(velocity))
        self.dim = len(self.velocity)
        self.label = "advection"

    def flux(self, U, axis=0, check=True):
        return self.velocity[axis] * np.asarray(U)

    def max_wavespeed(self, U, axis=0, check=True):
        return np.full(np.shape(U)[1:], abs(self.velocity[axis]))

    def eig_matrices(self, U, normal=None):
        shape = np.shape(U)[1:]
        one = np.ones(shape + (1, 1))
        return one, one.copy()


def advection_flux(u, speed=1.0):
    return speed * np.asarray(u)


class Euler(ConservationLaw):
    def __init__(self, dim=1, gamma=GAMMA):
        self.dim = dim
        self.m = dim + 2
        self.gamma = float(gamma)
        self.label = "euler"

    # -- conversions -------------------------------------------------------
    def pressure(self, U):
        rho = U[0]
        kin = 0.5 * sum(U[1 + d] ** 2 for d in range(self.dim)) / rho
        return (self.gamma - 1.0) * (U[-1] - kin)

    def primitive(self, U):
        """(rho, velocity..., p) stacked along axis 0."""
        U = np.asarray(U, dtype=float)
        rho = U[0]
        vel = [U[1 + d] / rho for d in range(self.dim)]
        return np.stack([rho, *vel, self.pressure(U)])

    def conservative(self, W):
        """Inverse of :meth:`primitive`."""
        W = np.asarray(W, dtype=float)
        rho, p = W[0], W[-1]
        vel = W[1:1 + self.dim]
        mom = [rho * v for v in vel]
        E = p / (self.gamma - 1.0) + 0.5 * rho * sum(v * v for v in vel)
        return np.stack([rho, *mom, E])

    def check(self, U, where="state"):
        U = np.asarray(U)
        rho = U[0]
        p = self.pressure(U)
        bad = ~(np.isfinite(U).all(axis=0) & (rho > 0.0) & (p > 0.0))
        if np.any(bad):
            idx = tuple(int(i[0]) for i in np.nonzero(bad)) if np.ndim(bad) else None
            raise InvalidState(f"invalid {where}: non-positive density/pressure or NaN", idx)
        return rho, p

    def sound_speed(self, U):
        return np.sqrt(self.gamma * self.pressure(U) / U[0])

    # -- fluxes ------------------------------------------------------------
    def flux(self, U, axis=0, check=True):
        U = np.asarray(U, dtype=float)
        if check:
            self.check(U)
        rho = U[0]
        p = self.pressure(U)
        un = U[1 + axis] / rho
        F = U * un
        F[1 + axis] += p
        F[-1] += p * un
        return F

    def max_wavespeed(self, U, axis=0, check=True):
        """|u_axis| + c; without ``check`` a negative pressure counts as c = 0."""
        U = np.asarray(U, dtype=float)
        if check:
            self.check(U)
        c = np.sqrt(np.maximum(self.gamma * self.pressure(U) / U[0], 0.0))
        return np.abs(U[1 + axis] / U[0]) + c

    # -- linearisation -----------------------------------------------------
    def roe_average(self, UL, UR):
        """Roe mean state (conservative); density is sqrt(rhoL*rhoR)."""
        rho, vel, H, _ = self.roe_quantities(UL, UR)
        q2 = sum(v * v for v in vel)
        p = (self.gamma - 1.0) / self.gamma * rho * (H - 0.5 * q2)
        return self.conservative(np.stack([rho, *vel, p]))

    def roe_quantities(self, UL, UR):
        """(rho, [velocity components], enthalpy, sound speed) of the Roe mean."""
        UL, UR = np.asarray(UL, dtype=float), np.asarray(UR, dtype=float)
        sl, sr = np.sqrt(UL[0]), np.sqrt(UR[0])
        wsum = sl + sr
        vel = [(UL[1 + d] / sl + UR[1 + d] / sr) / wsum for d in range(self.dim)]
        HL = (UL[-1] + self.pressure(UL)) / UL[0]
        HR = (UR[-1] + self.pressure(UR)) / UR[0]
        H = (sl * HL + sr * HR) / wsum
        q2 = sum(v * v for v in vel)
        c = np.sqrt((self.gamma - 1.0) * np.maximum(H - 0.5 * q2, 0.0))
        return sl * sr, vel, H, c

    def eig_from_roe(self, vel, H, c, normal):
        """Right eigenvectors R and R^-1 of the directional Jacobian.

        Columns follow the eigenvalues (u_n - c, u_n, [u_n,] u_n + c);
        the enthalpy-based normalisation puts a unit density entry in
        every acoustic and entropy vector.  Arrays get trailing (m, m).
        """
        g1 = self.gamma - 1.0
        shape = np.shape(H)
        m = self.m
        R = np.zeros(shape + (m, m))
        L = np.zeros(shape + (m, m))
        c = np.asarray(c, dtype=float)
        if self.dim == 1:
            nx = normal[0] if normal is not None else 1.0
            u = vel[0]
            un = nx * u
            q2 = u * u
            b1 = g1 / (c * c)
            b2 = 0.5 * b1 * q2
            R[..., 0, :] = 1.0
            R[..., 1, 0], R[..., 1, 1], R[..., 1, 2] = u - c * nx, u, u + c * nx
            R[..., 2, 0], R[..., 2, 1], R[..., 2, 2] = H - un * c, 0.5 * q2, H + un * c
            L[..., 0, :] = np.stack([0.5 * (b2 + un / c), 0.5 * (-b1 * u - nx / c), 0.5 * b1], -1)
            L[..., 1, :] = np.stack([1.0 - b2, b1 * u, -b1 + 0.0 * u], -1)
            L[..., 2, :] = np.stack([0.5 * (b2 - un / c), 0.5 * (-b1 * u + nx / c), 0.5 * b1], -1)
            return R, L
        nx, ny = normal
        tx, ty = -ny, nx
        u, v = vel
        un = u * nx + v * ny
        ut = u * tx + v * ty
        q2 = u * u + v * v
        b1 = g1 / (c * c)
        b2 = 0.5 * b1 * q2
        zero = 0.0 * u
        R[..., :, 0] = np.stack([1.0 + zero, u - c * nx, v - c * ny, H - un * c], -1)
        R[..., :, 1] = np.stack([1.0 + zero, u, v, 0.5 * q2], -1)
        R[..., :, 2] = np.stack([zero, tx + zero, ty + zero, ut], -1)
        R[..., :, 3] = np.stack([1.0 + zero, u + c * nx, v + c * ny, H + un * c], -1)
        L[..., 0, :] = np.stack([0.5 * (b2 + un / c), 0.5 * (-b1 * u - nx / c),
                                 0.5 * (-b1 * v - ny / c), 0.5 * b1 + zero], -1)
        L[..., 1, :] = np.stack([1.0 - b2, b1 * u, b1 * v, -b1 + zero], -1)
        L[..., 2, :] = np.stack([-ut, tx + zero, ty + zero, zero], -1)
        L[..., 3, :] = np.stack([0.5 * (b2 - un / c), 0.5 * (-b1 * u + nx / c),
                                 0.5 * (-b1 * v + ny / c), 0.5 * b1 + zero], -1)
        return R, L

    def eig_matrices(self, U, normal=None):
        U = np.asarray(U, dtype=float)
        if normal is None:
            normal = (1.0,) + (0.0,) * (self.dim - 1)
        rho = U[0]
        vel = [U[1 + d] / rho for d in range(self.dim)]
        H = (U[-1] + self.pressure(U)) / rho
        return self.eig_from_roe(vel, H, self.sound_speed(U), normal)

    def jacobian(self, U, normal=None):
        """Directional flux Jacobian rebuilt from the eigen-decomposition."""
        if normal is None:
            normal = (1.0,) + (0.0,) * (self.dim - 1)
        U = np.asarray(U, dtype=float)
        R, L = self.eig_matrices(U, normal)
        rho = U[0]
        un = sum(n * U[1 + d] / rho for d, n in enumerate(normal))
        c = self.sound_speed(U)
        lam = [un - c] + [un] * (self.m - 2) + [un + c]
        return np.einsum("...ij,...j,...jk->...ik", R, np.stack(lam, -1), L)


def euler_flux(U, axis=0, gamma=GAMMA):
    U = np.asarray(U, dtype=float)
    return Euler(U.shape[0] - 2, gamma).flux(U, axis)


def to_characteristic(values, Rinv):
    """Left-multiply component vectors by R^-1.

    ``values`` has components on axis 0; ``Rinv`` has trailing (m, m) and
    leading axes matching values.shape[1:] (or broadcastable to them).
    """
    values = np.asarray(values, dtype=float)
    return np.moveaxis(np.einsum("...ij,j...->...i", Rinv, values), -1, 0) if values.ndim > 1 \
        else Rinv @ values


def make_law(name: str, dim: int, gamma: float = GAMMA, velocity=None) -> ConservationLaw:
    name = name.lower()
    if name == "euler":
        return Euler(dim, gamma)
    if name == "advection":
        vel = velocity if velocity is not None else (1.0,) * dim
        return LinearAdvection(vel)
    raise ValueError(f"unknown law {name!r}")
