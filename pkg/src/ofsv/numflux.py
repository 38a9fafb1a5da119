"""Interface fluxes: analytic flux inside an SV, Riemann fluxes on SV faces."""

from __future__ import annotations

import numpy as np

from .geometry import QuadratureRule
from .physics import ConservationLaw, Euler, InvalidState, LinearAdvection


class VacuumDetected(InvalidState):
    pass


def interior_flux(law: ConservationLaw, U, axis=0):
    """Single-valued reconstruction at a CV face inside an SV."""
    return law.flux(U, axis, check=False)


def lax_friedrichs(law: ConservationLaw, UL, UR, axis=0, check=False):
    """Local Lax-Friedrichs (Rusanov) flux."""
    alpha = np.maximum(law.max_wavespeed(UL, axis, check), law.max_wavespeed(UR, axis, check))
    return 0.5 * (law.flux(UL, axis, False) + law.flux(UR, axis, False)) - 0.5 * alpha * (UR - UL)


def upwind(law: LinearAdvection, UL, UR, axis=0, check=False):
    a = law.velocity[axis]
    return a * (UL if a >= 0.0 else UR)


def hllc(law: Euler, UL, UR, axis=0, check=False):
    """HLLC flux with Roe-augmented Einfeldt wave-speed bounds.

    With ``check`` the input states must be physical and the star states
    must have positive density and pressure, otherwise VacuumDetected.
    """
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    if check:
        law.check(UL, "left state")
        law.check(UR, "right state")
    g = law.gamma
    n = 1 + axis
    rl, rr = UL[0], UR[0]
    ul, ur = UL[n] / rl, UR[n] / rr
    pl, pr = law.pressure(UL), law.pressure(UR)
    # clipped so that a slightly non-physical trace still gives finite speeds
    cl = np.sqrt(np.maximum(g * pl / rl, 0.0))
    cr = np.sqrt(np.maximum(g * pr / rr, 0.0))
    _, vel, _, chat = law.roe_quantities(UL, UR)
    uhat = vel[axis]
    sl = np.minimum(ul - cl, uhat - chat)
    sr = np.maximum(ur + cr, uhat + chat)
    ml = rl * (sl - ul)
    mr = rr * (sr - ur)
    sstar = (pr - pl + ul * ml - ur * mr) / (ml - mr)

    def star(U, r, u, p, s, mass):
        fac = mass / (s - sstar)
        Us = U / r * fac
        Us[n] = fac * sstar
        # fac * p / mass written as p / (s - sstar): finite when mass -> 0
        Us[-1] = fac * (U[-1] / r + (sstar - u) * sstar) + (sstar - u) * p / (s - sstar)
        return Us

    Usl = star(UL, rl, ul, pl, sl, ml)
    Usr = star(UR, rr, ur, pr, sr, mr)
    if check:
        pstar = pl + ml * (sstar - ul)
        if np.any(Usl[0] <= 0.0) or np.any(Usr[0] <= 0.0) or np.any(pstar <= 0.0):
            raise VacuumDetected("HLLC star state lost positivity")

    FL = law.flux(UL, axis, False)
    FR = law.flux(UR, axis, False)
    F = np.where(sl >= 0.0, FL,
                 np.where(sstar >= 0.0, FL + sl * (Usl - UL),
                          np.where(sr > 0.0, FR + sr * (Usr - UR), FR)))
    return F


def hllc_star_pressure(law: Euler, UL, UR, axis=0):
    """Star-region pressure implied by the HLLC wave-speed estimates."""
    rl, rr = UL[0], UR[0]
    ul, ur = UL[1 + axis] / rl, UR[1 + axis] / rr
    pl, pr = law.pressure(UL), law.pressure(UR)
    cl, cr = law.sound_speed(UL), law.sound_speed(UR)
    _, vel, _, chat = law.roe_quantities(UL, UR)
    sl = np.minimum(ul - cl, vel[axis] - chat)
    sr = np.maximum(ur + cr, vel[axis] + chat)
    ml, mr = rl * (sl - ul), rr * (sr - ur)
    sstar = (pr - pl + ul * ml - ur * mr) / (ml - mr)
    return pl + ml * (sstar - ul)


RIEMANN_FLUXES = {"hllc": hllc, "lax_friedrichs": lax_friedrichs, "lf": lax_friedrichs,
                  "rusanov": lax_friedrichs, "upwind": upwind}


def get_riemann_flux(name, law):
    if name is None or name == "default":
        name = "hllc" if isinstance(law, Euler) else "upwind"
    try:
        fn = RIEMANN_FLUXES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown Riemann flux {name!r}") from None
    if fn is hllc and not isinstance(law, Euler):
        raise ValueError("HLLC needs the Euler system")
    if fn is upwind and not isinstance(law, LinearAdvection):
        raise ValueError("exact upwinding needs linear advection")
    return fn


def face_flux_integral(values, face_length, rule: QuadratureRule):
    """Integral of a flux sampled at the rule's nodes along a face (last axis)."""
    values = np.asarray(values, dtype=float)
    return values @ rule.weights * (0.5 * face_length)
