"""Riemann fluxes and face quadrature."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ofsv.analysis import star_state
from ofsv.geometry import gauss_rule
from ofsv.numflux import (VacuumDetected, face_flux_integral, get_riemann_flux, hllc,
                          hllc_star_pressure, interior_flux, lax_friedrichs, upwind)
from ofsv.physics import Euler, LinearAdvection
from strategies import euler_state

ADV = LinearAdvection()


class TestScalar:
    def test_interior_flux(self):
        assert interior_flux(ADV, np.array([0.0])) == 0.0
        np.testing.assert_allclose(interior_flux(ADV, np.array([2.0])), lax_friedrichs(
            ADV, np.array([2.0]), np.array([2.0])))

    @given(st.floats(-100, 100), st.floats(-100, 100))
    def test_lf_equals_upwind_at_unit_speed(self, a, b):
        uL, uR = np.array([a]), np.array([b])
        assert lax_friedrichs(ADV, uL, uR)[0] == pytest.approx(a, abs=1e-12 * (1 + abs(b)))
        assert upwind(ADV, uL, uR)[0] == a

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5))
    def test_lf_nonincreasing_in_right_state(self, a, b, d):
        f1 = lax_friedrichs(ADV, np.array([a]), np.array([b]))
        f2 = lax_friedrichs(ADV, np.array([a]), np.array([b + d]))
        assert f2[0] <= f1[0] + 1e-12

    def test_upwind_negative_speed(self):
        law = LinearAdvection((-2.0,))
        assert upwind(law, np.array([1.0]), np.array([3.0]))[0] == -6.0


class TestEuler:
    @settings(max_examples=60)
    @given(euler_state(1))
    def test_consistency_1d(self, U):
        law = Euler(1)
        F = law.flux(U)
        scale = 1 + np.max(np.abs(F))
        assert np.max(np.abs(hllc(law, U, U) - F)) <= 1e-13 * scale
        assert np.max(np.abs(lax_friedrichs(law, U, U) - F)) <= 1e-13 * scale

    @settings(max_examples=60)
    @given(euler_state(2), st.sampled_from([0, 1]))
    def test_consistency_2d(self, U, axis):
        law = Euler(2)
        F = law.flux(U, axis)
        assert np.max(np.abs(hllc(law, U, U, axis) - F)) <= 1e-13 * (1 + np.max(np.abs(F)))

    def test_supersonic_upwinding(self):
        law = Euler(1)
        UL, UR = law.conservative([1.0, 5.0, 1.0]), law.conservative([0.5, 4.5, 0.8])
        np.testing.assert_array_equal(hllc(law, UL, UR), law.flux(UL))
        UL2, UR2 = law.conservative([1.0, -5.0, 1.0]), law.conservative([0.5, -4.5, 0.8])
        np.testing.assert_array_equal(hllc(law, UL2, UR2), law.flux(UR2))

    def sod(self):
        law = Euler(1)
        return law, law.conservative([1.0, 0.0, 1.0]), law.conservative([0.125, 0.0, 0.1])

    def test_sod_star_pressure_by_hand(self):
        # Roe mean: u=0, H=(3.5 + 2.8/sqrt 8)/(1 + 1/sqrt 8), c=sqrt(0.4 H)
        sq = 1 / np.sqrt(8)
        H = (3.5 + sq * 2.8) / (1 + sq)
        sl, sr = -np.sqrt(1.4), np.sqrt(0.4 * H)
        ml, mr = sl, 0.125 * sr
        sstar = (0.1 - 1.0) / (ml - mr)
        law, UL, UR = self.sod()
        assert hllc_star_pressure(law, UL, UR) == pytest.approx(1.0 + ml * sstar, rel=1e-13)

    @pytest.mark.xfail(strict=True, reason="Roe-augmented speed bounds put p* 35% low for Sod")
    def test_sod_star_pressure_near_exact(self):
        law, UL, UR = self.sod()
        ps, _ = star_state((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
        assert abs(hllc_star_pressure(law, UL, UR) / ps - 1.0) <= 0.05

    @settings(max_examples=200)
    @given(euler_state(1), euler_state(1))
    def test_random_pairs_finite_or_vacuum(self, UL, UR):
        law = Euler(1)
        try:
            F = hllc(law, UL, UR, check=True)
        except VacuumDetected:
            return
        assert np.all(np.isfinite(F))

    def test_vacuum_detected(self):
        law = Euler(1)
        UL, UR = law.conservative([1.0, -20.0, 0.1]), law.conservative([1.0, 20.0, 0.1])
        with pytest.raises(VacuumDetected):
            hllc(law, UL, UR, check=True)

    @settings(max_examples=60)
    @given(euler_state(1), euler_state(1))
    def test_symmetry_under_reflection(self, UL, UR):
        law = Euler(1)
        flip = np.array([1.0, -1.0, 1.0])
        F = hllc(law, UL, UR)
        G = hllc(law, UR * flip, UL * flip)
        np.testing.assert_allclose(F, -G * flip, rtol=1e-10, atol=1e-10 * (1 + np.abs(F).max()))


class TestRegistry:
    def test_defaults(self):
        assert get_riemann_flux("default", Euler(1)) is hllc
        assert get_riemann_flux(None, ADV) is upwind
        assert get_riemann_flux("LF", ADV) is lax_friedrichs

    @pytest.mark.parametrize("name,law", [("hllc", ADV), ("upwind", Euler(1)), ("roe", ADV)])
    def test_rejects(self, name, law):
        with pytest.raises(ValueError):
            get_riemann_flux(name, law)


class TestFaceIntegral:
    def test_constant_unit_face(self):
        r = gauss_rule(3)
        assert face_flux_integral(np.full(3, 2.5), 1.0, r) == pytest.approx(2.5)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_polynomial_exact(self, n):
        r = gauss_rule(n)
        x, _ = r.mapped(0.0, 2.0)
        vals = x ** (2 * n - 1)
        assert face_flux_integral(vals, 2.0, r) == pytest.approx(2.0 ** (2 * n) / (2 * n))

    def test_point_face(self):
        r = gauss_rule(1)
        assert face_flux_integral(np.array([4.0]), 1.0, r) == 4.0
