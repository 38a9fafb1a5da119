"""Runge-Kutta steppers and the time-step rule."""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ofsv.physics import Euler
from ofsv.timeint import SSPRK3_COEFFS, StepControl, compute_dt, rk4_step, ssprk3_step


class TestComputeDt:
    def test_advection(self):
        assert compute_dt((1.0,), 0.0, (0.02,), StepControl(0.4, 10.0)) == pytest.approx(0.008)

    def test_doubling_a0_halves_dt(self):
        ctrl = StepControl(0.3, 10.0)
        assert compute_dt((0.0,), 2.0, (0.1,), ctrl) == pytest.approx(
            0.5 * compute_dt((0.0,), 1.0, (0.1,), ctrl))

    def test_stagnant_gas(self):
        law = Euler(1)
        alpha = float(law.max_wavespeed(law.conservative([1.0, 0.0, 1.0])))
        assert compute_dt((alpha,), 0.0, (0.01,), StepControl(0.2, 1.0)) == pytest.approx(
            0.2 * 0.01 / np.sqrt(1.4))

    def test_2d_formula(self):
        dt = compute_dt((1.0, 2.0), 3.0, (0.1, 0.05), StepControl(0.5, 10.0))
        assert dt == pytest.approx(0.5 / (1 / 0.1 + 2 / 0.05 + 3 / 0.05))

    def test_clamps_to_final_time(self):
        ctrl = StepControl(0.4, 1.0)
        assert compute_dt((1.0,), 0.0, (0.1,), ctrl, t=0.99) == pytest.approx(0.01)
        # a sliver below 1e-12 is absorbed into the step
        assert compute_dt((1.0,), 0.0, (0.1,), ctrl, t=1.0 - 0.04 - 1e-14) == pytest.approx(
            0.04 + 1e-14)

    def test_zero_speed(self):
        assert compute_dt((0.0,), 0.0, (0.1,), StepControl(0.4, 2.0), t=0.5) == 1.5

    def test_fixed_dt_and_exponent(self):
        assert compute_dt((1.0,), 0.0, (0.1,), StepControl(0.4, 1.0, dt=0.05)) == 0.05
        e = compute_dt((1.0,), 0.0, (0.01,), StepControl(0.4, 1.0, dt_exponent=1.5))
        assert e == pytest.approx(0.4 * 0.01 ** 1.5)

    @pytest.mark.parametrize("kw", [dict(cfl=0.0), dict(cfl=-1.0), dict(t_final=-1.0)])
    def test_invalid_control(self, kw):
        with pytest.raises(ValueError):
            StepControl(**kw)


def lam_rhs(lam):
    return lambda u, t: lam * u


class TestSteppers:
    @pytest.mark.parametrize("step", [rk4_step, ssprk3_step])
    @given(arrays(float, 5, elements=st.floats(-1e3, 1e3)))
    def test_zero_residual(self, step, u):
        np.testing.assert_allclose(step(u, 0.0, 0.1, lambda v, t: np.zeros_like(v)), u,
                                   rtol=4e-16, atol=0)

    @pytest.mark.parametrize("step,order", [(rk4_step, 4), (ssprk3_step, 3)])
    def test_temporal_order(self, step, order):
        lam = -1.3 + 0.7j
        errs = []
        for n in (20, 40, 80):
            dt = 1.0 / n
            u = np.array([1.0 + 0j])
            for i in range(n):
                u = step(u, i * dt, dt, lam_rhs(lam))
            errs.append(abs(u[0] - np.exp(lam)))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - order) <= 0.1)

    def test_rk4_one_step_taylor(self):
        lam, dt = -2.0, 0.05
        u = rk4_step(np.array([1.0]), 0.0, dt, lam_rhs(lam))[0]
        taylor = sum((lam * dt) ** j / np.prod(range(1, j + 1)) for j in range(5))
        assert u == pytest.approx(taylor, abs=1e-15)
        assert abs(u - np.exp(lam * dt)) <= 1.01 * abs(lam * dt) ** 5 / 120

    @pytest.mark.parametrize("step", [rk4_step, ssprk3_step])
    def test_linearity(self, step, rng):
        A = rng.normal(size=(4, 4))
        f = lambda u, t: A @ u  # noqa: E731
        a, b = rng.normal(size=4), rng.normal(size=4)
        np.testing.assert_allclose(step(2 * a - 3 * b, 0, 0.1, f),
                                   2 * step(a, 0, 0.1, f) - 3 * step(b, 0, 0.1, f), atol=1e-12)

    @pytest.mark.parametrize("step", [rk4_step, ssprk3_step])
    def test_conserves_totals(self, step, rng):
        # residual with zero column sums conserves sum(u)
        A = rng.normal(size=(6, 6))
        A -= A.mean(axis=0)
        u = rng.normal(size=6)
        assert step(u, 0, 0.2, lambda v, t: A @ v).sum() == pytest.approx(u.sum(), abs=1e-13)

    def test_ssp_coefficients_convex(self):
        for a, b in SSPRK3_COEFFS:
            assert a >= 0 and b >= 0 and a + b == pytest.approx(1.0)

    def test_precomputed_k1(self):
        f = lam_rhs(-0.5)
        u = np.array([2.0])
        np.testing.assert_array_equal(rk4_step(u, 0, 0.1, f, f(u, 0)), rk4_step(u, 0, 0.1, f))
