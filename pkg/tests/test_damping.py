"""Damping coefficients and damping rates."""

from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ofsv.basis import ModalPoly, build_reconstruction_operator, evaluate, interpolate_initial
from ofsv.damping import (DampingField, damping_rate, modal_factors, prefactors, sigma_1d,
                          sigma_2d, sigma_coefficients, vertex_jump)
from ofsv.geometry import (UnsupportedDegree, build_cv_layout, build_uniform_mesh_1d,
                           build_uniform_mesh_2d)
from ofsv.physics import Euler, LinearAdvection

ADV = LinearAdvection()
ADV2 = LinearAdvection((1.0, 1.0))


def sigma_2d_reference(law, coeffs, hx, hy, periodic):
    """Per-vertex loops straight from the definition (N_e = 4, h = longest side)."""
    m, nx, ny, K, _ = coeffs.shape
    k = K - 1
    sig = np.zeros((nx, ny, K))

    def poly(i, j):
        return ModalPoly(coeffs[:, i, j], (hx[i], hy[j]), 2)

    def neighbour(i, j, di, dj):
        ii, jj = i + di, j + dj
        if periodic:
            return ii % nx, jj % ny
        if 0 <= ii < nx and 0 <= jj < ny:
            return ii, jj
        return None

    for i in range(nx):
        for j in range(ny):
            p = poly(i, j)
            total = np.zeros((K, K, m))  # sum over vertices of squared jumps per alpha
            for sx in (-1.0, 1.0):
                for sy in (-1.0, 1.0):
                    for axis, (di, dj) in ((0, (int(sx), 0)), (1, (0, int(sy)))):
                        nb = neighbour(i, j, di, dj)
                        if nb is None:
                            continue
                        q = poly(*nb)
                        here = (sx, sy)
                        there = (-sx, sy) if axis == 0 else (sx, -sy)
                        u_here = evaluate(p, here, (0, 0))
                        u_there = evaluate(q, there, (0, 0))
                        if isinstance(law, Euler):
                            left, right = (u_here, u_there) if (sx if axis == 0 else sy) > 0 \
                                else (u_there, u_here)
                            _, vel, H, c = law.roe_quantities(left, right)
                            normal = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
                            _, L = law.eig_from_roe(vel, H, c, normal)
                        else:
                            L = np.eye(m)
                        for a in range(K):
                            for b in range(K):
                                jump = evaluate(q, there, (a, b)) - evaluate(p, here, (a, b))
                                total[a, b] += (L @ jump) ** 2
            h = max(hx[i], hy[j])
            for l in range(K):
                acc = np.zeros(m)
                for a in range(K):
                    b = l - a
                    if 0 <= b < K:
                        acc += np.sqrt(total[a, b] / 4.0)
                pre = 2.0 * (2 * l + 1) / (2 * k - 1) * h ** l / factorial(l)
                sig[i, j, l] = pre * np.max(acc)
    return sig


class TestVertexJump:
    def test_linear_pieces(self):
        p1 = ModalPoly(np.array([[0.5, 0.5]]), 1.0)  # x on [0, 1]
        p2 = ModalPoly(np.array([[2.5, 0.5]]), 1.0)  # x + 1 on [1, 2]
        assert vertex_jump(ADV, p1, p2, 0)[0] == pytest.approx(1.0)
        assert vertex_jump(ADV, p1, p2, 1)[0] == pytest.approx(0.0, abs=1e-14)

    def test_constant_zero(self):
        p = ModalPoly(np.array([[1.3, 0.0, 0.0]]), 0.5)
        for d in range(3):
            assert vertex_jump(ADV, p, p, d)[0] == 0.0

    @given(arrays(float, (2, 1, 3), elements=st.floats(-5, 5)), st.floats(-3, 3),
           st.integers(0, 2))
    def test_linear_in_scalar_data(self, c, s, d):
        a, b = ModalPoly(c[0], 0.3), ModalPoly(c[1], 0.3)
        sa, sb = ModalPoly(s * c[0], 0.3), ModalPoly(s * c[1], 0.3)
        assert vertex_jump(ADV, sa, sb, d)[0] == pytest.approx(s * vertex_jump(ADV, a, b, d)[0],
                                                               abs=1e-9)


class TestSigma1D:
    def test_single_unit_jump(self):
        c = np.zeros((1, 2, 3))
        c[0, 1, 0] = 1.0
        sig = sigma_1d(ADV, c, np.ones(2), periodic=False).sigma
        np.testing.assert_allclose(sig[0], [(2 / 3) / np.sqrt(2), 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(sig[1], sig[0])

    def test_global_polynomial_gives_zero(self):
        mesh = build_uniform_mesh_1d(-1, 3, 8)
        lay = build_cv_layout(3, "gauss")
        s = interpolate_initial(lambda x: 2 - x + 0.3 * x ** 3, mesh, lay)
        c = build_reconstruction_operator(lay).to_modal(s.u)
        sig = sigma_1d(ADV, c, mesh.widths, periodic=False).sigma
        assert np.max(sig) <= 1e-12

    def test_constant_periodic_zero(self):
        field = sigma_1d(ADV, np.tile([2.0, 0, 0], (1, 5, 1)), np.full(5, 0.2))
        assert field.a0 == 0.0

    @given(arrays(float, (1, 6, 3), elements=st.floats(-5, 5)), st.floats(-4, 4))
    def test_positive_homogeneity(self, c, s):
        w = np.full(6, 0.25)
        a = sigma_1d(ADV, c, w).sigma
        b = sigma_1d(ADV, s * c, w).sigma
        np.testing.assert_allclose(b, abs(s) * a, rtol=1e-10, atol=1e-12)

    @given(arrays(float, (1, 5, 4), elements=st.floats(-5, 5)))
    def test_nonnegative_and_a0(self, c):
        field = sigma_1d(ADV, c, np.full(5, 0.4))
        assert np.all(field.sigma >= 0)
        assert field.a0 == pytest.approx(np.max(field.sigma.sum(axis=1)))

    def test_prefactors(self):
        np.testing.assert_allclose(prefactors(2, 0.5), [2 / 3, 2 * 0.5, 10 / 3 * 0.25 / 2])
        with pytest.raises(UnsupportedDegree):
            prefactors(0, 1.0)

    def test_euler_uses_characteristics(self, rng):
        law = Euler(1)
        W = np.stack([1 + 0.2 * rng.random((4, 3)), rng.normal(size=(4, 3)) * 0.1,
                      1 + 0.2 * rng.random((4, 3))])
        c = law.conservative(W)
        sig = sigma_1d(law, c, np.full(4, 0.5)).sigma
        assert np.all(np.isfinite(sig)) and np.all(sig >= 0)


class TestSigma2D:
    @pytest.mark.parametrize("periodic", [True, False])
    def test_matches_brute_force_scalar(self, rng, periodic):
        c = rng.normal(size=(1, 3, 4, 3, 3))
        hx, hy = np.array([0.5, 0.3, 0.4]), np.array([0.2, 0.25, 0.3, 0.35])
        got = sigma_2d(ADV2, c, hx, hy, (periodic, periodic)).sigma
        ref = sigma_2d_reference(ADV2, c, hx, hy, periodic)
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-13)

    def test_matches_brute_force_euler(self, rng):
        law = Euler(2)
        mesh = build_uniform_mesh_2d((0, 1, 0, 1), 3, 3)
        lay = build_cv_layout(2, "gauss")

        def f(x, y):
            rho = 1 + 0.3 * np.sin(5 * x + 2 * y) + 0.2 * (x > 0.5)
            return law.conservative(np.stack([rho, 0.3 + 0 * x, np.cos(3 * y), 1 + 0.1 * x * y]))
        s = interpolate_initial(f, mesh, lay)
        c = build_reconstruction_operator(lay).to_modal_2d(s.u)
        got = sigma_2d(law, c, mesh.x.widths, mesh.y.widths).sigma
        ref = sigma_2d_reference(law, c, mesh.x.widths, mesh.y.widths, True)
        np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)

    def test_planar_data_reduces_to_1d(self, rng):
        c1 = rng.normal(size=(1, 6, 3))
        c2 = np.zeros((1, 6, 4, 3, 3))
        c2[..., 0] = c1[:, :, None, :]  # depends on x only
        h = np.full(6, 0.25)
        s1 = sigma_1d(ADV2, c1, h).sigma
        s2 = sigma_2d(ADV2, c2, h, np.full(4, 0.25)).sigma
        np.testing.assert_allclose(s2, np.repeat(s1[:, None, :], 4, axis=1), rtol=1e-12)

    def test_dispatch(self, rng):
        mesh = build_uniform_mesh_2d((0, 1, 0, 1), 2, 2)
        c = rng.normal(size=(1, 2, 2, 2, 2))
        np.testing.assert_array_equal(sigma_coefficients(ADV2, c, mesh).sigma,
                                      sigma_2d(ADV2, c, mesh.x.widths, mesh.y.widths).sigma)


class TestDampingRate:
    def test_zero_sigma(self):
        lay = build_cv_layout(2)
        p = ModalPoly(np.array([1.0, 2.0, 3.0]), 0.5)
        assert damping_rate(p, [0.0, 0.0, 0.0], 0.5, 1, lay) == 0.0

    def test_constant(self):
        lay = build_cv_layout(2)
        assert damping_rate(ModalPoly(np.array([4.0, 0, 0]), 0.5), [1, 2, 3], 0.5, 0, lay) == 0.0

    @given(st.integers(1, 5), st.sampled_from(["gauss", "radau"]), st.data())
    def test_sv_total_conserved(self, k, fam, data):
        lay = build_cv_layout(k, fam)
        c = data.draw(arrays(float, k + 1, elements=st.floats(-5, 5)))
        sig = data.draw(arrays(float, k + 1, elements=st.floats(0, 10)))
        p = ModalPoly(c, 0.3)
        total = sum(damping_rate(p, sig, 0.3, j, lay) for j in range(k + 1))
        assert abs(total) <= 1e-11 * (1 + np.abs(c).sum() * (1 + sig.sum()))

    def test_modal_form_matches_moments(self, rng):
        # rate removes mode m at speed (sigma^0 + ... + sigma^m)/h
        k, h = 3, 0.4
        lay = build_cv_layout(k)
        op = build_reconstruction_operator(lay)
        c = rng.normal(size=k + 1)
        sig = rng.random(k + 1)
        vols = 0.5 * h * lay.cv_widths
        per_cv = np.array([damping_rate(ModalPoly(c, h), sig, h, j, lay) for j in range(k + 1)])
        fac = modal_factors(sig[None, :])[0]
        np.testing.assert_allclose(per_cv / vols, op.to_averages(-c * fac / h), atol=1e-12)

    def test_modal_factors_2d(self):
        fac = modal_factors(np.array([1.0, 2.0, 4.0]), dim=2)
        np.testing.assert_array_equal(fac, [[0, 3, 7], [3, 3, 7], [7, 7, 7]])


@settings(max_examples=50)
@given(arrays(float, (1, 8, 4), elements=st.floats(-3, 3)))
def test_damping_dissipates_l2(c):
    # d/dt ||u||^2 from damping = -2 sum_m fac_m/h * c_m^2 * h/(2m+1)
    field = sigma_1d(ADV, c, np.full(8, 0.125))
    fac = modal_factors(field.sigma)
    assert np.all(fac >= 0)
    rate = -2 * np.sum(fac * c[0] ** 2 / (2 * np.arange(4) + 1))
    assert rate <= 0.0


def test_dampingfield_empty():
    assert DampingField(np.zeros((0, 3))).a0 == 0.0
