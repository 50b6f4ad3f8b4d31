"""Grids, norms, inner products, and the bump profiles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlab.errors import GridMismatchError
from qlab.field import (
    Grid1D,
    Grid2D,
    GridFunction,
    PotentialField,
    inner_product,
    l2_norm,
    plancherel_defect,
    sample_function,
    sup_norm,
    weighted_norm,
)


def gaussian_state(grid, h):
    return sample_function(
        grid, lambda x1, x2: (np.pi * h) ** -0.5 * np.exp(-(x1 ** 2 + x2 ** 2) / (2 * h)))


class TestGrids:
    def test_power_of_two_required(self):
        with pytest.raises(ValueError):
            Grid2D(1.0, 100)
        with pytest.raises(ValueError):
            Grid1D(1.0, 48)

    def test_spacing_times_points_exact(self):
        for half in (1.0, np.pi, 256.0, 3.0):
            g = Grid2D(half, 128)
            assert g.spacing * g.points_per_dim == 2.0 * half

    def test_coords_contain_origin(self):
        g = Grid2D(4.0, 64)
        x1, x2 = g.coords()
        assert x1[32, 0] == 0.0 and x2[0, 32] == 0.0


class TestNorms:
    def test_zero_function(self):
        g = Grid2D(1.0, 32)
        u = GridFunction(g, np.zeros((32, 32)))
        assert l2_norm(u) == 0.0
        assert sup_norm(u) == 0.0

    def test_constant_one_unit_box(self):
        g = Grid2D(1.0, 64)
        u = sample_function(g, lambda a, b: np.ones_like(a))
        assert l2_norm(u) == pytest.approx(2.0, abs=1e-13)

    def test_gaussian_l2_is_one(self):
        u = gaussian_state(Grid2D(4.0, 256), 1.0 / 8.0)
        assert l2_norm(u) == pytest.approx(1.0, abs=1e-8)

    def test_gaussian_sup(self):
        u = gaussian_state(Grid2D(4.0, 256), 1.0 / 8.0)
        assert sup_norm(u) == pytest.approx((np.pi / 8) ** -0.5, abs=1e-8)

    def test_plane_wave_sup(self):
        g = Grid2D(np.pi, 64)
        u = sample_function(g, lambda a, b: np.exp(1j * (3 * a + 2 * b)) / (2 * np.pi))
        assert sup_norm(u) == pytest.approx(1 / (2 * np.pi), rel=1e-13)

    def test_sup_refinement_improves_offgrid_peak(self):
        g = Grid2D(4.0, 64)
        # peak deliberately between grid points
        u = sample_function(g, lambda a, b: np.exp(-((a - 0.031) ** 2 + b ** 2) / 0.1))
        raw = sup_norm(u)
        refined = sup_norm(u, refine=True)
        assert 1.0 >= refined >= raw

    def test_weighted_norm_unit_weight(self):
        u = gaussian_state(Grid2D(4.0, 128), 0.25)
        assert weighted_norm(u, lambda a, b: np.ones_like(a)) == pytest.approx(
            l2_norm(u), rel=1e-14)


class TestInnerProduct:
    def test_self_inner_product_is_norm_squared(self):
        u = gaussian_state(Grid2D(4.0, 128), 0.2)
        ip = inner_product(u, u)
        assert ip.real == pytest.approx(l2_norm(u) ** 2, rel=1e-12)
        assert abs(ip.imag) < 1e-15

    def test_distinct_modes_orthogonal(self):
        g = Grid2D(np.pi, 32)
        u = sample_function(g, lambda a, b: np.exp(1j * (2 * a + b)))
        v = sample_function(g, lambda a, b: np.exp(1j * (3 * a - b)))
        assert abs(inner_product(u, v)) < 1e-12

    def test_grid_mismatch_raises(self):
        u = gaussian_state(Grid2D(4.0, 64), 0.2)
        v = gaussian_state(Grid2D(4.0, 128), 0.2)
        with pytest.raises(GridMismatchError):
            inner_product(u, v)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=9999))
    def test_conjugate_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        g = Grid2D(1.0, 16)
        u = GridFunction(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        v = GridFunction(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        assert inner_product(u, v) == np.conj(inner_product(v, u))


class TestPlancherel:
    @pytest.mark.parametrize("seed", range(5))
    def test_discrete_parseval(self, seed):
        rng = np.random.default_rng(seed)
        g = Grid2D(2.0, 64)
        u = GridFunction(g, rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64)))
        assert plancherel_defect(u) <= 1e-12

    def test_gaussian_parseval(self):
        assert plancherel_defect(gaussian_state(Grid2D(4.0, 256), 0.125)) <= 1e-12


class TestBumpProfile:
    def test_constructor_invariants(self, profiles):
        checks = profiles.validate(tol=1e-10)
        assert all(checks.values()), checks

    def test_integrals_exact(self, profiles):
        ints = profiles.integrals()
        assert ints["chi"] == pytest.approx(1.0, abs=1e-10)
        assert ints["psi"] == pytest.approx(1.0, abs=1e-10)

    def test_supports(self, profiles):
        t = np.linspace(-3, 4, 10001)
        chi = profiles.chi(t)
        psi = profiles.psi(t)
        assert np.all(chi[(t <= -1) | (t >= 1)] == 0)
        assert np.all(psi[(t <= 1) | (t >= 2)] == 0)
        assert np.all((chi >= 0) & (chi <= 1))
        assert np.all((psi >= 0) & (psi <= 2))
        assert profiles.chi(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_derivatives_consistent(self, profiles):
        # analytic derivatives against central differences
        t = np.linspace(-0.98, 0.98, 401)
        step = 1e-6
        fd = (profiles.chi(t + step) - profiles.chi(t - step)) / (2 * step)
        assert np.max(np.abs(fd - profiles.chi_prime(t))) < 1e-4
        t2 = np.linspace(1.02, 1.98, 401)
        fd2 = (profiles.psi(t2 + step) - profiles.psi(t2 - step)) / (2 * step)
        assert np.max(np.abs(fd2 - profiles.psi_prime(t2))) < 1e-4

    def test_combined_evaluators_match(self, profiles):
        t = np.linspace(-1.5, 2.5, 2001)
        c, c1, c2 = profiles.chi_with_derivs(t)
        assert np.array_equal(c, profiles.chi(t))
        assert np.array_equal(c1, profiles.chi_prime(t))
        assert np.allclose(c2, profiles.chi_second(t), rtol=1e-12, atol=1e-12)
        p, p1 = profiles.psi_with_derivs(t)
        assert np.array_equal(p, profiles.psi(t))
        assert np.array_equal(p1, profiles.psi_prime(t))

    def test_fourier_bounds_hold(self, profiles):
        # quadrature of the transform against the closed-form envelope
        t = np.linspace(-1, 2, 1 << 16)
        dt = t[1] - t[0]
        for y in (32.0, 64.0, 128.0):
            chi_hat = np.abs(np.sum(profiles.chi(t) * np.exp(-1j * y * t)) * dt)
            psi_hat = np.abs(np.sum(profiles.psi(t) * np.exp(-1j * y * t)) * dt)
            assert chi_hat <= profiles.chi_hat_bound(y) * (1 + 1e-6) + 1e-12
            assert psi_hat <= profiles.psi_hat_bound(y) * (1 + 1e-6) + 1e-12


class TestPotentialField:
    def test_polynomial_partials_exact(self):
        p = PotentialField.from_polynomial({(2, 1): 3.0, (0, 0): -1.0})
        x1, x2 = 0.7, -0.3
        assert p(x1, x2) == pytest.approx(3 * x1 ** 2 * x2 - 1)
        gx, gy = p.grad(x1, x2)
        assert gx == pytest.approx(6 * x1 * x2)
        assert gy == pytest.approx(3 * x1 ** 2)
        assert p.partial((2, 1), x1, x2) == pytest.approx(6.0)
        assert p.partial((3, 0), x1, x2) == 0.0

    def test_grad_hess_fd_consistency(self):
        p = PotentialField(lambda a, b: np.sin(a) * np.cos(b), name="sin*cos")
        x1 = np.linspace(-1, 1, 7)
        x2 = np.linspace(-1, 1, 7)
        gx, gy = p.grad(x1, x2)
        assert np.max(np.abs(gx - np.cos(x1) * np.cos(x2))) < 1e-8
        a, b, c = p.hess(x1, x2)
        assert np.max(np.abs(a + np.sin(x1) * np.cos(x2))) < 1e-5

    def test_scaled_transform(self):
        p = PotentialField.from_polynomial({(1, 0): 100.0})
        q = p.scaled(0.01, 0.01)
        assert q(1.0, 0.0) == pytest.approx(0.01 * 100.0 * 0.01)
        gx, _ = q.grad(1.0, 0.0)
        assert gx == pytest.approx(0.01 * 0.01 * 100.0)

    def test_rotation_preserves_values(self):
        p = PotentialField.from_polynomial({(1, 0): 1.0, (0, 1): 2.0})
        theta = 0.7
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        q = p.rotated(rot)
        y = np.array([0.3, -0.4])
        x = rot @ y
        assert q(y[0], y[1]) == pytest.approx(p(x[0], x[1]))

    def test_hess_norm_closed_form(self):
        p = PotentialField.from_polynomial({(2, 0): 1.0, (0, 2): -1.0})
        # Hessian diag(2, -2): spectral norm 2
        assert p.hess_norm(0.0, 0.0) == pytest.approx(2.0)
