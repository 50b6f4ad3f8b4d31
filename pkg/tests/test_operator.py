"""Assembly, application, symmetry, multipliers, and the cutoff defect."""

import numpy as np
import pytest

from qlab.errors import BackendError, GridMismatchError
from qlab.field import (
    Grid2D,
    GridFunction,
    MetricField,
    PotentialField,
    l2_norm,
    sample_function,
    sup_norm,
)
from qlab.operator import (
    FourierMultiplier,
    apply,
    assemble,
    cutoff_defect,
    fourier_multiplier,
    radial_cutoff,
    residual,
    symmetry_defect,
)


def gaussian(grid, h):
    return sample_function(
        grid, lambda a, b: (np.pi * h) ** -0.5 * np.exp(-(a ** 2 + b ** 2) / (2 * h)))


class TestAssembleApply:
    def test_flat_spectral_symbol_exact(self, identity_metric):
        g = Grid2D(np.pi, 64)
        h = 0.25
        P = assemble(h, identity_metric, PotentialField.zero(), g, backend="spectral")
        u = sample_function(g, lambda a, b: np.exp(1j * (3 * a - 2 * b)))
        pu = apply(P, u)
        expected = h * h * 13.0
        assert np.max(np.abs(pu.values - expected * u.values)) < 1e-12

    def test_harmonic_ground_state_residual(self, identity_metric):
        # closed-form eigenpair of -h^2 Lap + |x|^2 at eigenvalue 2h
        h = 0.125
        g = Grid2D(4.0, 512)
        P = assemble(h, identity_metric, PotentialField.harmonic(), g, backend="spectral")
        u = gaussian(g, h)
        pu = apply(P, u)
        err = l2_norm(GridFunction(g, pu.values - 2 * h * u.values))
        assert err <= 1e-6

    def test_additive_constant_potential(self, identity_metric):
        g = Grid2D(2.0, 64)
        h = 0.5
        p0 = assemble(h, identity_metric, PotentialField.zero(), g)
        p1 = assemble(h, identity_metric, PotentialField.constant(1.0), g)
        u = gaussian(g, 0.3)
        d = apply(p1, u).values - apply(p0, u).values
        assert np.max(np.abs(d - u.values)) < 1e-12

    def test_linearity(self, identity_metric):
        g = Grid2D(2.0, 64)
        P = assemble(0.3, identity_metric, PotentialField.harmonic(), g)
        rng = np.random.default_rng(3)
        u = GridFunction(g, rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64)))
        v = GridFunction(g, rng.standard_normal((64, 64)))
        a, b = 1.7 - 0.3j, -0.6
        lhs = apply(P, GridFunction(g, a * u.values + b * v.values)).values
        rhs = a * apply(P, u).values + b * apply(P, v).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))

    def test_apply_zero(self, identity_metric):
        g = Grid2D(2.0, 32)
        P = assemble(0.3, identity_metric, PotentialField.harmonic(), g)
        out = apply(P, GridFunction(g, np.zeros((32, 32))))
        assert np.all(out.values == 0)

    def test_grid_mismatch(self, identity_metric):
        P = assemble(0.3, identity_metric, PotentialField.zero(), Grid2D(2.0, 32))
        u = gaussian(Grid2D(2.0, 64), 0.3)
        with pytest.raises(GridMismatchError):
            apply(P, u)

    def test_spectral_needs_constant_metric(self, perturbed_metric):
        with pytest.raises(BackendError):
            assemble(0.3, perturbed_metric, PotentialField.zero(), Grid2D(2.0, 32),
                     backend="spectral")

    def test_h_range_enforced(self, identity_metric):
        with pytest.raises(ValueError):
            assemble(1.5, identity_metric, PotentialField.zero(), Grid2D(2.0, 32))

    def test_fd_vs_spectral_second_order(self, identity_metric):
        # Richardson: halving the spacing divides the gap by about 4.
        # The test function must be smooth *and periodic* on the box.
        h = 0.25
        u_fn = lambda a, b: np.exp(np.sin(a)) * np.cos(b) + 0.3 * np.sin(2 * a) * np.cos(3 * b)
        gaps = []
        for n in (64, 128):
            g = Grid2D(np.pi, n)
            pf = assemble(h, identity_metric, PotentialField.constant(0.5), g, backend="fd")
            ps = assemble(h, identity_metric, PotentialField.constant(0.5), g, backend="spectral")
            u = sample_function(g, u_fn)
            gap = l2_norm(GridFunction(g, apply(pf, u).values - apply(ps, u).values))
            gaps.append(gap / l2_norm(u))
        ratio = gaps[0] / gaps[1]
        assert 3.5 <= ratio <= 4.5


class TestSymmetry:
    def test_identity_metric_plain_symmetric(self, identity_metric):
        g = Grid2D(2.0, 48) if False else Grid2D(2.0, 64)
        P = assemble(0.2, identity_metric, PotentialField.harmonic(), g)
        assert symmetry_defect(P, pairs=20, seed=1) <= 1e-10

    def test_variable_metric_weighted_symmetric(self, perturbed_metric):
        g = Grid2D(np.pi, 64)
        P = assemble(0.2, perturbed_metric, PotentialField.constant(-1.0), g)
        assert symmetry_defect(P, pairs=20, seed=2) <= 1e-10


class TestResidual:
    def test_exact_discrete_eigenfunction(self, identity_metric):
        # constant function is the discrete eigenfunction of -h^2 Lap + c
        g = Grid2D(1.0, 32)
        P = assemble(0.5, identity_metric, PotentialField.zero(), g)
        u = sample_function(g, lambda a, b: np.ones_like(a) * 0.5)
        res, un = residual(P, u)
        assert res <= 1e-14 and un == pytest.approx(1.0, rel=1e-12)

    def test_harmonic_quasimode_certificate(self, identity_metric):
        h = 0.125
        g = Grid2D(4.0, 256)
        P = assemble(h, identity_metric, PotentialField.harmonic(shift=2 * h), g,
                     backend="spectral")
        res, un = residual(P, gaussian(g, h))
        assert un == pytest.approx(1.0, abs=1e-8)
        assert res < 0.01 * h  # discretization error far below the budget


class TestFourierMultiplier:
    def test_identity_symbol(self):
        g = Grid2D(2.0, 64)
        u = gaussian(g, 0.3)
        m = FourierMultiplier(lambda a, b: np.ones_like(a), 0.1)
        out = fourier_multiplier(m, u)
        assert np.max(np.abs(out.values - u.values)) <= 1e-13 * sup_norm(u)

    def test_twice_equals_squared_symbol(self):
        g = Grid2D(2.0, 64)
        u = gaussian(g, 0.3)
        h = 0.2
        sym = lambda a, b: a * b
        m = FourierMultiplier(sym, h)
        twice = fourier_multiplier(m, fourier_multiplier(m, u))
        m2 = FourierMultiplier(lambda a, b: (a * b) ** 2, h)
        direct = fourier_multiplier(m2, u)
        scale = max(np.max(np.abs(direct.values)), 1e-30)
        assert np.max(np.abs(twice.values - direct.values)) <= 1e-12 * scale

    def test_product_symbol_composition(self):
        g = Grid2D(2.0, 64)
        u = gaussian(g, 0.3)
        h = 0.2
        m1 = FourierMultiplier(lambda a, b: a ** 2 + 1.0, h)
        m2 = FourierMultiplier(lambda a, b: np.exp(-(a ** 2 + b ** 2)), h)
        composed = fourier_multiplier(m1, fourier_multiplier(m2, u))
        mp = FourierMultiplier(lambda a, b: (a ** 2 + 1.0) * np.exp(-(a ** 2 + b ** 2)), h)
        direct = fourier_multiplier(mp, u)
        scale = max(np.max(np.abs(direct.values)), 1e-30)
        assert np.max(np.abs(composed.values - direct.values)) <= 1e-12 * scale

    def test_cutoff_keeps_contained_support(self):
        # chi(h xi) = 1 on the function's whole band keeps it exactly
        g = Grid2D(np.pi, 64)
        u = sample_function(g, lambda a, b: np.cos(2 * a) * np.sin(3 * b))
        h = 0.25
        m = FourierMultiplier(radial_cutoff(), h)
        out = fourier_multiplier(m, u)
        assert np.max(np.abs(out.values - u.values)) < 1e-13


class TestCutoffDefect:
    def test_band_limited_zero_defect(self):
        g = Grid2D(np.pi, 64)
        u = sample_function(g, lambda a, b: np.exp(1j * (4 * a + 2 * b)) / (2 * np.pi))
        assert cutoff_defect(u, h=0.25) < 1e-14

    def test_single_far_mode_fully_removed(self):
        # h|k| = 8: the radial cutoff supported in |xi| < 8 kills the mode
        g = Grid2D(np.pi, 128)
        u = sample_function(g, lambda a, b: np.exp(1j * 32 * a) / (2 * np.pi))
        d = cutoff_defect(u, h=0.25)
        assert d == pytest.approx(sup_norm(u), rel=1e-12)

    def test_matches_sparse_closed_form(self):
        # the sweep's closed-form defect against the grid computation
        from qlab.sweep import _cutoff_defect_record
        from qlab.spectral import torus_annulus_modes
        from qlab.operator import radial_cutoff as rc
        h = 2.0 ** -4
        rec = _cutoff_defect_record(h, {"cluster_width": 1.0, "seed": 0})
        # rebuild the same function on a grid and measure the defect
        modes = torus_annulus_modes(h, 0.5)
        m = len(modes)
        b = rec.extra["junk_amplitude"]
        a = np.sqrt(1 - b * b)
        lo2, hi2 = (6.5 / h) ** 2, (7.5 / h) ** 2
        kmax = int(np.floor(7.5 / h))
        n = 256
        spec = np.zeros((n, n), dtype=complex)
        for k1, k2 in modes:
            spec[k1 % n, k2 % n] += a / (2 * np.pi * np.sqrt(m)) * (-1.0) ** ((k1 + k2) % 2)
        njunk = rec.extra["junk_modes"]
        for k1 in range(-kmax, kmax + 1):
            for k2 in range(-kmax, kmax + 1):
                r2 = k1 * k1 + k2 * k2
                if lo2 <= r2 <= hi2:
                    spec[k1 % n, k2 % n] += b / (2 * np.pi * np.sqrt(njunk)) * (-1.0) ** ((k1 + k2) % 2)
        g = Grid2D(np.pi, n)
        u = GridFunction(g, np.fft.ifft2(spec) * n * n)
        assert l2_norm(u) == pytest.approx(1.0, rel=1e-12)
        measured = cutoff_defect(u, h)
        assert measured == pytest.approx(rec.extra["cutoff_defect"], rel=1e-10)
