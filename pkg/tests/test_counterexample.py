"""Frequency-box pieces, normalized sums, and the 2D brute-force oracle."""

import math

import numpy as np
import pytest

from qlab import counterexample as ce
from qlab.errors import NyquistError
from qlab.field import Grid1D, Grid2D


class TestPiece:
    @pytest.mark.parametrize("k,j", [(6, 0), (6, 3), (10, 0), (10, 3), (10, 10)])
    def test_origin_value(self, k, j, profiles):
        h = 2.0 ** -k
        p = ce.build_piece(h, j, profiles)
        assert p.value_at_origin() * math.sqrt(h) == pytest.approx(1.0, abs=1e-10)

    def test_l2_norm_constant_across_h_and_j(self, profiles):
        vals = [ce.build_piece(2.0 ** -k, j, profiles).l2_norm()
                for k, j in ((6, 0), (6, 3), (10, 0), (10, 5), (16, 8))]
        spread = (max(vals) - min(vals)) / min(vals)
        assert spread <= 1e-10

    def test_l2_matches_continuum_constant(self, profiles):
        # 2 pi ||chi||_2 ||psi||_2 with reference-grid quadratures
        ints = profiles.integrals()
        want = 2 * math.pi * math.sqrt(ints["chi_sq"] * ints["psi_sq"])
        got = ce.build_piece(2.0 ** -8, 2, profiles).l2_norm()
        assert got == pytest.approx(want, rel=1e-9)

    @pytest.mark.parametrize("k,j", [(6, 0), (8, 4), (10, 10)])
    def test_hyperbolic_symbol_bound(self, k, j, profiles):
        # |h^2 xi1 xi2| <= 2h on the frequency box
        h = 2.0 ** -k
        p = ce.build_piece(h, j, profiles)
        assert p.hyperbolic_norm() <= 2 * h * p.l2_norm()

    def test_frequency_box_bounds(self, profiles):
        h = 2.0 ** -6
        p = ce.build_piece(h, 2, profiles)
        (xlo, xhi), (ylo, yhi) = p.frequency_box
        assert xhi == 1.0 / (4 * h) and xlo == -xhi
        assert (ylo, yhi) == (4.0, 8.0)

    def test_spectrum_vanishes_outside_box(self, profiles):
        h, j = 2.0 ** -4, 1
        grid = Grid2D(8.0, 256)
        p = ce.build_piece(h, j, profiles, grid1d=grid.axis())
        # construction level: the sampled symbol ranges sit inside the box
        (xlo, xhi), (ylo, yhi) = p.frequency_box
        assert p.factor_x1.band_max() <= xhi
        assert ylo <= p.factor_x2.m_lo * p.factor_x2.dxi
        assert p.factor_x2.m_hi * p.factor_x2.dxi <= yhi
        # grid level: a DFT round trip leaves only rounding noise outside
        u = p.to_grid_function(grid)
        spec = np.fft.fft2(u.values)
        k1, k2 = grid.frequencies()
        outside = (np.abs(k1) > xhi) | (k2 < ylo - 1e-9) | (k2 > yhi + 1e-9)
        assert np.max(np.abs(spec[outside])) <= 1e-13 * np.max(np.abs(spec))

    def test_dyadic_index_validated(self, profiles):
        with pytest.raises(ValueError):
            ce.build_piece(2.0 ** -4, 5, profiles)   # 2^5 > 16
        with pytest.raises(ValueError):
            ce.build_piece(2.0 ** -4, -1, profiles)

    def test_nyquist_violation_raises(self, profiles):
        grid = Grid1D(8.0, 64)   # band far too small for h = 2^-8
        with pytest.raises(NyquistError):
            ce.build_piece(2.0 ** -8, 0, profiles, grid1d=grid)

    def test_boundary_tail_below_threshold(self, profiles):
        for k, j in ((6, 0), (6, 6), (12, 12)):
            p = ce.build_piece(2.0 ** -k, j, profiles)
            assert p.boundary_tail_bound() <= ce.TAIL_TOLERANCE
            # measured tails on the synthesized factor agree with the bound
            q = p.factor_grid_quantities("x2")
            assert q["boundary_tail"] <= 1e-9


class TestSum:
    def test_piece_counts(self, profiles):
        for k in (6, 9, 13):
            s = ce.build_sum(2.0 ** -k, profiles)
            assert s.piece_count == k + 1
            r = ce.build_sum(2.0 ** -k, profiles, cap="restricted")
            assert r.piece_count == k // 2 + 1

    def test_origin_formula_exact(self, profiles):
        for k in (6, 10, 14):
            h = 2.0 ** -k
            s = ce.build_sum(h, profiles)
            assert s.value_at_origin() == pytest.approx(
                ce.expected_origin_value(h), rel=1e-10)

    def test_l2_window(self, profiles):
        # ||u_h|| stays within [0.9, 1.1] of piece_norm / sqrt(ln 2)
        piece_norm = ce.build_piece(2.0 ** -6, 0, profiles).l2_norm()
        const = piece_norm / math.sqrt(math.log(2.0))
        for k in (6, 10, 16):
            s = ce.build_sum(2.0 ** -k, profiles)
            assert 0.9 * const <= s.l2_norm() <= 1.1 * const

    def test_h_range_enforced(self, profiles):
        with pytest.raises(ValueError):
            ce.build_sum(0.5, profiles)

    def test_orthogonality_is_exact_in_frequency(self, profiles):
        s = ce.build_sum(2.0 ** -8, profiles)
        assert s.frequency_orthogonality_defect() == 0.0

    def test_sup_equals_origin(self, profiles):
        # nonnegative profiles peak at the origin, so the sum's sup is
        # its origin value; confirm on an assembled grid
        h = 2.0 ** -5
        grid = Grid2D(8.0, 512)
        s = ce.build_sum(h, profiles, grid1d=grid.axis())
        u = s.to_grid_function(grid)
        m = np.argmax(np.abs(u.values))
        n = grid.points_per_dim
        assert np.unravel_index(m, u.values.shape) == (n // 2, n // 2)
        assert np.abs(u.values).max() == pytest.approx(s.value_at_origin(), rel=1e-12)

    def test_form_residual_triangle(self, profiles):
        s = ce.build_sum(2.0 ** -8, profiles)
        tri = s.residual_hyperbolic() + s.x1x2_norm()
        assert ce.hyperbolic_form_residual(s) <= tri * (1 + 1e-12)

    def test_restricted_report(self, profiles):
        rep = ce.verify_restricted_sum(2.0 ** -9, profiles)
        assert rep["piece_count"] == rep["expected_piece_count"] == 5
        assert rep["origin_rel_error"] <= 1e-10

    def test_axis_profile_matches_grid(self, profiles):
        h = 2.0 ** -5
        grid = Grid2D(8.0, 512)
        s = ce.build_sum(h, profiles, grid1d=grid.axis())
        u = s.to_grid_function(grid)
        n = grid.points_per_dim
        x, prof = s.axis_profile(axis=0, span=2.0, count=64)
        for xv, pv in zip(x, prof):
            idx = int(round((xv + grid.half_width) / grid.spacing))
            if abs(-grid.half_width + idx * grid.spacing - xv) < 1e-12:
                assert pv == pytest.approx(complex(u.values[idx, n // 2]),
                                           rel=1e-9, abs=1e-12)


class TestRatiosFrozenAtK6:
    """Constants frozen from the h = 2^-6 run bound every smaller h."""

    def test_hyperbolic_over_h_decreasing(self, profiles):
        c6 = ce.build_sum(2.0 ** -6, profiles).residual_hyperbolic() * 2.0 ** 6
        for k in (8, 12, 16):
            s = ce.build_sum(2.0 ** -k, profiles)
            assert s.residual_hyperbolic() * 2.0 ** k <= c6 * (1 + 1e-12)

    def test_x1x2_over_h_decreasing(self, profiles):
        c6 = ce.build_sum(2.0 ** -6, profiles).x1x2_norm() * 2.0 ** 6
        for k in (8, 12, 16):
            s = ce.build_sum(2.0 ** -k, profiles)
            assert s.x1x2_norm() * 2.0 ** k <= c6 * (1 + 1e-12)

    def test_restricted_x1sq_bounded(self, profiles):
        c6 = ce.verify_restricted_sum(2.0 ** -6, profiles)["x1sq_over_h"]
        for k in (8, 12, 16):
            rep = ce.verify_restricted_sum(2.0 ** -k, profiles)
            assert rep["x1sq_over_h"] <= c6 * (1 + 1e-12)

    def test_full_sum_x1sq_blows_up(self, profiles):
        # contrast: without the restriction the x1^2 norm grows like 1/h
        r6 = ce.build_sum(2.0 ** -6, profiles).x1sq_norm() * 2.0 ** 6
        r12 = ce.build_sum(2.0 ** -12, profiles).x1sq_norm() * 2.0 ** 12
        assert r12 > 10 * r6


class TestTwoDimensionalOracle:
    @pytest.mark.parametrize("k,n", [(6, 1024), (7, 2048)])
    def test_tensor_path_matches_2d_assembly(self, k, n, profiles):
        h = 2.0 ** -k
        grid1d = Grid1D(8.0, n)
        s = ce.build_sum(h, profiles, grid1d=grid1d)
        tensor = s.report_on_grid(grid1d)
        grid2d = Grid2D(8.0, n)
        oracle = ce.measure_on_grid(s, grid2d)
        for key in ("l2_norm", "value_at_origin", "residual_hyperbolic",
                    "x1x2_norm", "x1sq_norm"):
            assert tensor[key] == pytest.approx(oracle[key], rel=1e-8), key
        assert oracle["orthogonality_max"] <= 1e-12
        assert tensor["orthogonality_smeared_max"] == pytest.approx(
            oracle["orthogonality_smeared_max"], rel=1e-6)

    def test_production_box_diagonal_is_exact(self, profiles):
        # at the default box the smeared cross terms are below 1e-10,
        # so the diagonal tensor report equals the full-Gram one
        for k in (6, 8):
            s = ce.build_sum(2.0 ** -k, profiles)
            full = s.report_on_grid()
            assert full["orthogonality_smeared_max"] <= 1e-10
            assert s.x1x2_norm() == pytest.approx(full["x1x2_norm"], rel=1e-10)
            assert s.l2_norm() == pytest.approx(full["l2_norm"], rel=1e-10)
            assert s.value_at_origin() == pytest.approx(
                full["value_at_origin"], rel=1e-10)


class TestLogFactorLaw:
    def test_origin_growth_is_linear_in_log(self, profiles):
        # s(h)^2 = (origin * sqrt h)^2 grows linearly in log2(1/h)
        ks = np.arange(6, 17)
        vals = []
        for k in ks:
            s = ce.build_sum(2.0 ** -float(k), profiles)
            vals.append((s.value_at_origin() * 2.0 ** (-float(k) / 2)) ** 2)
        from scipy import stats
        res = stats.linregress(ks * math.log(2.0), vals)
        assert res.rvalue ** 2 >= 0.999

    def test_ratio_converges_to_inverse_log2(self, profiles):
        # origin * sqrt(h) / sqrt|log h| -> 1/ln 2, monotonically
        ratios = []
        for k in range(6, 17):
            h = 2.0 ** -k
            s = ce.build_sum(h, profiles)
            ratios.append(s.value_at_origin() * math.sqrt(h)
                          / math.sqrt(abs(math.log(h))))
        target = 1.0 / math.log(2.0)
        assert all(a >= b > target * 0.999 for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(target, rel=0.10)
