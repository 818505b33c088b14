"""Grid, shrink-law and mask-family behavior."""

import numpy as np
import pytest

from slepian_kit.geometry import (
    Ball,
    DEFAULT_LAW,
    FOURIER,
    Gaussian,
    GeneralQuadric,
    Grid,
    Interval,
    MaskDomainError,
    MaskFamily,
    Quadric,
    SPACE,
    cat_head,
    cat_head_indicator,
    fourier_grid,
    mu,
    sample_mask,
    space_grid,
)


class TestShrinkLaw:
    def test_mu_at_zero(self):
        assert mu(DEFAULT_LAW, 0.0) == 1.0

    def test_mu_at_one(self):
        assert mu(DEFAULT_LAW, 1.0) == pytest.approx(2.0 ** -0.25, abs=1e-12)

    def test_mu_at_ten(self):
        assert mu(DEFAULT_LAW, 10.0) == pytest.approx((1 + 10 ** 4) ** -0.25, rel=1e-14)
        assert mu(DEFAULT_LAW, 10.0) == pytest.approx(0.0999975, abs=1e-7)

    def test_negative_eps_rejected(self):
        with pytest.raises(MaskDomainError):
            mu(DEFAULT_LAW, -0.5)

    def test_monotone_decreasing_to_zero(self):
        eps = np.linspace(0.0, 50.0, 400)
        vals = np.array([mu(DEFAULT_LAW, e) for e in eps])
        assert np.all(np.diff(vals) < 0)
        assert 0 < vals[-1] <= 1
        assert mu(DEFAULT_LAW, 1e8) < 1e-6


class TestGrids:
    def test_space_grid_n2(self):
        assert np.allclose(space_grid(2), [-0.5, 0.5])

    def test_space_grid_n4(self):
        assert np.allclose(space_grid(4), [-0.75, -0.25, 0.25, 0.75])

    @pytest.mark.parametrize("N", [1, 2, 5, 150])
    def test_space_mirror_symmetry_bit_exact(self, N):
        x = space_grid(N)
        assert np.array_equal(x, -x[::-1])

    def test_fourier_grid_n1(self):
        assert fourier_grid(1) == pytest.approx([0.0])

    def test_fourier_grid_n2(self):
        assert np.allclose(fourier_grid(2), [-2 * np.pi / 3, 0.0, 2 * np.pi / 3])

    @pytest.mark.parametrize("N", [1, 3, 8, 150])
    def test_fourier_mirror_symmetry_bit_exact(self, N):
        xi = fourier_grid(N)
        assert len(xi) == 2 * N - 1
        assert np.array_equal(xi, -xi[::-1])

    def test_nodes_strictly_inside_boxes(self):
        g = Grid(2, 7)
        assert np.max(np.abs(g.space_points())) < 1.0
        assert np.max(np.abs(g.fourier_points())) < np.pi

    def test_zero_size_rejected(self):
        with pytest.raises(MaskDomainError):
            Grid(1, 0)

    def test_c_order_last_index_fastest(self):
        g = Grid(2, 3)
        pts = g.space_points()
        # first block shares the first coordinate while the second one varies
        assert np.allclose(pts[:3, 0], pts[0, 0])
        assert not np.allclose(pts[:3, 1], pts[0, 1])


class TestMaskSampling:
    def test_full_interval_all_ones(self):
        g = Grid(1, 10)
        fam = MaskFamily(Interval(0.0, 1.0), SPACE)
        assert np.all(sample_mask(fam, 0.0, g) == 1.0)

    def test_ball_membership_point(self):
        ball = Ball((0.0, 0.0), 0.8)
        val = ball.evaluate(np.array([[0.5, 0.5]]), scale=1.0)
        assert val[0] == 1.0  # norm ~0.7071 <= 0.8

    def test_quadric_equals_ball(self):
        g = Grid(2, 9)
        ball = MaskFamily(Ball((0.0, 0.0), 0.8), SPACE)
        quad = MaskFamily(Quadric((0.0, 0.0), (1.0, 1.0), 0.64), SPACE)
        assert np.array_equal(ball.sample(g, 0.0), quad.sample(g, 0.0))

    def test_binary_values_exact(self):
        g = Grid(1, 33)
        vals = MaskFamily(Interval(0.0, 0.5), SPACE).sample(g, 1.3)
        assert set(np.unique(vals)) <= {0.0, 1.0}

    def test_boundary_node_counts_as_inside(self):
        # nodes landing exactly on a binary boundary are included (<=)
        g = Grid(1, 4)  # nodes -0.75, -0.25, 0.25, 0.75
        vals = MaskFamily(Interval(0.0, 0.75), SPACE).sample(g, 0.0)
        assert np.array_equal(vals, [1.0, 1.0, 1.0, 1.0])
        g2 = Grid(2, 4)
        ball = Ball((0.0, 0.0), float(np.hypot(0.25, 0.25)))
        corner = ball.evaluate(np.array([[0.25, 0.25]]), scale=1.0)
        assert corner[0] == 1.0

    def test_gaussian_range(self):
        g = Grid(1, 33)
        vals = MaskFamily(Gaussian(30.0), FOURIER).sample(g, 0.7)
        assert np.all(vals > 0) and np.all(vals <= 1)

    def test_eps_zero_is_base_mask(self):
        g = Grid(2, 8)
        fam = MaskFamily(Ball((0.1, 0.0), 0.6), SPACE)
        direct = fam.spec.evaluate(g.space_points(), scale=1.0)
        assert np.array_equal(fam.sample(g, 0.0), direct)

    @pytest.mark.parametrize("spec,role,d", [
        (Interval(0.0, 0.8), SPACE, 1),
        (Ball((0.0,), 2.0), FOURIER, 1),
        (Gaussian(40.0), FOURIER, 1),
        (Quadric((0.0, 0.0), (2.0, 1.0), 1.0), SPACE, 2),
        (cat_head(), SPACE, 2),
    ])
    def test_set_inclusion_monotone(self, spec, role, d):
        g = Grid(d, 21)
        fam = MaskFamily(spec, role)
        eps_values = [0.0, 0.3, 1.0, 2.5, 8.0]
        prev = fam.sample(g, eps_values[0])
        for eps in eps_values[1:]:
            cur = fam.sample(g, eps)
            assert np.all(cur <= prev + 1e-15)
            prev = cur

    def test_symmetric_mask_samples_symmetric(self):
        g = Grid(1, 50)
        for eps in (0.0, 0.9, 3.0):
            vals = MaskFamily(Interval(0.0, 0.77), SPACE).sample(g, eps)
            assert np.array_equal(vals, vals[::-1])

    def test_fourier_support_validated(self):
        with pytest.raises(MaskDomainError):
            MaskFamily(Interval(0.0, 4.0), FOURIER)  # support sticks out of [-pi, pi]
        with pytest.raises(MaskDomainError):
            MaskFamily(Gaussian(1.0), FOURIER)  # tail above 1e-12 at pi

    def test_space_gaussian_fat_tail_warns_only(self):
        with pytest.warns(UserWarning):
            MaskFamily(Gaussian(50.0), SPACE)

    def test_general_quadric_matches_quadric(self):
        g = Grid(2, 11)
        gen = GeneralQuadric(((1.0, 0.0), (0.0, 2.0)), (0.0, 0.0), -1.0)
        direct = Quadric((0.0, 0.0), (1.0, 2.0), 1.0)
        pts = g.space_points()
        for scale in (1.0, 0.6):
            assert np.array_equal(gen.evaluate(pts, scale), direct.evaluate(pts, scale))


class TestCatHead:
    def setup_method(self):
        self.fam = MaskFamily(cat_head(), SPACE)

    def test_centroid_inside_for_all_eps(self):
        for eps in np.geomspace(0.1, 10.0, 25):
            assert cat_head_indicator(self.fam, eps, (0.0, 0.0)) == 1.0

    def test_hole_centers_excluded_for_all_eps(self):
        for eps in [0.0, 0.5, 1.0, 2.0, 10.0]:
            for hole in ((0.25, 0.15), (-0.25, 0.15), (0.0, -0.2)):
                assert cat_head_indicator(self.fam, eps, hole) == 0.0

    def test_outside_base_outline_stays_outside(self):
        for eps in [0.0, 0.5, 3.0]:
            assert cat_head_indicator(self.fam, eps, (0.95, 0.0)) == 0.0
            assert cat_head_indicator(self.fam, eps, (0.0, 0.99)) == 0.0

    def test_mirror_symmetry(self):
        g = Grid(2, 30)
        vals = self.fam.sample(g, 0.7).reshape(30, 30)
        # reflection in the first coordinate (vertical symmetry axis)
        assert np.array_equal(vals, vals[::-1, :])

    def test_ears_present(self):
        assert cat_head_indicator(self.fam, 0.0, (0.44, 0.8)) == 1.0
        assert cat_head_indicator(self.fam, 0.0, (-0.44, 0.8)) == 1.0

    def test_hole_persistence_on_grid(self):
        g = Grid(2, 40)
        pts = g.space_points()
        for eps in (0.0, 1.0, 5.0):
            vals = self.fam.sample(g, eps)
            for hole, radius in ((np.array([0.25, 0.15]), 0.12),
                                 (np.array([-0.25, 0.15]), 0.12),
                                 (np.array([0.0, -0.2]), 0.10)):
                inside_hole = np.sum((pts - hole) ** 2, axis=-1) <= radius ** 2
                assert np.all(vals[inside_hole] == 0.0)
