"""Geometry module tests: quadrature, centroid, isoparametric map, local frames."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from trefftz_fem import geometry as geo

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def polygon_centroid(xy):
    """Independent oracle: exact centroid of a straight-edged polygon (shoelace)."""
    x, y = xy[:, 0], xy[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6 * area)
    cy = ((y + yn) * cross).sum() / (6 * area)
    return np.array([cx, cy])


def random_convex_quad(rng, scale=1.0):
    """Random convex CCW quadrilateral built from a perturbed square."""
    while True:
        xy = UNIT_SQUARE * scale + rng.uniform(-0.3, 0.3, size=(4, 2)) * scale
        if geo.signed_area(xy) > 1e-3 * scale**2 and geo.is_convex(xy):
            return xy


class TestGaussRule:
    def test_midpoint(self):
        rule = geo.gauss_rule(1)
        assert_allclose(rule.nodes, [0.0], atol=1e-15)
        assert_allclose(rule.weights, [2.0], atol=1e-15)

    def test_two_point(self):
        rule = geo.gauss_rule(2)
        assert_allclose(sorted(rule.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
        assert_allclose(rule.weights, [1.0, 1.0], atol=1e-15)

    def test_three_point(self):
        rule = geo.gauss_rule(3)
        assert_allclose(sorted(rule.nodes), [-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)], atol=1e-15)
        assert_allclose(sorted(rule.weights), sorted([8 / 9, 5 / 9, 5 / 9]), atol=1e-15)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_weight_sums(self, n):
        rule = geo.gauss_rule(n)
        assert_allclose(rule.weights.sum(), 2.0, atol=1e-12)
        _, w2 = rule.squared()
        assert_allclose(w2.sum(), 4.0, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_polynomial_exactness(self, n):
        # x^p y^q over [-1,1]^2 for p, q <= 2n-1 against the closed form
        rule = geo.gauss_rule(n)
        pts, wts = rule.squared()
        for p in range(2 * n):
            for q in range(2 * n):
                val = np.sum(wts * pts[:, 0] ** p * pts[:, 1] ** q)
                exact = ((1 - (-1) ** (p + 1)) / (p + 1)) * ((1 - (-1) ** (q + 1)) / (q + 1))
                assert_allclose(val, exact, atol=1e-12)

    @pytest.mark.parametrize("n", [0, -1, 11])
    def test_rejects_out_of_range(self, n):
        with pytest.raises(ValueError):
            geo.gauss_rule(n)


class TestCentroid:
    def test_unit_square(self):
        assert_allclose(geo.compute_centroid(UNIT_SQUARE), [0.5, 0.5], atol=1e-14)

    def test_translation_equivariance(self):
        shift = np.array([3.25, -1.5])
        assert_allclose(
            geo.compute_centroid(UNIT_SQUARE + shift), [0.5, 0.5] + shift, atol=1e-12
        )

    def test_trapezoid_matches_polygon_oracle(self):
        trap = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        oracle = polygon_centroid(trap)
        assert not np.allclose(oracle, trap.mean(axis=0), atol=1e-3)  # not vertex average
        assert_allclose(geo.compute_centroid(trap), oracle, atol=1e-12)

    def test_random_quads_match_polygon_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            quad = random_convex_quad(rng, scale=rng.uniform(0.5, 4.0))
            assert_allclose(geo.compute_centroid(quad), polygon_centroid(quad), atol=1e-11)

    def test_degenerate_rejected(self):
        line = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        with pytest.raises(geo.DegenerateGeometryError):
            geo.compute_centroid(line)

    def test_clockwise_rejected(self):
        with pytest.raises(geo.DegenerateGeometryError):
            geo.validate_corners(UNIT_SQUARE[::-1])


class TestIsoparametricMap:
    def test_unit_square_center(self):
        point, g, det = geo.isoparametric_eval(UNIT_SQUARE, (0.0, 0.0))
        assert_allclose(point, [0.5, 0.5], atol=1e-15)
        assert_allclose(g, [[0.5, 0.0], [0.0, 0.5]], atol=1e-15)
        assert_allclose(det, 0.25, atol=1e-15)

    def test_corner_interpolation(self):
        rng = np.random.default_rng(1)
        quad = random_convex_quad(rng)
        corners_nat = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
        for i, theta in enumerate(corners_nat):
            point, _, _ = geo.isoparametric_eval(quad, theta)
            assert_allclose(point, quad[i], atol=1e-14)

    def test_rhombus_det_is_quarter_area(self):
        # 30 degree skew rhombus: affine map, det constant = area / 4
        c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
        rhombus = np.array([[0, 0], [1, 0], [1 + s, c], [s, c]], dtype=float)
        area = geo.signed_area(rhombus)
        _, _, det = geo.isoparametric_eval(rhombus, (0.0, 0.0))
        assert_allclose(det, area / 4, atol=1e-14)


class TestLocalFrame:
    def test_axis_aligned_rectangle(self):
        rect = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]])
        frame = geo.compute_local_frame(rect)
        assert_allclose(frame.e1, [1.0, 0.0], atol=1e-14)
        assert_allclose(frame.e2, [0.0, 1.0], atol=1e-14)
        assert_allclose(frame.alpha, 0.0, atol=1e-14)

    def test_rotated_rectangle(self):
        ang = np.pi / 6
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        rect = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]) @ rot.T
        frame = geo.compute_local_frame(rect)
        assert_allclose(frame.e1, [np.cos(ang), np.sin(ang)], atol=1e-12)
        assert_allclose(frame.alpha, ang, atol=1e-12)

    def test_parallelogram_e2_perpendicular(self):
        # g1 along +x, g2 at 60 degrees: e2 must be (0, 1), not along g2
        g2dir = np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)])
        para = np.array([[0, 0], [2, 0], [2 + g2dir[0], g2dir[1]], [g2dir[0], g2dir[1]]])
        frame = geo.compute_local_frame(para)
        assert_allclose(frame.e1, [1.0, 0.0], atol=1e-12)
        assert_allclose(frame.e2, [0.0, 1.0], atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_orthonormality_random(self, seed):
        quad = random_convex_quad(np.random.default_rng(seed))
        frame = geo.compute_local_frame(quad)
        assert abs(frame.e1 @ frame.e2) < 1e-12
        assert abs(np.linalg.norm(frame.e1) - 1) < 1e-12
        assert abs(np.linalg.norm(frame.e2) - 1) < 1e-12
        # e1 parallel to g1 at the element centre
        _, g, _ = geo.isoparametric_eval(quad, (0.0, 0.0))
        cross = frame.e1[0] * g[0, 1] - frame.e1[1] * g[0, 0]
        assert abs(cross) < 1e-12 * np.linalg.norm(g[0])


class TestToLocal:
    def test_unit_square(self):
        frame, local = geo.local_geometry(UNIT_SQUARE)
        expected = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])
        assert_allclose(local, expected, atol=1e-14)

    def test_rotated_square_frame_invariance(self):
        ang = 0.7
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        _, local = geo.local_geometry(UNIT_SQUARE @ rot.T + [4.0, -2.0])
        expected = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])
        assert_allclose(local, expected, atol=1e-12)

    def test_local_centroid_at_origin(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            quad = random_convex_quad(rng, scale=rng.uniform(0.5, 3.0))
            _, local = geo.local_geometry(quad)
            assert_allclose(geo.compute_centroid(local), [0.0, 0.0], atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=0, max_value=10_000),
        st.floats(min_value=-np.pi, max_value=np.pi),
    )
    def test_rotation_equivariance(self, seed, ang):
        quad = random_convex_quad(np.random.default_rng(seed))
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        _, local_a = geo.local_geometry(quad)
        _, local_b = geo.local_geometry(quad @ rot.T)
        assert_allclose(local_a, local_b, atol=1e-10)


def test_jacobian_positive_at_gauss_points_for_convex_quads():
    rng = np.random.default_rng(3)
    pts, _ = geo.gauss_rule(3).squared()
    for _ in range(20):
        quad = random_convex_quad(rng)
        for theta in pts:
            _, _, det = geo.isoparametric_eval(quad, theta)
            assert det > 0
