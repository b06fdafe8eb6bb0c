import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lenscontact.errors import InvalidLensError, NotInOverlapError
from lenscontact.lens_atlas import (TWO_PI, ChartPoint, LensParams, canonicalize,
                                    circle_distance, make_lens, reduce_angle, torus_action,
                                    transition, transition_inverse)

from conftest import lenses

angles = st.floats(-50.0, 50.0, allow_nan=False)


def random_points(rng, chart, n):
    return ChartPoint(chart, rng.uniform(1e-6, 1 - 1e-6, n), rng.uniform(0, TWO_PI, n),
                      rng.uniform(0, TWO_PI, n))


def assert_same(a, b, tol=1e-12):
    assert a.chart == b.chart
    assert np.max(np.abs(np.asarray(a.r) - np.asarray(b.r))) < tol
    assert np.max(circle_distance(a.theta, b.theta)) < tol
    assert np.max(circle_distance(a.z, b.z)) < tol


class TestMakeLens:
    # frozen from an extended-Euclid oracle (sympy.gcdex), reduced to 0 <= s < p

    @pytest.mark.parametrize("p, q, m, s", [(7, 3, -2, 5), (7, 4, -1, 2), (1, 0, 1, 0), (8, 3, -1, 3)])
    def test_canonical_bezout(self, p, q, m, s):
        assert make_lens(p, q) == LensParams(p, q, m, s)

    @pytest.mark.parametrize("p, q", [(4, 2), (0, 1), (-3, 1), (6, 9)])
    def test_invalid(self, p, q):
        with pytest.raises(InvalidLensError):
            make_lens(p, q)

    def test_bad_bezout_rejected(self):
        with pytest.raises(InvalidLensError):
            LensParams(7, 3, 1, 1)

    @given(lenses())
    def test_bezout_identity(self, lens):
        assert lens.m * lens.p + lens.s * lens.q == 1
        if lens.p == 1:
            assert (lens.m, lens.s) == (1, 0)
        else:
            assert 0 <= lens.s < lens.p

    @given(lenses())
    def test_angular_blocks_inverse(self, lens):
        prod = lens.angular_block @ lens.inverse_angular_block
        assert (prod == np.eye(2, dtype=np.int64)).all()


class TestAngles:
    @given(angles)
    def test_reduce_idempotent(self, x):
        y = reduce_angle(x)
        assert 0.0 <= y < TWO_PI
        assert reduce_angle(y) == y

    def test_reduce_edge(self):
        assert reduce_angle(-1e-18) < TWO_PI

    def test_circle_distance(self):
        assert circle_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2)

    def test_core_theta_convention(self):
        assert ChartPoint(0, 0.0, 1.3, 0.2).theta == 0.0


class TestTransition:
    def test_l73_instance(self):
        lens = make_lens(7, 3)
        th, z = 0.4, 1.1
        img = transition(lens, ChartPoint(1, 0.3, th, z))
        assert img.chart == 0 and img.r == pytest.approx(0.7)
        assert circle_distance(img.theta, -3 * th - 2 * z) < 1e-12
        assert circle_distance(img.z, 7 * th + 5 * z) < 1e-12

    def test_l10_swaps_angles(self):
        img = transition(make_lens(1, 0), ChartPoint(1, 0.25, 0.4, 1.1))
        assert (img.r, img.theta, img.z) == pytest.approx((0.75, 1.1, 0.4))

    def test_l10_involution(self):
        lens = make_lens(1, 0)
        pt = ChartPoint(1, 0.25, 0.4, 1.1)
        img = transition(lens, pt)
        assert_same(transition_inverse(lens, img), pt)
        assert (img.r, img.theta, img.z) == pytest.approx((1 - pt.r, pt.z, pt.theta))

    @pytest.mark.parametrize("r", [0.0, 1.0])
    def test_not_in_overlap(self, r):
        with pytest.raises(NotInOverlapError):
            transition(make_lens(7, 3), ChartPoint(1, r, 0.1, 0.2))
        with pytest.raises(NotInOverlapError):
            transition_inverse(make_lens(7, 3), ChartPoint(0, r, 0.1, 0.2))

    @pytest.mark.parametrize("p, q", [(7, 3), (1, 0), (8, 3), (5, 2)])
    def test_round_trip_1000_points(self, p, q):
        lens = make_lens(p, q)
        rng = np.random.default_rng(p * 100 + q)
        pts = random_points(rng, 1, 1000)
        assert_same(transition_inverse(lens, transition(lens, pts)), pts)
        pts0 = random_points(rng, 0, 1000)
        assert_same(transition(lens, transition_inverse(lens, pts0)), pts0)


class TestTorusAction:
    def test_identity(self):
        lens = make_lens(7, 3)
        pt = ChartPoint(1, 0.3, 0.4, 0.5)
        assert_same(torus_action(lens, (0.0, 0.0), pt), pt)

    @given(lenses(), angles, angles, angles, angles)
    def test_group_law(self, lens, a, b, c, d):
        pt = ChartPoint(1, 0.3, 0.4, 0.5)
        lhs = torus_action(lens, (a, b), torus_action(lens, (c, d), pt))
        rhs = torus_action(lens, (a + c, b + d), pt)
        assert_same(lhs, rhs, 1e-9)

    @pytest.mark.parametrize("p, q", [(7, 3), (1, 0), (8, 3)])
    def test_equivariance_1000_points(self, p, q):
        lens = make_lens(p, q)
        rng = np.random.default_rng(7)
        pts = random_points(rng, 1, 1000)
        ang = (rng.uniform(0, TWO_PI, 1000), rng.uniform(0, TWO_PI, 1000))
        lhs = transition(lens, torus_action(lens, ang, pts))
        rhs = torus_action(lens, ang, transition(lens, pts))
        assert_same(lhs, rhs, 1e-12)


class TestCanonicalize:
    def test_examples(self):
        lens = make_lens(7, 3)
        out = canonicalize(lens, ChartPoint(1, 0.9, 0.4, 0.5))
        assert out.chart == 0 and out.r == pytest.approx(0.1)
        pt = ChartPoint(0, 0.2, 0.4, 0.5)
        assert canonicalize(lens, pt) is pt
        assert canonicalize(lens, ChartPoint(1, 0.5, 0.4, 0.5)).chart == 0

    @given(lenses(), st.sampled_from([0, 1]), st.floats(0.0, 1.0), angles, angles)
    def test_idempotent(self, lens, chart, r, th, z):
        once = canonicalize(lens, ChartPoint(chart, r, th, z))
        assert once.r <= 0.5
        assert_same(canonicalize(lens, once), once)
