# Copyright (c) 2025, NDV and Contributors
# See license.txt

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pwlcycle import halfmap
from pwlcycle.canonical import ZoneParams
from pwlcycle.exceptions import (
    DomainError,
    NotApplicable,
    NotDefined,
    PreconditionViolation,
)
from pwlcycle.flow_oracle import Direction, oracle_half_map
from pwlcycle.halfmap import Sensitivity, Side

LEFT, RIGHT = Side.LEFT_FORWARD, Side.RIGHT_BACKWARD
tenths = st.integers(min_value=-30, max_value=30).map(lambda k: k / 10)


def y_of(a, T, D, side, y0):
    return halfmap.eval(halfmap.build_spec(a, T, D, side), y0).y1


def first_diff(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def second_diff(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


class TestBuildSpec(unittest.TestCase):
    def test_positive_a_always_exists(self):
        for T, D in ((0.3, -2.0), (-1.0, 0.1), (2.0, 5.0)):
            spec = halfmap.build_spec(1.0, T, D, LEFT)
            self.assertTrue(spec.exists)
            self.assertEqual(spec.q, 0.0)
            self.assertEqual(spec.domain.lo, 0.0)
            self.assertEqual(spec.image_hi, 0.0)

    def test_real_saddle_domain_end(self):
        spec = halfmap.build_spec(6 / 5, 1.0, -1.0, LEFT)
        self.assertAlmostEqual(spec.domain.hi, 0.6 * (math.sqrt(5) - 1), delta=1e-12)
        self.assertAlmostEqual(spec.image_lo, -0.6 * (math.sqrt(5) + 1), delta=1e-12)
        self.assertTrue(spec.domain.bounded)

    def test_backward_half_map_of_saddle_is_not_defined(self):
        with self.assertRaises(NotDefined):
            halfmap.build_spec(1.0, -2 / 7, -1.0, RIGHT)
        spec = halfmap.build_spec(1.0, -2 / 7, -1.0, RIGHT, strict=False)
        self.assertFalse(spec.exists)
        self.assertEqual(spec.as_dict()["status"], "not_defined")

    def test_q_for_negative_a(self):
        spec = halfmap.build_spec(-1.0, -2.0, 2.0, LEFT)
        self.assertAlmostEqual(spec.q, -math.pi, places=14)
        # a < 0, focus, T < 0: the domain starts away from 0
        self.assertGreater(spec.domain.lo, 0.0)
        self.assertAlmostEqual(halfmap.pv_integral(spec, 0.0, spec.domain.lo), spec.q, places=12)

    def test_barely_complex_spectrum_passes_the_gate(self):
        # 0 < 4D - T^2 below the repeated-root threshold
        spec = halfmap.build_spec(-1.0, -2.0, 1.0 + 1e-12, LEFT, strict=False)
        self.assertTrue(spec.exists)
        self.assertTrue(spec.focus)
        self.assertEqual(spec.w_kind, "focus")
        # the return needs more turns than floats can follow
        self.assertEqual(spec.domain.lo, math.inf)
        with self.assertRaises(DomainError):
            halfmap.eval(spec, 1.0)

    def test_q_for_zero_a(self):
        spec = halfmap.build_spec(0.0, 0.5, 1.0, LEFT)
        self.assertAlmostEqual(spec.q, math.pi * 0.5 / math.sqrt(3.75), places=14)

    def test_right_side_uses_mirrored_parameters(self):
        spec = halfmap.build_spec(1.0, 0.4, 1.0, RIGHT)
        self.assertEqual((spec.left_a, spec.left_trace), (-1.0, -0.4))
        # effective a < 0 and effective T < 0: domain.lo > 0
        self.assertGreater(spec.domain.lo, 0.0)
        mirror = halfmap.build_spec(-1.0, -0.4, 1.0, LEFT)
        self.assertAlmostEqual(spec.domain.lo, mirror.domain.lo, delta=1e-14)
        self.assertEqual(spec.q, mirror.q)

    def test_image_upper_end_for_positive_trace(self):
        spec = halfmap.build_spec(-0.5, 0.2, 1.0, LEFT)
        self.assertLess(spec.image_hi, 0.0)
        self.assertEqual(halfmap.eval(spec, 0.0).y1, spec.image_hi)
        oracle = oracle_half_map(ZoneParams(-0.5, 0.2, 1.0), 0.0, Direction.FORWARD_FROM_LEFT)
        self.assertAlmostEqual(spec.image_hi, oracle, delta=1e-8)

    def test_as_dict(self):
        spec = halfmap.build_spec(1.0, 0.5, 1.0, LEFT)
        self.assertEqual(
            spec.as_dict(),
            {"side": "left_forward", "exists": True, "status": "defined", "q": 0.0, "domain": [0.0, None], "image": [None, 0.0]},
        )

    @settings(max_examples=300, deadline=None)
    @given(
        tenths,
        tenths,
        tenths,
        st.sampled_from([LEFT, RIGHT]),
    )
    def test_gate_and_w_positivity(self, a, T, D, side):
        spec = halfmap.build_spec(a, T, D, side, strict=False)
        a_eff = a if side is LEFT else -a
        self.assertEqual(spec.exists, a_eff > 0 or 4 * D - T * T > 0)
        if not spec.exists:
            return
        self.assertAlmostEqual(halfmap.w(spec, 0.0), a * a, delta=1e-12 * (1 + a * a))
        self.assertLess(spec.domain.lo, spec.domain.hi)
        hi = min(spec.domain.hi, 10.0)
        lo = max(spec.image_lo, -10.0)
        for y in np.linspace(lo, hi, 41)[1:-1]:
            if y != 0:
                self.assertGreater(halfmap.w(spec, float(y)), 0.0)


class TestPvIntegral(unittest.TestCase):
    def test_homogeneous_odd_symmetry(self):
        spec = halfmap.build_spec(0.0, 0.0, 1.0, LEFT)
        for c in (1e-3, 1.0, 50.0):
            self.assertEqual(halfmap.pv_integral(spec, -c, c), 0.0)

    def test_even_w_gives_zero(self):
        spec = halfmap.build_spec(-0.5, 0.0, 1.0, LEFT)
        self.assertAlmostEqual(halfmap.pv_integral(spec, -1.3, 1.3), 0.0, places=15)

    def test_matches_quadrature_for_every_w_shape(self):
        cases = [
            ((1.0, 0.5, 1.0), -0.1, 0.1),  # focus
            ((1.0, 3.0, 1.0), -2.0, 0.3),  # two positive real roots
            ((1.0, -3.0, 1.0), -0.3, 4.0),  # two negative real roots
            ((1.0, 2.0, 0.0), -3.0, 0.4),  # linear W
            ((2.0, 0.0, 0.0), -1.5, 0.7),  # constant W
            ((1.0, 2.0, 1.0), -2.0, 0.5),  # repeated root
            ((-0.7, 0.3, 2.0), -5.0, 2.0),  # focus, negative a
        ]
        for (a, T, D), y1, y0 in cases:
            with self.subTest(a=a, T=T, D=D):
                spec = halfmap.build_spec(a, T, D, LEFT)
                expected, _ = integrate.quad(
                    lambda y: -y / (D * y * y - a * T * y + a * a), y1, y0, epsabs=1e-14, epsrel=1e-13
                )
                self.assertAlmostEqual(halfmap.pv_integral(spec, y1, y0), expected, delta=1e-12 * (1 + abs(expected)))

    def test_homogeneous_log_form(self):
        spec = halfmap.build_spec(0.0, 0.3, 2.0, LEFT)
        self.assertAlmostEqual(halfmap.pv_integral(spec, -0.5, 2.0), -math.log(4.0) / 2.0, places=15)

    def test_errors(self):
        saddle = halfmap.build_spec(6 / 5, 1.0, -1.0, LEFT)
        with self.assertRaises(DomainError):
            halfmap.pv_integral(saddle, -0.1, 1.0)
        homogeneous = halfmap.build_spec(0.0, 0.0, 1.0, LEFT)
        with self.assertRaises(DomainError):
            halfmap.pv_integral(homogeneous, -1.0, 0.0)
        with self.assertRaises(PreconditionViolation):
            halfmap.pv_integral(saddle, 0.1, 0.2)


class TestEval(unittest.TestCase):
    def test_center_is_symmetric(self):
        spec = halfmap.build_spec(-0.5, 0.0, 1.0, LEFT)
        ev = halfmap.eval(spec, 1.0)
        self.assertAlmostEqual(ev.y1, -1.0, delta=1e-14)
        self.assertLess(abs(ev.residual), 1e-12)

    def test_tangency_point_maps_to_itself(self):
        self.assertEqual(halfmap.eval(halfmap.build_spec(0.5, 0.5, 1.0, LEFT), 0.0).y1, 0.0)

    def test_real_focus_matches_oracle(self):
        y1 = y_of(-0.5, -0.1, 1.0, LEFT, 1.0)
        oracle = oracle_half_map(ZoneParams(-0.5, -0.1, 1.0), 1.0, Direction.FORWARD_FROM_LEFT)
        self.assertAlmostEqual(y1, oracle, delta=1e-8)

    def test_right_side_matches_oracle(self):
        for a, T, D, y0 in ((0.5, -0.1, 1.0, 1.0), (-1.0, 0.4, 2.0, 0.3), (-0.6, -0.3, -0.5, 0.5)):
            with self.subTest(a=a, T=T, D=D):
                y1 = y_of(a, T, D, RIGHT, y0)
                oracle = oracle_half_map(ZoneParams(a, T, D), y0, Direction.BACKWARD_FROM_RIGHT)
                self.assertAlmostEqual(y1, oracle, delta=1e-8 * (1 + abs(y1)))

    def test_saddle_endpoint_to_the_last_ulps(self):
        spec = halfmap.build_spec(6 / 5, 1.0, -1.0, LEFT)
        y0 = spec.domain.hi
        for _ in range(12):
            y0 = math.nextafter(y0, 0.0)
            ev = halfmap.eval(spec, y0)
            self.assertLess(spec.image_lo, ev.y1)
            # the image hugs the other root of W
            self.assertLess(ev.y1 - spec.image_lo, 1e-3)
            self.assertTrue(math.isfinite(halfmap.pv_integral(spec, ev.y1, y0)))

    def test_outside_domain(self):
        spec = halfmap.build_spec(6 / 5, 1.0, -1.0, LEFT)
        for y0 in (1.0, spec.domain.hi, -0.1, math.inf):
            with self.subTest(y0=y0):
                with self.assertRaises(DomainError):
                    halfmap.eval(spec, y0)
        with self.assertRaises(NotDefined):
            halfmap.eval(halfmap.build_spec(1.0, -2 / 7, -1.0, RIGHT, strict=False), 0.5)

    def test_homogeneous_is_linear(self):
        spec = halfmap.build_spec(0.0, 0.3, 1.0, LEFT)
        ratio = halfmap.asymptotic_ratio(spec)
        for y0 in (1e-3, 1.0, 1e3):
            self.assertAlmostEqual(halfmap.eval(spec, y0).y1 / y0, ratio, delta=1e-12)

    def test_random_interior_points(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 40:
            a, T, D = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 2)
            side = LEFT if rng.random() < 0.5 else RIGHT
            spec = halfmap.build_spec(a, T, D, side, strict=False)
            if not spec.exists:
                continue
            hi = min(spec.domain.hi, spec.domain.lo + 5.0)
            y0 = float(spec.domain.lo + (hi - spec.domain.lo) * rng.uniform(0.05, 0.95))
            y1 = halfmap.eval(spec, y0).y1
            self.assertLess(y1, 0.0)
            self.assertGreaterEqual(y1, spec.image_lo)
            # sign(y0 + y1) = -sign(T) on the left, +sign(T) on the right
            expected = -np.sign(T) if side is LEFT else np.sign(T)
            self.assertEqual(np.sign(y0 + y1), expected)
            d1, _ = halfmap.derivatives(spec, y0, y1)
            self.assertLess(d1, 0.0)
            checked += 1


class TestDerivatives(unittest.TestCase):
    def test_zero_trace(self):
        spec = halfmap.build_spec(-0.5, 0.0, 1.0, LEFT)
        y1 = halfmap.eval(spec, 1.0).y1
        d1, d2 = halfmap.derivatives(spec, 1.0, y1)
        self.assertAlmostEqual(d1, -1.0, delta=1e-13)
        self.assertAlmostEqual(d2, 0.0, delta=1e-12)

    def test_finite_differences(self):
        cases = [(-0.5, -0.1, 1.0, LEFT, 1.0), (0.8, 0.6, 1.5, LEFT, 0.7), (0.4, -0.7, 1.0, RIGHT, 1.2)]
        for a, T, D, side, y0 in cases:
            with self.subTest(a=a, T=T, D=D, side=side):
                spec = halfmap.build_spec(a, T, D, side)

                def f(y):
                    return halfmap.eval(spec, y).y1

                d1, d2 = halfmap.derivatives(spec, y0, f(y0))
                self.assertTrue(math.isclose(first_diff(f, y0, 1e-3), d1, rel_tol=1e-6, abs_tol=1e-9))
                self.assertTrue(math.isclose(second_diff(f, y0, 1e-3), d2, rel_tol=1e-6, abs_tol=1e-8))

    def test_random_finite_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            a, T, D = rng.uniform(0.2, 1.0), rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
            spec = halfmap.build_spec(a, T, D, LEFT)
            y0 = float(rng.uniform(0.3, 3.0))

            def f(y):
                return halfmap.eval(spec, y).y1

            d1, d2 = halfmap.derivatives(spec, y0, f(y0))
            self.assertTrue(math.isclose(first_diff(f, y0, 1e-3), d1, rel_tol=1e-6, abs_tol=1e-9))
            self.assertTrue(math.isclose(second_diff(f, y0, 1e-3), d2, rel_tol=1e-6, abs_tol=1e-8))

    def test_undefined_at_tangency(self):
        spec = halfmap.build_spec(0.5, 0.5, 1.0, LEFT)
        with self.assertRaises(DomainError):
            halfmap.derivatives(spec, 0.0, 0.0)

    def test_graph_is_an_orbit_of_the_cubic_field(self):
        spec = halfmap.build_spec(-0.5, -0.1, 1.0, LEFT)
        y0s = np.linspace(1.0, 3.0, 201)
        y1s = np.array([halfmap.eval(spec, float(y)).y1 for y in y0s])
        for k in range(len(y0s) - 1):
            m0, m1 = 0.5 * (y0s[k] + y0s[k + 1]), 0.5 * (y1s[k] + y1s[k + 1])
            f0, f1 = halfmap.graph_field(spec, m0, m1)
            s0, s1 = y0s[k + 1] - y0s[k], y1s[k + 1] - y1s[k]
            cross = (s0 * f1 - s1 * f0) / (math.hypot(s0, s1) * math.hypot(f0, f1))
            self.assertLess(abs(cross), 1e-3)


class TestTaylorAndAsymptotics(unittest.TestCase):
    def test_taylor_coefficient(self):
        self.assertAlmostEqual(halfmap.taylor_quadratic_coeff(halfmap.build_spec(0.5, 0.5, 1.0, LEFT)), -2 / 3)
        self.assertEqual(halfmap.taylor_quadratic_coeff(halfmap.build_spec(1.0, 0.0, 1.0, LEFT)), 0.0)

    def test_taylor_preconditions(self):
        with self.assertRaises(PreconditionViolation):
            halfmap.taylor_quadratic_coeff(halfmap.build_spec(0.0, 0.5, 1.0, LEFT))
        with self.assertRaises(PreconditionViolation):
            # y(0) < 0
            halfmap.taylor_quadratic_coeff(halfmap.build_spec(-0.5, 0.2, 1.0, LEFT))

    def test_taylor_matches_quadratic_fit(self):
        rng = np.random.default_rng(3)
        y0s = np.linspace(1e-3, 1e-2, 20)
        basis = np.column_stack([y0s**2, y0s**3, y0s**4])
        for _ in range(20):
            a, T, D = rng.uniform(0.5, 2.0), rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
            side = LEFT if rng.random() < 0.5 else RIGHT
            if side is RIGHT:
                a = -a
            spec = halfmap.build_spec(a, T, D, side)
            shifted = np.array([halfmap.eval(spec, float(y)).y1 + y for y in y0s])
            coeffs, *_ = np.linalg.lstsq(basis, shifted, rcond=None)
            expected = halfmap.taylor_quadratic_coeff(spec)
            self.assertTrue(math.isclose(coeffs[0], expected, rel_tol=1e-4, abs_tol=1e-6))

    def test_asymptotic_ratio(self):
        self.assertEqual(halfmap.asymptotic_ratio(halfmap.build_spec(1.0, 0.0, 1.0, LEFT)), -1.0)
        spec = halfmap.build_spec(-0.5, -0.1, 1.0, LEFT)
        expected = -math.exp(-math.pi / (10 * math.sqrt(3.99)))
        self.assertAlmostEqual(halfmap.asymptotic_ratio(spec), expected, places=14)
        self.assertAlmostEqual(halfmap.eval(spec, 1e6).y1 / 1e6, expected, delta=1e-2)
        spec = halfmap.build_spec(0.5, 0.5, 1.0, LEFT)
        self.assertAlmostEqual(halfmap.asymptotic_ratio(spec), -math.exp(math.pi / (2 * math.sqrt(3.75))), places=14)
        with self.assertRaises(NotApplicable):
            halfmap.asymptotic_ratio(halfmap.build_spec(1.0, 3.0, 1.0, LEFT))

    def test_random_asymptotics(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a, T, D = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
            spec = halfmap.build_spec(a, T, D, LEFT)
            y1 = halfmap.eval(spec, 1e6).y1
            self.assertAlmostEqual(y1 / 1e6, halfmap.asymptotic_ratio(spec), delta=1e-2)
            right = halfmap.build_spec(a, T, D, RIGHT)
            y1 = halfmap.eval(right, 1e6).y1
            self.assertAlmostEqual(1e6 / y1, halfmap.asymptotic_ratio(right), delta=1e-2)


class TestSensitivity(unittest.TestCase):
    def fd(self, a, T, D, side, y0, which):
        h = 1e-3
        if which is Sensitivity.WRT_T:
            return first_diff(lambda t: y_of(a, t, D, side, y0), T, h)
        return first_diff(lambda s: y_of(s, T, D, side, y0), a, h)

    def test_wrt_trace(self):
        for a, T, D, side, y0 in ((0.7, 0.3, 1.2, LEFT, 0.8), (1.0, -0.5, 0.6, LEFT, 2.0), (-0.6, -0.3, 1.0, RIGHT, 1.1)):
            with self.subTest(a=a, T=T, D=D, side=side):
                spec = halfmap.build_spec(a, T, D, side)
                y1 = halfmap.eval(spec, y0).y1
                value = halfmap.sensitivity(spec, y0, y1, Sensitivity.WRT_T)
                self.assertTrue(math.isclose(value, self.fd(a, T, D, side, y0, Sensitivity.WRT_T), rel_tol=1e-5))
                if side is LEFT:
                    self.assertLess(value, 0.0)

    def test_wrt_a(self):
        for a, T, D, side, y0 in ((-0.5, 0.2, 1.0, LEFT, 1.0), (-0.8, -0.4, 1.5, LEFT, 3.0), (0.6, 0.3, 1.0, RIGHT, 3.0)):
            with self.subTest(a=a, T=T, D=D, side=side):
                spec = halfmap.build_spec(a, T, D, side)
                y1 = halfmap.eval(spec, y0).y1
                value = halfmap.sensitivity(spec, y0, y1, Sensitivity.WRT_A)
                self.assertTrue(math.isclose(value, self.fd(a, T, D, side, y0, Sensitivity.WRT_A), rel_tol=1e-5))
                if side is LEFT:
                    self.assertEqual(np.sign(T * y0 * y1 - a * (y0 + y1)), -np.sign(T))

    def test_random_configurations(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            a, T, D = rng.uniform(0.2, 1.0), rng.uniform(-1, 1), rng.uniform(0.5, 2.0)
            y0 = float(rng.uniform(0.3, 2.0))
            spec = halfmap.build_spec(a, T, D, LEFT)
            y1 = halfmap.eval(spec, y0).y1
            value = halfmap.sensitivity(spec, y0, y1, Sensitivity.WRT_T)
            self.assertTrue(math.isclose(value, self.fd(a, T, D, LEFT, y0, Sensitivity.WRT_T), rel_tol=1e-5))

            T = abs(T) + 0.05
            spec = halfmap.build_spec(-a, T, D, LEFT)
            y1 = halfmap.eval(spec, y0).y1
            value = halfmap.sensitivity(spec, y0, y1, Sensitivity.WRT_A)
            self.assertTrue(math.isclose(value, self.fd(-a, T, D, LEFT, y0, Sensitivity.WRT_A), rel_tol=1e-5))

    def test_preconditions(self):
        spec = halfmap.build_spec(-0.5, 0.2, 1.0, LEFT)
        y1 = halfmap.eval(spec, 1.0).y1
        with self.assertRaises(PreconditionViolation):
            halfmap.sensitivity(spec, 1.0, y1, Sensitivity.WRT_T)
        spec = halfmap.build_spec(0.5, 0.2, 1.0, LEFT)
        y1 = halfmap.eval(spec, 1.0).y1
        with self.assertRaises(PreconditionViolation):
            halfmap.sensitivity(spec, 1.0, y1, Sensitivity.WRT_A)
