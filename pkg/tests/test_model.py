"""Tests for the potential/action layer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscphase.errors import NonPositiveEnergy, OutsideAllowedRegion
from oscphase.model import (
    SymmetricPotential,
    action_to_turning,
    classical_action,
    forbidden_action,
    forbidden_point,
    momentum_sq,
    total_action,
    turning_point,
)

HARMONIC = SymmetricPotential({2: 0.5})
QUARTIC = SymmetricPotential({4: 0.5})
DECADIC_1 = SymmetricPotential({2: 0.5, 10: 0.5})  # coupling 1


class TestPotential:
    def test_rejects_odd_or_constant_powers(self):
        with pytest.raises(ValueError):
            SymmetricPotential({3: 1.0})
        with pytest.raises(ValueError):
            SymmetricPotential({0: 1.0})
        with pytest.raises(ValueError):
            SymmetricPotential({})

    def test_rejects_nonconfining(self):
        with pytest.raises(ValueError):
            SymmetricPotential({2: 1.0, 4: -1.0})

    def test_rejects_bad_hbar(self):
        with pytest.raises(ValueError):
            SymmetricPotential({2: 0.5}, hbar=0.0)

    def test_text_roundtrip(self):
        v = SymmetricPotential.from_text("2:0.5,10:500")
        assert v.coefficients == {2: 0.5, 10: 500.0}
        assert SymmetricPotential.from_text(v.to_text()) == v

    def test_text_rejects_garbage(self):
        with pytest.raises(ValueError):
            SymmetricPotential.from_text("2:0.5,banana")
        with pytest.raises(ValueError):
            SymmetricPotential.from_text("2:0.5,2:1.0")

    def test_value_and_derivatives(self):
        v = DECADIC_1
        x = 0.7
        assert v.value(x) == pytest.approx(0.5 * x**2 + 0.5 * x**10, rel=1e-15)
        assert v.derivative(x) == pytest.approx(x + 5 * x**9, rel=1e-14)
        assert v.derivative(x, 2) == pytest.approx(1 + 45 * x**8, rel=1e-14)
        assert v.derivative(x, 11) == 0.0

    def test_complex_evaluation(self):
        z = 0.3 + 0.4j
        got = QUARTIC.value(z)
        assert got == pytest.approx(0.5 * z**4, rel=1e-15)

    def test_hashable_and_immutable(self):
        v = SymmetricPotential({2: 0.5})
        assert hash(v) == hash(SymmetricPotential({2: 0.5}))
        with pytest.raises(AttributeError):
            v.hbar = 2.0


class TestMomentumSq:
    def test_harmonic_form(self):
        # p^2 = 2 nu + 1 - x^2 at E = nu + 1/2
        nu = 1.3
        x = 0.8
        assert momentum_sq(HARMONIC, nu + 0.5, x) == pytest.approx(
            2 * nu + 1 - x**2, rel=1e-15
        )

    def test_origin_value(self):
        assert momentum_sq(QUARTIC, 3.7, 0.0) == pytest.approx(7.4, rel=1e-15)

    def test_quartic_zero(self):
        assert momentum_sq(QUARTIC, 0.5, 1.0) == pytest.approx(0.0, abs=1e-14)

    @given(
        st.floats(0.1, 10.0),
        st.floats(-3.0, 3.0),
        st.floats(0.01, 5.0),
        st.floats(0.01, 5.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_even_in_x(self, e, x, c1, c2):
        v = SymmetricPotential({2: c1, 4: c2})
        assert momentum_sq(v, e, x) == pytest.approx(
            momentum_sq(v, e, -x), rel=1e-14, abs=1e-14
        )


class TestTurningPoint:
    def test_harmonic_unit(self):
        tp = turning_point(HARMONIC, 0.5)
        assert tp.t2 == pytest.approx(1.0, rel=1e-14)
        assert tp.t1 == -tp.t2

    def test_quartic_unit(self):
        assert turning_point(QUARTIC, 0.5).t2 == pytest.approx(1.0, rel=1e-14)

    def test_decadic_unit(self):
        # x^2 + x^10 = 2 has the exact positive root 1
        assert turning_point(DECADIC_1, 1.0).t2 == pytest.approx(1.0, rel=1e-14)

    def test_rejects_nonpositive_energy(self):
        with pytest.raises(NonPositiveEnergy):
            turning_point(HARMONIC, 0.0)

    @given(st.floats(0.05, 50.0))
    @settings(max_examples=40, deadline=None)
    def test_residual_invariant(self, e):
        tp = turning_point(QUARTIC, e)
        assert abs(momentum_sq(QUARTIC, e, tp.t2)) < 1e-12 * max(1.0, 2 * e)


class TestAction:
    def test_harmonic_total_is_pi_e(self):
        for e in (0.5, 1.0, 2.25, 9.5):
            assert total_action(HARMONIC, e) == pytest.approx(
                math.pi * e, rel=1e-13
            )

    def test_lower_endpoint_zero(self):
        t2 = turning_point(QUARTIC, 0.7).t2
        assert classical_action(QUARTIC, 0.7, -t2) == pytest.approx(0.0, abs=1e-13)

    def test_outside_region_raises(self):
        with pytest.raises(OutsideAllowedRegion):
            classical_action(HARMONIC, 0.5, 1.5)

    def test_quartic_against_reference_quadrature(self):
        # dense Gauss-Legendre on the raw integrand, split to dodge the
        # turning-point singularity analytically: S(t2) = t2 * sqrt(2E) * J
        # with J = int_0^1 sqrt(1 - u^4) du evaluated by series-free quadrature
        e = 0.53018
        t2 = turning_point(QUARTIC, e).t2
        g, w = np.polynomial.legendre.leggauss(4000)
        u = 0.5 * (g + 1.0)
        j = 0.5 * np.sum(w * np.sqrt(np.maximum(1 - u**4, 0.0)))
        expected = 2.0 * t2 * math.sqrt(2 * e) * j
        assert total_action(QUARTIC, e) == pytest.approx(expected, rel=2e-6)

    def test_monotone_increasing(self):
        e = 1.3
        t2 = turning_point(QUARTIC, e).t2
        xs = np.linspace(-t2, t2, 41)
        s = [classical_action(QUARTIC, e, x) for x in xs]
        assert all(b > a for a, b in zip(s, s[1:]))

    def test_symmetry_halves(self):
        e = 2.0
        t2 = turning_point(QUARTIC, e).t2
        s_mid = classical_action(QUARTIC, e, 0.0)
        s_top = classical_action(QUARTIC, e, t2)
        assert s_top == pytest.approx(2 * s_mid, rel=1e-13)

    def test_vectorized_matches_scalar(self):
        e = 0.9
        xs = np.array([0.0, 0.3, 0.8])
        t2 = turning_point(QUARTIC, e).t2
        vec = action_to_turning(QUARTIC, e, xs)
        for xi, ai in zip(xs, vec):
            assert ai == pytest.approx(
                float(action_to_turning(QUARTIC, e, float(xi), t2=t2)), rel=1e-13
            )


class TestForbiddenSide:
    def test_zero_at_turning_point(self):
        t2 = turning_point(HARMONIC, 0.5).t2
        assert forbidden_action(HARMONIC, 0.5, t2) == pytest.approx(0.0, abs=1e-14)

    def test_harmonic_closed_form(self):
        # int_1^x sqrt(t^2 - 1) dt = (x sqrt(x^2-1) - acosh x) / 2 at E = 1/2
        x = 2.4644744181201212
        expected = 0.5 * (x * math.sqrt(x**2 - 1) - math.acosh(x))
        assert forbidden_action(HARMONIC, 0.5, x) == pytest.approx(
            expected, rel=1e-12
        )

    def test_forbidden_point_inverts(self):
        target = 7.5
        x = forbidden_point(QUARTIC, 0.8, target)
        assert forbidden_action(QUARTIC, 0.8, x) == pytest.approx(
            target, rel=1e-10
        )
