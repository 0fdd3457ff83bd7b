"""
Unit tests for bounded-variation functions and the weighted variation V_delta.
"""

import math

import numpy as np
import pytest

from src.bvfun.bv_function import (EVEN, NO_PARITY, ODD, BVFunction, SmoothPiece, build_bv, chi,
                                   fit_jump_envelope, in_b_delta, indicator, piecewise, polynomial,
                                   sgn, smooth_plus_jump, step, total_variation, v_delta,
                                   v_delta_report)
from src.common.errors import BVConstructionError, DescriptorError, DomainError
from src.weights.weight_family import make_weight


class TestConstruction:
    """Test cases for the constructors and descriptor parsing."""

    def test_sgn(self):
        """sgn is right-continuous with a jump of 2 at the origin."""
        f = sgn()
        np.testing.assert_array_equal(f(np.array([-1.0, 0.0, 2.0])), [-1.0, 1.0, 1.0])
        assert f.jumps.tolist() == [2.0]
        assert f.parity == ODD
        assert not f.is_continuity_point(0.0)
        assert f.is_continuity_point(1.0)

    def test_indicator_and_chi(self):
        """Indicators of [a, b) and chi_x."""
        f = indicator(-1.0, 1.0)
        assert f.parity == EVEN
        np.testing.assert_array_equal(f(np.array([-1.0, 0.0, 1.0])), [1.0, 1.0, 0.0])
        g = chi(1.0)
        assert float(g(0.5)) == 1.0
        assert float(g(2.0)) == 0.0
        assert step(0.5).parity == NO_PARITY

    def test_polynomial(self):
        """poly:<c0,...> keeps its coefficients and parity."""
        f = build_bv("poly:1,0,2")
        assert f.is_polynomial
        assert f.degree == 2
        assert f.parity == EVEN
        assert float(f(2.0)) == 9.0
        assert build_bv("poly:0,3").parity == ODD
        assert polynomial([5.0]).is_constant

    def test_descriptors(self):
        """Every descriptor family parses."""
        assert build_bv("sgn").descriptor == "sgn"
        assert build_bv("step:1").breakpoints.tolist() == [1.0]
        assert build_bv("ind:0.25:0.75").jumps.tolist() == [1.0, -1.0]
        assert build_bv("chi:2").descriptor == "chi:2"
        assert build_bv("bump:0").jumps.tolist() == [1.0]

    def test_bad_descriptors(self):
        """Malformed descriptors raise descriptor errors."""
        for text in ("foo", "step:x", "poly:", "ind:1"):
            with pytest.raises(DescriptorError):
                build_bv(text)
        with pytest.raises(BVConstructionError):
            build_bv("ind:1:0")

    def test_inconsistent_pieces(self):
        """Breakpoints must increase and match the number of pieces."""
        one = SmoothPiece.constant_piece(1.0)
        with pytest.raises(BVConstructionError):
            BVFunction(breakpoints=np.array([1.0, 0.0]), pieces=(one, one, one), descriptor="bad")
        with pytest.raises(BVConstructionError):
            BVFunction(breakpoints=np.array([0.0]), pieces=(one,), descriptor="bad")

    def test_piecewise_declared_jumps(self):
        """Declared jumps must agree with the pieces."""
        pieces = [SmoothPiece.constant_piece(0.0), SmoothPiece.constant_piece(3.0)]
        f = piecewise([0.0], pieces, jumps=[3.0])
        assert f.jumps.tolist() == [3.0]
        with pytest.raises(BVConstructionError):
            piecewise([0.0], pieces, jumps=[1.0])

    def test_smooth_intervals(self):
        """Intervals between breakpoints clipped to [lo, hi]."""
        intervals = indicator(0.0, 1.0).smooth_intervals(-1.0, 0.5)
        assert [(a, b) for a, b, _ in intervals] == [(-1.0, 0.0), (0.0, 0.5)]


class TestVariation:
    """Test cases for V_delta and the unweighted variation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spec = make_weight("freud:2")

    def test_sgn_variation(self):
        """V_delta(R, sgn) = 2 w^delta(0) = 2."""
        report = v_delta_report(self.spec, sgn(), None, 0.5)
        assert report.value == pytest.approx(2.0)
        assert report.atoms == pytest.approx(2.0)
        assert report.density == 0.0
        assert v_delta(self.spec, sgn(), (0.5, 3.0), 0.5) == 0.0

    def test_indicator_variation(self):
        """Atoms are weighted by w at the breakpoints."""
        value = v_delta(self.spec, indicator(0.25, 0.75), None, 1.0)
        assert value == pytest.approx(math.exp(-0.0625) + math.exp(-0.5625), rel=1e-14)

    def test_closed_interval_contains_atoms(self):
        """Breakpoints at the interval ends count."""
        assert v_delta(self.spec, sgn(), (0.0, 1.0), 1.0) == pytest.approx(2.0)
        assert v_delta(self.spec, sgn(), (-1.0, 0.0), 1.0) == pytest.approx(2.0)

    def test_smooth_plus_jump(self):
        """exp(-t^2) + step: atom 1 plus int 2|t| exp(-2t^2) dt = 1."""
        report = v_delta_report(self.spec, smooth_plus_jump(0.0), None, 1.0)
        assert report.atoms == pytest.approx(1.0)
        assert report.density == pytest.approx(1.0, rel=1e-8)
        assert report.remainder < 1e-12

    def test_step_at_one(self):
        """A unit jump at 1 carries w^{1/2}(1) = e^{-1/2}."""
        assert v_delta(self.spec, step(1.0), None, 0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)

    def test_additive_over_adjacent_intervals(self):
        """V_delta([a, c]) = V_delta([a, b]) + V_delta([b, c]) when b is no breakpoint."""
        for f in (smooth_plus_jump(0.0), indicator(-0.5, 1.5), polynomial([0.0, 1.0, 0.0, 1.0])):
            for delta in (0.5, 1.0):
                whole = v_delta(self.spec, f, (-1.0, 2.0), delta)
                parts = v_delta(self.spec, f, (-1.0, 0.5), delta) + v_delta(self.spec, f, (0.5, 2.0), delta)
                assert whole == pytest.approx(parts, abs=1e-12)

    def test_decreasing_in_delta(self):
        """w <= 1, so V_delta grows as delta shrinks."""
        for f in (indicator(0.25, 0.75), smooth_plus_jump(0.5), polynomial([0.0, 0.0, 1.0])):
            values = [v_delta(self.spec, f, None, delta) for delta in (0.25, 0.5, 1.0)]
            assert values[0] >= values[1] >= values[2] > 0.0
        values = [v_delta(self.spec, sgn(), (-2.0, 2.0), delta) for delta in (0.25, 1.0)]
        assert values[0] == values[1] == 2.0

    def test_total_variation(self):
        """Unweighted variation over compact intervals."""
        assert total_variation(sgn(), -1.0, 1.0) == pytest.approx(2.0)
        assert total_variation(polynomial([0.0, 0.0, 1.0]), -1.0, 1.0) == pytest.approx(2.0, rel=1e-10)
        with pytest.raises(DomainError):
            total_variation(sgn(), -math.inf, 1.0)

    def test_membership(self):
        """Polynomials and step functions lie in B_delta."""
        assert in_b_delta(self.spec, polynomial([0.0, 0.0, 1.0]), 0.5)
        assert in_b_delta(self.spec, sgn(), 0.5)

    def test_invalid_arguments(self):
        """delta must lie in (0, 1] and intervals must be ordered."""
        with pytest.raises(DomainError):
            v_delta(self.spec, sgn(), None, 0.0)
        with pytest.raises(DomainError):
            v_delta(self.spec, sgn(), (1.0, 0.0), 0.5)


class TestJumpEnvelope:
    """Test cases for the fitted jump envelope."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spec = make_weight("freud:2")

    def test_sgn_envelope(self):
        """Outward increments obey the bound with constant 1."""
        ts = np.concatenate([np.linspace(-1.9, -0.1, 19), np.linspace(0.1, 1.9, 19)])
        fit = fit_jump_envelope(self.spec, sgn(), 1.0, ts, 0.5)
        assert fit.outward_ok
        assert math.isfinite(fit.c_hat)
        assert fit.samples > 0

    def test_bump_envelope(self):
        """A smooth part plus a jump gives a finite constant."""
        ts = np.concatenate([np.linspace(-0.99, -0.05, 20), np.linspace(0.05, 0.99, 20)])
        fit = fit_jump_envelope(self.spec, smooth_plus_jump(0.0), 0.5, ts, 0.5)
        assert fit.outward_ok
        assert math.isfinite(fit.c_hat)
        assert set(fit.to_dict()) == {'x', 'delta', 'c_hat', 'samples', 'outward_max_ratio', 'outward_ok'}

    def test_origin_rejected(self):
        """The envelope scale x Q'(x) vanishes at 0."""
        with pytest.raises(DomainError):
            fit_jump_envelope(self.spec, sgn(), 0.0, [0.1], 0.5)
