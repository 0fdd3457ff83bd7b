"""
Unit tests for MRS numbers and the scale factors delta_u, phi_u.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.common.errors import DomainError
from src.weights.mrs import (MrsCache, edge_width, mrs_integral, mrs_number, mrs_radius, mrs_table,
                             phi_values, scale_factors)
from src.weights.weight_family import make_weight


class TestMrsNumbers:
    """Test cases for solving the MRS equation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cache = MrsCache()
        self.hermite = make_weight("freud:2")
        self.freud4 = make_weight("freud:4")
        self.erdos = make_weight("erdos:1:2")

    def test_hermite_closed_form(self):
        """Q = x^2 gives a_t = sqrt(t)."""
        for t in (0.25, 1.0, 7.0, 64.0, 1000.0):
            assert mrs_radius(self.hermite, t, self.cache) == pytest.approx(math.sqrt(t), rel=1e-12)

    def test_freud4_closed_form(self):
        """Q = x^4 gives a_t = (2t/3)^(1/4); a_24 = 2."""
        assert mrs_radius(self.freud4, 24.0, self.cache) == pytest.approx(2.0, abs=1e-10)
        assert mrs_radius(self.freud4, 3.0, self.cache) == pytest.approx(2.0 ** 0.25, rel=1e-12)

    def test_residual_and_t_ratio(self):
        """The solved a_t satisfies the equation and carries T(a_t)."""
        value = mrs_number(self.erdos, 16.0, self.cache)
        assert mrs_integral(self.erdos, value.a_t) == pytest.approx(16.0, rel=1e-11)
        assert value.T_at == pytest.approx(float(self.erdos.t_ratio(value.a_t)))
        assert value.residual <= 1e-10

    def test_erdos_growth_is_slow(self):
        """a_t of exp(x^2) - 1 grows like sqrt(log t)."""
        a8, a128 = mrs_radius(self.erdos, 8.0, self.cache), mrs_radius(self.erdos, 128.0, self.cache)
        assert 1.2 < a8 < a128 < 2.5
        assert a128 / a8 < 1.6

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=0.05, max_value=500.0))
    def test_freud_scaling(self, t):
        """a_{4t} / a_t = 4^(1/alpha) for Freud weights."""
        ratio = mrs_radius(self.freud4, 4.0 * t, self.cache) / mrs_radius(self.freud4, t, self.cache)
        assert ratio == pytest.approx(math.sqrt(2.0), rel=1e-10)

    def test_monotone_table(self):
        """a_t increases with t."""
        values = [v.a_t for v in mrs_table(self.erdos, [0.5, 1.0, 2.0, 4.0, 8.0], self.cache)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_invalid_t(self):
        """t must be positive and finite."""
        for t in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(DomainError):
                mrs_number(self.hermite, t, self.cache)


class TestMrsCache:
    """Test cases for the memo and its JSON persistence."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cache = MrsCache()
        self.spec = make_weight("freud:2")

    def test_memoised(self):
        """A second call returns the cached record."""
        first = mrs_number(self.spec, 9.0, self.cache)
        assert self.cache.lookup("freud:2", 9.0) is first
        assert mrs_number(self.spec, 9.0, self.cache) is first
        assert len(self.cache) >= 1

    def test_save_and_load(self, tmp_path):
        """Records written to disk reload to identical values."""
        for t in (1.0, 4.0, 16.0):
            mrs_number(self.spec, t, self.cache)
        path = tmp_path / "mrs.json"
        self.cache.save(path)

        restored = MrsCache()
        restored.load(path)
        assert restored.to_records() == self.cache.to_records()
        assert restored.lookup("freud:2", 4.0).a_t == self.cache.lookup("freud:2", 4.0).a_t

    def test_records_sorted(self):
        """Records are ordered by weight and t."""
        for t in (8.0, 2.0, 4.0):
            mrs_number(self.spec, t, self.cache)
        ts = [row['t'] for row in self.cache.to_records()]
        assert ts == sorted(ts)
        assert set(self.cache.to_records()[0]) == {'weight', 't', 'a', 'T_at'}


class TestScaleFactors:
    """Test cases for delta_u and phi_u."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cache = MrsCache()
        self.spec = make_weight("freud:2")

    def test_edge_width(self):
        """delta_u = (u T(a_u))^(-2/3) with T = 2."""
        assert edge_width(self.spec, 16.0, self.cache) == pytest.approx(32.0 ** (-2.0 / 3.0), rel=1e-12)

    def test_phi_at_origin(self):
        """phi_u(0) = (a_u/u) / sqrt(1 + delta_u)."""
        u = 16.0
        expected = (4.0 / u) / math.sqrt(1.0 + edge_width(self.spec, u, self.cache))
        assert float(phi_values(self.spec, u, 0.0, self.cache)) == pytest.approx(expected, rel=1e-12)

    def test_phi_plateau_beyond_edge(self):
        """phi_u is constant for |x| >= a_u and even."""
        u = 16.0
        a_u = mrs_radius(self.spec, u, self.cache)
        values = phi_values(self.spec, u, np.array([a_u, 1.5 * a_u, -3.0 * a_u]), self.cache)
        assert values[1] == pytest.approx(values[0], rel=1e-14)
        assert values[2] == pytest.approx(values[0], rel=1e-14)

    def test_phi_at_edge(self):
        """At x = a_u only delta_u keeps the denominator away from 0."""
        u = 32.0
        a_u, a_2u = math.sqrt(32.0), 8.0
        expected = (a_u / u) * (1.0 - a_u / a_2u) / math.sqrt(edge_width(self.spec, u, self.cache))
        assert float(phi_values(self.spec, u, a_u, self.cache)) == pytest.approx(expected, rel=1e-10)

    def test_scale_factors_record(self):
        """The record bundles a_u, a_2u, delta_u and phi_u(x)."""
        factors = scale_factors(self.spec, 4.0, 0.5, self.cache)
        assert factors.a_u == pytest.approx(2.0, rel=1e-12)
        assert factors.a_2u == pytest.approx(math.sqrt(8.0), rel=1e-12)
        with pytest.raises(DomainError):
            scale_factors(self.spec, 0.0, 0.5, self.cache)
