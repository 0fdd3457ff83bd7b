"""
Unit tests for kernels, coefficients, partial sums and tail integrals.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bvfun.bv_function import indicator, polynomial, sgn
from src.common.errors import DegreeRangeError, DomainError, NumericError
from src.fourier.expansion import (ExpansionCoeffs, coefficients, kernel, kernel_cd_weighted,
                                   kernel_direct_weighted, kernel_integral, kernel_weighted,
                                   partial_sum, partial_sum_values, tail_integral, tail_integral_grid,
                                   weighted_norm_squared)
from src.orthopoly.gauss import christoffel, gauss_rule
from src.orthopoly.recurrence import weighted_values
from src.weights.mrs import mrs_radius


class TestKernel:
    """Test cases for K_n(x, t)."""

    def test_direct_and_cd_forms_agree(self, hermite, hermite_table):
        """Both evaluations agree away from the diagonal."""
        x, t = np.array([0.3, -1.2, 2.0]), np.array([0.9, 0.4, -0.5])
        direct = kernel_direct_weighted(hermite_table, hermite, 20, x, t)
        cd = kernel_cd_weighted(hermite_table, hermite, 20, x, t)
        np.testing.assert_allclose(cd, direct, rtol=1e-9, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    def test_symmetry(self, erdos, erdos_table, x, t):
        """K_n(x, t) = K_n(t, x)."""
        left = float(kernel_weighted(erdos_table, erdos, 16, x, t))
        right = float(kernel_weighted(erdos_table, erdos, 16, t, x))
        assert left == pytest.approx(right, rel=1e-9, abs=1e-12)

    def test_diagonal_is_inverse_christoffel(self, hermite, hermite_table):
        """K_n(x, x) = 1 / lambda_n(x)."""
        for x in (0.0, 0.8, 2.5):
            value = kernel(hermite_table, hermite, 12, x, x)
            lam = christoffel(hermite_table, hermite, 12, x).value
            assert value * lam == pytest.approx(1.0, rel=1e-12)

    def test_normalisation(self, hermite, hermite_table):
        """int K_n(x, t) w^2(t) dt = 1."""
        for x in (0.0, 1.0):
            value = kernel_integral(hermite_table, hermite, 16, x, lambda t: np.ones_like(t))
            assert value == pytest.approx(1.0, rel=1e-8)

    def test_reproduces_low_degree(self, erdos, erdos_table):
        """K_n reproduces polynomials of degree < n."""
        value = kernel_integral(erdos_table, erdos, 8, 0.6, lambda t: t ** 2)
        assert value == pytest.approx(0.36, rel=1e-8)

    def test_partial_sum_error_as_kernel_integral(self, hermite, hermite_table, mrs_cache):
        """s_n(f, x) - f(x) = int K_n(x, t) (f(t) - f(x)) w^2(t) dt for f = sgn."""
        f, n, x = sgn(), 16, 0.7
        coeffs = coefficients(hermite_table, hermite, None, f, n, mrs_cache)
        error = partial_sum(coeffs, hermite_table, hermite, n, x).value - 1.0
        value = kernel_integral(hermite_table, hermite, n, x, lambda t: f(t) - 1.0,
                                breakpoints=f.breakpoints, cache=mrs_cache)
        assert value == pytest.approx(error, abs=1e-7)

    def test_reproduces_random_polynomials(self, hermite, hermite_table, mrs_cache):
        """K_n reproduces P = sum c_k p_k of degree n - 1, inside and near the edge."""
        rng = np.random.default_rng(42)
        for n in (8, 16, 32):
            c = rng.standard_normal(n)
            a_n = mrs_radius(hermite, n, mrs_cache)

            def weighted_poly(t, c=c, n=n):
                return np.tensordot(c, weighted_values(hermite_table, hermite, n - 1, t), axes=1)

            scale = float(np.max(np.abs(weighted_poly(np.linspace(-a_n, a_n, 401)))))
            for x in (0.0, 0.7 * a_n):
                wx = float(hermite.w(x))
                value = kernel_integral(hermite_table, hermite, n, x,
                                        lambda t: weighted_poly(t) / hermite.w(t), cache=mrs_cache)
                ones = kernel_integral(hermite_table, hermite, n, x, np.ones_like, cache=mrs_cache)
                assert abs(value * wx - float(weighted_poly(x))) <= 1e-8 * scale
                assert abs(ones - 1.0) * wx <= 1e-9

    def test_christoffel_reciprocal_on_grid(self, hermite, erdos, hermite_table, erdos_table,
                                            mrs_cache):
        """lambda_n(x) K_n(x, x) = 1 at 50 points of [-a_n, a_n]."""
        for spec, table in ((hermite, hermite_table), (erdos, erdos_table)):
            for n in (16, 64):
                a_n = mrs_radius(spec, n, mrs_cache)
                for x in np.linspace(-a_n, a_n, 50):
                    lam = christoffel(table, spec, n, x).value
                    assert kernel(table, spec, n, x, x, mrs_cache) * lam == pytest.approx(1.0, abs=1e-10)

    def test_underflow(self, hermite, hermite_table):
        """Unweighted K_n is not representable where w underflows."""
        with pytest.raises(NumericError):
            kernel(hermite_table, hermite, 8, 40.0, 0.0)

    def test_degree_guard(self, hermite, hermite_table):
        """K_n needs 1 <= n <= N."""
        with pytest.raises(DegreeRangeError):
            kernel(hermite_table, hermite, 0, 0.1, 0.2)


class TestCoefficients:
    """Test cases for expansion coefficients and partial sums."""

    def test_polynomial_by_gauss_rule(self, hermite, hermite_table):
        """A quadratic is reproduced exactly from three terms on."""
        f = polynomial([1.0, 0.0, 2.0])
        rule = gauss_rule(hermite_table, 16, hermite)
        coeffs = coefficients(hermite_table, hermite, rule, f, 16)
        assert coeffs.method == "gauss"
        assert np.all(coeffs.c[1::2] == 0.0)
        np.testing.assert_allclose(coeffs.c[3:], 0.0, atol=1e-12)
        for n in (3, 8, 16):
            assert partial_sum(coeffs, hermite_table, hermite, n, 0.7).value == pytest.approx(1.98, rel=1e-10)

    def test_adaptive_matches_gauss(self, hermite, hermite_table):
        """Panel integration agrees with the Gauss rule on polynomials."""
        f = polynomial([0.5, -1.0, 0.0, 0.25])
        rule = gauss_rule(hermite_table, 12, hermite)
        exact = coefficients(hermite_table, hermite, rule, f, 12)
        panels = coefficients(hermite_table, hermite, None, f, 12)
        assert panels.method == "adaptive"
        np.testing.assert_allclose(panels.c, exact.c, rtol=1e-9, atol=1e-11)

    def test_odd_function_parity(self, erdos, erdos_table):
        """sgn has vanishing even-index coefficients."""
        coeffs = coefficients(erdos_table, erdos, None, sgn(), 32)
        assert np.all(coeffs.c[0::2] == 0.0)
        assert np.any(coeffs.c[1::2] != 0.0)

    def test_bessel_inequality(self, hermite, hermite_table):
        """sum c_k^2 <= int f^2 w^2."""
        f = indicator(-0.5, 1.0)
        coeffs = coefficients(hermite_table, hermite, None, f, 48)
        norm = weighted_norm_squared(hermite, f, 12.0)
        assert 0.0 < coeffs.energy <= norm * (1.0 + 1e-9)

    def test_serialisation(self, hermite, hermite_table):
        """Coefficients survive their dict form."""
        coeffs = coefficients(hermite_table, hermite, None, sgn(), 8)
        restored = ExpansionCoeffs.from_dict(coeffs.to_dict())
        assert restored.N == 8
        assert restored.f_descriptor == "sgn"
        assert np.array_equal(restored.c, coeffs.c)

    def test_partial_sum_guards(self, hermite, freud4, hermite_table):
        """Orders beyond N and foreign weights are rejected."""
        coeffs = coefficients(hermite_table, hermite, None, sgn(), 8)
        with pytest.raises(DegreeRangeError):
            partial_sum(coeffs, hermite_table, hermite, 9, 0.5)
        with pytest.raises(DomainError):
            partial_sum_values(coeffs, hermite_table, freud4, 4, 0.5)
        assert partial_sum(coeffs, hermite_table, hermite, 0, 0.5).value == 0.0

    def test_weighted_partial_sum_on_underflow(self, hermite, hermite_table):
        """Where w underflows the weighted sum is returned and flagged."""
        coeffs = coefficients(hermite_table, hermite, None, sgn(), 8)
        result = partial_sum(coeffs, hermite_table, hermite, 8, 40.0)
        assert result.weighted

    def test_sgn_partial_sums_converge(self, hermite, hermite_table):
        """s_n(sgn, 1) approaches 1 along n."""
        coeffs = coefficients(hermite_table, hermite, None, sgn(), 128)
        errors = [abs(partial_sum(coeffs, hermite_table, hermite, n, 1.0).value - 1.0)
                  for n in (8, 16, 32, 64, 128)]
        assert min(errors) < 0.5 * errors[0]


class TestTailIntegral:
    """Test cases for Lambda_n(t) = int_t^inf p_n w^2."""

    def test_degree_zero_closed_form(self, hermite, hermite_table):
        """Lambda_0(0) = sqrt(mu0) / 2."""
        result = tail_integral(hermite_table, hermite, 0, 0.0)
        assert result.value == pytest.approx(math.sqrt(hermite_table.mu0) / 2.0, rel=1e-10)
        assert result.remainder < 1e-20

    def test_orthogonality_to_constants(self, hermite, hermite_table):
        """Lambda_n over the whole line vanishes for n >= 1."""
        result = tail_integral(hermite_table, hermite, 3, -100.0)
        assert abs(result.value) < 1e-12

    def test_whole_line_cross_check(self, hermite, erdos, hermite_table, erdos_table):
        """Every call reports Lambda_n(-upper) against its exact value."""
        for spec, table in ((hermite, hermite_table), (erdos, erdos_table)):
            result = tail_integral(table, spec, 3, 0.5)
            assert result.upper > 0.0
            assert abs(result.cross_check) < 1e-12
        result = tail_integral(hermite_table, hermite, 0, 1.0)
        assert abs(result.cross_check) < 1e-10
        assert result.value < math.sqrt(hermite_table.mu0) / 2.0

    def test_even_degree_half_line(self, erdos, erdos_table):
        """For even measures Lambda_n(0) = 0 when n is even and n >= 2."""
        assert abs(tail_integral(erdos_table, erdos, 4, 0.0).value) < 1e-12

    def test_grid_matches_pointwise(self, hermite, hermite_table):
        """Cumulated segments agree with single integrals."""
        ts = np.array([1.5, -0.5, 0.0, 3.0])
        grid = tail_integral_grid(hermite_table, hermite, 8, ts)
        pointwise = [tail_integral(hermite_table, hermite, 8, t).value for t in ts]
        np.testing.assert_allclose(grid, pointwise, rtol=1e-9, atol=1e-12)
