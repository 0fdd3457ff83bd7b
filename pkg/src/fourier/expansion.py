"""
Fourier-type expansions in the orthonormal system {p_k(w^2, .)}.

Everything is computed from the weighted values q_k = p_k w, so that w never
appears alone in a denominator except in the final division of a pointwise
value by w(x).
"""

from dataclasses import dataclass
from typing import Callable, Dict, Any, List, Optional, Sequence
import logging
import math

import numpy as np

from ..bvfun.bv_function import BVFunction, EVEN, ODD
from ..common.errors import DegreeRangeError, DomainError, NumericError
from ..common.quadrature import adaptive_integrate
from ..orthopoly.gauss import GaussRule
from ..orthopoly.recurrence import RecurrenceTable, check_degree, weighted_values
from ..weights.mrs import MrsCache, mrs_radius
from ..weights.weight_family import WeightSpec

logger = logging.getLogger(__name__)

H_SWITCH_FRACTION = 1e-3
COEFF_TRUNCATION_MULTIPLE = 4.0
COEFF_TOL = 1e-11
TAIL_TOL = 1e-13
TAIL_MARGIN = 10.0
CROSS_CHECK_TOL = 1e-9
QUAD_ORDER = 20


@dataclass(frozen=True, eq=False)
class ExpansionCoeffs:
    """c[k] = int f p_k w^2, k < N."""
    descriptor: str
    f_descriptor: str
    N: int
    c: np.ndarray
    method: str = "adaptive"

    @property
    def energy(self) -> float:
        """sum c[k]^2, bounded by int f^2 w^2 (Bessel)."""
        return float(self.c @ self.c)

    def to_dict(self) -> Dict[str, Any]:
        return {'weight': self.descriptor, 'f': self.f_descriptor, 'N': self.N, 'c': self.c.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ExpansionCoeffs":
        c = np.asarray(payload['c'], dtype=float)
        c.setflags(write=False)
        return cls(descriptor=str(payload['weight']), f_descriptor=str(payload['f']),
                   N=int(payload['N']), c=c)


@dataclass(frozen=True)
class PartialSum:
    """
    s_n(f, x); when w(x) underflows, value holds the weighted sum s_n(f, x) w(x).
    """
    value: float
    weighted: bool = False


@dataclass(frozen=True)
class TailIntegral:
    """
    Lambda_n(t) with the remainder estimate of the truncated tail.

    cross_check is Lambda_n(-upper) minus its exact whole-line value
    (sqrt(mu0) for n = 0, else 0).
    """
    value: float
    remainder: float
    upper: float
    cross_check: float = 0.0


def _switch_distance(spec: WeightSpec, n: int, cache: Optional[MrsCache]) -> float:
    return H_SWITCH_FRACTION * mrs_radius(spec, n, cache)


def kernel_direct_weighted(table: RecurrenceTable, spec: WeightSpec, n: int, x, t) -> np.ndarray:
    """w(x) w(t) K_n(x, t) as sum_{k<n} q_k(x) q_k(t)."""
    qx = weighted_values(table, spec, n - 1, x)
    qt = weighted_values(table, spec, n - 1, t)
    return np.sum(qx * qt, axis=0)


def kernel_cd_weighted(table: RecurrenceTable, spec: WeightSpec, n: int, x, t) -> np.ndarray:
    """
    w(x) w(t) K_n(x, t) by Christoffel-Darboux:
    B[n] (q_n(x) q_{n-1}(t) - q_{n-1}(x) q_n(t)) / (x - t).
    """
    qx = weighted_values(table, spec, n, x)
    qt = weighted_values(table, spec, n, t)
    diff = np.asarray(x, dtype=float) - np.asarray(t, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return table.B[n] * (qx[n] * qt[n - 1] - qx[n - 1] * qt[n]) / diff


def kernel_weighted(table: RecurrenceTable, spec: WeightSpec, n: int, x, t,
                    cache: Optional[MrsCache] = None) -> np.ndarray:
    """
    w(x) w(t) K_n(x, t), direct sum for |x - t| <= 1e-3 a_n, CD form otherwise.
    """
    check_degree(table, n, lowest=1)
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    shape = x.shape
    x, t = x.ravel(), t.ravel()
    near = np.abs(x - t) <= _switch_distance(spec, n, cache)
    values = np.empty(x.size)
    if np.any(near):
        values[near] = kernel_direct_weighted(table, spec, n, x[near], t[near])
    if np.any(~near):
        values[~near] = kernel_cd_weighted(table, spec, n, x[~near], t[~near])
    return values.reshape(shape)


def kernel(table: RecurrenceTable, spec: WeightSpec, n: int, x: float, t: float,
           cache: Optional[MrsCache] = None) -> float:
    """
    K_n(x, t) = sum_{k<n} p_k(x) p_k(t).
    """
    scale = float(spec.w(x) * spec.w(t))
    if scale == 0.0:
        raise NumericError(f"{spec.descriptor}: w(x) w(t) underflows at x={x}, t={t}")
    return float(kernel_weighted(table, spec, n, x, t, cache)) / scale


def kernel_integral(table: RecurrenceTable, spec: WeightSpec, n: int, x: float,
                    g: Callable[[np.ndarray], np.ndarray],
                    breakpoints: Sequence[float] = (),
                    cache: Optional[MrsCache] = None) -> float:
    """
    int K_n(x, t) g(t) w^2(t) dt by breakpoint-split adaptive panels.
    """
    wx = float(spec.w(x))
    if wx == 0.0:
        raise NumericError(f"{spec.descriptor}: w underflows at x={x}")
    radius = mrs_radius(spec, COEFF_TRUNCATION_MULTIPLE * n, cache)

    def integrand(ts: np.ndarray) -> np.ndarray:
        return kernel_weighted(table, spec, n, np.full(ts.shape, x), ts, cache) * spec.w(ts) * g(ts)

    total = 0.0
    for lo, hi in _segments(radius, breakpoints):
        estimate, _ = adaptive_integrate(integrand, lo, hi, panels=_panels(n, hi - lo, radius),
                                         order=QUAD_ORDER, tol=COEFF_TOL)
        total += float(estimate)
    return total / wx


def _segments(radius: float, breakpoints: Sequence[float]) -> List[tuple]:
    inner = sorted(b for b in breakpoints if -radius < b < radius)
    edges = [-radius] + inner + [radius]
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _panels(n: int, length: float, radius: float) -> int:
    return max(4, math.ceil(n * length / radius))


def coefficients(table: RecurrenceTable, spec: WeightSpec, rule: Optional[GaussRule],
                 f: BVFunction, N: int, cache: Optional[MrsCache] = None) -> ExpansionCoeffs:
    """
    c[k] = int f p_k w^2 for k < N.

    A polynomial f whose products with p_{N-1} the rule integrates exactly uses
    the rule; anything else is integrated panel-wise between the breakpoints of
    f over [-a_{4N}, a_{4N}].
    """
    if N < 1:
        raise DegreeRangeError(f"need at least one coefficient, got N={N}")
    check_degree(table, N - 1)

    if (rule is not None and f.is_polynomial
            and f.degree + N - 1 <= 2 * rule.n - 1):
        top = max(N, rule.n) - 1
        q = weighted_values(table, spec, top, rule.nodes)
        scale = spec.w(rule.nodes) / np.sum(q[:rule.n] ** 2, axis=0)
        values = f(rule.nodes)
        c = q[:N] @ (scale * values)
        method = "gauss"
    else:
        radius = mrs_radius(spec, COEFF_TRUNCATION_MULTIPLE * N, cache)

        def integrand(ts: np.ndarray) -> np.ndarray:
            values = f(ts)
            if not np.all(np.isfinite(values)):
                raise DomainError(f"{f.descriptor} has non-finite values on [{-radius:.6g}, {radius:.6g}]")
            return weighted_values(table, spec, N - 1, ts) * (spec.w(ts) * values)

        c = np.zeros(N)
        for lo, hi in _segments(radius, f.breakpoints):
            estimate, _ = adaptive_integrate(integrand, lo, hi, panels=_panels(N, hi - lo, radius),
                                             order=QUAD_ORDER, tol=COEFF_TOL)
            c += estimate
        method = "adaptive"

    # symmetric measure: the other parity vanishes
    if f.parity == ODD:
        c[0::2] = 0.0
    elif f.parity == EVEN:
        c[1::2] = 0.0
    c.setflags(write=False)
    logger.info(f"expanded {f.descriptor} in {spec.descriptor}: N={N} ({method})")
    return ExpansionCoeffs(descriptor=spec.descriptor, f_descriptor=f.descriptor, N=N, c=c,
                           method=method)


def weighted_norm_squared(spec: WeightSpec, f: BVFunction, radius: float) -> float:
    """int_{|t| <= radius} f^2 w^2."""
    total = 0.0
    for lo, hi in _segments(radius, f.breakpoints):
        estimate, _ = adaptive_integrate(lambda ts: (f(ts) * spec.w(ts)) ** 2, lo, hi,
                                         order=QUAD_ORDER, tol=COEFF_TOL)
        total += float(estimate)
    return total


def partial_sum_values(coeffs: ExpansionCoeffs, table: RecurrenceTable, spec: WeightSpec,
                       n: int, x) -> np.ndarray:
    """Weighted partial sums s_n(f, x) w(x) = sum_{k<n} c[k] q_k(x)."""
    if not (0 <= n <= coeffs.N):
        raise DegreeRangeError(f"partial sum of order {n} needs 0 <= n <= {coeffs.N}")
    if coeffs.descriptor != spec.descriptor:
        raise DomainError(f"coefficients belong to {coeffs.descriptor}, not {spec.descriptor}")
    xs = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros(xs.shape)
    q = weighted_values(table, spec, n - 1, xs)
    return np.tensordot(coeffs.c[:n], q, axes=1)


def partial_sum(coeffs: ExpansionCoeffs, table: RecurrenceTable, spec: WeightSpec,
                n: int, x: float) -> PartialSum:
    """
    s_n(f, x) = sum_{k<n} c[k] p_k(x).
    """
    weighted = float(partial_sum_values(coeffs, table, spec, n, x))
    w = float(spec.w(x))
    if w < np.finfo(float).tiny:
        logger.debug(f"{spec.descriptor}: w underflows at x={x}, returning weighted partial sum")
        return PartialSum(value=weighted, weighted=True)
    return PartialSum(value=weighted / w)


def _tail_upper(spec: WeightSpec, n: int, cache: Optional[MrsCache]) -> float:
    return mrs_radius(spec, COEFF_TRUNCATION_MULTIPLE * max(n, 1), cache) + TAIL_MARGIN


def _tail_remainder(table: RecurrenceTable, spec: WeightSpec, n: int, upper: float) -> float:
    # int_U^inf q_n w ~ |q_n(U) w(U)| / (2 Q'(U))
    edge = abs(float(weighted_values(table, spec, n, upper)[n] * spec.w(upper)))
    slope = float(spec.q_prime(upper))
    return edge / (2.0 * slope) if slope > 0.0 else edge


def tail_integral(table: RecurrenceTable, spec: WeightSpec, n: int, t: float,
                  cache: Optional[MrsCache] = None) -> TailIntegral:
    """
    Lambda_n(t) = int_t^inf p_n w^2, integrated up to a_{4n} + 10.

    The whole-line value Lambda_n(-a_{4n} - 10) is checked against its exact
    value and the deviation reported as cross_check.
    """
    check_degree(table, n)
    upper = _tail_upper(spec, n, cache)
    remainder = _tail_remainder(table, spec, n, upper)

    def integrand(ts: np.ndarray) -> np.ndarray:
        return weighted_values(table, spec, n, ts)[n] * spec.w(ts)

    def integrate(lo: float) -> float:
        estimate, _ = adaptive_integrate(integrand, lo, upper, panels=max(8, 2 * n), order=QUAD_ORDER,
                                         tol=TAIL_TOL, max_doublings=10)
        return float(estimate)

    whole_line = integrate(-upper)
    cross_check = whole_line - (math.sqrt(table.mu0) if n == 0 else 0.0)
    if abs(cross_check) > CROSS_CHECK_TOL:
        logger.warning(f"{spec.descriptor}: Lambda_{n} over the whole line is off by {cross_check:.3e}")

    lo = max(float(t), -upper)
    if t < -upper:
        remainder *= 2.0
    if lo >= upper:
        value = 0.0
    elif lo == -upper:
        value = whole_line
    else:
        value = integrate(lo)
    return TailIntegral(value=value, remainder=remainder, upper=upper, cross_check=cross_check)


def tail_integral_grid(table: RecurrenceTable, spec: WeightSpec, n: int, ts: Sequence[float],
                       cache: Optional[MrsCache] = None) -> np.ndarray:
    """
    Lambda_n on a grid, by cumulating segment integrals from the right.
    """
    check_degree(table, n)
    ts = np.asarray(ts, dtype=float)
    order = np.argsort(ts)
    ordered = ts[order]
    upper = _tail_upper(spec, n, cache)

    def integrand(us: np.ndarray) -> np.ndarray:
        return weighted_values(table, spec, n, us)[n] * spec.w(us)

    edges = np.append(np.clip(ordered, -upper, upper), upper)
    pieces = np.zeros(ordered.size)
    for i in range(ordered.size):
        lo, hi = edges[i], edges[i + 1]
        if hi > lo:
            pieces[i], _ = adaptive_integrate(integrand, lo, hi, panels=4, order=QUAD_ORDER,
                                              tol=TAIL_TOL, max_doublings=10)
    values = np.empty(ordered.size)
    values[order] = np.cumsum(pieces[::-1])[::-1]
    return values
