"""
Mhaskar-Rakhmanov-Saff numbers a_t and the scale factors delta_u, phi_u.

a_t solves t = F(a) with F(a) = (2/pi) int_0^1 a u Q'(a u) (1-u^2)^{-1/2} du.
After u = sin(theta) the integrand is smooth on [0, pi/2] and F is integrated
with Gauss-Legendre rules of doubling order.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Any, List, Optional, Sequence
import logging
import math

import numpy as np
from scipy.optimize import root_scalar

from ..common.cache import InsertOnceCache, read_json, write_json
from ..common.errors import DomainError, SolverError
from ..common.quadrature import legendre_rule
from .weight_family import WeightSpec

logger = logging.getLogger(__name__)

MRS_REL_TOL = 1e-12
MRS_ABS_TOL = 1e-14
MAX_BRACKET_STEPS = 200
QUAD_START_ORDER = 64
QUAD_MAX_ORDER = 8192
QUAD_REL_CHANGE = 1e-13


@dataclass(frozen=True)
class MrsValue:
    """A solved MRS number a_t with T(a_t) and the equation residual."""
    t: float
    a_t: float
    T_at: float
    residual: float = 0.0

    def to_record(self, descriptor: str) -> Dict[str, Any]:
        """Row of the JSON cache table."""
        return {'weight': descriptor, 't': self.t, 'a': self.a_t, 'T_at': self.T_at}


@dataclass(frozen=True)
class ScaleFactors:
    """delta_u and phi_u(x) for one (u, x)."""
    u: float
    x: float
    delta_u: float
    phi_at_x: float
    a_u: float
    a_2u: float


class MrsCache:
    """
    Memo of MRS numbers keyed by (weight descriptor, t).
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self._store = InsertOnceCache("mrs")

    def lookup(self, descriptor: str, t: float) -> Optional[MrsValue]:
        """Cached value or None."""
        return self._store.get((descriptor, float(t)))

    def insert(self, descriptor: str, value: MrsValue) -> MrsValue:
        """Insert once; returns the value held by the cache."""
        return self._store.insert((descriptor, float(value.t)), value)

    def to_records(self) -> List[Dict[str, Any]]:
        """Rows of the JSON table, sorted by (weight, t)."""
        rows = []
        for (descriptor, _), value in sorted(self._store.items(), key=lambda item: item[0]):
            rows.append(value.to_record(descriptor))
        return rows

    def load_records(self, records: Sequence[Dict[str, Any]]) -> int:
        """Insert rows of a JSON table; returns the number of rows read."""
        for row in records:
            self.insert(str(row['weight']),
                        MrsValue(t=float(row['t']), a_t=float(row['a']), T_at=float(row['T_at'])))
        return len(records)

    def save(self, path: Path) -> None:
        """Persist the cache as a JSON table."""
        write_json(path, self.to_records())
        self.logger.info(f"saved {len(self._store)} MRS values to {path}")

    def load(self, path: Path) -> None:
        """Load a JSON table if it exists."""
        path = Path(path)
        if path.exists():
            count = self.load_records(read_json(path))
            self.logger.info(f"loaded {count} MRS values from {path}")

    def clear(self) -> None:
        """Drop every memoised value."""
        self._store.clear()

    def __len__(self) -> int:
        return len(self._store)


_default_cache = MrsCache()


def default_mrs_cache() -> MrsCache:
    """The process-wide MRS cache."""
    return _default_cache


def mrs_integral(spec: WeightSpec, a: float) -> float:
    """
    F(a) = (2/pi) int_0^{pi/2} a sin(theta) Q'(a sin(theta)) d(theta).
    """
    order = QUAD_START_ORDER
    previous = None
    while True:
        nodes, weights = legendre_rule(order)
        theta = (nodes + 1.0) * (math.pi / 4.0)
        u = a * np.sin(theta)
        values = u * spec.q_prime(u)
        estimate = float(values @ weights) * (math.pi / 4.0) * (2.0 / math.pi)
        if not math.isfinite(estimate):
            return float('inf')
        if previous is not None and abs(estimate - previous) <= QUAD_REL_CHANGE * abs(estimate):
            return estimate
        if order >= QUAD_MAX_ORDER:
            logger.warning(f"{spec.descriptor}: MRS integral at a={a:.6g} not converged at order {order}")
            return estimate
        previous = estimate
        order *= 2


def _bracket(spec: WeightSpec, t: float):
    lo = hi = 1.0
    f_hi = mrs_integral(spec, hi)
    if f_hi < t:
        for _ in range(MAX_BRACKET_STEPS):
            lo, hi = hi, hi * 2.0
            f_hi = mrs_integral(spec, hi)
            if f_hi >= t:
                return lo, hi
    else:
        for _ in range(MAX_BRACKET_STEPS):
            lo, hi = lo / 2.0, lo
            if mrs_integral(spec, lo) <= t:
                return lo, hi
    raise SolverError(f"{spec.descriptor}: could not bracket a_t for t={t} after "
                      f"{MAX_BRACKET_STEPS} doublings")


def solve_mrs(spec: WeightSpec, t: float, rel_tol: float = MRS_REL_TOL,
              abs_tol: float = MRS_ABS_TOL) -> MrsValue:
    """
    Solve F(a) = t by bracket growth from a = 1 followed by Brent's method.
    """
    lo, hi = _bracket(spec, t)
    logger.debug(f"{spec.descriptor}: a_t for t={t} bracketed in [{lo:.6g}, {hi:.6g}]")
    solution = root_scalar(lambda a: mrs_integral(spec, a) - t, bracket=[lo, hi],
                           method='brentq', xtol=1e-300, rtol=4.0 * np.finfo(float).eps,
                           maxiter=500)
    if not solution.converged:
        raise SolverError(f"{spec.descriptor}: MRS solve for t={t} did not converge: {solution.flag}")

    a_t = float(solution.root)
    residual = abs(mrs_integral(spec, a_t) - t)
    if residual > max(abs_tol, rel_tol * t):
        logger.warning(f"{spec.descriptor}: MRS residual {residual:.3e} at t={t} exceeds tolerance")
    return MrsValue(t=float(t), a_t=a_t, T_at=float(spec.t_ratio(a_t)), residual=residual)


def mrs_number(spec: WeightSpec, t: float, cache: Optional[MrsCache] = None) -> MrsValue:
    """
    The MRS number a_t, memoised in the given (or process-wide) cache.
    """
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"MRS number needs t > 0, got {t}")
    cache = cache if cache is not None else _default_cache
    cached = cache.lookup(spec.descriptor, t)
    if cached is not None:
        return cached
    return cache.insert(spec.descriptor, solve_mrs(spec, float(t)))


def mrs_radius(spec: WeightSpec, t: float, cache: Optional[MrsCache] = None) -> float:
    """Shorthand for mrs_number(...).a_t."""
    return mrs_number(spec, t, cache).a_t


def mrs_table(spec: WeightSpec, ts: Sequence[float],
              cache: Optional[MrsCache] = None) -> List[MrsValue]:
    """Solve a_t for several t."""
    return [mrs_number(spec, t, cache) for t in ts]


def edge_width(spec: WeightSpec, u: float, cache: Optional[MrsCache] = None) -> float:
    """delta_u = (u T(a_u))^{-2/3}."""
    value = mrs_number(spec, u, cache)
    return (u * value.T_at) ** (-2.0 / 3.0)


def phi_values(spec: WeightSpec, u: float, x, cache: Optional[MrsCache] = None) -> np.ndarray:
    """
    phi_u(x), vectorised in x; constant at phi_u(a_u) for |x| > a_u.
    """
    a_u = mrs_radius(spec, u, cache)
    a_2u = mrs_radius(spec, 2.0 * u, cache)
    delta_u = edge_width(spec, u, cache)
    ax = np.minimum(np.abs(np.asarray(x, dtype=float)), a_u)
    return (a_u / u) * (1.0 - ax / a_2u) / np.sqrt(1.0 - ax / a_u + delta_u)


def scale_factors(spec: WeightSpec, u: float, x: float,
                  cache: Optional[MrsCache] = None) -> ScaleFactors:
    """
    delta_u and phi_u(x) for one point.
    """
    if not (u > 0.0):
        raise DomainError(f"scale factors need u > 0, got {u}")
    return ScaleFactors(
        u=float(u),
        x=float(x),
        delta_u=edge_width(spec, u, cache),
        phi_at_x=float(phi_values(spec, u, x, cache)),
        a_u=mrs_radius(spec, u, cache),
        a_2u=mrs_radius(spec, 2.0 * u, cache)
    )
