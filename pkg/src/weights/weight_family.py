"""
Exponential weight families w = exp(-Q) on the real line.

Freud weights use Q(x) = |x|^alpha; Erdos weights use the iterated exponential
Q(x) = exp_ell(|x|^alpha) - exp_ell(0). All derivatives are analytic: the Erdos
tower is differentiated by the chain rule and evaluated in log space so that
overflow saturates instead of producing inf/nan.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Any, Optional, Sequence, Union
import logging
import math
import sys

import numpy as np

from ..common.checks import CheckLevel, CheckRegistry, CheckResult
from ..common.errors import DescriptorError, DomainError

logger = logging.getLogger(__name__)

FLOAT_MAX = sys.float_info.max
WEIGHT_GRAMMAR = "weight descriptors: freud:<alpha> (alpha > 1) | erdos:<ell>:<alpha> (ell >= 0, alpha > 1)"
ERDOS_GROWTH_THRESHOLD = 10.0

ArrayLike = Union[float, Sequence[float], np.ndarray]


class WeightFamily(Enum):
    """Supported weight families."""
    FREUD = "freud"
    ERDOS = "erdos"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CustomWeight:
    """User supplied Q, Q' and Q'' (vectorised callables)."""
    name: str
    q: Callable[[np.ndarray], np.ndarray]
    q_prime: Callable[[np.ndarray], np.ndarray]
    q_second: Callable[[np.ndarray], np.ndarray]
    lambda_lower: Optional[float] = None


@dataclass(frozen=True)
class WeightEvalRecord:
    """Q, Q', Q'', T and w at a single point."""
    x: float
    Q: float
    Qp: float
    Qpp: float
    T: float
    w: float
    overflow: bool = False
    t_defined: bool = True
    qpp_singular: bool = False


@dataclass(frozen=True)
class WeightArrays:
    """Vectorised evaluation of a weight."""
    q: np.ndarray
    qp: np.ndarray
    qpp: np.ndarray
    t: np.ndarray
    w: np.ndarray
    overflow: np.ndarray
    qpp_singular: np.ndarray


@dataclass(frozen=True)
class WeightSpec:
    """
    An instance of an exponential weight family.

    lambda_lower is the constant with T(x) >= lambda_lower > 1; freud_type is True
    when T stays bounded on (0, inf).
    """
    family: WeightFamily
    descriptor: str
    lambda_lower: float
    freud_type: bool
    alpha: Optional[float] = None
    ell: int = 0
    custom: Optional[CustomWeight] = field(default=None, compare=False)

    def evaluate(self, x: ArrayLike) -> WeightArrays:
        """Evaluate every weight quantity at x (scalar or array)."""
        xs = np.asarray(x, dtype=float)
        if self.family is WeightFamily.FREUD:
            return _evaluate_freud(self.alpha, xs)
        if self.family is WeightFamily.ERDOS:
            return _evaluate_erdos(self.ell, self.alpha, xs)
        return _evaluate_custom(self.custom, xs)

    def q(self, x: ArrayLike) -> np.ndarray:
        """Q(x)."""
        return self.evaluate(x).q

    def q_prime(self, x: ArrayLike) -> np.ndarray:
        """Q'(x)."""
        return self.evaluate(x).qp

    def q_second(self, x: ArrayLike) -> np.ndarray:
        """Q''(x)."""
        return self.evaluate(x).qpp

    def t_ratio(self, x: ArrayLike) -> np.ndarray:
        """T(x) = x Q'(x) / Q(x), with the analytic limit at x = 0."""
        return self.evaluate(x).t

    def w(self, x: ArrayLike) -> np.ndarray:
        """w(x) = exp(-Q(x))."""
        return self.evaluate(x).w

    def w_power(self, x: ArrayLike, delta: float) -> np.ndarray:
        """w(x)^delta = exp(-delta Q(x))."""
        return np.exp(-delta * self.evaluate(x).q)

    @property
    def is_erdos_type(self) -> bool:
        """True when T is unbounded."""
        return not self.freud_type


def _saturate(values: np.ndarray) -> np.ndarray:
    """Replace non-finite entries by +-FLOAT_MAX (nan maps to +FLOAT_MAX)."""
    out = np.where(np.isnan(values), FLOAT_MAX, values)
    return np.clip(out, -FLOAT_MAX, FLOAT_MAX)


def _evaluate_freud(alpha: float, xs: np.ndarray) -> WeightArrays:
    ax = np.abs(xs)
    sign = np.sign(xs)
    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        q = ax ** alpha
        qp = alpha * ax ** (alpha - 1.0) * sign
        qpp = alpha * (alpha - 1.0) * ax ** (alpha - 2.0)
    qpp_singular = ~np.isfinite(qpp)
    overflow = ~np.isfinite(q) | ~np.isfinite(qp)
    t = np.full_like(ax, alpha)
    q, qp, qpp = _saturate(q), _saturate(qp), _saturate(qpp)
    w = np.exp(-q)
    return WeightArrays(q=q, qp=qp, qpp=qpp, t=t, w=w, overflow=overflow,
                        qpp_singular=qpp_singular)


def _log_expm1(z: np.ndarray) -> np.ndarray:
    """log(exp(z) - 1) for z > 0 without overflow."""
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        small = np.log(np.expm1(np.minimum(z, 30.0)))
        large = z + np.log1p(-np.exp(-np.maximum(z, 30.0)))
    return np.where(z > 30.0, large, small)


def exp_tower_at_zero(ell: int) -> list:
    """exp_j(0) for j = 0..ell (exp_0(0) = 0)."""
    values = [0.0]
    for _ in range(ell):
        values.append(math.exp(values[-1]))
    return values


def _evaluate_erdos(ell: int, alpha: float, xs: np.ndarray) -> WeightArrays:
    ax = np.abs(xs)
    sign = np.sign(xs)
    e0 = exp_tower_at_zero(ell)

    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        y = ax ** alpha
        # D_j = exp_j(y) - exp_j(0), built without cancellation near y = 0
        diff = y
        level_values = [y]                     # exp_j(y), j = 0..ell
        partial_logs = [np.zeros_like(y)]      # S_m = sum_{i<m} exp_i(y)
        for j in range(1, ell + 1):
            partial_logs.append(partial_logs[-1] + level_values[-1])
            prev_diff = diff
            diff = e0[j] * np.expm1(prev_diff)
            level_values.append(e0[j] + diff)
        q = diff
        log_d1 = partial_logs[ell]                       # log d exp_ell / dy
        d1 = np.exp(log_d1)
        chain_sum = np.zeros_like(y)
        for m in range(ell):
            chain_sum = chain_sum + np.exp(partial_logs[m])
        inner = alpha * ax ** (alpha - 1.0)
        qp = inner * d1 * sign
        qpp = d1 * (inner ** 2 * chain_sum + alpha * (alpha - 1.0) * ax ** (alpha - 2.0))

        log_q = math.log(e0[ell]) + _log_expm1(prev_diff)
        log_t = math.log(alpha) + np.log(y) + log_d1 - log_q
        t = np.exp(log_t)
    t = np.where(ax == 0.0, alpha, t)

    qpp_singular = (ax == 0.0) & ~np.isfinite(qpp)
    overflow = ~np.isfinite(q) | ~np.isfinite(qp) | (~np.isfinite(qpp) & ~qpp_singular)
    t = _saturate(t)
    q, qp, qpp = _saturate(q), _saturate(qp), _saturate(qpp)
    w = np.exp(-q)
    return WeightArrays(q=q, qp=qp, qpp=qpp, t=t, w=w, overflow=overflow,
                        qpp_singular=qpp_singular)


def _evaluate_custom(custom: CustomWeight, xs: np.ndarray) -> WeightArrays:
    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        q = np.asarray(custom.q(xs), dtype=float) * np.ones_like(xs)
        qp = np.asarray(custom.q_prime(xs), dtype=float) * np.ones_like(xs)
        qpp = np.asarray(custom.q_second(xs), dtype=float) * np.ones_like(xs)
        t = np.where(xs != 0.0, xs * qp / np.where(q != 0.0, q, 1.0), np.nan)
    overflow = ~np.isfinite(q) | ~np.isfinite(qp)
    qpp_singular = ~np.isfinite(qpp)
    q, qp, qpp = _saturate(q), _saturate(qp), _saturate(qpp)
    t = np.where(np.isnan(t), np.nan, _saturate(t))
    w = np.exp(-q)
    return WeightArrays(q=q, qp=qp, qpp=qpp, t=t, w=w, overflow=overflow,
                        qpp_singular=qpp_singular)


def _format_param(value: float) -> str:
    return format(float(value), "g")


def parse_weight_descriptor(text: str) -> Dict[str, Any]:
    """
    Parse `freud:<alpha>` or `erdos:<ell>:<alpha>` into its fields.
    """
    parts = [p.strip() for p in str(text).strip().lower().split(":")]
    try:
        if parts[0] == WeightFamily.FREUD.value and len(parts) == 2:
            return {'family': WeightFamily.FREUD, 'alpha': float(parts[1]), 'ell': 0}
        if parts[0] == WeightFamily.ERDOS.value and len(parts) == 3:
            return {'family': WeightFamily.ERDOS, 'ell': int(parts[1]), 'alpha': float(parts[2])}
    except ValueError as e:
        raise DescriptorError(f"malformed weight descriptor {text!r}: {e}. {WEIGHT_GRAMMAR}")
    raise DescriptorError(f"unknown weight descriptor {text!r}. {WEIGHT_GRAMMAR}")


def make_weight(descriptor: Union[str, CustomWeight]) -> WeightSpec:
    """
    Build a WeightSpec from a descriptor string or a CustomWeight.
    """
    if isinstance(descriptor, CustomWeight):
        return _make_custom(descriptor)

    fields = parse_weight_descriptor(descriptor)
    alpha, ell = fields['alpha'], fields['ell']
    if not math.isfinite(alpha) or alpha <= 1.0:
        raise DomainError(f"class condition T >= Lambda > 1 violated: alpha={alpha} must exceed 1")
    if ell < 0:
        raise DomainError(f"ell must be a non-negative integer, got {ell}")

    if fields['family'] is WeightFamily.FREUD or ell == 0:
        spec = WeightSpec(family=WeightFamily.FREUD,
                          descriptor=f"freud:{_format_param(alpha)}",
                          lambda_lower=alpha, freud_type=True, alpha=alpha, ell=0)
    else:
        spec = WeightSpec(family=WeightFamily.ERDOS,
                          descriptor=f"erdos:{ell}:{_format_param(alpha)}",
                          lambda_lower=alpha, freud_type=False, alpha=alpha, ell=ell)
    logger.debug(f"built weight {spec.descriptor}")
    return spec


DEFAULT_CUSTOM_GRID = np.geomspace(0.05, 20.0, 200)


def _make_custom(custom: CustomWeight) -> WeightSpec:
    if not (callable(custom.q) and callable(custom.q_prime) and callable(custom.q_second)):
        raise DomainError("custom weights need Q, Q' and Q'' callables")
    arrays = _evaluate_custom(custom, DEFAULT_CUSTOM_GRID)
    t = arrays.t[np.isfinite(arrays.t)]
    lambda_lower = custom.lambda_lower
    if lambda_lower is None:
        lambda_lower = float(np.min(t)) if t.size else float('nan')
    growth = float(t[-1] / t[0]) if t.size >= 2 and t[0] > 0 else float('inf')
    return WeightSpec(family=WeightFamily.CUSTOM, descriptor=f"custom:{custom.name}",
                      lambda_lower=lambda_lower, freud_type=growth <= ERDOS_GROWTH_THRESHOLD,
                      custom=custom)


def weight_eval(spec: WeightSpec, x: float) -> WeightEvalRecord:
    """
    Evaluate Q, Q', Q'', T and w at a single finite point.
    """
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    arrays = spec.evaluate(np.array([x], dtype=float))
    overflow = bool(arrays.overflow[0])
    if overflow:
        logger.warning(f"{spec.descriptor}: overflow-large Q at x={x}; w saturated to 0")
    t_value = float(arrays.t[0])
    return WeightEvalRecord(
        x=float(x),
        Q=float(arrays.q[0]),
        Qp=float(arrays.qp[0]),
        Qpp=float(arrays.qpp[0]),
        T=t_value,
        w=float(arrays.w[0]),
        overflow=overflow,
        t_defined=math.isfinite(t_value),
        qpp_singular=bool(arrays.qpp_singular[0])
    )


@dataclass
class ClassReport:
    """Outcome of the class-condition checks on a grid."""
    descriptor: str
    conditions: Dict[str, CheckResult]
    classification: str
    t_growth: float
    c1_observed: float
    c2_observed: float
    quasi_increasing_constant: float
    class_plus: bool

    @property
    def passed(self) -> bool:
        """True when every condition (a)-(e) holds on the grid."""
        return all(result.passed for result in self.conditions.values())

    def to_dict(self) -> Dict[str, Any]:
        """Plain-dict view for JSON reports."""
        return {
            'weight': self.descriptor,
            'passed': self.passed,
            'classification': self.classification,
            't_growth': self.t_growth,
            'c1_observed': self.c1_observed,
            'c2_observed': self.c2_observed,
            'quasi_increasing_constant': self.quasi_increasing_constant,
            'class_plus': self.class_plus,
            'conditions': {key: value.to_dict() for key, value in self.conditions.items()}
        }


def _condition(rule: str, passed: bool, message: str, **details) -> CheckResult:
    return CheckResult(rule=rule, level=CheckLevel.INFO if passed else CheckLevel.FAIL,
                       message=message, passed=bool(passed), details=details)


def validate_class(spec: WeightSpec, grid: Sequence[float],
                   growth_threshold: float = ERDOS_GROWTH_THRESHOLD) -> ClassReport:
    """
    Check the class conditions (a)-(e) on a grid of positive points and classify
    the weight as Freud-type (T bounded) or Erdos-type (T growing).

    Failures are reported, never raised.
    """
    xs = np.asarray(grid, dtype=float)
    if xs.size == 0 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise DomainError("grid must be non-empty, positive and strictly increasing")

    registry = CheckRegistry(f"class conditions for {spec.descriptor}")
    pos = spec.evaluate(xs)
    neg = spec.evaluate(-xs)
    origin = spec.evaluate(np.array([0.0]))
    near = spec.evaluate(np.array([xs[0] * 1e-3]))

    even = np.allclose(pos.q, neg.q, rtol=1e-12, atol=0.0)
    odd = np.allclose(pos.qp, -neg.qp, rtol=1e-12, atol=0.0)
    q0 = float(origin.q[0])
    qp_to_zero = abs(float(near.qp[0])) < abs(float(pos.qp[0])) or float(pos.qp[0]) == 0.0
    registry.record(_condition(
        "a", q0 == 0.0 and even and odd and qp_to_zero,
        "Q(0)=0, Q even, Q' odd and continuous at 0",
        q_at_zero=q0, even=bool(even), odd_derivative=bool(odd), derivative_to_zero=bool(qp_to_zero)))

    qpp_min = float(np.min(pos.qpp))
    registry.record(_condition("b", qpp_min > 0.0, "Q'' > 0 away from 0", qpp_min=qpp_min))

    increasing = bool(np.all(np.diff(pos.q) > 0.0))
    registry.record(_condition("c", increasing and float(pos.q[-1]) > float(pos.q[0]),
                               "Q strictly increasing on the grid", q_last=float(pos.q[-1])))

    t = pos.t
    t_min = float(np.min(t))
    # quasi-increasing constant: max over x < y of T(x)/T(y)
    suffix_min = np.minimum.accumulate(t[::-1])[::-1]
    quasi = float(np.max(t[:-1] / suffix_min[1:])) if t.size > 1 else 1.0
    lambda_ok = t_min >= spec.lambda_lower * (1.0 - 1e-12) if math.isfinite(spec.lambda_lower) else False
    registry.record(_condition(
        "d", t_min > 1.0 + 1e-12 and lambda_ok and math.isfinite(quasi),
        "T >= Lambda > 1 and quasi-increasing",
        t_min=t_min, t_max=float(np.max(t)), lambda_lower=spec.lambda_lower,
        quasi_increasing_constant=quasi))

    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = pos.qpp * pos.q / pos.qp ** 2
    finite_ratio = ratio[np.isfinite(ratio)]
    c1 = float(np.max(finite_ratio)) if finite_ratio.size else float('inf')
    registry.record(_condition("e", math.isfinite(c1) and finite_ratio.size == ratio.size,
                               "Q''Q/Q'^2 bounded on the grid", c1_observed=c1))

    outside = ratio[xs >= np.median(xs)]
    outside = outside[np.isfinite(outside)]
    c2 = float(np.min(outside)) if outside.size else 0.0

    growth = float(t[-1] / t[0]) if t[0] > 0 else float('inf')
    classification = "erdos" if growth > growth_threshold else "freud"
    report = ClassReport(
        descriptor=spec.descriptor,
        conditions={r.rule: r for r in registry.results},
        classification=classification,
        t_growth=growth,
        c1_observed=c1,
        c2_observed=c2,
        quasi_increasing_constant=quasi,
        class_plus=c2 > 0.0
    )
    logger.info(f"{spec.descriptor}: class check {'passed' if report.passed else 'failed'}, "
                f"classified {classification}-type (T growth {growth:.3g})")
    return report
