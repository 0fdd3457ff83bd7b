"""
Piecewise-smooth functions of bounded variation and the weighted variation

    V_delta(I, f) = int_I w^delta(t) |df(t)|,

with |df| split into jump atoms at breakpoints and the density |f'(t)| dt on
the smooth pieces.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Any, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from ..common.errors import BVConstructionError, DescriptorError, DomainError
from ..weights.weight_family import WeightSpec

logger = logging.getLogger(__name__)

F_GRAMMAR = ("function descriptors: sgn | step:<x0> | ind:<a>:<b> | poly:<c0,c1,...> "
             "| chi:<x> | bump:<x0>")

DENSITY_CUTOFF = 1e-14
TRUNCATION_GROWTH = 1.25
MAX_TRUNCATION_STEPS = 400
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200

EVEN = 1
ODD = -1
NO_PARITY = 0


@dataclass(frozen=True)
class SmoothPiece:
    """
    A smooth function on one interval between breakpoints, with its derivative.
    """
    func: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    constant: bool = False

    def __call__(self, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(xs), dtype=float), xs.shape)

    def slope(self, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.derivative(xs), dtype=float), xs.shape)

    @classmethod
    def constant_piece(cls, value: float) -> "SmoothPiece":
        value = float(value)
        return cls(func=lambda x: np.full(np.shape(x), value),
                   derivative=lambda x: np.zeros(np.shape(x)),
                   constant=True)

    @classmethod
    def from_polynomial(cls, poly: Polynomial) -> "SmoothPiece":
        poly = Polynomial(poly.coef)
        deriv = poly.deriv()
        return cls(func=poly, derivative=deriv, constant=poly.degree() == 0)


@dataclass(frozen=True, eq=False)
class BVFunction:
    """
    Right-continuous piecewise-smooth function.

    pieces[i] lives on [breakpoints[i-1], breakpoints[i]); the first and last
    pieces extend to -inf and +inf.
    """
    breakpoints: np.ndarray
    pieces: Tuple[SmoothPiece, ...]
    descriptor: str
    support_hint: float = math.inf
    parity: int = NO_PARITY
    polynomial: Optional[Polynomial] = None
    jumps: np.ndarray = field(init=False)

    def __post_init__(self):
        bps = np.asarray(self.breakpoints, dtype=float)
        if bps.ndim != 1 or not np.all(np.isfinite(bps)):
            raise BVConstructionError("breakpoints must be a finite one-dimensional sequence")
        if bps.size > 1 and not np.all(np.diff(bps) > 0.0):
            raise BVConstructionError(f"breakpoints must be strictly increasing: {bps.tolist()}")
        if len(self.pieces) != bps.size + 1:
            raise BVConstructionError(f"{bps.size} breakpoints need {bps.size + 1} pieces, "
                                      f"got {len(self.pieces)}")
        jumps = np.array([float(self.pieces[i + 1](b) - self.pieces[i](b))
                          for i, b in enumerate(bps)])
        bps.setflags(write=False)
        jumps.setflags(write=False)
        object.__setattr__(self, 'breakpoints', bps)
        object.__setattr__(self, 'pieces', tuple(self.pieces))
        object.__setattr__(self, 'jumps', jumps)

    def _piece_index(self, xs: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.breakpoints, xs, side='right')

    def _dispatch(self, x, method: str) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        index = self._piece_index(xs)
        out = np.empty(xs.shape)
        for i, piece in enumerate(self.pieces):
            mask = index == i
            if np.any(mask):
                out[mask] = getattr(piece, method)(xs[mask])
        return out

    def eval(self, x) -> np.ndarray:
        """f(x); at a breakpoint the right limit."""
        return self._dispatch(x, '__call__')

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def derivative(self, x) -> np.ndarray:
        """f'(x) on the smooth pieces."""
        return self._dispatch(x, 'slope')

    @property
    def is_polynomial(self) -> bool:
        return self.polynomial is not None

    @property
    def degree(self) -> Optional[int]:
        return None if self.polynomial is None else int(self.polynomial.degree())

    @property
    def is_constant(self) -> bool:
        return all(p.constant for p in self.pieces) and not np.any(self.jumps != 0.0)

    def is_continuity_point(self, x: float) -> bool:
        """False when x is a breakpoint with a non-zero jump."""
        hit = np.isclose(self.breakpoints, x, rtol=0.0, atol=1e-12)
        return not np.any(hit & (self.jumps != 0.0))

    def smooth_intervals(self, lo: float, hi: float) -> List[Tuple[float, float, SmoothPiece]]:
        """
        Non-empty sub-intervals of [lo, hi] between breakpoints, with their piece.
        """
        edges = np.concatenate([[-math.inf], self.breakpoints, [math.inf]])
        intervals = []
        for i, piece in enumerate(self.pieces):
            a, b = max(lo, edges[i]), min(hi, edges[i + 1])
            if b > a:
                intervals.append((float(a), float(b), piece))
        return intervals


@dataclass(frozen=True)
class VariationReport:
    """V_delta split into atoms and density, with the truncated-tail remainder."""
    value: float
    atoms: float
    density: float
    remainder: float
    lo: float
    hi: float

    def to_dict(self) -> Dict[str, Any]:
        return {'value': self.value, 'atoms': self.atoms, 'density': self.density,
                'remainder': self.remainder, 'lo': self.lo, 'hi': self.hi}


@dataclass(frozen=True)
class JumpEnvelopeFit:
    """
    Smallest c with w^delta(x+t)|f(x+t) - f(x)| <= exp(c x Q'(x)) V_delta([x, x+t])
    over the sampled t moving towards the origin.
    """
    x: float
    delta: float
    c_hat: float
    samples: int
    outward_max_ratio: float
    outward_ok: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'x': self.x, 'delta': self.delta, 'c_hat': self.c_hat, 'samples': self.samples,
                'outward_max_ratio': self.outward_max_ratio, 'outward_ok': self.outward_ok}


def _polynomial_parity(coeffs: np.ndarray) -> int:
    if not np.any(coeffs[1::2]):
        return EVEN
    if not np.any(coeffs[0::2]):
        return ODD
    return NO_PARITY


def step(x0: float, lo: float = 0.0, hi: float = 1.0, descriptor: Optional[str] = None) -> BVFunction:
    """lo for t < x0, hi for t >= x0."""
    return BVFunction(
        breakpoints=np.array([float(x0)]),
        pieces=(SmoothPiece.constant_piece(lo), SmoothPiece.constant_piece(hi)),
        descriptor=descriptor or f"step:{x0:g}",
        support_hint=abs(float(x0)),
        parity=ODD if (x0 == 0.0 and lo == -hi) else NO_PARITY
    )


def sgn() -> BVFunction:
    """Sign function, +1 at the origin."""
    return step(0.0, -1.0, 1.0, descriptor="sgn")


def chi(x: float) -> BVFunction:
    """chi_x(t) = 1 for t <= x, 0 beyond; right-continuous at t = x."""
    return step(x, 1.0, 0.0, descriptor=f"chi:{x:g}")


def indicator(a: float, b: float) -> BVFunction:
    """Indicator of [a, b)."""
    if not a < b:
        raise BVConstructionError(f"indicator needs a < b, got [{a}, {b}]")
    return BVFunction(
        breakpoints=np.array([float(a), float(b)]),
        pieces=(SmoothPiece.constant_piece(0.0), SmoothPiece.constant_piece(1.0),
                SmoothPiece.constant_piece(0.0)),
        descriptor=f"ind:{a:g}:{b:g}",
        support_hint=max(abs(a), abs(b)),
        parity=EVEN if a == -b else NO_PARITY
    )


def polynomial(coeffs: Sequence[float]) -> BVFunction:
    """Polynomial c0 + c1 t + ... (no breakpoints)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
        raise BVConstructionError("polynomial needs at least one finite coefficient")
    poly = Polynomial(coeffs).trim()
    return BVFunction(
        breakpoints=np.array([]),
        pieces=(SmoothPiece.from_polynomial(poly),),
        descriptor="poly:" + ",".join(f"{c:g}" for c in coeffs),
        support_hint=0.0 if poly.degree() == 0 else math.inf,
        parity=_polynomial_parity(poly.coef),
        polynomial=poly
    )


def smooth_plus_jump(x0: float = 0.0, height: float = 1.0) -> BVFunction:
    """exp(-t^2) plus a step of the given height at x0."""
    bump = SmoothPiece(func=lambda t: np.exp(-t * t), derivative=lambda t: -2.0 * t * np.exp(-t * t))
    raised = SmoothPiece(func=lambda t: np.exp(-t * t) + height,
                         derivative=lambda t: -2.0 * t * np.exp(-t * t))
    return BVFunction(breakpoints=np.array([float(x0)]), pieces=(bump, raised),
                      descriptor=f"bump:{x0:g}")


def piecewise(breakpoints: Sequence[float], pieces: Sequence[SmoothPiece],
              jumps: Optional[Sequence[float]] = None, descriptor: str = "piecewise",
              support_hint: float = math.inf) -> BVFunction:
    """
    General constructor; declared jumps must match the pieces at the breakpoints.
    """
    f = BVFunction(breakpoints=np.asarray(breakpoints, dtype=float), pieces=tuple(pieces),
                   descriptor=descriptor, support_hint=support_hint)
    if jumps is not None:
        declared = np.asarray(jumps, dtype=float)
        if declared.shape != f.jumps.shape or not np.allclose(declared, f.jumps, rtol=1e-12, atol=1e-12):
            raise BVConstructionError(f"declared jumps {declared.tolist()} disagree with the "
                                      f"pieces {f.jumps.tolist()}")
    return f


def build_bv(descriptor: str) -> BVFunction:
    """
    Parse a function descriptor, e.g. "sgn", "step:1", "ind:0.5:1.5", "poly:1,0,2".
    """
    text = descriptor.strip()
    head, _, rest = text.partition(":")
    try:
        if head == "sgn" and not rest:
            return sgn()
        if head == "step":
            return step(float(rest))
        if head == "chi":
            return chi(float(rest))
        if head == "bump":
            return smooth_plus_jump(float(rest))
        if head == "ind":
            a, b = rest.split(":")
            return indicator(float(a), float(b))
        if head == "poly":
            return polynomial([float(c) for c in rest.split(",")])
    except ValueError as e:
        if isinstance(e, DomainError):
            raise
        raise DescriptorError(f"bad function descriptor {descriptor!r}; {F_GRAMMAR}") from e
    raise DescriptorError(f"unknown function descriptor {descriptor!r}; {F_GRAMMAR}")


def _density_integral(f: BVFunction, lo: float, hi: float,
                      weight: Callable[[float], float]) -> float:
    total = 0.0
    for a, b, piece in f.smooth_intervals(lo, hi):
        if piece.constant:
            continue
        value, _ = quad(lambda t: weight(t) * abs(float(piece.slope(t))), a, b,
                        epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
        total += value
    return total


def _atoms(f: BVFunction, lo: float, hi: float, weight: Callable[[np.ndarray], np.ndarray]) -> float:
    inside = (f.breakpoints >= lo) & (f.breakpoints <= hi)
    if not np.any(inside):
        return 0.0
    return float(np.sum(weight(f.breakpoints[inside]) * np.abs(f.jumps[inside])))


def _tail_radius(spec: WeightSpec, f: BVFunction, delta: float) -> Tuple[float, float]:
    """
    Radius beyond which w^delta |f'| < DENSITY_CUTOFF, and the remainder estimate
    of the truncated tails.
    """
    if all(p.constant for p in f.pieces):
        return 0.0, 0.0
    if math.isfinite(f.support_hint):
        return f.support_hint, 0.0

    radius = max(1.0, float(np.max(np.abs(f.breakpoints))) if f.breakpoints.size else 1.0)
    for _ in range(MAX_TRUNCATION_STEPS):
        ends = np.array([-radius, radius])
        density = spec.w_power(ends, delta) * np.abs(f.derivative(ends))
        if np.all(density < DENSITY_CUTOFF):
            break
        radius *= TRUNCATION_GROWTH
    else:
        raise DomainError(f"{f.descriptor}: variation density does not decay under w^{delta}")

    # int_R^inf w^delta |f'| ~ w^delta(R) |f'(R)| / (delta Q'(R))
    slope = float(spec.q_prime(radius))
    remainder = float(np.sum(density)) / (delta * slope) if slope > 0.0 else float(np.sum(density))
    return radius, remainder


def _check_delta(delta: float) -> None:
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta}")


def v_delta_report(spec: WeightSpec, f: BVFunction, interval: Optional[Tuple[float, float]] = None,
                   delta: float = 1.0) -> VariationReport:
    """
    V_delta(I, f) with its atom/density split; interval None means the whole line.
    """
    _check_delta(delta)
    lo, hi = (-math.inf, math.inf) if interval is None else (float(interval[0]), float(interval[1]))
    if lo > hi:
        raise DomainError(f"interval endpoints must satisfy lo <= hi, got [{lo}, {hi}]")

    atoms = _atoms(f, lo, hi, lambda t: spec.w_power(t, delta))

    remainder = 0.0
    if math.isinf(lo) or math.isinf(hi):
        radius, tail = _tail_radius(spec, f, delta)
        lo_eff, hi_eff = max(lo, -radius), min(hi, radius)
        remainder = tail * (int(math.isinf(lo)) + int(math.isinf(hi))) / 2.0
    else:
        lo_eff, hi_eff = lo, hi

    density = 0.0
    if hi_eff > lo_eff:
        density = _density_integral(f, lo_eff, hi_eff, lambda t: float(spec.w_power(t, delta)))
    return VariationReport(value=atoms + density, atoms=atoms, density=density,
                           remainder=remainder, lo=lo, hi=hi)


def v_delta(spec: WeightSpec, f: BVFunction, interval: Optional[Tuple[float, float]] = None,
            delta: float = 1.0) -> float:
    """V_delta(I, f) = int_I w^delta |df|."""
    return v_delta_report(spec, f, interval, delta).value


def total_variation(f: BVFunction, lo: float, hi: float) -> float:
    """
    Unweighted variation over the compact interval [lo, hi].
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise DomainError(f"total variation needs a compact interval, got [{lo}, {hi}]")
    atoms = _atoms(f, lo, hi, np.ones_like)
    return atoms + _density_integral(f, lo, hi, lambda t: 1.0)


def in_b_delta(spec: WeightSpec, f: BVFunction, delta: float) -> bool:
    """V_delta(R, f) finite."""
    try:
        return math.isfinite(v_delta(spec, f, None, delta))
    except DomainError:
        return False


def fit_jump_envelope(spec: WeightSpec, f: BVFunction, x: float, ts: Sequence[float],
                      delta: float) -> JumpEnvelopeFit:
    """
    Fit the smallest c in the inward jump envelope and check the outward bound.

    Inward samples (x t < 0, |t| < 2|x|) give c_hat; outward samples (x t >= 0)
    must satisfy the bound with constant 1 since w decreases away from 0.
    """
    _check_delta(delta)
    if x == 0.0:
        raise DomainError("jump envelope needs x != 0")
    scale = float(x * spec.q_prime(x))
    fx = float(f(x))

    inward: List[float] = []
    outward: List[float] = []
    for t in ts:
        if t == 0.0:
            continue
        lo, hi = sorted((x, x + t))
        variation = v_delta(spec, f, (lo, hi), delta)
        lhs = float(spec.w_power(x + t, delta)) * abs(float(f(x + t)) - fx)
        if variation == 0.0:
            continue
        ratio = lhs / variation
        if x * t < 0.0 and abs(t) < 2.0 * abs(x):
            inward.append(ratio)
        elif x * t >= 0.0:
            outward.append(ratio)

    positive = [r for r in inward if r > 0.0]
    c_hat = max(math.log(r) / scale for r in positive) if positive else 0.0
    outward_max = max(outward) if outward else 0.0
    fit = JumpEnvelopeFit(x=float(x), delta=float(delta), c_hat=float(c_hat), samples=len(inward),
                          outward_max_ratio=float(outward_max),
                          outward_ok=outward_max <= 1.0 + 1e-9)
    logger.debug(f"{f.descriptor}: jump envelope at x={x} fitted c={c_hat:.4g}")
    return fit
