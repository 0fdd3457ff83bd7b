"""
Pointwise-convergence bounds for Fourier-type partial sums and the experiment
that compares them with observed errors.

Two bound modes are supported:

    erdos_js       four-term bound for Erdos-type weights and f in B_delta, 0 < delta < 1
    mhaskar_freud  two-term bound for Freud-type weights and f in B_1

Both are multiplied by the envelope C exp(c x Q'(x)) only in rhs_total.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Any, List, Optional, Sequence
import json
import logging
import math

import pandas as pd

from ..bvfun.bv_function import BVFunction, in_b_delta, v_delta
from ..common.errors import DomainError
from ..common.utils import NumberFormat, RunTimer
from ..fourier.expansion import ExpansionCoeffs, coefficients, partial_sum
from ..orthopoly.gauss import gauss_rule
from ..orthopoly.recurrence import DiscretizationConfig, RecurrenceTable, recurrence_table
from ..weights.mrs import MrsCache, mrs_radius
from ..weights.weight_family import WeightSpec

logger = logging.getLogger(__name__)

NORMALIZATION_NOTE = ("the four-term bound is stated for |s_n(f, x)| after normalising f(x) = 0; "
                      "it is compared here with |s_n(f, x) - f(x)|")

CSV_COLUMNS = ['weight', 'f', 'x', 'n', 's_n', 'f_x', 'abs_error', 'rhs_total',
               'term1', 'term2', 'term3', 'term4']

ERDOS_TERMS = ['variation_sum_term', 'w_delta_integral_term',
               'w_integral_inner_term', 'w_integral_outer_term']
MHASKAR_TERMS = ['variation_sum_term', 'w_integral_outer_term']


class BoundMode(Enum):
    """Which convergence bound to evaluate."""
    ERDOS_JS = "erdos_js"
    MHASKAR_FREUD = "mhaskar_freud"


@dataclass(frozen=True)
class TheoremConstants:
    """
    delta: V_delta exponent; d: a_{dn} cutoff; c: envelope exponent;
    C: overall scale; c1: outer radius multiple of the Freud bound.
    """
    delta: float = 0.5
    d: float = 0.5
    c: float = 1.0
    C: float = 1.0
    c1: float = 1.0

    def __post_init__(self):
        for name in ('delta', 'd', 'c', 'C', 'c1'):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"theorem constant {name} must be positive, got {getattr(self, name)}")
        if self.delta > 1.0:
            raise DomainError(f"delta must be <= 1, got {self.delta}")
        if self.d > 1.0:
            raise DomainError(f"d must be <= 1, got {self.d}")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "TheoremConstants":
        values = values or {}
        return cls(**{k: float(values[k]) for k in cls.__dataclass_fields__ if k in values})

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class RhsBreakdown:
    """Bound components for one (n, x)."""
    mode: BoundMode
    n: int
    x: float
    components: Dict[str, float]
    envelope: float
    rhs_total: float
    split_form: bool = False
    standing_assumption: bool = True
    delta: float = 0.5

    def terms(self) -> List[float]:
        """Components in CSV order term1..term4; absent terms are NaN."""
        names = ERDOS_TERMS if self.mode is BoundMode.ERDOS_JS else MHASKAR_TERMS
        values = [self.components[name] for name in names]
        return values + [math.nan] * (4 - len(values))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mode': self.mode.value,
            'n': self.n,
            'x': self.x,
            'components': dict(self.components),
            'envelope': self.envelope,
            'rhs_total': self.rhs_total,
            'split_form': self.split_form,
            'standing_assumption': self.standing_assumption,
            'delta': self.delta
        }


def default_mode(spec: WeightSpec) -> BoundMode:
    """erdos_js for Erdos-type weights, mhaskar_freud otherwise."""
    return BoundMode.ERDOS_JS if spec.is_erdos_type else BoundMode.MHASKAR_FREUD


def _variation_sum(spec: WeightSpec, f: BVFunction, x: float, n: int, a_n: float,
                   delta: float, split_form: bool) -> float:
    if split_form:
        h = math.sqrt(a_n / n)
        return (h * v_delta(spec, f, (x - a_n, x + a_n), delta)
                + v_delta(spec, f, (x - h, x + h), delta))
    total = 0.0
    for k in range(1, n + 1):
        total += v_delta(spec, f, (x - a_n / k, x + a_n / k), delta)
    return total / n


def _outer_variation(spec: WeightSpec, f: BVFunction, radius: float) -> float:
    """int_{|u| >= radius} w |df|."""
    return (v_delta(spec, f, (-math.inf, -radius), 1.0)
            + v_delta(spec, f, (radius, math.inf), 1.0))


def theorem_rhs(spec: WeightSpec, f: BVFunction, x: float, n: int, k: TheoremConstants,
                mode: BoundMode, split_form: bool = False, strict: bool = True,
                cache: Optional[MrsCache] = None) -> RhsBreakdown:
    """
    Components of the convergence bound at (n, x).

    With strict=True a violated standing assumption (|x| <= a_{dn}/6 for
    erdos_js, n >= c x Q'(x) for mhaskar_freud) raises DomainError; otherwise
    it is recorded in the breakdown.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if mode is BoundMode.ERDOS_JS and not spec.is_erdos_type:
        raise DomainError(f"erdos_js bound needs an Erdos-type weight, got {spec.descriptor}")
    if mode is BoundMode.MHASKAR_FREUD and spec.is_erdos_type:
        raise DomainError(f"mhaskar_freud bound needs a Freud-type weight, got {spec.descriptor}")

    if mode is BoundMode.MHASKAR_FREUD and k.delta != 1.0:
        logger.debug(f"mhaskar_freud bound uses delta = 1 (configured {k.delta})")
        k = replace(k, delta=1.0)
    if not in_b_delta(spec, f, k.delta):
        raise DomainError(f"{f.descriptor} is not in B_delta for delta={k.delta}")

    x_qprime = float(x * spec.q_prime(x))
    try:
        envelope = k.C * math.exp(k.c * x_qprime)
    except OverflowError:
        logger.warning(f"{spec.descriptor}: envelope exp(c x Q'(x)) overflows at x={x}")
        envelope = math.inf
    a_n = mrs_radius(spec, n, cache)

    if mode is BoundMode.ERDOS_JS:
        a_dn = mrs_radius(spec, k.d * n, cache)
        standing = abs(x) <= a_dn / 6.0
        if strict and not standing:
            raise DomainError(f"n too small for this x: |x|={abs(x):.6g} > a_dn/6={a_dn / 6.0:.6g} (n={n})")
        a_half = mrs_radius(spec, k.d * n / 2.0, cache)
        t_quarter = float(spec.t_ratio(a_n)) ** 0.25
        components = {
            'variation_sum_term': _variation_sum(spec, f, x, n, a_n, k.delta, split_form),
            'w_delta_integral_term': v_delta(spec, f, (-a_dn, a_dn), k.delta) / n,
            'w_integral_inner_term': v_delta(spec, f, (-a_half, a_half), 1.0) / (n * t_quarter),
            'w_integral_outer_term': _outer_variation(spec, f, a_half) / t_quarter
        }
    else:
        standing = n >= k.c * x_qprime
        if strict and not standing:
            raise DomainError(f"n too small for this x: n={n} < c x Q'(x)={k.c * x_qprime:.6g}")
        components = {
            'variation_sum_term': _variation_sum(spec, f, x, n, a_n, 1.0, split_form),
            'w_integral_outer_term': _outer_variation(spec, f, k.c1 * a_n)
        }

    if not standing:
        logger.debug(f"{spec.descriptor}: standing assumption fails at n={n}, x={x}")
    subtotal = sum(components.values())
    total = envelope * subtotal if subtotal != 0.0 else 0.0
    return RhsBreakdown(mode=mode, n=n, x=float(x), components=components, envelope=envelope,
                        rhs_total=total, split_form=split_form, standing_assumption=standing,
                        delta=k.delta)


@dataclass
class ConvergenceRow:
    """One (n, x) cell of a convergence experiment."""
    n: int
    x: float
    s_n: float
    f_x: float
    abs_error: float
    weighted: bool
    rhs: RhsBreakdown

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'x': self.x, 's_n': self.s_n, 'f_x': self.f_x,
                'abs_error': self.abs_error, 'weighted': self.weighted, 'rhs': self.rhs.to_dict()}


@dataclass
class ConvergenceReport:
    """Rows sorted by (n, x), rejected points and a per-x summary."""
    weight: str
    f: str
    mode: BoundMode
    constants: TheoremConstants
    rows: List[ConvergenceRow] = field(default_factory=list)
    rejected: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """One CSV-shaped row per (n, x)."""
        records = []
        for row in self.rows:
            term1, term2, term3, term4 = row.rhs.terms()
            records.append({
                'weight': self.weight, 'f': self.f, 'x': row.x, 'n': row.n, 's_n': row.s_n,
                'f_x': row.f_x, 'abs_error': row.abs_error, 'rhs_total': row.rhs.rhs_total,
                'term1': term1, 'term2': term2, 'term3': term3, 'term4': term4
            })
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)

    def to_csv(self, path: Optional[Path] = None) -> str:
        """CSV text ('.' decimal, 17 significant digits); written to path if given."""
        text = self.to_frame().to_csv(index=False, float_format='%.17g', lineterminator='\n')
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_dict(self) -> Dict[str, Any]:
        return {
            'weight': self.weight,
            'f': self.f,
            'mode': self.mode.value,
            'constants': self.constants.to_dict(),
            'normalization': NORMALIZATION_NOTE,
            'rows': [row.to_dict() for row in self.rows],
            'rejected': self.rejected,
            'summary': self.summary
        }

    def to_json(self, path: Optional[Path] = None) -> str:
        text = json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def _summarize(rows: List[ConvergenceRow]) -> Dict[str, Dict[str, Any]]:
    by_x: Dict[float, List[ConvergenceRow]] = {}
    for row in rows:
        by_x.setdefault(row.x, []).append(row)
    summary = {}
    for x, cells in sorted(by_x.items()):
        cells = sorted(cells, key=lambda r: r.n)
        errors = [r.abs_error for r in cells]
        summary[NumberFormat.format_float(x)] = {
            'n_first': cells[0].n,
            'n_last': cells[-1].n,
            'error_first': errors[0],
            'error_last': errors[-1],
            'min_error': min(errors),
            'improved': min(errors) < errors[0]
        }
    return summary


def convergence_experiment(spec: WeightSpec, f: BVFunction, x_list: Sequence[float],
                           n_list: Sequence[int], k: TheoremConstants,
                           mode: Optional[BoundMode] = None, split_form: bool = False,
                           workers: int = 1, table: Optional[RecurrenceTable] = None,
                           disc: Optional[DiscretizationConfig] = None,
                           cache: Optional[MrsCache] = None) -> ConvergenceReport:
    """
    s_n(f, x) against f(x) and the bound components on an (n, x) grid.

    Breakpoints of f in x_list are rejected with a note. Cells run on a thread
    pool; rows are sorted by (n, x).
    """
    n_list = [int(n) for n in n_list]
    if not n_list or n_list[0] < 1 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError(f"n_list must be positive and strictly increasing, got {n_list}")
    mode = mode or default_mode(spec)
    n_max = n_list[-1]

    report = ConvergenceReport(weight=spec.descriptor, f=f.descriptor, mode=mode, constants=k)
    accepted = []
    for x in x_list:
        if f.is_continuity_point(x):
            accepted.append(float(x))
        else:
            logger.warning(f"{f.descriptor}: x={x} is a jump point, rejected")
            report.rejected.append({'x': float(x), 'reason': "x is a jump point of f"})

    if table is None or table.N < n_max:
        table = recurrence_table(spec, n_max, disc, cache)
    rule = gauss_rule(table, n_max, spec) if f.is_polynomial else None
    coeffs: ExpansionCoeffs = coefficients(table, spec, rule, f, n_max, cache)

    def run_cell(cell):
        n, x = cell
        result = partial_sum(coeffs, table, spec, n, x)
        f_x = float(f(x))
        rhs = theorem_rhs(spec, f, x, n, k, mode, split_form=split_form, strict=False, cache=cache)
        error = abs(result.value - f_x) if not result.weighted else math.nan
        return ConvergenceRow(n=n, x=x, s_n=result.value, f_x=f_x, abs_error=error,
                              weighted=result.weighted, rhs=rhs)

    cells = [(n, x) for n in n_list for x in accepted]
    with RunTimer(f"convergence experiment {spec.descriptor} {f.descriptor}"):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(run_cell, cells))
        else:
            rows = [run_cell(cell) for cell in cells]

    report.rows = sorted(rows, key=lambda r: (r.n, r.x))
    report.summary = _summarize(report.rows)
    for key, item in report.summary.items():
        if not item['improved']:
            logger.warning(f"{spec.descriptor} {f.descriptor}: no improvement at x={key}")
    return report
