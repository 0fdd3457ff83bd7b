"""
Equivalence suite: scale-free ratios whose boundedness the theory predicts.

Every check records the observed range of a ratio over configured grids and
passes when the range stays inside [1/B, B] (or the one-sided bound stated
for the check). Nothing here raises on a failed check.
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, Any, List, Optional, Sequence
import json
import logging
import math

import numpy as np

from ..bvfun.bv_function import fit_jump_envelope, indicator, sgn, smooth_plus_jump
from ..common.checks import CheckLevel, CheckRegistry, CheckResult, bracket_check
from ..common.utils import RunTimer
from ..fourier.expansion import tail_integral_grid
from ..orthopoly.gauss import gauss_rule
from ..orthopoly.recurrence import DiscretizationConfig, RecurrenceTable, recurrence_table, weighted_values
from ..weights.mrs import MrsCache, edge_width, mrs_number, mrs_radius, phi_values
from ..weights.weight_family import WeightSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LemmaSuiteConfig:
    """Grids, brackets and thresholds of the suite."""
    bracket: float = 20.0
    restricted_range_threshold: float = 1e-3
    restricted_range_trials: int = 20
    restricted_range_min_n: int = 32
    t_grid: Sequence[float] = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
    grid_points: int = 2000
    tail_grid_points: int = 40
    tail_bound: float = 50.0
    d_grid: Sequence[float] = (1.0, 0.75, 0.5, 0.25, 0.125)
    delta: float = 0.5
    d: float = 0.5
    drift_factor: float = 3.0
    scale_free_tolerance: float = 0.1
    seed: int = 42

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "LemmaSuiteConfig":
        values = values or {}
        known = {k: values[k] for k in cls.__dataclass_fields__ if k in values}
        for key in ('t_grid', 'd_grid'):
            if key in known:
                known[key] = tuple(float(v) for v in known[key])
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values['t_grid'] = list(self.t_grid)
        values['d_grid'] = list(self.d_grid)
        return values


@dataclass
class LemmaReport:
    """Outcome of the suite for one weight."""
    weight: str
    n_list: List[int]
    config: LemmaSuiteConfig
    checks: Dict[str, CheckResult] = field(default_factory=dict)
    report: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {'weight': self.weight, 'n_list': self.n_list, 'config': self.config.to_dict(),
                'passed': self.passed, **self.report}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _span(values: Sequence[float]) -> float:
    """max/min of positive values."""
    values = [v for v in values if v > 0.0 and math.isfinite(v)]
    return max(values) / min(values) if values else math.inf


class LemmaSuite:
    """
    Runs the equivalence checks for one weight against one recurrence table.
    """

    def __init__(self, spec: WeightSpec, table: RecurrenceTable, config: LemmaSuiteConfig,
                 cache: Optional[MrsCache] = None):
        self.spec = spec
        self.table = table
        self.config = config
        self.cache = cache
        self.logger = logging.getLogger(__name__)
        self.registry = CheckRegistry(f"equivalence suite for {spec.descriptor}")
        self.rng = np.random.default_rng(config.seed)

    def a(self, t: float) -> float:
        return mrs_radius(self.spec, t, self.cache)

    def _bracket(self, rule: str, values: Sequence[float], lower: Optional[float] = None,
                 upper: Optional[float] = None, **details) -> CheckResult:
        return self.registry.record(bracket_check(rule, list(values), self.config.bracket,
                                                  lower=lower, upper=upper, details=details))

    # MRS numbers

    def check_mrs_scale_ratio(self) -> None:
        """a_{Lt}/a_t and T(a_{Lt})/T(a_t) for L in {2, 4}."""
        values = []
        for L in (2.0, 4.0):
            for t in self.config.t_grid:
                base = mrs_number(self.spec, t, self.cache)
                scaled = mrs_number(self.spec, L * t, self.cache)
                values.append(scaled.a_t / base.a_t)
                values.append(scaled.T_at / base.T_at)
        self._bracket("mrs_scale_ratio", values, lower=1.0 - 1e-9)

    def check_mrs_growth(self) -> None:
        """Q(a_t) sqrt(T(a_t))/t and Q'(a_t) a_t/(t sqrt(T(a_t)))."""
        level, slope = [], []
        for t in self.config.t_grid:
            value = mrs_number(self.spec, t, self.cache)
            root_t = math.sqrt(value.T_at)
            level.append(float(self.spec.q(value.a_t)) * root_t / t)
            slope.append(float(self.spec.q_prime(value.a_t)) * value.a_t / (t * root_t))
        self._bracket("mrs_growth", level + slope, level_ratios=level, slope_ratios=slope)

    def check_mrs_gap(self) -> None:
        """T(a_t)|1 - a_{st}/a_t| for s in {1/2, 2}, and T(x)(1 - x/a_t) on [0, a_{t/2}]."""
        gaps = []
        for s in (0.5, 2.0):
            for t in self.config.t_grid:
                value = mrs_number(self.spec, t, self.cache)
                gaps.append(value.T_at * abs(1.0 - self.a(s * t) / value.a_t))
        self._bracket("mrs_gap", gaps)

        interior = []
        for t in self.config.t_grid:
            a_t = self.a(t)
            xs = np.linspace(0.0, self.a(t / 2.0), 64)
            interior.append(float(np.min(self.spec.t_ratio(xs) * (1.0 - xs / a_t))))
        self._bracket("mrs_interior_gap", interior, upper=math.inf)

    def check_mrs_power(self) -> None:
        """(a_t/a_r) / (t/r)^{1/Lambda} <= B for t >= r."""
        grid = sorted(self.config.t_grid)
        values = []
        for i, r in enumerate(grid):
            for t in grid[i:]:
                values.append((self.a(t) / self.a(r)) / (t / r) ** (1.0 / self.spec.lambda_lower))
        self._bracket("mrs_power", values, lower=0.0)

    def check_mrs_level_decay(self) -> None:
        """Q(a_{dn})/Q(a_n) decreases as d decreases."""
        monotone = True
        ratios: Dict[int, List[float]] = {}
        d_grid = sorted(self.config.d_grid, reverse=True)
        for n in self.n_list:
            q_n = float(self.spec.q(self.a(n)))
            row = [float(self.spec.q(self.a(d * n))) / q_n for d in d_grid]
            ratios[n] = row
            monotone &= all(b < a for a, b in zip(row, row[1:]))
        self.registry.record(CheckResult(
            rule="mrs_level_decay",
            level=CheckLevel.INFO if monotone else CheckLevel.FAIL,
            message="Q(a_dn)/Q(a_n) decreasing in d" if monotone else "Q(a_dn)/Q(a_n) not monotone in d",
            passed=monotone,
            details={'d_grid': d_grid, 'ratios': {str(n): row for n, row in ratios.items()}}
        ))

    # orthonormal polynomials

    def _dense_grid(self, n: int, points: int) -> np.ndarray:
        return np.linspace(0.0, 2.0 * self.a(n), points)

    def christoffel_ratios(self, n: int, points: int) -> np.ndarray:
        """lambda_{n,2}(w;x) / (phi_n(x) w^2(x)) on [0, a_n]."""
        xs = np.linspace(0.0, self.a(n), points // 4)
        q = weighted_values(self.table, self.spec, n - 1, xs)
        return 1.0 / (np.sum(q * q, axis=0) * phi_values(self.spec, n, xs, self.cache))

    def weighted_sup_first(self, n: int, points: int) -> float:
        """max |p_n w| |x^2 - a_n^2|^{1/4} over a dense grid."""
        xs = self._dense_grid(n, points)
        q = weighted_values(self.table, self.spec, n, xs)[n]
        a_n = self.a(n)
        return float(np.max(np.abs(q) * np.abs(xs ** 2 - a_n ** 2) ** 0.25))

    def check_christoffel_scale(self) -> None:
        values, per_n = [], {}
        for n in self.n_list:
            ratios = self.christoffel_ratios(n, self.config.grid_points)
            values.extend(ratios.tolist())
            per_n[str(n)] = [float(ratios.min()), float(ratios.max())]
        self._bracket("christoffel_scale", values, per_n=per_n)

    def check_node_spacing(self) -> None:
        """Gaps, phi ratios and weight ratios of consecutive nodes in |x| <= a_{n/2}."""
        gaps, phi_ratio, weight_ratio, edge = [], [], [], []
        for n in self.n_list:
            rule = gauss_rule(self.table, n, self.spec)
            nodes = rule.nodes[::-1]
            inner = self.a(n / 2.0)
            phi = phi_values(self.spec, n, nodes, self.cache)
            w = self.spec.w(nodes)
            for k in range(n - 1):
                if abs(nodes[k]) <= inner and abs(nodes[k + 1]) <= inner:
                    gaps.append((nodes[k] - nodes[k + 1]) / phi[k])
                    phi_ratio.append(phi[k] / phi[k + 1])
                    weight_ratio.append(w[k] / w[k + 1])
            a_n = self.a(n)
            edge.append((1.0 - rule.node(1) / a_n) / edge_width(self.spec, n, self.cache))
        self._bracket("node_spacing", gaps)
        self._bracket("node_phi_ratio", phi_ratio)
        self._bracket("node_weight_ratio", weight_ratio)
        self._bracket("node_edge_gap", edge)

    def check_phi_lower(self) -> None:
        """(a_n/n) T(x)^{-1/2} / phi_n(x) <= B on |x| <= a_n."""
        values = []
        for n in self.n_list:
            xs = np.linspace(0.0, self.a(n), self.config.grid_points // 4)
            ratio = (self.a(n) / n) / np.sqrt(self.spec.t_ratio(xs)) / phi_values(self.spec, n, xs, self.cache)
            values.extend(ratio.tolist())
        self._bracket("phi_lower", values, lower=0.0)

    def check_weighted_sup(self) -> None:
        """Both normalisations of sup |p_n w|, plus their drift across n."""
        first, second = [], []
        for n in self.n_list:
            first.append(self.weighted_sup_first(n, self.config.grid_points))
            xs = self._dense_grid(n, self.config.grid_points)
            sup = float(np.max(np.abs(weighted_values(self.table, self.spec, n, xs)[n])))
            a_n = self.a(n)
            second.append(sup * math.sqrt(a_n) * (n * float(self.spec.t_ratio(a_n))) ** (-1.0 / 6.0))
        self._bracket("weighted_sup", first, per_n=dict(zip(map(str, self.n_list), first)))
        self._bracket("weighted_sup_edge", second, per_n=dict(zip(map(str, self.n_list), second)))
        drift = max(_span(first), _span(second))
        passed = drift <= self.config.drift_factor
        self.registry.record(CheckResult(
            rule="weighted_sup_drift",
            level=CheckLevel.INFO if passed else CheckLevel.WARNING,
            message=f"sup constants drift by a factor {drift:.3g} across n",
            passed=passed,
            details={'drift': drift, 'limit': self.config.drift_factor}
        ))

    def check_leading_ratio(self) -> None:
        """gamma_{n-1}/gamma_n / a_n = B[n]/a_n."""
        values = [self.table.gamma_ratio(n) / self.a(n) for n in self.n_list]
        self._bracket("leading_ratio", values, per_n=dict(zip(map(str, self.n_list), values)))

    def check_restricted_range(self) -> None:
        """
        Random P of degree n/4 (standard-normal orthonormal coefficients):
        max |Pw| on |x| >= a_{n/2} against max |Pw| on nodes inside |x| <= a_m.
        """
        per_n = {}
        passed = True
        for n in self.n_list:
            m = n // 4
            if m < 1:
                continue
            rule = gauss_rule(self.table, n, self.spec)
            inside_nodes = rule.nodes[np.abs(rule.nodes) <= self.a(m)]
            outer = np.linspace(self.a(n / 2.0), 2.0 * self.a(2 * n), self.config.grid_points)
            outer = np.concatenate([-outer, outer])
            q_in = weighted_values(self.table, self.spec, m, inside_nodes)
            q_out = weighted_values(self.table, self.spec, m, outer)
            worst = 0.0
            for _ in range(self.config.restricted_range_trials):
                coeffs = self.rng.standard_normal(m + 1)
                interior = float(np.max(np.abs(coeffs @ q_in)))
                exterior = float(np.max(np.abs(coeffs @ q_out)))
                worst = max(worst, exterior / interior)
            per_n[str(n)] = worst
            if n >= self.config.restricted_range_min_n and worst > self.config.restricted_range_threshold:
                passed = False
        self.registry.record(CheckResult(
            rule="restricted_range",
            level=CheckLevel.INFO if passed else CheckLevel.FAIL,
            message=f"tail-to-interior ratios {per_n}",
            passed=passed,
            details={'ratios': per_n, 'threshold': self.config.restricted_range_threshold,
                     'min_n': self.config.restricted_range_min_n}
        ))

    def tail_shape(self, n: int) -> float:
        """max_t |Lambda_n(t)| n / (sqrt(a_n) w^delta(t)) over t in [0, a_{dn}]."""
        ts = np.linspace(0.0, self.a(self.config.d * n), self.config.tail_grid_points)
        values = tail_integral_grid(self.table, self.spec, n, ts, self.cache)
        scale = n / (math.sqrt(self.a(n)) * self.spec.w_power(ts, self.config.delta))
        return float(np.max(np.abs(values) * scale))

    def check_tail_integral_shape(self) -> None:
        shapes = [self.tail_shape(n) for n in self.n_list]
        drift_ok = all(b <= self.config.drift_factor * a for a, b in zip(shapes, shapes[1:]))
        result = bracket_check("tail_integral_shape", shapes, self.config.bracket, lower=0.0,
                               upper=self.config.tail_bound,
                               details={'per_n': dict(zip(map(str, self.n_list), shapes)),
                                        'drift_ok': drift_ok})
        if not drift_ok:
            result.passed = False
            result.level = CheckLevel.FAIL
            result.message += "; grows across n beyond the drift factor"
        self.registry.record(result)

    def check_jump_envelope(self) -> None:
        """Fitted jump-envelope constants for a small family of BV functions."""
        fits = {}
        ok = True
        for f in (sgn(), indicator(0.25, 0.75), smooth_plus_jump(0.0)):
            for x in (0.5, 1.0):
                ts = x * np.concatenate([np.linspace(-1.99, -0.05, 40), np.linspace(0.05, 1.99, 40)])
                fit = fit_jump_envelope(self.spec, f, x, ts, self.config.delta)
                fits[f"{f.descriptor}@{x:g}"] = fit.to_dict()
                ok &= math.isfinite(fit.c_hat) and fit.outward_ok
        self.registry.record(CheckResult(
            rule="jump_envelope",
            level=CheckLevel.INFO if ok else CheckLevel.FAIL,
            message="fitted envelope constants finite" if ok else "envelope fit failed",
            passed=ok,
            details={'fits': fits}
        ))

    def check_scale_free(self) -> None:
        """Doubling grid density moves the observed brackets by less than the tolerance."""
        changes = []
        for n in self.n_list:
            coarse = self.weighted_sup_first(n, self.config.grid_points)
            fine = self.weighted_sup_first(n, 2 * self.config.grid_points)
            changes.append(abs(fine - coarse) / fine)
            lam_coarse = self.christoffel_ratios(n, self.config.grid_points)
            lam_fine = self.christoffel_ratios(n, 2 * self.config.grid_points)
            changes.append(abs(lam_fine.max() - lam_coarse.max()) / lam_fine.max())
            changes.append(abs(lam_fine.min() - lam_coarse.min()) / lam_fine.min())
        worst = max(changes) if changes else 0.0
        passed = worst < self.config.scale_free_tolerance
        self.registry.record(CheckResult(
            rule="scale_free",
            level=CheckLevel.INFO if passed else CheckLevel.WARNING,
            message=f"bracket change under grid doubling {worst:.3g}",
            passed=passed,
            details={'worst_change': worst, 'tolerance': self.config.scale_free_tolerance}
        ))

    def run(self, n_list: Sequence[int]) -> LemmaReport:
        self.n_list = [int(n) for n in n_list]
        with RunTimer(f"equivalence suite {self.spec.descriptor}"):
            self.check_mrs_scale_ratio()
            self.check_mrs_growth()
            self.check_mrs_gap()
            self.check_mrs_power()
            self.check_mrs_level_decay()
            self.check_christoffel_scale()
            self.check_node_spacing()
            self.check_phi_lower()
            self.check_weighted_sup()
            self.check_leading_ratio()
            self.check_restricted_range()
            self.check_tail_integral_shape()
            self.check_jump_envelope()
            self.check_scale_free()

        summary = self.registry.get_report()
        logger.info(f"{self.spec.descriptor}: {summary['total_checks']} checks, "
                    f"{summary['failed_checks']} failed")
        return LemmaReport(
            weight=self.spec.descriptor,
            n_list=self.n_list,
            config=self.config,
            checks={r.rule: r for r in self.registry.results},
            report=summary
        )


def lemma_suite(spec: WeightSpec, n_list: Sequence[int], config: Optional[LemmaSuiteConfig] = None,
                table: Optional[RecurrenceTable] = None, disc: Optional[DiscretizationConfig] = None,
                cache: Optional[MrsCache] = None) -> LemmaReport:
    """
    Run every equivalence check for the degrees in n_list.
    """
    config = config or LemmaSuiteConfig()
    n_list = sorted(int(n) for n in n_list)
    n_max = n_list[-1]
    if table is None or table.N < n_max:
        table = recurrence_table(spec, n_max, disc, cache)
    return LemmaSuite(spec, table, config, cache).run(n_list)
