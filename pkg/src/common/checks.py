"""
Check results and a registry that aggregates them into reports.

Numerical validation in this project never raises on a failed condition: each
condition produces a CheckResult and the registry turns the collection into a
pass/fail report.
"""

from typing import Dict, Any, List, Optional
from dataclasses import dataclass, field
from enum import Enum
import logging
import math


class CheckLevel(Enum):
    """Check severity levels."""
    INFO = "info"
    WARNING = "warning"
    FAIL = "fail"


@dataclass
class CheckResult:
    """Result of a single numerical check."""
    rule: str
    level: CheckLevel
    message: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Plain-dict view for JSON reports."""
        return {
            'rule': self.rule,
            'level': self.level.value,
            'message': self.message,
            'passed': self.passed,
            'details': self.details
        }


def bracket_check(rule: str, values: List[float], bound: float,
                  lower: Optional[float] = None, upper: Optional[float] = None,
                  details: Optional[Dict[str, Any]] = None) -> CheckResult:
    """
    Check that all finite values lie in [lower, upper].

    Missing bounds default to the symmetric bracket [1/bound, bound].
    """
    lower = 1.0 / bound if lower is None else lower
    upper = bound if upper is None else upper
    finite = [float(v) for v in values if math.isfinite(v)]
    info = dict(details or {})
    info.update({'bracket': [lower, upper], 'samples': len(values)})

    if not finite or len(finite) != len(values):
        info.update({'observed_min': None, 'observed_max': None})
        return CheckResult(rule=rule, level=CheckLevel.FAIL,
                           message="non-finite or empty sample", passed=False,
                           details=info)

    lo, hi = min(finite), max(finite)
    info.update({'observed_min': lo, 'observed_max': hi})
    passed = lower <= lo and hi <= upper
    return CheckResult(
        rule=rule,
        level=CheckLevel.INFO if passed else CheckLevel.FAIL,
        message=f"observed [{lo:.6g}, {hi:.6g}] within [{lower:.6g}, {upper:.6g}]"
                if passed else
                f"observed [{lo:.6g}, {hi:.6g}] outside [{lower:.6g}, {upper:.6g}]",
        passed=passed,
        details=info
    )


class CheckRegistry:
    """
    Collects check results and produces an aggregate report.
    """

    def __init__(self, subject: str):
        self.subject = subject
        self.logger = logging.getLogger(__name__)
        self.results: List[CheckResult] = []

    def record(self, result: CheckResult) -> CheckResult:
        """
        Record a result, logging failures.
        """
        self.results.append(result)
        if not result.passed:
            self.logger.warning(f"{self.subject}: check failed: {result.rule} - {result.message}")
        else:
            self.logger.debug(f"{self.subject}: check passed: {result.rule}")
        return result

    def get(self, rule: str) -> CheckResult:
        """
        Return the first result recorded under a rule name.
        """
        for result in self.results:
            if result.rule == rule:
                return result
        raise KeyError(rule)

    @property
    def failures(self) -> List[CheckResult]:
        """Results that did not pass."""
        return [r for r in self.results if not r.passed]

    def get_report(self) -> Dict[str, Any]:
        """Generate the aggregate report."""
        failures_by_level: Dict[str, int] = {}
        for failure in self.failures:
            level = failure.level.value
            failures_by_level[level] = failures_by_level.get(level, 0) + 1

        return {
            'subject': self.subject,
            'total_checks': len(self.results),
            'failed_checks': len(self.failures),
            'failures_by_level': failures_by_level,
            'status': 'PASS' if not self.failures else 'FAIL',
            'results': [r.to_dict() for r in self.results]
        }
