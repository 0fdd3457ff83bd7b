"""
Three-term recurrence for the orthonormal system {p_n(w^2, .)}.

The measure w^2 dx is discretised on [-a_{cN}, a_{cN}] by a mirrored composite
Gauss-Legendre rule whose panels follow the density 1/phi_N, and the recurrence
of the discrete measure is obtained by Lanczos iteration with full
reorthogonalisation. Coefficients are accepted after a doubling check.

Conventions: a table of highest degree N stores A[0..N], B[0..N] with
B[0] = sqrt(mu0), and

    x p_n(x) = B[n+1] p_{n+1}(x) + A[n] p_n(x) + B[n] p_{n-1}(x),

so B[n] = gamma_{n-1} / gamma_n.
"""

from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Dict, Any, Optional, Tuple
import logging
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import cumulative_trapezoid

from ..common.cache import read_json, write_json
from ..common.errors import DomainError, DegreeRangeError, PrecisionExhaustedError
from ..common.quadrature import composite_rule
from ..common.utils import RunTimer
from ..weights.mrs import MrsCache, mrs_radius, phi_values
from ..weights.weight_family import WeightSpec

logger = logging.getLogger(__name__)

DIAGONAL_TOL = 1e-10
DENSITY_SAMPLES = 4097
MIN_PANEL_ORDER = 10


@dataclass(frozen=True)
class DiscretizationConfig:
    """Parameters of the discretised measure."""
    truncation_multiple: float = 4.0
    panel_count: int = 32
    points_per_degree: int = 20
    stability_tol: float = 1e-12
    max_doublings: int = 3

    def __post_init__(self):
        if self.truncation_multiple < 2.0:
            raise DomainError(f"truncation multiple must be >= 2, got {self.truncation_multiple}")
        if self.panel_count < 1 or self.points_per_degree < 2:
            raise DomainError("panel_count must be >= 1 and points_per_degree >= 2")
        if self.max_doublings < 1:
            raise DomainError("max_doublings must be >= 1")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "DiscretizationConfig":
        """Build from a config section, ignoring unknown keys."""
        values = values or {}
        known = {k: values[k] for k in cls.__dataclass_fields__ if k in values}
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """
    Recurrence coefficients of the orthonormal polynomials for w^2 dx.
    """
    descriptor: str
    N: int
    A: np.ndarray
    B: np.ndarray
    mu0: float
    disc: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    meta: Dict[str, Any] = field(default_factory=dict)

    def gamma_ratio(self, n: int) -> float:
        """gamma_{n-1} / gamma_n = B[n]."""
        check_degree(self, n, lowest=1)
        return float(self.B[n])

    def to_dict(self) -> Dict[str, Any]:
        """JSON form of the table."""
        return {
            'weight': self.descriptor,
            'N': self.N,
            'mu0': self.mu0,
            'A': self.A.tolist(),
            'B': self.B.tolist(),
            'disc': self.disc.to_dict(),
            'meta': self.meta
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "RecurrenceTable":
        A = np.asarray(payload['A'], dtype=float)
        B = np.asarray(payload['B'], dtype=float)
        A.setflags(write=False)
        B.setflags(write=False)
        return cls(
            descriptor=str(payload['weight']),
            N=int(payload['N']),
            A=A,
            B=B,
            mu0=float(payload['mu0']),
            disc=DiscretizationConfig.from_dict(payload.get('disc')),
            meta=dict(payload.get('meta', {}))
        )


def check_degree(table: RecurrenceTable, n: int, lowest: int = 0) -> None:
    """Raise DegreeRangeError unless lowest <= n <= table.N."""
    if not (lowest <= n <= table.N):
        raise DegreeRangeError(f"degree {n} outside [{lowest}, {table.N}] of the built table")


def _check_weight(table: RecurrenceTable, spec: WeightSpec) -> None:
    if spec.descriptor != table.descriptor:
        raise DomainError(f"table built for {table.descriptor}, evaluated with {spec.descriptor}")


def panel_edges(spec: WeightSpec, N: int, radius: float, panels: int,
                cache: Optional[MrsCache] = None) -> np.ndarray:
    """
    Panel edges on [0, radius] equidistributing the density 1/phi_N.
    """
    fine = np.linspace(0.0, radius, DENSITY_SAMPLES)
    density = 1.0 / phi_values(spec, float(N), fine, cache)
    cumulative = cumulative_trapezoid(density, fine, initial=0.0)
    targets = np.linspace(0.0, cumulative[-1], panels + 1)
    edges = np.interp(targets, cumulative, fine)
    edges[0], edges[-1] = 0.0, radius
    return edges


def panel_order(N: int, disc: DiscretizationConfig) -> int:
    """Gauss-Legendre order per panel for the initial panel count."""
    return max(MIN_PANEL_ORDER, math.ceil(disc.points_per_degree * N / (2 * disc.panel_count)))


def discretize_measure(spec: WeightSpec, N: int, disc: DiscretizationConfig, panels: int,
                       order: Optional[int] = None,
                       cache: Optional[MrsCache] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the discrete measure approximating w^2 dx.

    The half-line rule on [0, R] is mirrored so the discrete measure is
    exactly symmetric. The rule has 2 * panels * order points.
    """
    radius = mrs_radius(spec, disc.truncation_multiple * N, cache)
    order = order or panel_order(N, disc)
    half_nodes, half_weights = composite_rule(panel_edges(spec, N, radius, panels, cache), order)
    nodes = np.concatenate([-half_nodes[::-1], half_nodes])
    weights = np.concatenate([half_weights[::-1], half_weights])
    return nodes, weights * spec.w(nodes) ** 2


def lanczos_recurrence(nodes: np.ndarray, weights: np.ndarray,
                       N: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Recurrence coefficients A[0..N], B[0..N] of a discrete measure.

    Lanczos on diag(nodes) started from sqrt(weights), reorthogonalised twice
    against the whole basis at every step.
    """
    mu0 = float(np.sum(weights))
    if not (mu0 > 0.0) or not math.isfinite(mu0):
        raise PrecisionExhaustedError(0, f"discrete measure has mass {mu0}")
    if nodes.size <= N:
        raise DomainError(f"{nodes.size} discretisation points cannot support degree {N}")

    floor = (64.0 * np.finfo(float).eps * float(np.max(np.abs(nodes)))) ** 2
    basis = np.zeros((N + 1, nodes.size))
    basis[0] = np.sqrt(weights / mu0)
    A = np.zeros(N + 1)
    B = np.zeros(N + 1)
    B[0] = math.sqrt(mu0)

    for k in range(N + 1):
        v = nodes * basis[k]
        A[k] = basis[k] @ v
        if k == N:
            break
        v -= A[k] * basis[k]
        if k > 0:
            v -= B[k] * basis[k - 1]
        active = basis[:k + 1]
        for _ in range(2):
            v -= active.T @ (active @ v)
        beta2 = float(v @ v)
        if not (beta2 > floor):
            raise PrecisionExhaustedError(k + 1)
        B[k + 1] = math.sqrt(beta2)
        basis[k + 1] = v / B[k + 1]

    return A, B, mu0


def _relative_change(A0: np.ndarray, B0: np.ndarray, A1: np.ndarray, B1: np.ndarray) -> float:
    # A[k] is measured against B[k+1], A[N] against B[N]
    tiny = np.finfo(float).tiny
    scale_b = np.maximum(B1, tiny)
    scale_a = np.maximum(np.append(B1[1:], B1[-1]), tiny)
    return float(max(np.max(np.abs(B1 - B0) / scale_b), np.max(np.abs(A1 - A0) / scale_a)))


def recurrence_table(spec: WeightSpec, N: int, disc: Optional[DiscretizationConfig] = None,
                     cache: Optional[MrsCache] = None) -> RecurrenceTable:
    """
    Build the recurrence table of highest degree N for w^2 dx.

    Raises PrecisionExhaustedError when a Lanczos step loses positivity.
    """
    if N < 1:
        raise DegreeRangeError(f"table degree must be >= 1, got {N}")
    disc = disc or DiscretizationConfig()

    with RunTimer(f"recurrence table {spec.descriptor} N={N}"):
        panels = disc.panel_count
        order = panel_order(N, disc)
        nodes, weights = discretize_measure(spec, N, disc, panels, order, cache)
        points = [int(nodes.size)]
        A, B, mu0 = lanczos_recurrence(nodes, weights, N)
        change = float('inf')
        doublings = 0
        while doublings < disc.max_doublings:
            doublings += 1
            panels *= 2
            nodes, weights = discretize_measure(spec, N, disc, panels, order, cache)
            points.append(int(nodes.size))
            A_fine, B_fine, mu0 = lanczos_recurrence(nodes, weights, N)
            change = _relative_change(A, B, A_fine, B_fine)
            A, B = A_fine, B_fine
            logger.debug(f"{spec.descriptor}: {nodes.size} points, coefficient change {change:.3e}")
            if change < disc.stability_tol:
                break

    stable = change < disc.stability_tol
    if not stable:
        logger.warning(f"{spec.descriptor}: recurrence not certified stable at N={N} "
                       f"(change {change:.3e} after {doublings} doublings)")

    # even measure: the diagonal vanishes
    diagonal_residual = float(np.max(np.abs(A) / B.clip(min=np.finfo(float).tiny)))
    if diagonal_residual <= DIAGONAL_TOL:
        A = np.zeros_like(A)
    else:
        logger.warning(f"{spec.descriptor}: diagonal coefficients reach {diagonal_residual:.3e} of B")

    A.setflags(write=False)
    B.setflags(write=False)
    meta = {
        'stable': bool(stable),
        'stability_change': change,
        'doublings': doublings,
        'points': int(nodes.size),
        'points_history': points,
        'panels': panels,
        'panel_order': order,
        'truncation_radius': mrs_radius(spec, disc.truncation_multiple * N, cache),
        'diagonal_residual': diagonal_residual
    }
    logger.info(f"built recurrence table {spec.descriptor} N={N} on {nodes.size} points")
    return RecurrenceTable(descriptor=spec.descriptor, N=N, A=A, B=B, mu0=mu0, disc=disc, meta=meta)


def weighted_values(table: RecurrenceTable, spec: WeightSpec, n: int, x) -> np.ndarray:
    """
    q_k(x) = p_k(x) w(x) for k = 0..n, shape (n+1,) + shape(x).
    """
    check_degree(table, n)
    _check_weight(table, spec)
    xs = np.asarray(x, dtype=float)
    A, B = table.A, table.B
    values = np.empty((n + 1,) + xs.shape)
    values[0] = spec.w(xs) / math.sqrt(table.mu0)
    if n >= 1:
        values[1] = (xs - A[0]) * values[0] / B[1]
    for k in range(1, n):
        values[k + 1] = ((xs - A[k]) * values[k] - B[k] * values[k - 1]) / B[k + 1]
    return values


def eval_weighted(table: RecurrenceTable, spec: WeightSpec, n: int, x: float) -> float:
    """p_n(x) w(x) by the weighted recurrence."""
    return float(weighted_values(table, spec, n, x)[n])


def orthonormal_polynomial(table: RecurrenceTable, k: int) -> Polynomial:
    """
    p_k in the monomial basis; only sensible for small k.
    """
    check_degree(table, k)
    x = Polynomial([0.0, 1.0])
    previous = Polynomial([0.0])
    current = Polynomial([1.0 / math.sqrt(table.mu0)])
    for j in range(k):
        previous, current = current, ((x - table.A[j]) * current - table.B[j] * previous) / table.B[j + 1]
    return current


def table_path(cache_dir: Path, descriptor: str, N: int) -> Path:
    """<cache-dir>/<weight>/<N>.json"""
    return Path(cache_dir) / descriptor / f"{N}.json"


def save_table(table: RecurrenceTable, cache_dir: Path) -> Path:
    """Write the table to the cache directory."""
    path = table_path(cache_dir, table.descriptor, table.N)
    write_json(path, table.to_dict())
    logger.info(f"cached recurrence table at {path}")
    return path


def load_table(cache_dir: Path, descriptor: str, N: int,
               disc: DiscretizationConfig) -> Optional[RecurrenceTable]:
    """
    Read a cached table; None when absent or built with other parameters.
    """
    path = table_path(cache_dir, descriptor, N)
    if not path.exists():
        return None
    table = RecurrenceTable.from_dict(read_json(path))
    if table.disc != disc:
        logger.info(f"cached table {path} built with other discretisation, rebuilding")
        return None
    logger.info(f"cache hit for recurrence table {descriptor} N={N}")
    return table


def cached_recurrence_table(spec: WeightSpec, N: int, disc: DiscretizationConfig,
                            cache_dir: Optional[Path] = None,
                            cache: Optional[MrsCache] = None) -> RecurrenceTable:
    """
    recurrence_table with a lookup in, and write-back to, the cache directory.
    """
    if cache_dir is not None:
        table = load_table(cache_dir, spec.descriptor, N, disc)
        if table is not None:
            return table
    table = recurrence_table(spec, N, disc, cache)
    if cache_dir is not None:
        save_table(table, cache_dir)
    return table
