"""
Gauss rules for w^2 dx and the Christoffel function lambda_{n,2}(w; x).
"""

from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from ..common.errors import SolverError
from ..weights.weight_family import WeightSpec
from .recurrence import RecurrenceTable, check_degree, weighted_values

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GaussRule:
    """
    n-point Gauss rule for w^2 dx.

    nodes ascend; node(k) and christoffel_number(k) use the descending
    labelling x_{1,n} > ... > x_{n,n}.
    """
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    eigen_weights: np.ndarray

    def node(self, k: int) -> float:
        """x_{k,n}, k = 1..n."""
        return float(self.nodes[self.n - k])

    def christoffel_number(self, k: int) -> float:
        """lambda_{k,n}, k = 1..n."""
        return float(self.weights[self.n - k])

    def integrate(self, values: np.ndarray) -> float:
        """sum_k lambda_k g(x_k) for g sampled at the nodes."""
        return float(np.asarray(values) @ self.weights)


@dataclass(frozen=True)
class ChristoffelValue:
    """lambda_{n,2}(w; x) with a flag for weight underflow."""
    value: float
    underflow: bool = False


def gauss_rule(table: RecurrenceTable, n: int, spec: Optional[WeightSpec] = None) -> GaussRule:
    """
    Gauss rule from the n x n Jacobi matrix of the table.

    Nodes are eigenvalues of the symmetric tridiagonal matrix. The weights
    are the Christoffel numbers w^2/sum q_k^2 at the nodes, which equal
    mu0 v_0^2 (kept as eigen_weights) but keep full relative accuracy near
    the edges, where v_0 is tiny. Without a weight spec the eigenvector
    weights are used.
    """
    check_degree(table, n, lowest=1)
    if n == 1:
        nodes = np.array([float(table.A[0])])
        eigen_weights = np.array([table.mu0])
    else:
        try:
            nodes, vectors = eigh_tridiagonal(np.asarray(table.A[:n]), np.asarray(table.B[1:n]),
                                              lapack_driver='stev')
        except LinAlgError as e:
            raise SolverError(f"tridiagonal eigen-solver failed for n={n}: {e}") from e
        eigen_weights = table.mu0 * vectors[0, :] ** 2

    if spec is None:
        weights = eigen_weights.copy()
    else:
        weights = christoffel_values(table, spec, n, nodes)
    if spec is not None and not np.all(weights > 0.0):
        logger.warning(f"{spec.descriptor}: Christoffel numbers underflow for n={n}, "
                       f"falling back to eigenvector weights")
        weights = np.where(weights > 0.0, weights, eigen_weights)

    for array in (nodes, weights, eigen_weights):
        array.setflags(write=False)
    return GaussRule(n=n, nodes=nodes, weights=weights, eigen_weights=eigen_weights)


def christoffel_values(table: RecurrenceTable, spec: WeightSpec, n: int, x) -> np.ndarray:
    """
    Vectorised lambda_{n,2}(w; x) = w^2(x) / sum_{k<n} q_k(x)^2; 0 where w underflows.
    """
    check_degree(table, n - 1)
    xs = np.asarray(x, dtype=float)
    q = weighted_values(table, spec, n - 1, xs)
    total = np.sum(q * q, axis=0)
    w = spec.w(xs)
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.where(total > 0.0, (w * w) / total, 0.0)
    return values


def christoffel(table: RecurrenceTable, spec: WeightSpec, n: int, x: float) -> ChristoffelValue:
    """
    lambda_{n,2}(w; x) = 1 / K_n(x, x), from weighted evaluations only.
    """
    check_degree(table, n, lowest=1)
    value = float(christoffel_values(table, spec, n, x))
    if value == 0.0:
        logger.debug(f"{spec.descriptor}: w^2 underflows at x={x}")
        return ChristoffelValue(value=0.0, underflow=True)
    return ChristoffelValue(value=value)


def gram_matrix(table: RecurrenceTable, spec: WeightSpec, rule: GaussRule,
                m: Optional[int] = None) -> np.ndarray:
    """
    Gauss-rule inner products <p_i, p_j> for i, j < m (m defaults to rule.n).

    lambda_k p_i(x_k) p_j(x_k) = q_i q_j / sum q^2 at the nodes, so no raw
    polynomial value is formed.
    """
    m = rule.n if m is None else m
    check_degree(table, max(m, rule.n) - 1)
    q = weighted_values(table, spec, max(m, rule.n) - 1, rule.nodes)
    scale = 1.0 / np.sum(q[:rule.n] ** 2, axis=0)
    return (q[:m] * scale) @ q[:m].T
