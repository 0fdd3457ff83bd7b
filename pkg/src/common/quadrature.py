"""
Gauss-Legendre building blocks: cached rules, composite panels and an
adaptive panel-doubling integrator for (possibly vector valued) integrands.
"""

from functools import lru_cache
from typing import Callable, Tuple
import logging

import numpy as np
import numpy.polynomial.legendre as lege

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on [-1, 1].
    """
    nodes, weights = lege.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre rule over consecutive panels [edges[i], edges[i+1]].

    Returns flattened nodes and weights, ordered left to right.
    """
    edges = np.asarray(edges, dtype=float)
    ref_x, ref_w = legendre_rule(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


def uniform_edges(lo: float, hi: float, panels: int) -> np.ndarray:
    """Panel edges splitting [lo, hi] into equal panels."""
    return np.linspace(lo, hi, max(int(panels), 1) + 1)


def integrate_panels(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray,
                     order: int) -> np.ndarray:
    """
    Integrate func over the panels; func maps nodes (M,) to values (..., M).
    """
    nodes, weights = composite_rule(edges, order)
    values = np.asarray(func(nodes))
    return values @ weights


def adaptive_integrate(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                       panels: int = 4, order: int = 20, tol: float = 1e-11,
                       max_doublings: int = 8) -> Tuple[np.ndarray, float]:
    """
    Integrate over [lo, hi] by doubling the panel count until two successive
    estimates differ by less than tol (max-norm for vector integrands).

    Returns (estimate, last observed difference).
    """
    if hi <= lo:
        sample = np.asarray(func(np.array([lo])))
        return np.zeros(sample.shape[:-1]), 0.0

    current = integrate_panels(func, uniform_edges(lo, hi, panels), order)
    change = float('inf')
    for level in range(max_doublings):
        panels *= 2
        refined = integrate_panels(func, uniform_edges(lo, hi, panels), order)
        change = float(np.max(np.abs(refined - current))) if np.size(refined) else 0.0
        current = refined
        logger.debug(f"adaptive panels on [{lo:.6g}, {hi:.6g}]: level {level + 1}, "
                     f"{panels} panels, change {change:.3e}")
        if change < tol:
            break
    else:
        logger.warning(f"adaptive quadrature on [{lo:.6g}, {hi:.6g}] stopped at "
                       f"{panels} panels with change {change:.3e} (tol {tol:.1e})")
    return current, change
