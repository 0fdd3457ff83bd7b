#!/usr/bin/env python3
"""
Quick demo script for orthoseries.
"""

import math
import sys
from pathlib import Path

# Add src to path
sys.path.append(str(Path(__file__).parent / 'src'))

from src.bvfun.bv_function import sgn, v_delta
from src.common.utils import setup_logging
from src.orthopoly.gauss import gauss_rule
from src.orthopoly.recurrence import recurrence_table
from src.verify.theorem import TheoremConstants, convergence_experiment
from src.weights.mrs import MrsCache, mrs_radius
from src.weights.weight_family import make_weight


def demo_mrs_numbers(cache: MrsCache) -> None:
    """MRS numbers against their closed forms."""
    print("Mhaskar-Rakhmanov-Saff numbers")
    print("=" * 50)

    hermite, freud4, erdos = make_weight("freud:2"), make_weight("freud:4"), make_weight("erdos:1:2")
    for t in (1.0, 16.0, 256.0):
        print(f"  t={t:<6g} freud:2 a_t={mrs_radius(hermite, t, cache):.12f} (sqrt(t)={math.sqrt(t):.12f})")
    print(f"  freud:4 a_24={mrs_radius(freud4, 24.0, cache):.12f} (exact 2)")
    for t in (8.0, 128.0):
        print(f"  erdos:1:2 a_{t:g}={mrs_radius(erdos, t, cache):.6f}")
    print()


def demo_recurrence(cache: MrsCache, N: int = 64) -> None:
    """Recurrence coefficients of exp(-2x^2) against B[k] = sqrt(k)/2."""
    print("Recurrence coefficients")
    print("=" * 50)

    spec = make_weight("freud:2")
    table = recurrence_table(spec, N, cache=cache)
    worst = max(abs(table.B[k] - math.sqrt(k) / 2.0) for k in range(1, N + 1))
    print(f"  freud:2 N={N}: mu0={table.mu0:.15f}, max |B[k] - sqrt(k)/2| = {worst:.3e}")

    rule = gauss_rule(table, 4, spec)
    print("  4-point Gauss rule:")
    for k in range(1, 5):
        print(f"    x_{k},4 = {rule.node(k):+.12f}   lambda = {rule.christoffel_number(k):.12f}")
    print()


def demo_convergence(cache: MrsCache, n_list=(8, 16, 32, 64)) -> None:
    """Partial sums of sgn for an Erdos weight and the bound components."""
    print("Convergence of s_n(sgn, x)")
    print("=" * 50)

    spec = make_weight("erdos:1:2")
    print(f"  V_1/2(R, sgn) = {v_delta(spec, sgn(), None, 0.5):g}")
    report = convergence_experiment(spec, sgn(), [0.5, 1.0], list(n_list), TheoremConstants(), cache=cache)
    for row in report.rows:
        terms = ", ".join(f"{value:.3e}" for value in row.rhs.terms())
        print(f"  n={row.n:<4d} x={row.x:<4g} |s_n - f| = {row.abs_error:.3e}   terms: {terms}")
    print()


def main():
    """Main demo function."""
    print("orthoseries demo")
    print("=" * 60)
    print()

    setup_logging("WARNING")
    cache = MrsCache()

    try:
        demo_mrs_numbers(cache)
        demo_recurrence(cache)
        demo_convergence(cache)

        print("All demos completed successfully!")
        print()
        print("Next steps:")
        print("1. Adjust grids and constants in configs/orthoseries_config.yaml")
        print("2. Run: python -m src.main converge --weight erdos:1:2 --f sgn --x 1 --n 8,16,32")
        print("3. Run: python -m src.main verify-lemmas --weight freud:4 --n 8,16,32")

    except Exception as e:
        print(f"Demo failed: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
