"""
Shared fixtures: weights and recurrence tables built once per session.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.orthopoly.recurrence import recurrence_table
from src.weights.mrs import MrsCache
from src.weights.weight_family import make_weight


@pytest.fixture(scope="session")
def mrs_cache():
    return MrsCache()


@pytest.fixture(scope="session")
def hermite():
    """Freud(2): w^2 = exp(-2x^2), the scaled Hermite weight."""
    return make_weight("freud:2")


@pytest.fixture(scope="session")
def freud4():
    return make_weight("freud:4")


@pytest.fixture(scope="session")
def erdos():
    """Q(x) = exp(x^2) - 1."""
    return make_weight("erdos:1:2")


@pytest.fixture(scope="session")
def hermite_table(hermite, mrs_cache):
    return recurrence_table(hermite, 128, cache=mrs_cache)


@pytest.fixture(scope="session")
def freud4_table(freud4, mrs_cache):
    return recurrence_table(freud4, 32, cache=mrs_cache)


@pytest.fixture(scope="session")
def erdos_table(erdos, mrs_cache):
    return recurrence_table(erdos, 64, cache=mrs_cache)


@pytest.fixture(scope="session")
def erdos_table_large(erdos, mrs_cache):
    return recurrence_table(erdos, 128, cache=mrs_cache)
