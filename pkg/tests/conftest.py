"""
Pytest configuration and fixtures for the soliton lab tests.
"""

import os
from typing import Callable

import pytest

from src.soliton_lab.bryant_solver import RadialProfile, solve_bryant

# Keep test runs away from any developer .env output directory
os.environ["SOLITON_LAB_OUT"] = "soliton_test_out"

BRYANT_DIMS = (3, 4, 5, 6)
BRYANT_R_MAX = 100.0
BRYANT_TOL = 1e-10


@pytest.fixture(scope="session")
def bryant_profiles() -> dict[int, RadialProfile]:
    """Bryant profiles for n = 3..6, integrated once per session."""
    return {n: solve_bryant(n, BRYANT_R_MAX, BRYANT_TOL) for n in BRYANT_DIMS}


@pytest.fixture(scope="session")
def bryant3(bryant_profiles) -> RadialProfile:
    return bryant_profiles[3]


def five_point(func: Callable[[float], float], x: float, h: float) -> float:
    """Central 5-point finite-difference derivative, O(h^4)."""
    return (func(x - 2 * h) - 8 * func(x - h) + 8 * func(x + h) - func(x + 2 * h)) / (12 * h)


@pytest.fixture
def fd_derivative() -> Callable[[Callable[[float], float], float, float], float]:
    return five_point
