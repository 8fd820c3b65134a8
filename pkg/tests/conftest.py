"""Shared helpers for randomized checks."""

from __future__ import annotations

import numpy as np
import pytest

from levelcross import CoefficientProfile, ComplexLevel


def rel_dev(a, b) -> float:
    """Relative deviation symmetric in scale; safe at exact zero."""
    a = float(a)
    b = float(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def disk_point(rng: np.random.Generator, radius: float) -> complex:
    """Uniform draw from a disk of the given radius."""
    r = radius * np.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * np.pi)
    return complex(r * np.cos(theta), r * np.sin(theta))


def random_zero_mean_profile(rng: np.random.Generator, n: int,
                             var_lo: float = 0.25, var_hi: float = 4.0) -> CoefficientProfile:
    zeros = np.zeros(n)
    return CoefficientProfile(
        zeros, rng.uniform(var_lo, var_hi, n), zeros, rng.uniform(var_lo, var_hi, n)
    )


def random_mean_profile(rng: np.random.Generator, n: int,
                        mean_scale: float = 1.0) -> CoefficientProfile:
    return CoefficientProfile(
        rng.uniform(-mean_scale, mean_scale, n),
        rng.uniform(0.25, 4.0, n),
        rng.uniform(-mean_scale, mean_scale, n),
        rng.uniform(0.25, 4.0, n),
    )


def random_level(rng: np.random.Generator, radius: float = 2.0) -> ComplexLevel:
    return ComplexLevel.from_complex(disk_point(rng, radius))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
