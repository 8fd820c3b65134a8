"""Monte Carlo zero counting: the stochastic side of the verification.

Each trial draws the coefficients, counts the zeros of S_N(z) - K inside the
region with an argument-principle (winding number) counter, and aggregates a
confidence interval for the expected count.  For polynomial bases a
companion-matrix eigenvalue counter provides both a faster default and an
independent second oracle.

Trials whose zero set touches the region boundary cannot be counted reliably;
they are discarded and reported (the zero set of a fixed draw meets the
boundary curve with probability zero, so the discard event is a ~1e-9-rare
numerical guard, and the discard counter keeps the approximation auditable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryHitError,
    ConfigurationError,
    ContractViolationError,
    DiscardRateError,
)
from .model import BasisFamily, CoefficientProfile, Rectangle, as_level
from .rng import standard_normal_block

__all__ = [
    "MCEstimate",
    "companion_matrix",
    "count_zeros_companion",
    "count_zeros_winding",
    "estimate_expected_count",
]

# Two-sided 95% normal quantile.
_Z95 = 1.959963984540054

# Relative floor on |S - K| along the sampled boundary below which a trial is
# treated as a boundary hit.
_BOUNDARY_FLOOR = 1e-9

# Absolute distance from an eigenvalue to the boundary that flags a hit.
_EIGEN_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate of the expected zero count in a region.

    ``mean`` and the 95% normal CI are computed over kept trials;
    ``discarded_trials`` counts boundary-hit trials excluded from them.
    """

    trials: int
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    discarded_trials: int


# ---------------------------------------------------------------------------
# Winding-number counter
# ---------------------------------------------------------------------------


def _boundary_points(region: Rectangle, s: np.ndarray) -> np.ndarray:
    """Map parameters s in [0, 4) to boundary points, counterclockwise.

    Edges in order: bottom (left to right), right (up), top (right to left),
    left (down); each edge spans one parameter unit.
    """
    edge = np.floor(s).astype(np.int64)
    t = s - edge
    x0, x1, y0, y1 = region.x_min, region.x_max, region.y_min, region.y_max
    x = np.choose(edge, [x0 + t * (x1 - x0), np.full_like(t, x1),
                         x1 - t * (x1 - x0), np.full_like(t, x0)])
    y = np.choose(edge, [np.full_like(t, y0), y0 + t * (y1 - y0),
                         np.full_like(t, y1), y1 - t * (y1 - y0)])
    return x + 1j * y


def count_zeros_winding(
    eta: np.ndarray,
    basis: BasisFamily,
    level,
    region: Rectangle,
    *,
    initial_points: int = 64,
    max_points: int = 262144,
) -> int:
    """Zeros (with multiplicity) of sum_j eta_j f_j(z) - K inside the region.

    Traverses the boundary counterclockwise and accumulates principal-value
    argument increments of w(z) = S(z) - K, adaptively bisecting every step
    whose increment reaches pi/2; under that guard the running branch cannot
    alias, so the accumulated total is 2*pi times the winding number, which by
    the argument principle is the zero count.

    Raises ``BoundaryHitError`` when the sampled boundary comes within a
    relative factor 1e-9 of a zero (min |w| < 1e-9 max |w|), or when the
    refinement budget is exhausted without resolving the argument.
    """
    eta = np.asarray(eta, dtype=np.complex128)
    if eta.shape != (basis.count,):
        raise ConfigurationError(
            f"coefficient vector has shape {eta.shape}, expected ({basis.count},)"
        )
    level = as_level(level)
    s = np.linspace(0.0, 4.0, initial_points, endpoint=False)
    while True:
        z = _boundary_points(region, s)
        vals, _ = basis.values_and_derivatives(z)
        w = np.einsum("j,j...->...", eta, vals) - level.value
        w_abs = np.abs(w)
        if w_abs.min() < _BOUNDARY_FLOOR * w_abs.max():
            raise BoundaryHitError("a zero lies on or numerically near the region boundary")
        steps = np.angle(np.roll(w, -1) * np.conj(w))
        unresolved = np.abs(steps) >= 0.5 * np.pi
        if not np.any(unresolved):
            turns = steps.sum() / (2.0 * np.pi)
            count = int(np.rint(turns))
            if abs(turns - count) > 1e-6 * max(1.0, abs(turns)) + 1e-9:
                raise BoundaryHitError(
                    f"winding number did not resolve to an integer (got {turns!r})"
                )
            return count
        if s.size * 2 > max_points:
            raise BoundaryHitError("boundary refinement budget exhausted")
        s_next = np.roll(s, -1)
        s_next[-1] += 4.0
        midpoints = 0.5 * (s[unresolved] + s_next[unresolved])
        s = np.sort(np.concatenate([s, midpoints]))


# ---------------------------------------------------------------------------
# Companion-matrix counter
# ---------------------------------------------------------------------------


def companion_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Monic companion matrix of c_0 + c_1 z + ... + c_n z^n.

    Eigenvalues are the polynomial's roots.  Requires c_n != 0.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size < 2:
        raise ConfigurationError("need a 1-D coefficient vector of degree >= 1")
    if c[-1] == 0:
        raise ContractViolationError("leading coefficient must be nonzero")
    n = c.size - 1
    monic = c[:-1] / c[-1]
    mat = np.zeros((n, n), dtype=np.complex128)
    mat[np.arange(1, n), np.arange(n - 1)] = 1.0
    mat[:, -1] = -monic
    return mat


def count_zeros_companion(coeffs: np.ndarray, level, region: Rectangle) -> int:
    """Zeros of the polynomial minus K strictly inside the region.

    Counts companion-matrix eigenvalues of sum_j c_j z^j - K in the open
    rectangle; an eigenvalue within 1e-9 of the boundary raises
    ``BoundaryHitError``.
    """
    level = as_level(level)
    c = np.asarray(coeffs, dtype=np.complex128).copy()
    c[0] -= level.value
    roots = np.linalg.eigvals(companion_matrix(c))
    if np.any(region.boundary_distance(roots) < _EIGEN_BOUNDARY_TOL):
        raise BoundaryHitError("a root lies on or numerically near the region boundary")
    return int(np.count_nonzero(region.contains(roots)))


def _companion_counts_batch(coeff_rows: np.ndarray, level, region: Rectangle):
    """Vectorized companion counting for one coefficient row per trial.

    Returns (counts, discard_mask); rows with vanishing leading coefficient
    or a root near the boundary are flagged for discard.
    """
    level = as_level(level)
    c = np.array(coeff_rows, dtype=np.complex128)
    c[:, 0] -= level.value
    trials, m = c.shape
    degree = m - 1
    bad_leading = c[:, -1] == 0
    lead = np.where(bad_leading, 1.0, c[:, -1])
    monic = c[:, :-1] / lead[:, None]
    mats = np.zeros((trials, degree, degree), dtype=np.complex128)
    mats[:, np.arange(1, degree), np.arange(degree - 1)] = 1.0
    mats[:, :, -1] = -monic
    roots = np.linalg.eigvals(mats)
    near_boundary = region.boundary_distance(roots) < _EIGEN_BOUNDARY_TOL
    discard = bad_leading | np.any(near_boundary, axis=1)
    counts = np.count_nonzero(region.contains(roots), axis=1)
    return counts, discard


# ---------------------------------------------------------------------------
# Monte Carlo aggregation
# ---------------------------------------------------------------------------


def _sample_coefficients(profile: CoefficientProfile, trials: int, seed: int) -> np.ndarray:
    """Draw eta = a + i b for all trials; slot 2j is a_j, slot 2j+1 is b_j."""
    n = profile.size
    block = standard_normal_block(seed, trials, 2 * n)
    a = profile.mu_a[None, :] + np.sqrt(profile.var_a)[None, :] * block[:, 0::2]
    b = profile.mu_b[None, :] + np.sqrt(profile.var_b)[None, :] * block[:, 1::2]
    return a + 1j * b


def estimate_expected_count(
    profile: CoefficientProfile,
    basis: BasisFamily,
    level,
    region: Rectangle,
    trials: int,
    seed: int = 0,
    *,
    method: str = "auto",
) -> MCEstimate:
    """Monte Carlo estimate of the expected zero count of S - K in the region.

    Draws every a_j, b_j independently from the profile, counts zeros per
    trial, and returns the mean with a 95% normal confidence interval over
    kept trials.  ``method``: "companion" (polynomial bases only), "winding",
    or "auto" (companion whenever the basis exposes polynomial coefficients).

    Each trial's randomness is a pure function of (seed, trial index), so the
    estimate is reproducible regardless of scheduling; the reduction runs in
    trial order.  Aborts with ``DiscardRateError`` when at least 1% of trials
    hit the boundary, which signals that the region boundary passes through a
    high-density zone.
    """
    if trials < 100:
        raise ConfigurationError(f"need at least 100 trials, got {trials}")
    if method not in ("auto", "companion", "winding"):
        raise ConfigurationError(f"unknown method {method!r}")
    eta = _sample_coefficients(profile, trials, seed)
    poly = basis.polynomial_coefficients(eta)
    if method == "companion" and poly is None:
        raise ConfigurationError("companion counting needs a polynomial basis")
    use_companion = method == "companion" or (method == "auto" and poly is not None)

    if use_companion:
        counts, discard = _companion_counts_batch(poly, level, region)
        kept = counts[~discard]
        discarded = int(np.count_nonzero(discard))
    else:
        kept_list = []
        discarded = 0
        for t in range(trials):
            try:
                kept_list.append(count_zeros_winding(eta[t], basis, level, region))
            except BoundaryHitError:
                discarded += 1
        kept = np.asarray(kept_list, dtype=np.float64)

    if discarded / trials >= 0.01:
        raise DiscardRateError(
            f"{discarded} of {trials} trials hit the region boundary; "
            "the boundary likely passes through a high-density zone"
        )
    kept = np.asarray(kept, dtype=np.float64)
    mean = float(kept.mean())
    std_error = float(kept.std(ddof=1) / np.sqrt(kept.size)) if kept.size > 1 else 0.0
    return MCEstimate(
        trials=trials,
        mean=mean,
        std_error=std_error,
        ci_low=mean - _Z95 * std_error,
        ci_high=mean + _Z95 * std_error,
        discarded_trials=discarded,
    )
