"""Closed-form expected density of complex level crossings of random sums.

The random sum is S_N(z) = sum_j (a_j + i b_j) f_j(z) with independent real
normal coefficients and a holomorphic basis real on the real line.  The
expected number of solutions of S_N(z) = K in a region T is the area integral
of the density h(z) evaluated here.

Evaluators
----------
``zero_mean_density``      per-index variances, zero means (general closed form)
``equal_variance_density`` common variance sigma^2 for every a_j and b_j
``general_mean_density``   per-index variances and arbitrary means
``diagonal_level_density`` level on the diagonal, K = r + i r (see docstring)
``zero_level_density``     K = 0 rational form (no exponential factor)
``brownian_density``       coefficients from successive Brownian observations

Oracles
-------
``moments_path_density``          conditional-moment reconstruction, zero means
``conditioned_jacobian_density``  linear-Gaussian conditioning, any means

All closed-form evaluators accept scalar or array ``z`` and return a parts
record exposing the intermediate quadratic forms next to the density value
``h``; everything is a pure function of immutable inputs and safe to call
concurrently.  The two oracles are deliberately scalar and slow: they recompute h
from first principles (conditional moments of the Jacobian determinant times
the Gaussian density of the field) without sharing the assembled formulas,
and exist to cross-check the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    ConfigurationError,
    DegenerateCovarianceError,
    DegeneratePointError,
)
from .model import BasisFamily, CoefficientProfile, ComplexLevel, TimeGrid, as_level, build_brownian_basis
from .numerics import diff_of_products, neumaier_sum

__all__ = [
    "DensityParts",
    "EqualVarianceParts",
    "DensityPartsGeneral",
    "zero_mean_density",
    "equal_variance_density",
    "general_mean_density",
    "diagonal_level_density",
    "zero_level_density",
    "brownian_density",
    "brownian_density_direct",
    "moments_path_density",
    "conditioned_jacobian_density",
]

# Relative floor under which Y1*Y3 - Y2^2 is treated as singular.
_DEGENERACY_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# Parts records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityParts:
    """Quadratic forms of one zero-mean density evaluation.

    y1, y2, y3 are the covariance entries of (Re S, Im S); d0 = sqrt of their
    determinant; d1, d2, d3 the mixed value/derivative accumulations entering
    the conditional Jacobian moment; h the density value.
    """

    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class EqualVarianceParts:
    """Hermitian sums of the equal-variance reduction.

    b0 = sum |f_j|^2, b1 = sum conj(f_j) f_j', b2 = sum |f_j'|^2.
    """

    b0: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    sigma2: float
    h: np.ndarray


@dataclass(frozen=True)
class DensityPartsGeneral:
    """Diagnostics of a general-mean density evaluation.

    ex1, ex2 are the means of (Re S, Im S); m = sum E(a_j + i b_j) f_j'(z) is
    the derivative of the mean field.  The starred entries are the
    mean-shifted quadratic forms (y1s = y1 - ex1^2 and so on, with
    d1s = d1 - ex1*m and d2s = d2 + i*ex2*m); they are reported for
    inspection and reduce to the plain forms when all means vanish.

    The shifted matrix (y1s, y2s; y2s, y3s) loses positive definiteness once
    the mean vector leaves the unit Mahalanobis ellipse of the covariance, in
    which case d0s is NaN; the density value h never depends on it (h is
    assembled from the plain covariance, which is positive definite for every
    nondegenerate profile).
    """

    y1s: np.ndarray
    y2s: np.ndarray
    y3s: np.ndarray
    d0s: np.ndarray
    d1s: np.ndarray
    d2s: np.ndarray
    d3s: np.ndarray
    m: np.ndarray
    ex1: np.ndarray
    ex2: np.ndarray
    h: np.ndarray


# ---------------------------------------------------------------------------
# Shared accumulation
# ---------------------------------------------------------------------------


def _check_sizes(profile: CoefficientProfile, basis: BasisFamily) -> None:
    if profile.size != basis.count:
        raise ConfigurationError(
            f"profile has {profile.size} entries but basis has {basis.count} members"
        )


def _col(arr: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape a per-index vector for broadcasting against (count,) + z.shape."""
    return arr.reshape(arr.shape + (1,) * ndim)


def _covariance_parts(profile, basis, z):
    """Plain quadratic forms at z: y1, y2, y3, det, d0, d1, d2, d3.

    Raises ``DegenerateCovarianceError`` when the determinant falls below the
    relative floor; the density is undefined there.
    """
    z = np.asarray(z, dtype=np.complex128)
    vals, derivs = basis.values_and_derivatives(z)
    u, v = vals.real, vals.imag
    va = _col(profile.var_a, z.ndim)
    vb = _col(profile.var_b, z.ndim)
    y1 = neumaier_sum(va * u * u + vb * v * v)
    y2 = neumaier_sum((va - vb) * u * v)
    y3 = neumaier_sum(vb * u * u + va * v * v)
    d1 = neumaier_sum((va * u - 1j * vb * v) * derivs)
    d2 = neumaier_sum((vb * u - 1j * va * v) * derivs)
    d3 = neumaier_sum((va + vb) * (derivs.real**2 + derivs.imag**2))
    det = diff_of_products(y1, y3, y2, y2)
    if np.any(det <= _DEGENERACY_FLOOR * y1 * y3):
        raise DegenerateCovarianceError(
            "covariance of (Re S, Im S) is numerically singular at an evaluation point"
        )
    d0 = np.sqrt(det)
    return vals, derivs, y1, y2, y3, det, d0, d1, d2, d3


def _zero_mean_h(y1, y2, y3, det, d0, d1, d2, d3, k1, k2):
    """Assemble the zero-mean closed form from its quadratic forms."""
    q1 = k1 * y3 - k2 * y2
    q2 = k1 * y2 - k2 * y1
    r = k1 * (y2 + y3) - k2 * (y1 + y2)
    ad1 = d1.real**2 + d1.imag**2
    ad2 = d2.real**2 + d2.imag**2
    d12 = d1 + 1j * d2
    ad12 = d12.real**2 + d12.imag**2
    d0_cubed = d0 * det
    braces = (
        d3
        - (ad1 / d0) * ((y2 + y3) / d0 - q1 * r / d0_cubed)
        - (ad2 / d0) * ((y1 + y2) / d0 - q2 * r / d0_cubed)
        + (ad12 / d0) * (y2 / d0 - q1 * q2 / d0_cubed)
    )
    expo = -(k1 * k1 * y3 + k2 * k2 * y1 - 2.0 * k1 * k2 * y2) / (2.0 * det)
    return np.exp(expo) / (2.0 * np.pi * d0) * braces


# ---------------------------------------------------------------------------
# Closed-form evaluators
# ---------------------------------------------------------------------------


def zero_mean_density(profile: CoefficientProfile, basis: BasisFamily, level, z) -> DensityParts:
    """Density for zero-mean coefficients with per-index variances.

    Requires ``profile.has_zero_means``; use ``general_mean_density`` for
    coefficients with drift.
    """
    _check_sizes(profile, basis)
    if not profile.has_zero_means:
        raise ContractViolationError(
            "zero_mean_density requires a zero-mean profile; use general_mean_density"
        )
    level = as_level(level)
    _, _, y1, y2, y3, det, d0, d1, d2, d3 = _covariance_parts(profile, basis, z)
    h = _zero_mean_h(y1, y2, y3, det, d0, d1, d2, d3, level.k1, level.k2)
    return DensityParts(y1=y1, y2=y2, y3=y3, d0=d0, d1=d1, d2=d2, d3=d3, h=h)


def equal_variance_density(sigma2: float, basis: BasisFamily, level, z) -> EqualVarianceParts:
    """Density when every a_j and b_j has the same variance sigma^2.

    h = exp(-|K|^2 / (2 sigma^2 B0)) / (pi B0)
        * { B2 - (|B1| / B0)^2 (B0 - |K|^2 / (2 sigma^2)) }.
    """
    if sigma2 <= 0.0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")
    level = as_level(level)
    z = np.asarray(z, dtype=np.complex128)
    vals, derivs = basis.values_and_derivatives(z)
    b0 = neumaier_sum(vals.real**2 + vals.imag**2)
    b1 = neumaier_sum(np.conj(vals) * derivs)
    b2 = neumaier_sum(derivs.real**2 + derivs.imag**2)
    if np.any(b0 <= 0.0):
        raise DegeneratePointError("all basis functions vanish at an evaluation point")
    ksq = level.k1**2 + level.k2**2
    ab1 = b1.real**2 + b1.imag**2
    braces = b2 - (ab1 / b0**2) * (b0 - ksq / (2.0 * sigma2))
    h = np.exp(-ksq / (2.0 * sigma2 * b0)) / (np.pi * b0) * braces
    return EqualVarianceParts(b0=b0, b1=b1, b2=b2, sigma2=float(sigma2), h=h)


def general_mean_density(profile: CoefficientProfile, basis: BasisFamily, level, z) -> DensityPartsGeneral:
    """Density for arbitrary per-index means and variances.

    The field (Re S, Im S) keeps the zero-mean covariance (means do not enter
    second central moments); conditioning on S = K shifts the level by the
    field mean and adds the mean-derivative m to the conditional expectation
    of the coefficient polynomial's derivative.  Concretely, with
    kt = K - E(S) and q1 = kt1*y3 - kt2*y2, q2 = kt1*y2 - kt2*y1:

        E(det grad | S = K) = trace term + |m + (q1 d1 - i q2 d2) / det|^2

    multiplied by the Gaussian density of S at K.  With all means zero this
    reduces exactly to ``zero_mean_density``.
    """
    _check_sizes(profile, basis)
    level = as_level(level)
    zarr = np.asarray(z, dtype=np.complex128)
    vals, derivs, y1, y2, y3, det, d0, d1, d2, d3 = _covariance_parts(profile, basis, zarr)
    ma = _col(profile.mu_a, zarr.ndim)
    mb = _col(profile.mu_b, zarr.ndim)
    ex1 = neumaier_sum(ma * vals.real - mb * vals.imag)
    ex2 = neumaier_sum(ma * vals.imag + mb * vals.real)
    m = neumaier_sum((ma + 1j * mb) * derivs)

    kt1 = level.k1 - ex1
    kt2 = level.k2 - ex2
    q1 = kt1 * y3 - kt2 * y2
    q2 = kt1 * y2 - kt2 * y1
    cond_deriv = m + (q1 * d1 - 1j * q2 * d2) / det
    ad1 = d1.real**2 + d1.imag**2
    ad2 = d2.real**2 + d2.imag**2
    d12 = d1 + 1j * d2
    ad12 = d12.real**2 + d12.imag**2
    trace_term = d3 - (ad1 * (y2 + y3) + ad2 * (y1 + y2) - ad12 * y2) / det
    edet = trace_term + cond_deriv.real**2 + cond_deriv.imag**2
    expo = -(kt1 * kt1 * y3 + kt2 * kt2 * y1 - 2.0 * kt1 * kt2 * y2) / (2.0 * det)
    h = edet * np.exp(expo) / (2.0 * np.pi * d0)

    # Mean-shifted diagnostics of the classical display; see the dataclass docs.
    y1s = y1 - ex1 * ex1
    y2s = y2 - ex1 * ex2
    y3s = y3 - ex2 * ex2
    dets = diff_of_products(y1s, y3s, y2s, y2s)
    with np.errstate(invalid="ignore"):
        d0s = np.where(dets > 0.0, np.sqrt(np.where(dets > 0.0, dets, 1.0)), np.nan)
    return DensityPartsGeneral(
        y1s=y1s, y2s=y2s, y3s=y3s, d0s=d0s,
        d1s=d1 - ex1 * m, d2s=d2 + 1j * ex2 * m, d3s=d3,
        m=m, ex1=ex1, ex2=ex2, h=h,
    )


def diagonal_level_density(profile: CoefficientProfile, basis: BasisFamily, radius: float, z):
    """Zero-mean density at the diagonal level K = radius * (1 + i).

    Densities "at a circle radius" are not expressible through the radius
    alone: the level enters the exponent through K1 and K2 separately, so a
    radius only pins the level up to a direction.  The convention here puts
    the level on the diagonal, K1 = K2 = radius; the result is exactly
    ``zero_mean_density`` at that level, which is authoritative.
    """
    if radius <= 0.0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    return zero_mean_density(profile, basis, ComplexLevel(radius, radius), z).h


def zero_level_density(profile: CoefficientProfile, basis: BasisFamily, z):
    """Zero-mean density at K = 0: the rational (exponential-free) form.

    h = (d0^2 d3 - |d1|^2 (y2 + y3) - |d2|^2 (y1 + y2) + |d1 + i d2|^2 y2)
        / (2 pi d0^3).
    """
    _check_sizes(profile, basis)
    if not profile.has_zero_means:
        raise ContractViolationError("zero_level_density requires a zero-mean profile")
    _, _, y1, y2, y3, det, d0, d1, d2, d3 = _covariance_parts(profile, basis, z)
    ad1 = d1.real**2 + d1.imag**2
    ad2 = d2.real**2 + d2.imag**2
    d12 = d1 + 1j * d2
    ad12 = d12.real**2 + d12.imag**2
    return (det * d3 - ad1 * (y2 + y3) - ad2 * (y1 + y2) + ad12 * y2) / (2.0 * np.pi * d0 * det)


def brownian_density(inner: BasisFamily, grid: TimeGrid, level, z) -> DensityParts:
    """Density when the coefficients are successive observations of a Brownian path.

    Implemented as the composition of the prefix-sum basis construction with
    ``zero_mean_density``; ``brownian_density_direct`` evaluates the same
    quantity through the expanded per-increment sums.
    """
    basis, profile = build_brownian_basis(inner, grid)
    return zero_mean_density(profile, basis, level, z)


def brownian_density_direct(inner: BasisFamily, grid: TimeGrid, level, z) -> DensityParts:
    """Redundant direct evaluation of ``brownian_density``.

    Forms the suffix sums of the inner basis explicitly and accumulates the
    quadratic forms per increment, as the expanded statement displays them.
    Kept as an independent arithmetic path for testing.
    """
    if inner.count != len(grid):
        raise ConfigurationError(
            f"basis size {inner.count} does not match grid length {len(grid)}"
        )
    gaps = grid.gaps()
    if gaps[0] <= 0.0:
        raise ConfigurationError("t_0 must be positive: the first increment variance is t_0")
    level = as_level(level)
    z = np.asarray(z, dtype=np.complex128)
    vals, derivs = inner.values_and_derivatives(z)
    rev = slice(None, None, -1)
    su = np.cumsum(vals.real[rev], axis=0)[rev]   # sum_{j>=k} u_j
    sv = np.cumsum(vals.imag[rev], axis=0)[rev]
    sup = np.cumsum(derivs.real[rev], axis=0)[rev]
    svp = np.cumsum(derivs.imag[rev], axis=0)[rev]
    g = _col(gaps, z.ndim)
    y1 = np.sum(g * (su * su + sv * sv), axis=0)
    y2 = np.zeros_like(y1)  # equal per-increment variances in both components
    y3 = y1
    d1 = np.sum(g * (su - 1j * sv) * (sup + 1j * svp), axis=0)
    d2 = d1
    d3 = np.sum(2.0 * g * (sup * sup + svp * svp), axis=0)
    det = y1 * y3 - y2 * y2
    if np.any(det <= _DEGENERACY_FLOOR * y1 * y3):
        raise DegenerateCovarianceError("singular covariance in direct evaluation")
    d0 = np.sqrt(det)
    h = _zero_mean_h(y1, y2, y3, det, d0, d1, d2, d3, level.k1, level.k2)
    return DensityParts(y1=y1, y2=y2, y3=y3, d0=d0, d1=d1, d2=d2, d3=d3, h=h)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def _conditional_coefficient_means(profile, basis, level, z):
    """E(a_j | S = K) and E(b_j | S = K) for a zero-mean profile (scalar z)."""
    level = as_level(level)
    vals, _ = basis.values_and_derivatives(complex(z))
    u, v = vals.real, vals.imag
    va, vb = profile.var_a, profile.var_b
    y1 = float(np.sum(va * u * u + vb * v * v))
    y2 = float(np.sum((va - vb) * u * v))
    y3 = float(np.sum(vb * u * u + va * v * v))
    det = y1 * y3 - y2 * y2
    if det <= 0.0:
        raise DegenerateCovarianceError("singular covariance")
    q1 = level.k1 * y3 - level.k2 * y2
    q2 = level.k1 * y2 - level.k2 * y1
    mean_a = va * (q1 * u - q2 * v) / det
    mean_b = -vb * (q1 * v + q2 * u) / det
    return mean_a, mean_b


def moments_path_density(profile: CoefficientProfile, basis: BasisFamily, level, z) -> float:
    """Density reconstructed from conditional moments (zero means, scalar z).

    Independent oracle for ``zero_mean_density``: builds the conditional
    means and pairwise conditional covariances of the coefficients given
    S(z) = K, assembles the conditional expectation of the Jacobian
    determinant by direct double summation over index pairs, and multiplies
    by the joint Gaussian density of (Re S, Im S) at the level.  No part of
    the assembled closed form is reused.
    """
    _check_sizes(profile, basis)
    if not profile.has_zero_means:
        raise ContractViolationError("moments_path_density requires a zero-mean profile")
    level = as_level(level)
    zc = complex(z)
    vals, derivs = basis.values_and_derivatives(zc)
    u, v = vals.real, vals.imag
    up, vp = derivs.real, derivs.imag
    va, vb = profile.var_a, profile.var_b

    y1 = float(np.sum(va * u * u + vb * v * v))
    y2 = float(np.sum((va - vb) * u * v))
    y3 = float(np.sum(vb * u * u + va * v * v))
    det = y1 * y3 - y2 * y2
    if det <= 0.0:
        raise DegenerateCovarianceError("singular covariance of (Re S, Im S)")

    mean_a, mean_b = _conditional_coefficient_means(profile, basis, level, zc)

    uu = np.outer(u, u)
    vv = np.outer(v, v)
    uv = np.outer(u, v)
    vu = np.outer(v, u)
    vaa = np.outer(va, va)
    vbb = np.outer(vb, vb)
    vab = np.outer(va, vb)
    vba = np.outer(vb, va)
    cov_aa = np.diag(va) - vaa * (y3 * uu - y2 * (uv + vu) + y1 * vv) / det
    cov_bb = np.diag(vb) - vbb * (y1 * uu + y2 * (uv + vu) + y3 * vv) / det
    cov_ab = -vab * (y1 * vu - y2 * (uu - vv) - y3 * uv) / det
    cov_ba = -vba * (y1 * uv - y2 * (uu - vv) - y3 * vu) / det

    m_aa = cov_aa + np.outer(mean_a, mean_a)
    m_bb = cov_bb + np.outer(mean_b, mean_b)
    m_ab = cov_ab + np.outer(mean_a, mean_b)
    m_ba = cov_ba + np.outer(mean_b, mean_a)

    sym = np.outer(up, up) + np.outer(vp, vp)
    skew = np.outer(vp, up) - np.outer(up, vp)
    expected_det = float(np.sum((m_aa + m_bb) * sym + (m_ab - m_ba) * skew))

    expo = -(level.k1**2 * y3 - 2.0 * level.k1 * level.k2 * y2 + level.k2**2 * y1) / (2.0 * det)
    joint_density = np.exp(expo) / (2.0 * np.pi * np.sqrt(det))
    return expected_det * joint_density


def conditioned_jacobian_density(profile: CoefficientProfile, basis: BasisFamily, level, z) -> float:
    """Density via generic linear-Gaussian conditioning (any means, scalar z).

    Stacks the coefficient vector w = (a, b) with its diagonal covariance,
    conditions on the linear image S(z) = K, and evaluates the conditional
    mean of the Jacobian quadratic form as trace(Q Sigma_c) + m_c' Q m_c,
    times the Gaussian density of S(z) at K.  Works for arbitrary means and
    serves as the oracle for ``general_mean_density``.
    """
    _check_sizes(profile, basis)
    level = as_level(level)
    vals, derivs = basis.values_and_derivatives(complex(z))
    u, v = vals.real, vals.imag
    up, vp = derivs.real, derivs.imag
    n = profile.size

    mean_w = np.concatenate([profile.mu_a, profile.mu_b])
    cov_w = np.concatenate([profile.var_a, profile.var_b])  # diagonal entries
    coeff = np.zeros((2, 2 * n))
    coeff[0, :n], coeff[0, n:] = u, -v
    coeff[1, :n], coeff[1, n:] = v, u

    sigma_xx = (coeff * cov_w) @ coeff.T
    det = np.linalg.det(sigma_xx)
    if det <= 0.0:
        raise DegenerateCovarianceError("singular covariance of (Re S, Im S)")
    sigma_xx_inv = np.linalg.inv(sigma_xx)
    gain = (cov_w[:, None] * coeff.T) @ sigma_xx_inv            # Sigma C' Sigma_xx^-1
    resid = np.array([level.k1, level.k2]) - coeff @ mean_w
    mean_c = mean_w + gain @ resid
    sigma_c = np.diag(cov_w) - gain @ (coeff * cov_w)

    # Jacobian determinant of (x, y) -> (Re S, Im S) as a quadratic form in w;
    # equals |S'(z)|^2, verified blockwise: [[sym, skew], [-skew, sym]].
    sym = np.outer(up, up) + np.outer(vp, vp)
    skew = np.outer(vp, up) - np.outer(up, vp)
    quad = np.block([[sym, skew], [-skew, sym]])

    expected_det = float(np.trace(quad @ sigma_c) + mean_c @ quad @ mean_c)
    density = np.exp(-0.5 * resid @ sigma_xx_inv @ resid) / (2.0 * np.pi * np.sqrt(det))
    return expected_det * density
