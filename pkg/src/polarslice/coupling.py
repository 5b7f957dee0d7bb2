"""Explicit couplings of the transition kernels and what they measure.

Two chains at x and y are coupled by sharing the transition's randomness
(u1, u2, direction). Because the shared direction cancels in distances,
``||x' - y'|| = |r_x' - r_y'|``, and the mean of that over fresh couplings,
divided by ``||x - y||``, is an upper-bound estimate of the kernel's
contraction coefficient. For pairs on a common ray the bound is tight for
the families below, which is what the sharpness probe exploits by pushing a
ray pair to large radius.

Couplings are provided exactly for the families with a proven contraction
rate (Dk, the heavy-tailed standard family, the shell family); the other
families have none stated and are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import (
    DegeneratePairError,
    HypothesisError,
    OutOfSupportError,
    UnsupportedFamilyError,
)
from .mathcore import sample_unit_sphere
from .rng import RngStream
from .targets import DkTarget, ParetoShellTarget, StdTTarget, TargetFamily

__all__ = [
    "CoupledPair",
    "ContractionEstimate",
    "theoretical_contraction_rate",
    "coupled_step",
    "coupled_samples",
    "contraction_ratio",
    "ray_pair",
    "sharpness_probe",
    "sharpness_profile",
    "stdt_mean_norm_quadrature",
    "sharpness_probe_quadrature",
]

_COUPLED = (DkTarget, StdTTarget, ParetoShellTarget)


@dataclass(frozen=True)
class CoupledPair:
    """A pair of support points; must differ for ratio estimates."""

    x: np.ndarray
    y: np.ndarray

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(np.asarray(self.x) - np.asarray(self.y)))


@dataclass(frozen=True)
class ContractionEstimate:
    """Coupling-based contraction measurement against the formula value."""

    empirical_rate: float
    std_error: float
    theoretical_rate: float
    pair_grid: tuple

    @property
    def within_bound(self) -> bool:
        """Empirical rate below the formula rate plus three standard errors."""
        return self.empirical_rate <= self.theoretical_rate + 3.0 * self.std_error


def theoretical_contraction_rate(target: TargetFamily) -> float:
    """The proven one-step contraction rate for this family.

    Dk: k/(k+1). Heavy-tailed standard: d(d+m)/((d+1)(d+m-1)), m > 1.
    Shell: k(k+m)/((k+1)(k+m-1)), m > 1. Others: no rate is stated.
    """
    if isinstance(target, DkTarget):
        return target.k / (target.k + 1.0)
    if isinstance(target, StdTTarget):
        if target.m <= 1.0:
            raise HypothesisError(f"contraction rate needs m > 1, got m = {target.m}")
        d, m = target.d, target.m
        return d * (d + m) / ((d + 1.0) * (d + m - 1.0))
    if isinstance(target, ParetoShellTarget):
        if target.m <= 1.0:
            raise HypothesisError(f"contraction rate needs m > 1, got m = {target.m}")
        k, m = target.k, target.m
        return k * (k + m) / ((k + 1.0) * (k + m - 1.0))
    raise UnsupportedFamilyError(f"no contraction rate for {type(target).__name__}")


def _check_couplable(target: TargetFamily):
    if not isinstance(target, _COUPLED):
        raise UnsupportedFamilyError(
            f"no coupling construction for {type(target).__name__}"
        )


def _radius_of(target: TargetFamily, x) -> float:
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    if not np.isfinite(target.log_factor1_radial(r)):
        raise OutOfSupportError(f"point with radius {r} is outside the support")
    return r


def _coupled_radii(target: TargetFamily, rx: float, ry: float, u1, u2):
    """Coupled slice radii for both chains from shared (u1, u2), vectorized."""
    log_u1 = np.log(u1)
    rad_x = target.inverse_cdf_radius(log_u1 + float(target.log_factor1_radial(rx)), None, u2)
    rad_y = target.inverse_cdf_radius(log_u1 + float(target.log_factor1_radial(ry)), None, u2)
    return rad_x, rad_y


def coupled_step(target: TargetFamily, x, y, rng: RngStream):
    """One coupled transition: shared (u1, u2, theta), exact marginals."""
    _check_couplable(target)
    rx, ry = _radius_of(target, x), _radius_of(target, y)
    u1 = float(rng.open_uniform())
    u2 = float(rng.open_uniform())
    theta = sample_unit_sphere(target.d, rng)
    rad_x, rad_y = _coupled_radii(target, rx, ry, u1, u2)
    return float(rad_x) * theta, float(rad_y) * theta


def coupled_samples(target: TargetFamily, x, y, n: int, rng: RngStream):
    """n independent coupled transitions from (x, y), as two (n, d) arrays."""
    _check_couplable(target)
    rx, ry = _radius_of(target, x), _radius_of(target, y)
    u1 = rng.open_uniform(n)
    u2 = rng.open_uniform(n)
    thetas = sample_unit_sphere(target.d, rng, size=n)
    rad_x, rad_y = _coupled_radii(target, rx, ry, u1, u2)
    return rad_x[:, None] * thetas, rad_y[:, None] * thetas


def contraction_ratio(target: TargetFamily, pair: CoupledPair, n: int,
                      rng: RngStream) -> ContractionEstimate:
    """Mean coupled one-step distance over n couplings, relative to ||x - y||.

    The shared direction drops out of ``||x' - y'||``, so no direction draws
    are consumed. The estimate satisfies
    ``empirical_rate <= theoretical_rate + 3 std_error`` (the coupling is the
    one behind the proven bound).
    """
    _check_couplable(target)
    if pair.distance == 0.0:
        raise DegeneratePairError("contraction ratio needs x != y")
    rx, ry = _radius_of(target, pair.x), _radius_of(target, pair.y)
    u1 = rng.open_uniform(n)
    u2 = rng.open_uniform(n)
    rad_x, rad_y = _coupled_radii(target, rx, ry, u1, u2)
    ratios = np.abs(rad_x - rad_y) / pair.distance
    return ContractionEstimate(
        empirical_rate=float(ratios.mean()),
        std_error=float(ratios.std(ddof=1)) / math.sqrt(n),
        theoretical_rate=theoretical_contraction_rate(target),
        pair_grid=(pair,),
    )


def ray_pair(d: int, norm_x: float, norm_y: float, theta0=None) -> CoupledPair:
    """A pair on a common ray (first axis unless theta0 is given)."""
    if theta0 is None:
        theta0 = np.zeros(d)
        theta0[0] = 1.0
    theta0 = np.asarray(theta0, dtype=float)
    return CoupledPair(x=norm_x * theta0, y=norm_y * theta0)


# ---------------------------------------------------------------------------
# Sharpness probes
# ---------------------------------------------------------------------------


def _probe_stats(target: TargetFamily, r: float, n: int, rng: RngStream):
    rx, ry = _radius_of(target, r * _e1(target.d)), _radius_of(target, 0.5 * r * _e1(target.d))
    u1 = rng.open_uniform(n)
    u2 = rng.open_uniform(n)
    rad_x, rad_y = _coupled_radii(target, rx, ry, u1, u2)
    diffs = (rad_x - rad_y) / (r / 2.0)
    return abs(float(diffs.mean())), float(diffs.std(ddof=1)) / math.sqrt(n)


def _e1(d: int):
    e = np.zeros(d)
    e[0] = 1.0
    return e


def sharpness_probe(target: TargetFamily, r: float, theta0=None,
                    n: int = 10**6, rng: Optional[RngStream] = None) -> float:
    """Estimate the kernel's expansion between the ray pair (r, r/2).

    Shared-randomness Monte Carlo of ``|E||X'|| - E||Y'||| / (r/2)`` for
    x = r theta0 and y = r/2 theta0; as r grows this approaches the kernel's
    contraction coefficient for the heavy-tailed families. theta0 is
    irrelevant by rotational invariance (kept for call-site readability).
    """
    _check_couplable(target)
    if rng is None:
        rng = RngStream(0)
    del theta0  # the probe's law does not depend on the ray
    value, _ = _probe_stats(target, r, n, rng)
    return value


def sharpness_profile(target: TargetFamily, r_grid, n: int, rng: RngStream):
    """(r, probe, std_error) rows over an increasing radius grid."""
    _check_couplable(target)
    rows = []
    for i, r in enumerate(r_grid):
        value, se = _probe_stats(target, float(r), n, rng.child(i))
        rows.append((float(r), value, se))
    return rows


def stdt_mean_norm_quadrature(d: int, m: float, norm: float) -> float:
    """Closed-form post-step mean radius for the heavy-tailed standard family.

    ``E||X'|| = d/(d+1) * int_0^1 sqrt((u^(-1/(d+m)) norm)^2
    + m u^(-2/(d+m)) - m) du``, evaluated by adaptive quadrature.
    """
    a = 1.0 / (d + m)

    def integrand(u):
        s = u ** (-a)
        return math.sqrt((s * norm) ** 2 + m * s * s - m)

    val, _ = integrate.quad(integrand, 0.0, 1.0, limit=200)
    return d / (d + 1.0) * val


def sharpness_probe_quadrature(target: StdTTarget, r: float) -> float:
    """The probe's exact value (no Monte Carlo) for the standard family."""
    if not isinstance(target, StdTTarget):
        raise UnsupportedFamilyError("quadrature probe exists only for the standard family")
    ex = stdt_mean_norm_quadrature(target.d, target.m, r)
    ey = stdt_mean_norm_quadrature(target.d, target.m, 0.5 * r)
    return abs(ex - ey) / (r / 2.0)
