"""Level-set functions, gap bounds, and the empirical-gap heuristic.

The generalized level-set function of a factorized density,

    ell(t) = integral of factor0 over the region where factor1 > t,

determines the sampler's spectral gap: if ``r -> ell^{-1}(r^k)`` is
log-concave (plus monotonicity conditions), the gap is at least 1/(k+1).
This module evaluates ``ell`` in closed form and by Monte Carlo, checks the
log-concavity class membership on a grid, and carries out the constructive
matching that transfers any admissible ``ell`` onto a one-dimensional
profile target with the same level-set function (hence the same gap).

The empirical side estimates gaps from chain output as ``2 / (IAT + 1)``,
with the integrated autocorrelation time truncated by the initial monotone
positive-pair rule. The heuristic is only trustworthy for small gaps; a
warning hook flags theory bounds above :data:`GAP_WARN_LEVEL`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft as sfft, integrate

from .errors import (
    DegenerateSeriesError,
    DomainError,
    HypothesisError,
    NotInLambdaKError,
    SeriesTooShortError,
    UnsupportedFamilyError,
)
from .mathcore import (
    PhiSpec,
    phi_inverse,
    phi_inverse_extended,
    sample_unit_sphere,
    surface_area,
)
from .rng import RngStream
from .targets import (
    DkTarget,
    QuadraticChi,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    TargetFamily,
)

__all__ = [
    "LevelSetFn",
    "GapBound",
    "IATEstimate",
    "MEMBER",
    "NOT_MEMBER",
    "INCONCLUSIVE",
    "GAP_WARN_LEVEL",
    "level_set_closed_form",
    "level_set_mc",
    "lambda_k_check",
    "lambda_k_boundary",
    "construct_matching_dk",
    "matched_level_set_error",
    "gap_lower_bound",
    "autocorrelation",
    "iat_estimate",
    "empirical_gap",
    "gap_heuristic_warning",
]

MEMBER = "member"
NOT_MEMBER = "not_member"
INCONCLUSIVE = "inconclusive"

#: Above this theory bound the 2/(IAT+1) heuristic is known to read high.
GAP_WARN_LEVEL = 0.25


@dataclass(frozen=True)
class LevelSetFn:
    """A level-set function with its support metadata.

    ``eval`` is vectorized over thresholds and returns 0 beyond ``t_max``;
    it is continuous and strictly decreasing inside the support. ``inverse``
    (optional) maps level values back to thresholds on the strictly
    decreasing branch.
    """

    eval: Callable
    sup_ell: float
    t_max: float
    provenance: str
    inverse: Optional[Callable] = None

    def __call__(self, t):
        return self.eval(t)

    def __repr__(self):
        return (f"LevelSetFn({self.provenance}, sup={self.sup_ell:g}, "
                f"t_max={self.t_max:g})")


@dataclass(frozen=True)
class GapBound:
    """A spectral-gap lower bound from one of the formula families."""

    kind: str
    value: float
    params: tuple


@dataclass(frozen=True)
class IATEstimate:
    """Integrated autocorrelation time with its truncation bookkeeping."""

    tau: float
    n_used: int
    truncation_lag: int


# ---------------------------------------------------------------------------
# Level-set functions
# ---------------------------------------------------------------------------


def _masked_eval(formula: Callable, t_max: float) -> Callable:
    """Vectorized eval that is `formula` inside (0, t_max), else 0/error."""

    def ev(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr <= 0.0):
            raise DomainError("level-set functions are defined for t > 0")
        inside = t_arr < t_max
        out = np.zeros(t_arr.shape)
        if inside.any():
            out[inside] = formula(t_arr[inside])
        out = out.reshape(np.shape(t))
        return out if np.ndim(t) else float(out)

    return ev


def rotasym_level_constant(target: RotAsymTarget, n: int = 2**18,
                           rng: Optional[RngStream] = None) -> float:
    """The direction integral ``(1/k) int chi^(-k/m) dsigma``.

    Exact for constant weights, by angular quadrature in dimension 2, by
    Monte Carlo on a fixed stream otherwise (deterministic by default).
    """
    expo = -target.k / target.m
    probe = sample_unit_sphere(target.d, RngStream(0xC0), size=64)
    vals = target.chi_values(probe)
    if np.allclose(vals, vals[0], rtol=1e-12, atol=0.0):
        c = float(vals[0])
        return surface_area(target.d) * c**expo / target.k
    if target.d == 2:
        def integrand(a):
            th = np.array([math.cos(a), math.sin(a)])
            return float(target.chi_values(th)) ** expo

        val, _ = integrate.quad(integrand, 0.0, 2.0 * math.pi, limit=200)
        return val / target.k
    if target.d == 3:
        def integrand(polar, azimuth):
            sp = math.sin(polar)
            th = np.array([sp * math.cos(azimuth), sp * math.sin(azimuth),
                           math.cos(polar)])
            return float(target.chi_values(th)) ** expo * sp

        val, _ = integrate.dblquad(integrand, 0.0, 2.0 * math.pi, 0.0, math.pi)
        return val / target.k
    if rng is None:
        rng = RngStream(0)
    theta = sample_unit_sphere(target.d, rng, size=n)
    mean = float(np.mean(target.chi_values(theta) ** expo))
    return surface_area(target.d) * mean / target.k


def level_set_closed_form(target: TargetFamily, *, rng: Optional[RngStream] = None,
                          n_constant: int = 2**18) -> LevelSetFn:
    """The target's level-set function in closed form.

    Supported: the profile families (Dk and its m-generalization), the
    asymmetric exponential family, and the heavy-tailed standard family.
    The asymmetric constant is computed by :func:`rotasym_level_constant`.
    """
    omega = surface_area(target.d)
    k = target.k
    if isinstance(target, DkTarget):
        phi = target.phi
        t_max = math.exp(-phi.inf_phi)
        sup_ell = (omega / k) * phi.kappa**k if math.isfinite(phi.kappa) else math.inf

        def formula(t):
            return (omega / k) * phi_inverse_extended(phi, -np.log(t)) ** k

        inverse = None
        if math.isinf(phi.sup_phi):
            def inverse(y):
                return np.exp(-phi.eval((k * np.asarray(y) / omega) ** (1.0 / k)))

        return LevelSetFn(_masked_eval(formula, t_max), sup_ell, t_max,
                          "closed_form:dk", inverse)

    if isinstance(target, RotInvTarget):
        phi, m = target.phi, target.m
        t_max = math.exp(-phi.inf_phi)
        sup_ell = (omega / k) * phi.kappa ** (k / m) if math.isfinite(phi.kappa) else math.inf

        def formula(t):
            return (omega / k) * phi_inverse(phi, -np.log(t)) ** (k / m)

        def inverse(y):
            return np.exp(-phi.eval((k * np.asarray(y) / omega) ** (m / k)))

        return LevelSetFn(_masked_eval(formula, t_max), sup_ell, t_max,
                          "closed_form:rot_inv", inverse)

    if isinstance(target, RotAsymTarget):
        c = rotasym_level_constant(target, n=n_constant, rng=rng)
        expo = k / target.m

        def formula(t):
            return c * (-np.log(t)) ** expo

        def inverse(y):
            return np.exp(-((np.asarray(y) / c) ** (1.0 / expo)))

        return LevelSetFn(_masked_eval(formula, 1.0), math.inf, 1.0,
                          "closed_form:rot_asym", inverse)

    if isinstance(target, StdTTarget):
        d, m = target.d, target.m
        b = omega * m ** (d / 2.0) / d
        expo = 2.0 / (d + m)

        def formula(t):
            return b * (t ** (-expo) - 1.0) ** (d / 2.0)

        def inverse(y):
            return ((np.asarray(y) / b) ** (2.0 / d) + 1.0) ** (-1.0 / expo)

        return LevelSetFn(_masked_eval(formula, 1.0), math.inf, 1.0,
                          "closed_form:std_t", inverse)

    raise UnsupportedFamilyError(
        f"no closed-form level-set function for {type(target).__name__}"
    )


def level_set_mc(target: TargetFamily, log_t: float, n: int, rng: RngStream):
    """Monte Carlo value of the level-set function at ``log t``.

    Polar decomposition: average over uniform directions of the inner radial
    mass ``(R^k - r_lo^k)/k``, times the sphere area. For rotationally
    invariant targets the integrand is direction-free, so the value is exact
    and the standard error zero (no draws are consumed). Empty slices give
    ``(0.0, 0.0)``.
    """
    omega = surface_area(target.d)
    k = target.k
    if log_t >= target.log_slice_sup():
        return 0.0, 0.0
    lo = target.slice_lower_radius()
    if target.rot_invariant:
        hi = float(target.slice_upper_radius(log_t))
        return omega * (hi**k - lo**k) / k, 0.0
    theta = sample_unit_sphere(target.d, rng, size=n)
    hi = target.slice_upper_radius(np.full(n, log_t), theta)
    vals = (hi**k - lo**k) / k
    return omega * float(vals.mean()), omega * float(vals.std(ddof=1)) / math.sqrt(n)


# ---------------------------------------------------------------------------
# Concavity-class membership
# ---------------------------------------------------------------------------

_CHECK_TOL = 1e-9
_NOT_MEMBER_MARGIN = 10.0


def _check_grid(ell: LevelSetFn, grid_size: int, span: float):
    s_lo = -math.log(ell.t_max) if math.isfinite(ell.t_max) else -span / 2.0
    return s_lo + np.linspace(span / grid_size, span, grid_size)


def lambda_k_check(ell: LevelSetFn, k: float, grid_size: int = 513,
                   span: float = 50.0) -> str:
    """Grid check of the class condition: is ``s -> ell(e^-s)^(1/k)`` concave?

    Evaluates the transform on ``grid_size`` points spanning ``span`` units
    past the support's left edge and inspects second differences against a
    relative tolerance of ``1e-9 (1 + |h|)`` per point. Returns
    :data:`MEMBER` when all of them are concave within tolerance,
    :data:`NOT_MEMBER` when some exceed it with margin, and
    :data:`INCONCLUSIVE` in between.
    """
    if k <= 0:
        raise DomainError(f"class index must be positive, got {k}")
    s = _check_grid(ell, grid_size, span)
    vals = np.asarray(ell.eval(np.exp(-s)), dtype=float)
    if np.any(vals <= 0.0):
        raise DomainError("grid left the support of the level-set function")
    h = vals ** (1.0 / k)
    d2 = h[2:] - 2.0 * h[1:-1] + h[:-2]
    tol = _CHECK_TOL * (1.0 + np.abs(h[1:-1]))
    if np.all(d2 <= tol):
        return MEMBER
    if np.any(d2 > _NOT_MEMBER_MARGIN * tol):
        return NOT_MEMBER
    return INCONCLUSIVE


def lambda_k_boundary(ell: LevelSetFn, lo: float, hi: float, tol: float = 1e-3,
                      grid_size: int = 513, span: float = 50.0) -> float:
    """Bisect for the smallest admissible class index in ``[lo, hi]``.

    Requires ``lo`` to fail membership and ``hi`` to pass; an inconclusive
    midpoint stops the refinement early (returned as the boundary estimate).
    """
    v_lo = lambda_k_check(ell, lo, grid_size, span)
    v_hi = lambda_k_check(ell, hi, grid_size, span)
    if v_lo != NOT_MEMBER or v_hi != MEMBER:
        raise DomainError(
            f"bracket must straddle the boundary: check({lo})={v_lo}, check({hi})={v_hi}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        verdict = lambda_k_check(ell, mid, grid_size, span)
        if verdict == MEMBER:
            hi = mid
        elif verdict == NOT_MEMBER:
            lo = mid
        else:
            return mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# The matching construction
# ---------------------------------------------------------------------------


def _ell_numeric_inverse(ell: LevelSetFn) -> Callable:
    """Invert a strictly decreasing level-set function by bisection in log t."""

    def inv(y):
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(y_arr.shape)
        log_tmax = math.log(ell.t_max)
        for i, yi in enumerate(y_arr.ravel()):
            lo = log_tmax - 1.0
            for _ in range(200):
                if float(ell.eval(math.exp(lo))) >= yi:
                    break
                lo = log_tmax - 2.0 * (log_tmax - lo)
            hi = log_tmax
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if float(ell.eval(math.exp(mid))) > yi:
                    lo = mid
                else:
                    hi = mid
            out.ravel()[i] = math.exp(0.5 * (lo + hi))
        return out.reshape(np.shape(y)) if np.ndim(y) else float(out.ravel()[0])

    return inv


def construct_matching_dk(ell: LevelSetFn, k: float, *, check: bool = True,
                          grid_size: int = 513, span: float = 50.0) -> DkTarget:
    """Build the 1-D profile target whose level-set function equals ``ell``.

    The profile is ``phi(r) = -log(ell^{-1}((2/k) r^k))`` on
    ``(0, ((k/2) sup ell)^(1/k))``; membership of ``ell`` in the class with
    index ``k`` makes this strictly increasing and convex, and the resulting
    one-dimensional target reproduces ``ell`` exactly.

    Raises
    ------
    NotInLambdaKError
        If the membership check does not return :data:`MEMBER`.
    """
    if check:
        verdict = lambda_k_check(ell, k, grid_size, span)
        if verdict != MEMBER:
            raise NotInLambdaKError(f"membership check returned {verdict} at k={k}")
    if not math.isfinite(ell.t_max):
        raise DomainError("matching needs a finite right support end in t")
    sup_ell = ell.sup_ell
    kappa = ((k / 2.0) * sup_ell) ** (1.0 / k) if math.isfinite(sup_ell) else math.inf
    inv = ell.inverse if ell.inverse is not None else _ell_numeric_inverse(ell)

    def phi_eval(r):
        with np.errstate(divide="ignore", over="ignore"):
            return -np.log(inv((2.0 / k) * np.power(r, k)))

    def phi_inv(s):
        return ((k / 2.0) * np.asarray(ell.eval(np.exp(-np.asarray(s))))) ** (1.0 / k)

    phi = PhiSpec(
        eval=phi_eval,
        kappa=kappa,
        inf_phi=-math.log(ell.t_max),
        sup_phi=math.inf,
        inverse=phi_inv,
        label="matched",
    )
    return DkTarget(d=1, k=k, phi=phi)


def matched_level_set_error(ell: LevelSetFn, matched: DkTarget,
                            n_grid: int = 50, s_lo: float = 0.05,
                            s_hi: float = 40.0) -> float:
    """Max relative error of the matched target's own level-set function.

    Deliberately avoids the profile's closed-form inverse: the radius is
    recovered from ``phi`` by bisection, so agreement is evidence the
    construction is right, not an identity.
    """
    k = matched.k
    phi_numeric = dataclasses.replace(matched.phi, inverse=None)
    s = np.exp(np.linspace(math.log(s_lo), math.log(s_hi), n_grid))
    t = ell.t_max * np.exp(-s)
    radius = phi_inverse_extended(phi_numeric, -np.log(t))
    ell_new = (2.0 / k) * radius**k
    ref = np.asarray(ell.eval(t), dtype=float)
    return float(np.max(np.abs(ell_new - ref) / np.abs(ref)))


# ---------------------------------------------------------------------------
# Gap bounds
# ---------------------------------------------------------------------------


def gap_lower_bound(kind: str, *, k: Optional[float] = None,
                    m: Optional[float] = None, d: Optional[int] = None) -> GapBound:
    """Formula value of the spectral-gap lower bound for the given family.

    kinds: ``dk`` (1/(k+1)), ``rot_inv`` and ``rot_asym`` (m/(k+m)),
    ``multiv_t`` (1 - d(d+m)/((d+1)(d+m-1)), requires m > 2).
    """
    if kind == "dk":
        if k is None or k <= 0:
            raise DomainError("kind 'dk' needs k > 0")
        return GapBound(kind, 1.0 / (k + 1.0), (("k", k),))
    if kind in ("rot_inv", "rot_asym"):
        if k is None or m is None or k <= 0 or m <= 0:
            raise DomainError(f"kind '{kind}' needs k > 0 and m > 0")
        return GapBound(kind, m / (k + m), (("k", k), ("m", m)))
    if kind == "multiv_t":
        if d is None or m is None or d < 1:
            raise DomainError("kind 'multiv_t' needs d >= 1 and m")
        if m <= 2.0:
            raise HypothesisError(f"the multivariate-t bound needs m > 2, got m = {m}")
        rho = d * (d + m) / ((d + 1.0) * (d + m - 1.0))
        return GapBound(kind, 1.0 - rho, (("d", d), ("m", m)))
    raise DomainError(f"unknown bound kind {kind!r}")


# ---------------------------------------------------------------------------
# IAT and the empirical gap
# ---------------------------------------------------------------------------


def autocorrelation(series, max_lag: Optional[int] = None) -> np.ndarray:
    """Empirical autocorrelations (FFT-based, biased normalization)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    x = x - x.mean()
    nfft = sfft.next_fast_len(2 * n)
    f = sfft.rfft(x, nfft)
    acov = sfft.irfft(f * np.conj(f), nfft)[:n] / n
    if acov[0] == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    rho = acov / acov[0]
    return rho if max_lag is None else rho[: max_lag + 1]


def iat_estimate(series) -> IATEstimate:
    """Integrated autocorrelation time ``1 + 2 sum rho(l)``.

    The truncation lag comes from the initial monotone positive-pair rule:
    pair sums ``rho(2j) + rho(2j+1)`` are followed while they stay positive
    and non-increasing, and the sum stops at the last good pair. The result
    is clamped to at least 1.

    Raises
    ------
    SeriesTooShortError
        For fewer than 100 points.
    DegenerateSeriesError
        For a constant series.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 100:
        raise SeriesTooShortError(f"need at least 100 points, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateSeriesError("series contains non-finite values")
    rho = autocorrelation(x)
    n_pairs = rho.size // 2
    gammas = rho[0 : 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    m_last = 0
    for j in range(1, n_pairs):
        if gammas[j] <= 0.0 or gammas[j] > gammas[j - 1]:
            break
        m_last = j
    lag = 2 * m_last + 1
    tau = 1.0 + 2.0 * float(rho[1 : lag + 1].sum())
    return IATEstimate(tau=max(tau, 1.0), n_used=int(x.size), truncation_lag=lag)


def empirical_gap(series) -> float:
    """The heuristic gap estimate ``2 / (IAT + 1)`` of a summary series."""
    return 2.0 / (iat_estimate(series).tau + 1.0)


def gap_heuristic_warning(theory_bound: float) -> Optional[str]:
    """A warning string when the heuristic leaves its validated regime."""
    if theory_bound > GAP_WARN_LEVEL:
        return (
            f"theory bound {theory_bound:.3g} exceeds {GAP_WARN_LEVEL}; the "
            "2/(IAT+1) heuristic reads systematically high for large gaps"
        )
    return None
