"""Exact one-step transitions and chain runners.

A transition is threshold draw -> direction draw -> inverse-CDF radius draw;
all three are exact for every family in :mod:`polarslice.targets`, so the
kernels need no Metropolis correction. Threshold arithmetic lives entirely in
log space (``log t = log u1 + log factor1(x)``), which keeps d ~ 1000
heavy-tail runs away from double-precision underflow.

Uniform variates are taken from (0, 1] (one ``1 - next_double`` per draw, u1
then u2), a fixed consumption pattern shared with the compiled kernels so
that both backends are bit-identical on the same stream.

Long homogeneous runs dispatch to the backend kernels selected in
:mod:`polarslice._backend`; :func:`step` stays a plain readable reference
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import backend_name, kernels as _K
from .errors import (
    DomainError,
    EmptySliceError,
    OriginError,
    OutOfSupportError,
    RejectionBudgetError,
    UnsupportedFamilyError,
)
from .mathcore import sample_unit_sphere
from .rng import RngStream
from .targets import (
    DkTarget,
    ParetoShellTarget,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    TargetFamily,
    stationary_point,
)

__all__ = [
    "TransitionRecord",
    "ChainConfig",
    "ChainRun",
    "draw_threshold",
    "radial_update",
    "direction_update",
    "step",
    "step_samples",
    "one_step_radii",
    "run_radial_chain",
    "run_chain",
    "norm_summary",
    "log_norm_summary",
]

#: proposal budget for one rejection-sampled direction draw
REJECTION_CAP = 10**6


@dataclass(frozen=True)
class TransitionRecord:
    """Internals of one transition.

    The new point lies in the slice: ``log_factor1(x_new) > log_t`` holds
    almost surely (the closed endpoint u2 = 1 has probability 2^-53).
    """

    log_t: float
    r_new: float
    theta_new: np.ndarray
    x_new: np.ndarray


@dataclass(frozen=True)
class ChainConfig:
    """Run-length bookkeeping for a chain.

    ``x0 = None`` requests an exact stationary initial draw. ``burn_in``
    steps are discarded, then every ``thinning``-th state is recorded.
    """

    n_steps: int
    burn_in: int = 0
    thinning: int = 1
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_steps < 0 or self.burn_in < 0:
            raise DomainError("n_steps and burn_in must be non-negative")
        if self.thinning < 1:
            raise DomainError(f"thinning must be >= 1, got {self.thinning}")
        if self.n_steps and self.burn_in >= self.n_steps:
            raise DomainError("burn_in must be smaller than n_steps")


@dataclass
class ChainRun:
    """Summary series plus acceptance/provenance metadata."""

    series: np.ndarray
    meta: dict = field(default_factory=dict)


def norm_summary(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(points, axis=-1)


def log_norm_summary(points: np.ndarray) -> np.ndarray:
    return np.log(np.linalg.norm(points, axis=-1))


# ---------------------------------------------------------------------------
# Single-transition pieces
# ---------------------------------------------------------------------------


def _state_radius(target: TargetFamily, x) -> tuple:
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0 and target.k < target.d:
        raise OriginError("the origin is not a valid state for k < d")
    theta = x / r if r > 0.0 else None
    return r, theta


def draw_threshold(target: TargetFamily, x, rng: RngStream) -> float:
    """Sample the log threshold: ``log u1 + log factor1(x)`` with u1 ~ U(0,1]."""
    r, theta = _state_radius(target, x)
    logf1 = float(target.log_factor1_radial(r, theta))
    if logf1 == -math.inf:
        raise OutOfSupportError(f"state with radius {r} is outside the support")
    u1 = float(rng.open_uniform())
    return math.log(u1) + logf1


def radial_update(target: TargetFamily, log_t: float, theta, u2):
    """Exact inverse-CDF radius draw on the slice at ``log_t`` along theta."""
    if log_t >= target.log_slice_sup(theta):
        raise EmptySliceError(f"slice empty at log t = {log_t}")
    out = target.inverse_cdf_radius(log_t, theta, u2)
    return out if np.ndim(out) else float(out)


def direction_update(target: TargetFamily, rng: RngStream, cap: int = REJECTION_CAP):
    """Draw the new direction.

    Uniform on the sphere for rotationally invariant families. Asymmetric
    targets need the direction law with density proportional to
    ``chi(theta)^(-k/m)``, realized by rejection with the uniform proposal
    and envelope ``(chi_min / chi)^(k/m) <= 1``.
    """
    if target.rot_invariant:
        return sample_unit_sphere(target.d, rng)
    assert isinstance(target, RotAsymTarget)
    expo = target.k / target.m
    for _ in range(cap):
        theta = sample_unit_sphere(target.d, rng)
        c = float(target.chi_values(theta))
        if c < target.chi_min * (1.0 - 1e-12):
            raise DomainError("chi dipped below chi_min; envelope invalid")
        if float(rng.random()) < (target.chi_min / c) ** expo:
            return theta
    raise RejectionBudgetError(f"no acceptance within {cap} proposals")


def _chi_directions(target: RotAsymTarget, n: int, rng: RngStream,
                    cap: int = REJECTION_CAP, batch: int = 8192):
    """Vectorized rejection sampling of n weighted directions.

    Returns ``(thetas, chi_values, n_proposed)``. Valid because the weighted
    direction law does not depend on the chain state.
    """
    expo = target.k / target.m
    thetas = np.empty((n, target.d))
    chis = np.empty(n)
    got = 0
    proposed = 0
    budget = cap * max(n, 1)
    while got < n:
        if proposed >= budget:
            raise RejectionBudgetError(
                f"direction sampling used {proposed} proposals for {got}/{n} accepts"
            )
        b = min(batch, max(64, 2 * (n - got)), budget - proposed)
        cand = sample_unit_sphere(target.d, rng, size=b)
        us = rng.random(b)
        c = target.chi_values(cand)
        if np.any(c < target.chi_min * (1.0 - 1e-12)):
            raise DomainError("chi dipped below chi_min; envelope invalid")
        acc = us < (target.chi_min / c) ** expo
        take = min(int(acc.sum()), n - got)
        idx = np.nonzero(acc)[0][:take]
        thetas[got:got + take] = cand[idx]
        chis[got:got + take] = c[idx]
        got += take
        # count proposals only up to the one that filled the request
        proposed += int(idx[-1]) + 1 if got == n and take > 0 else b
    return thetas, chis, proposed


def _transition(target: TargetFamily, x, u1: float, u2: float, theta):
    """Deterministic transition given the three random inputs."""
    r, theta_old = _state_radius(target, x)
    logf1 = float(target.log_factor1_radial(r, theta_old))
    if logf1 == -math.inf:
        raise OutOfSupportError(f"state with radius {r} is outside the support")
    log_t = math.log(u1) + logf1
    r_new = radial_update(target, log_t, theta, u2)
    return TransitionRecord(log_t=log_t, r_new=r_new, theta_new=theta,
                            x_new=r_new * theta)


def step(target: TargetFamily, x, rng: RngStream) -> TransitionRecord:
    """One exact draw from the transition kernel at x.

    Draw order: u1 (threshold), u2 (radius), direction. For asymmetric
    targets the direction is drawn first from its threshold-independent
    marginal, then the radius conditionally on it; the pair is an exact
    joint draw because the threshold only scales the slice radius by a
    direction-free factor.
    """
    u1 = float(rng.open_uniform())
    u2 = float(rng.open_uniform())
    theta = direction_update(target, rng)
    return _transition(target, x, u1, u2, theta)


def step_samples(target: TargetFamily, x, n: int, rng: RngStream):
    """n independent one-step draws from the same state x, vectorized."""
    r, theta_old = _state_radius(target, x)
    logf1 = float(target.log_factor1_radial(r, theta_old))
    if logf1 == -math.inf:
        raise OutOfSupportError(f"state with radius {r} is outside the support")
    u1 = rng.open_uniform(n)
    u2 = rng.open_uniform(n)
    log_t = np.log(u1) + logf1
    if target.rot_invariant:
        thetas = sample_unit_sphere(target.d, rng, size=n)
        radii = target.inverse_cdf_radius(log_t, None, u2)
    else:
        thetas, chis, _ = _chi_directions(target, n, rng)
        hi = (-log_t / chis) ** (1.0 / target.m)
        radii = hi * u2 ** (1.0 / target.k)
    return radii[:, None] * thetas


def one_step_radii(target: TargetFamily, radii, rng: RngStream):
    """Apply one transition to each radius of a batch (invariant families).

    The radius process of a rotationally invariant family is autonomous, so
    this is an exact one-step map of the radial marginal.
    """
    if not target.rot_invariant:
        raise UnsupportedFamilyError("radial one-step map needs rotational invariance")
    radii = np.asarray(radii, dtype=float)
    logf1 = target.log_factor1_radial(radii)
    if np.any(logf1 == -math.inf):
        raise OutOfSupportError("some radii are outside the support")
    u1 = rng.open_uniform(radii.shape)
    u2 = rng.open_uniform(radii.shape)
    log_t = np.log(u1) + logf1
    return target.inverse_cdf_radius(log_t, None, u2)


# ---------------------------------------------------------------------------
# Chain runners
# ---------------------------------------------------------------------------


def _kernel_plan(target: TargetFamily):
    """(kernel_name, args) for the compiled/pure backend, or None."""
    if isinstance(target, DkTarget) and target.phi.power is not None:
        coeff, expo = target.phi.power
        return "powerlaw_chain", (target.k, expo, coeff, target.phi.kappa)
    if isinstance(target, RotInvTarget) and target.phi.power is not None \
            and math.isinf(target.phi.kappa):
        coeff, expo = target.phi.power
        return "powerlaw_chain", (target.k, target.m * expo, coeff, math.inf)
    if isinstance(target, StdTTarget):
        return "stdt_chain", (target.d, target.m)
    if isinstance(target, ParetoShellTarget):
        return "pareto_chain", (target.k, target.m, target.eps)
    return None


def _radial_chain(target: TargetFamily, r0: float, n: int, rng: RngStream):
    """All n post-step radii, via the fastest valid route."""
    plan = _kernel_plan(target)
    if plan is not None:
        name, args = plan
        return getattr(_K, name)(rng.gen, r0, n, *args), name
    # generic per-step loop; exact for any profile, just slower
    out = np.empty(n)
    r = r0
    for i in range(n):
        u1 = float(rng.open_uniform())
        u2 = float(rng.open_uniform())
        logf1 = float(target.log_factor1_radial(r))
        if logf1 == -math.inf:
            raise OutOfSupportError(f"chain left the support at radius {r}")
        log_t = math.log(u1) + logf1
        r = float(target.inverse_cdf_radius(log_t, None, u2))
        out[i] = r
    return out, "generic"


def run_radial_chain(target: TargetFamily, n_steps: int, rng: RngStream,
                     r0: Optional[float] = None, burn_in: int = 0,
                     thinning: int = 1) -> ChainRun:
    """Radius series of a chain for a rotationally invariant family.

    Exact: the radial marginal of these chains is itself a Markov chain, so
    no directions have to be drawn. Initializes from an exact stationary
    radius draw when ``r0`` is omitted.
    """
    if not target.rot_invariant:
        raise UnsupportedFamilyError("radial chains need rotational invariance")
    cfg = ChainConfig(n_steps=n_steps, burn_in=burn_in, thinning=thinning)
    meta = {"backend": backend_name(), "init": "stationary" if r0 is None else "r0"}
    if r0 is None:
        r0 = float(target.stationary_radius(rng))
    if n_steps == 0:
        return ChainRun(series=np.empty(0), meta=meta)
    radii, kernel = _radial_chain(target, r0, n_steps, rng)
    meta["kernel"] = kernel
    return ChainRun(series=radii[cfg.burn_in::cfg.thinning], meta=meta)


def run_chain(target: TargetFamily, config: ChainConfig,
              summary: Callable, rng: RngStream) -> ChainRun:
    """Run the chain and record ``summary`` of the kept states.

    ``summary`` maps an ``(n, d)`` array of points to ``n`` values (see
    :func:`norm_summary` / :func:`log_norm_summary`). Deterministic given
    the stream; bit-identical across backends.
    """
    meta = {"backend": backend_name(),
            "init": "stationary" if config.x0 is None else "x0"}
    if config.n_steps == 0:
        return ChainRun(series=np.empty(0), meta=meta)
    x0 = stationary_point(target, rng) if config.x0 is None else np.asarray(config.x0, float)
    r0, theta0 = _state_radius(target, x0)
    if float(target.log_factor1_radial(r0, theta0)) == -math.inf:
        raise OutOfSupportError("initial state is outside the support")

    if target.rot_invariant:
        radii, kernel = _radial_chain(target, r0, config.n_steps, rng)
        kept = radii[config.burn_in::config.thinning]
        thetas = sample_unit_sphere(target.d, rng, size=kept.shape[0])
        points = kept[:, None] * thetas
        meta["kernel"] = kernel
    else:
        assert isinstance(target, RotAsymTarget)
        thetas, chis, proposed = _chi_directions(target, config.n_steps, rng)
        chi0 = float(target.chi_values(theta0)) if theta0 is not None else target.chi_min
        radii = _K.chi_chain(rng.gen, r0, chi0, chis, target.k, target.m)
        points = radii[config.burn_in::config.thinning, None] \
            * thetas[config.burn_in::config.thinning]
        meta["kernel"] = "chi_chain"
        meta["direction_proposals"] = proposed
        meta["direction_acceptance"] = config.n_steps / proposed
    return ChainRun(series=np.asarray(summary(points)), meta=meta)
