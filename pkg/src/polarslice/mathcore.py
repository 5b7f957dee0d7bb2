"""Geometry, special-function and radial-profile primitives.

The central object is :class:`PhiSpec`: a strictly increasing convex function
``phi`` on an open interval ``(0, kappa)`` together with its limits at the
endpoints and (optionally) a closed-form inverse. Radial densities of the
form ``exp(-phi(r))`` are characterized entirely by such a profile, and the
two inverse operations here (:func:`phi_inverse`, :func:`phi_inverse_extended`)
are what turns a threshold into a slice radius.

All callables stored in a :class:`PhiSpec` must accept numpy arrays
elementwise; :func:`custom_phi` wraps scalar-only functions automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import DomainError, NonFiniteError
from .rng import RngStream

__all__ = [
    "PhiSpec",
    "linear_phi",
    "quadratic_phi",
    "power_phi",
    "exp_phi",
    "custom_phi",
    "phi_inverse",
    "phi_inverse_extended",
    "sample_unit_sphere",
    "surface_area",
    "ball_radius_from_uniform",
    "power_integral",
    "sphere_integral_mc",
]


@dataclass(frozen=True)
class PhiSpec:
    """A strictly increasing convex profile on ``(0, kappa)``.

    Attributes
    ----------
    eval : callable
        Vectorized evaluation on ``(0, kappa)``.
    kappa : float
        Right end of the domain; ``inf`` for unbounded profiles.
    inf_phi : float
        Limit at 0+. Always finite for an increasing convex profile.
    sup_phi : float
        Limit at ``kappa``-; necessarily ``inf`` when ``kappa`` is ``inf``.
    inverse : callable, optional
        Closed-form inverse on ``(inf_phi, sup_phi)``. When absent,
        :func:`phi_inverse` falls back to bracketed bisection.
    power : tuple, optional
        ``(coeff, exponent)`` when the profile is exactly
        ``coeff * r**exponent``; lets chain runners pick compiled kernels.
    label : str
        Human-readable tag used in reprs and CSV headers.
    """

    eval: Callable
    kappa: float
    inf_phi: float
    sup_phi: float
    inverse: Optional[Callable] = None
    power: Optional[tuple] = None
    label: str = "phi"

    def __call__(self, r):
        return self.eval(r)

    def __repr__(self):  # keep callables out of reprs
        return f"PhiSpec({self.label}, kappa={self.kappa})"


def _validated(spec: PhiSpec) -> PhiSpec:
    # Cheap sanity probe: strictly increasing on three interior points.
    hi = spec.kappa if math.isfinite(spec.kappa) else 8.0
    probe = np.array([0.25, 0.5, 0.75]) * hi
    vals = np.asarray(spec.eval(probe), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError(f"{spec.label} is non-finite inside its domain")
    if not (vals[0] < vals[1] < vals[2]):
        raise DomainError(f"{spec.label} is not strictly increasing")
    return spec


def linear_phi(slope: float = 1.0, kappa: float = math.inf) -> PhiSpec:
    """``phi(r) = slope * r``."""
    return power_phi(1.0, coeff=slope, kappa=kappa, label=f"linear(a={slope:g})")


def quadratic_phi(coeff: float = 1.0, kappa: float = math.inf) -> PhiSpec:
    """``phi(r) = coeff * r**2``."""
    return power_phi(2.0, coeff=coeff, kappa=kappa, label=f"quadratic(a={coeff:g})")


def power_phi(
    exponent: float,
    coeff: float = 1.0,
    kappa: float = math.inf,
    label: Optional[str] = None,
) -> PhiSpec:
    """``phi(r) = coeff * r**exponent`` with ``exponent >= 1`` (convexity)."""
    if exponent < 1.0:
        raise DomainError(f"power profile needs exponent >= 1, got {exponent}")
    if coeff <= 0.0:
        raise DomainError(f"power profile needs coeff > 0, got {coeff}")
    sup = math.inf if math.isinf(kappa) else coeff * kappa**exponent
    return _validated(
        PhiSpec(
            eval=lambda r: coeff * np.power(r, exponent),
            kappa=kappa,
            inf_phi=0.0,
            sup_phi=sup,
            inverse=lambda s: np.power(np.asarray(s) / coeff, 1.0 / exponent),
            power=(coeff, exponent),
            label=label or f"power(a={coeff:g},b={exponent:g})",
        )
    )


def exp_phi(kappa: float = math.inf) -> PhiSpec:
    """``phi(r) = exp(r) - 1``."""
    sup = math.inf if math.isinf(kappa) else math.expm1(kappa)
    return _validated(
        PhiSpec(
            eval=np.expm1,
            kappa=kappa,
            inf_phi=0.0,
            sup_phi=sup,
            inverse=np.log1p,
            label="expm1",
        )
    )


def custom_phi(
    fn: Callable,
    kappa: float = math.inf,
    inf_phi: Optional[float] = None,
    sup_phi: Optional[float] = None,
    inverse: Optional[Callable] = None,
    label: str = "custom",
) -> PhiSpec:
    """Wrap a user profile, probing endpoint limits numerically if omitted."""
    try:
        fn(np.array([0.5, 0.75]))
        vec = fn
    except Exception:
        vec = np.vectorize(fn, otypes=[float])
    if inf_phi is None:
        inf_phi = float(vec(np.asarray(1e-12 if math.isinf(kappa) else kappa * 1e-12)))
    if sup_phi is None:
        if math.isinf(kappa):
            sup_phi = math.inf
        else:
            sup_phi = float(vec(np.asarray(kappa * (1.0 - 1e-12))))
    return _validated(
        PhiSpec(eval=vec, kappa=kappa, inf_phi=inf_phi, sup_phi=sup_phi,
                inverse=inverse, label=label)
    )


# ---------------------------------------------------------------------------
# Inverses
# ---------------------------------------------------------------------------

#: |phi(r) - s| <= PHI_INV_RTOL * max(1, |s|) on return from phi_inverse.
PHI_INV_RTOL = 1e-10


def phi_inverse(phi: PhiSpec, s):
    """Invert ``phi`` at ``s`` in ``(inf_phi, sup_phi)``.

    Uses the closed form when the profile carries one, otherwise vectorized
    bisection with bracket expansion, to residual tolerance
    ``|phi(r) - s| <= 1e-10 * max(1, |s|)``.

    Raises
    ------
    DomainError
        If any ``s`` lies outside the open image interval.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= phi.inf_phi) or np.any(s_arr >= phi.sup_phi):
        raise DomainError(
            f"s must lie in ({phi.inf_phi}, {phi.sup_phi}), got range "
            f"[{s_arr.min()}, {s_arr.max()}]"
        )
    if phi.inverse is not None:
        out = np.asarray(phi.inverse(s_arr), dtype=float)
        return out if np.ndim(s) else float(out)
    out = _bisect_increasing(phi.eval, s_arr, phi.kappa)
    return out if np.ndim(s) else float(out)


def _bisect_increasing(fn, s, kappa):
    """Vectorized bisection for a strictly increasing fn on (0, kappa)."""
    orig_shape = np.shape(s)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lo = np.full(s.shape, min(1.0, kappa / 2.0) if math.isfinite(kappa) else 1.0)
    for _ in range(200):
        mask = np.asarray(fn(lo)) >= s
        if not mask.any():
            break
        lo = np.where(mask, lo * 0.5, lo)
    if math.isfinite(kappa):
        hi = np.full(s.shape, kappa)
    else:
        hi = np.full(s.shape, 1.0)
        for _ in range(200):
            mask = np.asarray(fn(hi)) <= s
            if not mask.any():
                break
            hi = np.where(mask, hi * 2.0, hi)
    tol = PHI_INV_RTOL * np.maximum(1.0, np.abs(s))
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        val = np.asarray(fn(mid))
        if np.all(np.abs(val - s) <= tol):
            break
        lo = np.where(val < s, mid, lo)
        hi = np.where(val < s, hi, mid)
        mid = 0.5 * (lo + hi)
    return mid.reshape(orig_shape)


def phi_inverse_extended(phi: PhiSpec, s):
    """The inverse extended past ``sup_phi`` by the constant ``kappa``.

    Defined for ``s > inf_phi``; equals ``phi_inverse`` below ``sup_phi`` and
    ``kappa`` from there on (only reachable when ``kappa`` is finite).
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr <= phi.inf_phi):
        raise DomainError(f"s must exceed inf phi = {phi.inf_phi}")
    clamp = s_arr >= phi.sup_phi
    if not clamp.any():
        return phi_inverse(phi, s)
    out = np.full(s_arr.shape, phi.kappa, dtype=float)
    interior = ~clamp
    if interior.any():
        out[interior] = phi_inverse(phi, s_arr[interior])
    out = out.reshape(np.shape(s))
    return out if np.ndim(s) else float(out)


# ---------------------------------------------------------------------------
# Sphere geometry
# ---------------------------------------------------------------------------


def sample_unit_sphere(d: int, rng: RngStream, size: Optional[int] = None):
    """Uniform draws on the (d-1)-sphere via normalized Gaussians.

    Returns shape ``(d,)`` for ``size=None`` and ``(size, d)`` otherwise.
    For ``d == 1`` this is a fair coin on {-1, +1}.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape)
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    # A fresh Gaussian vector has zero norm with probability zero; redraw
    # defensively so we never emit nan.
    while np.any(norm == 0.0):
        bad = (norm == 0.0).reshape(-1)
        z.reshape(-1, d)[bad] = rng.standard_normal((int(bad.sum()), d))
        norm = np.linalg.norm(z, axis=-1, keepdims=True)
    return z / norm


def surface_area(d: int) -> float:
    """Surface area of the unit (d-1)-sphere: ``2 pi^{d/2} / Gamma(d/2)``."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return float(2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0))


def ball_radius_from_uniform(d: int, kappa: float, u):
    """Radius transform ``u^{1/d} * kappa`` making uniform ball draws exact."""
    if kappa <= 0.0:
        raise DomainError(f"ball radius must be positive, got {kappa}")
    return np.asarray(u) ** (1.0 / d) * kappa if np.ndim(u) else float(u ** (1.0 / d) * kappa)


def power_integral(p: float) -> float:
    """``int_0^1 u^{1/p} du = p / (p + 1)`` for ``p != -1``."""
    if p == -1.0:
        raise DomainError("p = -1 makes the integrand non-integrable")
    return p / (p + 1.0)


def sphere_integral_mc(f: Callable, d: int, n: int, rng: RngStream):
    """Monte Carlo estimate of the surface integral of ``f`` over S^{d-1}.

    ``f`` must map an ``(n, d)`` array of directions to ``n`` values (scalar
    callables are applied row-wise as a fallback). Returns
    ``(estimate, std_error)`` where the estimate is ``omega_d * mean(f)``.

    Raises
    ------
    NonFiniteError
        If any evaluation of ``f`` is nan/inf.
    """
    theta = sample_unit_sphere(d, rng, size=n)
    try:
        vals = np.asarray(f(theta), dtype=float)
        if vals.shape != (n,):
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(t)) for t in theta])
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("integrand evaluated to a non-finite value")
    area = surface_area(d)
    est = area * float(vals.mean())
    se = area * float(vals.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return est, se
