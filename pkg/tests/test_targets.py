"""Target families: factorization, slices, radial CDFs."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from polarslice.errors import (
    DomainError,
    EmptySliceError,
    NotAvailableError,
    OriginError,
)
from polarslice.mathcore import linear_phi, quadratic_phi, sample_unit_sphere
from polarslice.rng import RngStream
from polarslice.targets import (
    DkTarget,
    ParetoShellTarget,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    log_density,
    log_factor0,
    log_factor1,
    quadratic_chi,
    radial_stationary_cdf,
    slice_boundary,
    stationary_radius,
)


def make_families():
    sigma = np.diag([1.0, 2.0, 3.0])
    chi = quadratic_chi(sigma)
    return {
        "dk": DkTarget(d=3, k=1.5, phi=linear_phi()),
        "dk_bounded": DkTarget(d=2, k=1.0, phi=linear_phi(kappa=2.0)),
        "rot_inv": RotInvTarget(d=3, k=2.0, m=0.5, phi=linear_phi()),
        "rot_asym": RotAsymTarget(d=3, k=2.0, m=2.0, chi=chi, chi_min=chi.chi_min),
        "std_t": StdTTarget(d=2, m=2.0),
        "pareto": ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0),
    }


class TestPointValues:
    def test_heavy_tail_mode_value(self):
        assert log_density(StdTTarget(d=2, m=2.0), np.zeros(2)) == pytest.approx(0.0)

    def test_shell_log_density(self):
        t = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
        x = np.array([0.0, 2.0, 0.0])
        assert log_density(t, x) == pytest.approx(-5.0 * math.log(2.0))

    def test_shell_slice_factor(self):
        t = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
        x = np.array([0.0, 2.0, 0.0])
        assert log_factor1(t, x) == pytest.approx(-3.0 * math.log(2.0))

    def test_profile_target_log_density(self):
        t = DkTarget(d=2, k=1.0, phi=linear_phi())
        assert log_density(t, np.array([0.0, 1.0])) == pytest.approx(-1.0)

    def test_asym_factor_tends_to_one_at_origin(self):
        fams = make_families()
        t = fams["rot_asym"]
        theta = np.array([1.0, 0.0, 0.0])
        assert t.log_factor1_radial(1e-12, theta) == pytest.approx(0.0, abs=1e-10)
        assert t.log_factor1_radial(0.0) == 0.0

    def test_support_boundary_is_excluded(self):
        t = DkTarget(d=2, k=1.0, phi=linear_phi(kappa=2.0))
        assert log_factor1(t, np.array([2.0, 0.0])) == -math.inf

    def test_origin_pole_raises(self):
        t = DkTarget(d=3, k=1.0, phi=linear_phi())
        with pytest.raises(OriginError):
            log_density(t, np.zeros(3))


class TestFactorization:
    @pytest.mark.parametrize("name", list(make_families()))
    def test_density_splits_into_factors(self, name):
        target = make_families()[name]
        rng = RngStream(10)
        theta = sample_unit_sphere(target.d, rng, size=1000)
        radii = np.asarray(stationary_like_radii(target, rng, 1000))
        pts = radii[:, None] * theta
        for x in pts:
            ld = log_density(target, x)
            total = log_factor0(target, x) + log_factor1(target, x)
            if math.isinf(ld):
                assert math.isinf(total)
            else:
                assert ld == pytest.approx(total, abs=1e-12)

    @pytest.mark.parametrize("name", list(make_families()))
    def test_slice_interval_matches_indicator(self, name):
        target = make_families()[name]
        rng = RngStream(11)
        thetas = sample_unit_sphere(target.d, rng, size=300)
        radii = stationary_like_radii(target, rng, 300)
        for theta, r in zip(thetas, radii):
            sup = target.log_slice_sup(theta)
            log_t = sup - float(rng.gen.exponential(2.0))
            lo, hi = slice_boundary(target, log_t, theta)
            inside = lo < r < hi
            above = float(target.log_factor1_radial(r, theta)) > log_t
            assert inside == above


def stationary_like_radii(target, rng, n):
    """Positive radii that land inside the support for any family."""
    try:
        return np.atleast_1d(stationary_radius(target, rng, n))
    except NotAvailableError:
        lo = target.slice_lower_radius()
        return lo + rng.gen.exponential(1.0, size=n) + 1e-6


class TestSliceBoundary:
    def test_heavy_tail_slice(self):
        t = StdTTarget(d=2, m=2.0)
        lo, hi = slice_boundary(t, math.log(0.25))
        assert (lo, hi) == (0.0, pytest.approx(math.sqrt(2.0)))

    def test_heavy_tail_empty_at_mode_level(self):
        with pytest.raises(EmptySliceError):
            slice_boundary(StdTTarget(d=2, m=2.0), 0.0)

    def test_shell_empty_at_factor_supremum(self):
        t = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
        with pytest.raises(EmptySliceError):
            slice_boundary(t, t.log_slice_sup())

    def test_shell_interval(self):
        t = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
        lo, hi = slice_boundary(t, math.log(0.125))
        assert lo == 1.0
        assert hi == pytest.approx(0.125 ** (-1.0 / 3.0))

    def test_rotation_invariant_families_ignore_direction(self):
        fams = make_families()
        for name in ("dk", "rot_inv", "std_t", "pareto"):
            t = fams[name]
            a = slice_boundary(t, -1.5, np.eye(t.d)[0])
            b = slice_boundary(t, -1.5, None)
            assert a == b


class TestRadialCdf:
    def test_shell_values(self):
        t = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
        assert radial_stationary_cdf(t, 1.0) == pytest.approx(0.0)
        assert radial_stationary_cdf(t, 2.0) == pytest.approx(0.75)

    def test_profile_cdf_against_analytic(self):
        # k = 1, phi(r) = r: the radius is exponential
        t = DkTarget(d=3, k=1.0, phi=linear_phi())
        for r in (0.1, 1.0, 2.5):
            assert radial_stationary_cdf(t, r) == pytest.approx(-math.expm1(-r), rel=1e-8)
        assert radial_stationary_cdf(t, math.inf) == pytest.approx(1.0)

    def test_heavy_tail_cdf_against_quadrature(self):
        t = StdTTarget(d=3, m=2.5)

        def dens(s):
            return s ** (t.d - 1) * (1.0 + s * s / t.m) ** (-(t.d + t.m) / 2.0)

        z, _ = integrate.quad(dens, 0.0, math.inf)
        for r in (0.5, 1.0, 3.0):
            part, _ = integrate.quad(dens, 0.0, r)
            assert radial_stationary_cdf(t, r) == pytest.approx(part / z, rel=1e-8)

    def test_monotone_with_correct_endpoints(self):
        fams = make_families()
        for name in ("dk", "dk_bounded", "rot_inv", "std_t", "pareto"):
            t = fams[name]
            grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 150)])
            vals = np.array([radial_stationary_cdf(t, r) for r in grid])
            assert np.all(np.diff(vals) >= -1e-12)
            assert vals[0] == pytest.approx(0.0, abs=1e-12)
            assert vals[-1] == pytest.approx(1.0, abs=1e-6)

    def test_asymmetric_family_has_none(self):
        with pytest.raises(NotAvailableError):
            radial_stationary_cdf(make_families()["rot_asym"], 1.0)


class TestStationaryDraws:
    # independent closed-form radial CDFs (gamma transform for the profile
    # families; the other two have them built in)
    ORACLES = {
        "dk": lambda t, r: stats.gamma.cdf(r, a=t.k),
        "rot_inv": lambda t, r: stats.gamma.cdf(np.asarray(r) ** t.m, a=t.k / t.m),
        "std_t": radial_stationary_cdf,
        "pareto": radial_stationary_cdf,
    }

    @pytest.mark.parametrize("name", ["dk", "rot_inv", "std_t", "pareto"])
    def test_draws_follow_the_radial_cdf(self, name):
        target = make_families()[name]
        rng = RngStream(12)
        draws = np.atleast_1d(stationary_radius(target, rng, 20000))
        oracle = self.ORACLES[name]
        res = stats.kstest(draws, lambda r: oracle(target, r))
        assert res.pvalue > 0.01

    @pytest.mark.parametrize("name", ["dk", "rot_inv"])
    def test_quadrature_cdf_matches_gamma_oracle(self, name):
        target = make_families()[name]
        oracle = self.ORACLES[name]
        for r in (0.2, 1.0, 4.0, 20.0):
            assert radial_stationary_cdf(target, r) == pytest.approx(
                float(oracle(target, r)), rel=1e-7, abs=1e-12
            )

    def test_bounded_profile_draws(self):
        target = make_families()["dk_bounded"]
        draws = np.atleast_1d(stationary_radius(target, RngStream(13), 2000))
        assert np.all((draws > 0.0) & (draws < 2.0))
        grid = np.array([0.2, 0.5, 1.0, 1.5, 1.9])
        emp = np.array([(draws <= g).mean() for g in grid])
        ref = np.array([radial_stationary_cdf(target, g) for g in grid])
        assert np.max(np.abs(emp - ref)) < 4.0 / math.sqrt(2000)


class TestValidation:
    def test_quadratic_weights_need_spd(self):
        with pytest.raises(DomainError):
            quadratic_chi(np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
        with pytest.raises(DomainError):
            quadratic_chi(np.array([[1.0, 0.5], [0.4, 1.0]]))  # asymmetric

    def test_wrong_chi_min_is_caught(self):
        chi = quadratic_chi(np.diag([1.0, 4.0]))
        with pytest.raises(DomainError):
            RotAsymTarget(d=2, k=2.0, m=2.0, chi=chi, chi_min=10.0 * chi.chi_min)

    def test_shell_requires_unit_k(self):
        with pytest.raises(DomainError):
            ParetoShellTarget(d=3, k=0.5, m=2.0, eps=1.0)

    def test_heavy_tail_accepts_any_positive_m(self):
        StdTTarget(d=2, m=1.0)  # sampling is defined; rate formulas gate later
        ParetoShellTarget(d=3, k=1.0, m=1.0, eps=1.0)
