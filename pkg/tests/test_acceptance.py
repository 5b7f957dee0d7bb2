"""Acceptance suite: every exit criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion (failures are reported by pytest itself).
"""

import math

import numpy as np
import pytest
from scipy import stats

from polarslice.cli import ExperimentConfig, run_experiment
from polarslice.coupling import contraction_ratio, ray_pair, sharpness_probe
from polarslice.kernels import ChainConfig, run_chain, run_radial_chain
from polarslice.mathcore import (
    exp_phi,
    linear_phi,
    phi_inverse_extended,
    quadratic_phi,
)
from polarslice.rng import RngStream
from polarslice.spectral import (
    MEMBER,
    NOT_MEMBER,
    construct_matching_dk,
    lambda_k_boundary,
    lambda_k_check,
    level_set_closed_form,
    level_set_mc,
    matched_level_set_error,
)
from polarslice.targets import (
    DkTarget,
    ParetoShellTarget,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    quadratic_chi,
    radial_stationary_cdf,
)
from test_spectral import neg_log_level_set


def ok(criterion: int, message: str):
    print(f"\ncriterion {criterion}: PASS - {message}")


def test_criterion_1_contraction_bound():
    # profile targets with a linear radial profile, coupled on common rays:
    # the mean coupled distance ratio stays below k/(k+1) + 3 SE
    norms = [0.5, 1.0, 2.0, 5.0]
    pairs = [(a, b) for i, a in enumerate(norms) for b in norms[i + 1:]]
    worst = -math.inf
    for ki, k in enumerate((0.5, 1.0, 2.0, 5.0)):
        target = DkTarget(d=3, k=k, phi=linear_phi())
        for pi, (a, b) in enumerate(pairs):
            est = contraction_ratio(target, ray_pair(3, a, b), 10**5,
                                    RngStream(101, ki).child(pi))
            slack = (est.empirical_rate - est.theoretical_rate) / est.std_error
            worst = max(worst, slack)
            assert est.empirical_rate <= est.theoretical_rate + 3.0 * est.std_error
    ok(1, f"k/(k+1) bound holds on all 24 ray pairs (worst slack {worst:+.2f} SE)")


def test_criterion_2_sharpness_probes():
    probes = {
        "shell k=1 m=2": (
            sharpness_probe(ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0),
                            1e4, n=10**6, rng=RngStream(102, 0)),
            0.75, 0.01,
        ),
        "heavy-tail d=2": (
            sharpness_probe(StdTTarget(d=2, m=2.0), 1e4, n=10**6,
                            rng=RngStream(102, 1)),
            8.0 / 9.0, 0.01,
        ),
        "heavy-tail d=100": (
            sharpness_probe(StdTTarget(d=100, m=2.0), 1e4, n=10**6,
                            rng=RngStream(102, 2)),
            0.9999, 0.0005,
        ),
    }
    for label, (value, want, tol) in probes.items():
        assert value == pytest.approx(want, abs=tol), label
    got = ", ".join(f"{k}={v[0]:.5f}" for k, v in probes.items())
    ok(2, f"sharpness probes at r=1e4: {got}")


def test_criterion_3_stationarity():
    # shell family: radii of a 1e5-step chain from a stationary draw follow
    # 1 - (eps/r)^m; thinned to 5000 near-independent points so the KS
    # critical value applies
    shell = ParetoShellTarget(d=3, k=1.0, m=2.0, eps=1.0)
    run = run_radial_chain(shell, 10**5, RngStream(103), thinning=20)
    res = stats.kstest(run.series, lambda r: radial_stationary_cdf(shell, r))
    assert res.pvalue > 0.01

    # Gaussian case: k = d = 3, quadratic weights, covariance within 5%
    # relative entrywise (scaled by sqrt(sigma_ii sigma_jj) so zero
    # off-diagonal entries are comparable)
    sigma = np.diag([1.0, 4.0, 9.0])
    gauss = RotAsymTarget.gaussian(sigma)
    run_g = run_chain(gauss, ChainConfig(n_steps=10**6), lambda p: p, RngStream(104))
    cov = np.cov(run_g.series.T)
    scale = np.sqrt(np.outer(np.diag(sigma), np.diag(sigma)))
    assert np.all(np.abs(cov - sigma) <= 0.05 * scale)
    ok(3, f"shell KS p={res.pvalue:.3f}; Gaussian covariance max rel dev "
          f"{np.max(np.abs(cov - sigma) / scale):.3%}")


def _figure_rows(experiment, target, chain, params, seed, path):
    cfg = ExperimentConfig(experiment=experiment, out=str(path), seed=seed,
                           target=target, chain=chain, params=params)
    assert run_experiment(cfg) == 0
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith(("m,", "d,")):
                continue
            rows.append([float(v) for v in line.split(",")])
    return rows


@pytest.fixture(scope="session")
def figure_csv_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("figures")


def test_criterion_4_left_panel(figure_csv_dir):
    rows = _figure_rows(
        "figure-appB-left",
        target={"d": "10"},
        chain={"n_steps": str(2**21), "burn_in": "1000"},
        params={"m_exponents": "-3,-5,-7"},
        seed=105,
        path=figure_csv_dir / "appB_left.csv",
    )
    assert len(rows) == 3
    devs = []
    for m, gap, bound in rows:
        assert bound == pytest.approx(m / (1.0 + m))
        assert abs(gap - bound) <= 0.20 * bound
        devs.append(f"m=2^{math.log2(m):.0f}: {gap / bound - 1.0:+.1%}")
    ok(4, "left-panel gaps within 20% of m/(1+m): " + ", ".join(devs))


def test_criterion_5_right_panel(figure_csv_dir):
    rows = _figure_rows(
        "figure-appB-right",
        target={},
        chain={"n_steps": str(2**21), "burn_in": "1000"},
        params={"m_exponents": "1,2", "d_exponents": "6,8"},
        seed=106,
        path=figure_csv_dir / "appB_right.csv",
    )
    cells = {(int(d), m): (gap, bound) for d, m, gap, bound in rows}
    assert set(cells) >= {(64, 2.0), (256, 2.0), (64, 4.0)}
    devs = []
    for (d, m), (gap, bound) in cells.items():
        assert bound == pytest.approx(m / (d + m))
        assert abs(gap - bound) <= 0.20 * bound
        devs.append(f"(d={d},m={m:g}): {gap / bound - 1.0:+.1%}")
    ok(5, "right-panel gaps within 20% of m/(d+m): " + ", ".join(devs))


def test_criterion_6_class_membership_boundary():
    chi = quadratic_chi(np.diag([1.0, 2.0, 3.0]))
    target = RotAsymTarget(d=3, k=3.0, m=2.0, chi=chi, chi_min=chi.chi_min)
    ell = level_set_closed_form(target)
    for p in (1.5, 2.0, 3.0):
        assert lambda_k_check(ell, p) == MEMBER
    for p in (1.2, 1.4):
        assert lambda_k_check(ell, p) == NOT_MEMBER
    boundary = lambda_k_boundary(ell, 1.2, 2.0)
    assert boundary == pytest.approx(1.5, abs=0.01)
    ok(6, f"membership flips at index {boundary:.4f} (expected 1.5 +- 0.01)")


def test_criterion_7_matching_round_trip():
    chi = quadratic_chi(np.diag([1.0, 2.0, 3.0]))
    asym = RotAsymTarget(d=3, k=2.0, m=1.0, chi=chi, chi_min=chi.chi_min)
    ell_asym = level_set_closed_form(asym)
    err_asym = matched_level_set_error(ell_asym, construct_matching_dk(ell_asym, 2.0),
                                       n_grid=50)
    ell_log = neg_log_level_set()
    err_log = matched_level_set_error(ell_log, construct_matching_dk(ell_log, 1.0),
                                      n_grid=50)
    assert err_asym <= 1e-8
    assert err_log <= 1e-8
    ok(7, f"matched level sets agree to {max(err_asym, err_log):.2e} "
          "relative on 50 grid points")


def test_criterion_8_level_set_oracle_equivalence():
    chi = quadratic_chi(np.diag([1.0, 2.0, 3.0]))
    targets = [
        RotInvTarget(d=3, k=2.0, m=2.0, phi=linear_phi()),
        RotAsymTarget(d=3, k=2.0, m=2.0, chi=chi, chi_min=chi.chi_min),
        StdTTarget(d=2, m=2.0),
    ]
    worst = 0.0
    for ti, target in enumerate(targets):
        ell = level_set_closed_form(target)
        offsets = np.geomspace(0.1, 12.0, 20)
        for i, s in enumerate(offsets):
            log_t = math.log(ell.t_max) - float(s)
            mc, se = level_set_mc(target, log_t, 10**6, RngStream(1080, ti).child(i))
            cf = float(ell.eval(math.exp(log_t)))
            tol = 3.0 * se + 1e-9 * (1.0 + abs(cf))
            assert abs(mc - cf) <= tol
            if se > 0.0:
                worst = max(worst, abs(mc - cf) / se)
    ok(8, f"Monte Carlo level sets within 3 SE of closed forms on all grids "
          f"(worst {worst:.2f} SE)")


def test_criterion_9_non_expansion_suite():
    rng = np.random.default_rng(109)
    profiles = [
        linear_phi(1.1), linear_phi(0.7, kappa=2.0),
        quadratic_phi(0.8), quadratic_phi(1.3, kappa=3.0),
        exp_phi(), exp_phi(kappa=2.5),
    ]
    per = 10**4 // len(profiles) + 1
    total = 0
    for phi in profiles:
        hi = phi.kappa if math.isfinite(phi.kappa) else 8.0
        r = rng.uniform(1e-9, hi * (1.0 - 1e-12), size=per)
        r_tilde = rng.uniform(1e-9, hi * (1.0 - 1e-12), size=per)
        v = rng.exponential(2.0, size=per)
        lhs = np.abs(phi_inverse_extended(phi, phi.eval(r) + v)
                     - phi_inverse_extended(phi, phi.eval(r_tilde) + v))
        assert np.all(lhs <= np.abs(r - r_tilde) + 1e-12)
        total += per
    ok(9, f"shifted-inverse non-expansion holds on {total} random tuples "
          "across 6 profiles")


def test_criterion_10_out_of_scope_statement():
    # Exact spectral gaps are not computable at desk scale (only bounds are
    # proven); this suite substitutes the small-gap heuristic agreement
    # (criteria 4-6) and the exactness of the gap-transfer construction
    # (criterion 7).
    ok(10, "exact gaps not desk-computable; covered via criteria 4-7")
