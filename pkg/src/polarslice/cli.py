"""Reproducible experiment runner.

One experiment per invocation, configured by an INI file with CLI overrides:

    polarslice <experiment> --config cfg.ini [--seed N] [--out PATH] [--threads N]

Output is a CSV with ``#``-prefixed header comments carrying the seed and the
full effective configuration; identical config + seed give byte-identical
files. Floats are written with 17 significant digits so downstream plotting
round-trips exactly. Exit codes: 0 success, 1 configuration error, 2 every
experiment cell failed numerically.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import coupling, kernels, spectral
from .errors import ConfigError, PolarSliceError
from .mathcore import exp_phi, linear_phi, power_phi, quadratic_phi
from .rng import RngStream
from .targets import (
    DkTarget,
    ParetoShellTarget,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    TargetFamily,
    quadratic_chi,
    radial_stationary_cdf,
)

EXPERIMENTS = (
    "stationarity",
    "contraction",
    "sharpness",
    "empirical-gap",
    "levelset",
    "lambda-k",
    "gap-bound",
    "figure-appB-left",
    "figure-appB-right",
)

#: documented, fixed CSV schemas (column order is part of the interface)
SCHEMAS = {
    "stationarity": ("family", "n_steps", "burn_in", "thinning", "n_kept",
                     "ks_stat", "ks_pvalue", "mean_radius"),
    "contraction": ("x_norm", "y_norm", "n", "empirical_rate", "std_error",
                    "theoretical_rate", "within_bound"),
    "sharpness": ("r", "n", "probe", "std_error", "theory_limit", "quadrature"),
    "empirical-gap": ("g", "n_steps", "burn_in", "thinning", "iat",
                      "truncation_lag", "empirical_gap", "theory_bound"),
    "levelset": ("log_t", "mc_estimate", "mc_std_error", "closed_form"),
    "lambda-k": ("p", "verdict"),
    "gap-bound": ("kind", "k", "m", "d", "value"),
    "figure-appB-left": ("m", "empirical_gap", "theory_bound"),
    "figure-appB-right": ("d", "m", "empirical_gap", "theory_bound"),
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    out: str = ""
    threads: int = 1
    target: dict = field(default_factory=dict)
    chain: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        if not self.out:
            self.out = f"{self.experiment}.csv"
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _to_float(sec: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number") from exc


def _to_int(sec: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not an integer") from exc


def _float_list(sec: str, key: str, raw: str):
    return [_to_float(sec, key, part.strip()) for part in raw.split(",") if part.strip()]


def load_config(path, experiment=None, seed=None, out=None, threads=None) -> ExperimentConfig:
    """Read an INI config; the keyword overrides win over file values."""
    sections: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file {path} not found or unreadable")
        sections = {name: dict(parser[name]) for name in parser.sections()}
    exp_sec = sections.get("experiment", {})
    name = experiment or exp_sec.get("name")
    if not name:
        raise ConfigError("no experiment given (positional argument or [experiment] name)")
    return ExperimentConfig(
        experiment=name,
        seed=seed if seed is not None else _to_int("experiment", "seed", exp_sec.get("seed", "0")),
        out=out or exp_sec.get("out", ""),
        threads=threads if threads is not None
        else _to_int("experiment", "threads", exp_sec.get("threads", "1")),
        target=sections.get("target", {}),
        chain=sections.get("chain", {}),
        params=sections.get("params", {}),
    )


def _phi_from_config(sec: dict):
    kind = sec.get("phi", "linear")
    coeff = _to_float("target", "phi_coeff", sec.get("phi_coeff", "1.0"))
    kappa = _to_float("target", "phi_kappa", sec.get("phi_kappa", "inf"))
    if kind == "linear":
        return linear_phi(coeff, kappa)
    if kind == "quadratic":
        return quadratic_phi(coeff, kappa)
    if kind == "power":
        expo = _to_float("target", "phi_exponent", sec.get("phi_exponent", "1.0"))
        return power_phi(expo, coeff, kappa)
    if kind == "exp":
        return exp_phi(kappa)
    raise ConfigError(f"[target] phi = {kind!r} (use linear|quadratic|power|exp)")


def target_from_config(sec: dict) -> TargetFamily:
    """Build a target family from a declarative [target] section."""
    family = sec.get("family")
    if not family:
        raise ConfigError("[target] family is required for this experiment")
    d = _to_int("target", "d", sec.get("d", "0"))
    if d < 1:
        raise ConfigError("[target] d must be a positive integer")
    try:
        if family == "dk":
            return DkTarget(d=d, k=_to_float("target", "k", sec.get("k", "1")),
                            phi=_phi_from_config(sec))
        if family == "rot_inv":
            return RotInvTarget(d=d, k=_to_float("target", "k", sec.get("k", "1")),
                                m=_to_float("target", "m", sec.get("m", "1")),
                                phi=_phi_from_config(sec))
        if family == "rot_asym":
            diag = _float_list("target", "sigma_diag", sec.get("sigma_diag", ""))
            if len(diag) != d:
                raise ConfigError("[target] sigma_diag must list d positive entries")
            chi = quadratic_chi(np.diag(diag))
            return RotAsymTarget(d=d, k=_to_float("target", "k", sec.get("k", str(d))),
                                 m=_to_float("target", "m", sec.get("m", "2")),
                                 chi=chi, chi_min=chi.chi_min)
        if family == "std_t":
            return StdTTarget(d=d, m=_to_float("target", "m", sec.get("m", "2")))
        if family == "pareto_shell":
            return ParetoShellTarget(d=d, k=_to_float("target", "k", sec.get("k", "1")),
                                     m=_to_float("target", "m", sec.get("m", "2")),
                                     eps=_to_float("target", "eps", sec.get("eps", "1")))
    except PolarSliceError as exc:
        raise ConfigError(f"[target] invalid parameters: {exc}") from exc
    raise ConfigError(
        f"[target] family = {family!r} (use dk|rot_inv|rot_asym|std_t|pareto_shell)"
    )


def _chain_params(cfg: ExperimentConfig, default_steps=200_000, default_burn=1_000,
                  default_thin=1):
    sec = cfg.chain
    return (
        _to_int("chain", "n_steps", sec.get("n_steps", str(default_steps))),
        _to_int("chain", "burn_in", sec.get("burn_in", str(default_burn))),
        _to_int("chain", "thinning", sec.get("thinning", str(default_thin))),
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _config_comments(cfg: ExperimentConfig):
    lines = [f"# experiment = {cfg.experiment}", f"# seed = {cfg.seed}"]
    for sec_name, sec in (("target", cfg.target), ("chain", cfg.chain),
                          ("params", cfg.params)):
        for key in sorted(sec):
            lines.append(f"# {sec_name}.{key} = {sec[key]}")
    return lines


def write_csv(path, comments, columns, rows):
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="\n") as fh:
        for line in comments:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _grid_map(fn, cells, threads):
    """Evaluate fn over indexed cells, deterministically ordered, catching
    numerical failures per cell."""

    def safe(item):
        idx, cell = item
        try:
            return fn(idx, cell), None
        except (PolarSliceError, FloatingPointError, ValueError) as exc:
            return None, f"cell {cell}: {type(exc).__name__}: {exc}"

    items = list(enumerate(cells))
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(safe, items))
    else:
        results = [safe(item) for item in items]
    rows, errors = [], []
    for (row, err) in results:
        if err is None:
            rows.append(row)
        else:
            errors.append(err)
    return rows, errors


def _exp_stationarity(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    n_steps, burn_in, thinning = _chain_params(cfg, default_thin=20)
    run = kernels.run_chain(target, kernels.ChainConfig(n_steps, burn_in, thinning),
                            kernels.norm_summary, rng)
    radii = run.series
    try:
        ks = stats.kstest(radii, lambda r: radial_stationary_cdf(target, r))
        ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
    except PolarSliceError:
        ks_stat, ks_p = math.nan, math.nan
    row = (type(target).__name__, n_steps, burn_in, thinning, radii.size,
           ks_stat, ks_p, float(radii.mean()))
    return [row], []


def _ray_pairs_from_norms(norms):
    pairs = []
    for i, a in enumerate(norms):
        for b in norms[i + 1:]:
            if a != b:
                pairs.append((a, b))
    return pairs


def _exp_contraction(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    norms = _float_list("params", "norms", cfg.params.get("norms", "0.5,1,2,5"))
    n = _to_int("params", "n", cfg.params.get("n", "100000"))
    pairs = _ray_pairs_from_norms(norms)

    def cell(idx, pair):
        a, b = pair
        est = coupling.contraction_ratio(target, coupling.ray_pair(target.d, a, b),
                                         n, rng.child(idx))
        return (a, b, n, est.empirical_rate, est.std_error, est.theoretical_rate,
                est.within_bound)

    return _grid_map(cell, pairs, cfg.threads)


def _exp_sharpness(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    r_grid = _float_list("params", "r_grid", cfg.params.get("r_grid", "10,100,1000,10000"))
    n = _to_int("params", "n", cfg.params.get("n", "1000000"))
    theory = coupling.theoretical_contraction_rate(target)

    def cell(idx, r):
        value, se = coupling._probe_stats(target, r, n, rng.child(idx))
        quad = (coupling.sharpness_probe_quadrature(target, r)
                if isinstance(target, StdTTarget) else math.nan)
        return (r, n, value, se, theory, quad)

    return _grid_map(cell, r_grid, cfg.threads)


def _theory_gap_bound(target: TargetFamily):
    if isinstance(target, DkTarget):
        return spectral.gap_lower_bound("dk", k=target.k).value
    if isinstance(target, RotInvTarget):
        m_eff = target.m * (target.phi.power[1] if target.phi.power else 1.0)
        return spectral.gap_lower_bound("rot_inv", k=target.k, m=m_eff).value
    if isinstance(target, RotAsymTarget):
        return spectral.gap_lower_bound("rot_asym", k=target.k, m=target.m).value
    if isinstance(target, StdTTarget) and target.m > 2.0:
        return spectral.gap_lower_bound("multiv_t", d=target.d, m=target.m).value
    return math.nan


def _gap_of_chain(target, g, n_steps, burn_in, thinning, rng):
    if target.rot_invariant:
        run = kernels.run_radial_chain(target, n_steps, rng, burn_in=burn_in,
                                       thinning=thinning)
        series = np.log(run.series) if g == "log_norm" else run.series
    else:
        summary = kernels.log_norm_summary if g == "log_norm" else kernels.norm_summary
        run = kernels.run_chain(target, kernels.ChainConfig(n_steps, burn_in, thinning),
                                summary, rng)
        series = run.series
    est = spectral.iat_estimate(series)
    return est, 2.0 / (est.tau + 1.0)


def _exp_empirical_gap(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    g = cfg.params.get("g", "log_norm")
    if g not in ("norm", "log_norm"):
        raise ConfigError(f"[params] g = {g!r} (use norm|log_norm)")
    n_steps, burn_in, thinning = _chain_params(cfg)
    est, gap = _gap_of_chain(target, g, n_steps, burn_in, thinning, rng)
    theory = _theory_gap_bound(target)
    warn = spectral.gap_heuristic_warning(theory) if math.isfinite(theory) else None
    if warn:
        print(f"warning: {warn}", file=sys.stderr)
    row = (g, n_steps, burn_in, thinning, est.tau, est.truncation_lag, gap, theory)
    return [row], []


def _exp_levelset(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    ell = spectral.level_set_closed_form(target)
    n = _to_int("params", "n", cfg.params.get("n", "1000000"))
    n_grid = _to_int("params", "n_grid", cfg.params.get("n_grid", "20"))
    if "log_t_grid" in cfg.params:
        log_ts = _float_list("params", "log_t_grid", cfg.params["log_t_grid"])
    else:
        s = np.geomspace(0.1, 15.0, n_grid)
        log_ts = list(math.log(ell.t_max) - s)

    def cell(idx, log_t):
        mc, se = spectral.level_set_mc(target, log_t, n, rng.child(idx))
        return (log_t, mc, se, float(ell.eval(math.exp(log_t))))

    return _grid_map(cell, log_ts, cfg.threads)


def _exp_lambda_k(cfg: ExperimentConfig, rng: RngStream):
    target = target_from_config(cfg.target)
    ell = spectral.level_set_closed_form(target)
    p_grid = _float_list("params", "p_grid", cfg.params.get("p_grid", "1.2,1.4,1.5,2,3"))
    rows = [(p, spectral.lambda_k_check(ell, p)) for p in p_grid]
    extra = []
    if "p_lo" in cfg.params and "p_hi" in cfg.params:
        boundary = spectral.lambda_k_boundary(
            ell,
            _to_float("params", "p_lo", cfg.params["p_lo"]),
            _to_float("params", "p_hi", cfg.params["p_hi"]),
        )
        extra.append(f"# boundary_estimate = {boundary:.17g}")
        print(f"class-membership boundary estimate: {boundary:.6g}")
    return rows, [], extra


def _exp_gap_bound(cfg: ExperimentConfig, rng: RngStream):
    kind = cfg.params.get("kind")
    if not kind:
        raise ConfigError("[params] kind is required (dk|rot_inv|rot_asym|multiv_t)")
    kw = {}
    for key in ("k", "m"):
        if key in cfg.params:
            kw[key] = _to_float("params", key, cfg.params[key])
    if "d" in cfg.params:
        kw["d"] = _to_int("params", "d", cfg.params["d"])
    try:
        bound = spectral.gap_lower_bound(kind, **kw)
    except PolarSliceError as exc:
        raise ConfigError(f"gap bound rejected: {exc}") from exc
    row = (kind, kw.get("k", math.nan), kw.get("m", math.nan),
           kw.get("d", math.nan), bound.value)
    print(f"gap lower bound [{kind}]: {bound.value:.17g}")
    return [row], []


def _exp_figure_left(cfg: ExperimentConfig, rng: RngStream):
    d = _to_int("target", "d", cfg.target.get("d", "10"))
    default_exps = ",".join(str(-e / 2.0) for e in range(15))
    exps = _float_list("params", "m_exponents", cfg.params.get("m_exponents", default_exps))
    n_steps, burn_in, thinning = _chain_params(cfg)

    def cell(idx, e):
        m = 2.0**e
        target = RotInvTarget(d=d, k=1.0, m=m, phi=linear_phi())
        _, gap = _gap_of_chain(target, "log_norm", n_steps, burn_in, thinning,
                               rng.child(idx))
        theory = m / (1.0 + m)
        warn = spectral.gap_heuristic_warning(theory)
        if warn:
            print(f"warning (m={m:g}): {warn}", file=sys.stderr)
        return (m, gap, theory)

    return _grid_map(cell, exps, cfg.threads)


def _exp_figure_right(cfg: ExperimentConfig, rng: RngStream):
    m_exps = _float_list("params", "m_exponents",
                         cfg.params.get("m_exponents", "0,1,2,3,4"))
    d_exps = _float_list("params", "d_exponents",
                         cfg.params.get("d_exponents", "1,2,3,4,5,6,7,8,9,10"))
    n_steps, burn_in, thinning = _chain_params(cfg)
    cells = [(int(2**de), 2.0**me) for me in m_exps for de in d_exps]

    def cell(idx, dm):
        d, m = dm
        target = RotInvTarget(d=d, k=float(d), m=m, phi=linear_phi())
        _, gap = _gap_of_chain(target, "norm", n_steps, burn_in, thinning,
                               rng.child(idx))
        theory = m / (d + m)
        warn = spectral.gap_heuristic_warning(theory)
        if warn:
            print(f"warning (d={d}, m={m:g}): {warn}", file=sys.stderr)
        return (d, m, gap, theory)

    return _grid_map(cell, cells, cfg.threads)


_RUNNERS = {
    "stationarity": _exp_stationarity,
    "contraction": _exp_contraction,
    "sharpness": _exp_sharpness,
    "empirical-gap": _exp_empirical_gap,
    "levelset": _exp_levelset,
    "lambda-k": _exp_lambda_k,
    "gap-bound": _exp_gap_bound,
    "figure-appB-left": _exp_figure_left,
    "figure-appB-right": _exp_figure_right,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run one experiment, write its CSV, return the process exit code."""
    rng = RngStream(cfg.seed)
    result = _RUNNERS[cfg.experiment](cfg, rng)
    rows, errors = result[0], result[1]
    extra_comments = result[2] if len(result) > 2 else []
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    write_csv(cfg.out, _config_comments(cfg) + list(extra_comments),
              SCHEMAS[cfg.experiment], rows)
    print(f"{cfg.experiment}: {len(rows)} row(s) -> {cfg.out}"
          + (f" ({len(errors)} cell(s) failed)" if errors else ""))
    if rows == [] and errors:
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polarslice",
        description="Reproducible slice-sampling experiments (CSV output).",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, experiment=args.experiment, seed=args.seed,
                          out=args.out, threads=args.threads)
        return run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
