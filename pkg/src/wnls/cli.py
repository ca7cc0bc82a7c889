"""Command-line interface.

Each subcommand maps 1:1 onto a library entry point and writes its outputs
under --out: WNLS1 field snapshots, CSV series/tables, report JSON, and PNG
figures (suppressed by --no-figures).  Parameters come from flags, with an
optional JSON config file supplying defaults: a flag given on the command
line always overrides the file.  Exit codes: 0 all verdicts pass, 1 verdict
failure, 2 usage or configuration error, 3 runtime failure such as blow-up.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .diagnostics import compute_series, drift_report
from .errors import (
    BlowUp,
    ConfigError,
    SmallDataViolation,
    UnresolvedMollifier,
    WnlsError,
)
from .experiments import (
    run_ceps_growth,
    run_convergence,
    run_mc_moments,
    run_mc_regularity,
    run_phase_check,
)
from .io import (
    load_config_file,
    write_field_snapshot,
    write_report_json,
    write_series_csv,
    write_table_csv,
)
from .noise import build_environment, get_mollifier, sample_white_noise
from .solver import SolverConfig, gauge_to_u, integrate
from .spectral import TorusGrid, lp_norm, random_band_limited

_DEFAULTS = {
    "n": 64,
    "seed": 1,
    "eps": 0.125,
    "lam": -1,
    "dt": 1e-3,
    "t_end": 1.0,
    "snapshot_every": 20,
    "mollifier": "gaussian",
    "amplitude": 1.0,
    "gamma": 1.5,
    "kappa": 0.2,
    "kappa_prime": 0.2,
    "samples": 100,
    "v0_norm": 0.5,
    "oracle_draws": 2_000_000,
    "renormalized": True,
}
_CONFIG_ALIASES = {"lambda": "lam"}


def _flag(parser, name, dest, **kw):
    parser.add_argument(name, dest=dest, default=argparse.SUPPRESS, **kw)


def _add_common(parser):
    parser.add_argument("--config", default=None,
                        help="JSON file of parameter defaults; flags override")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--force", action="store_true",
                        help="run even when eps is unresolved by the grid, "
                             "and skip the focusing small-data gate")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering")
    _flag(parser, "--n", "n", type=int, help="grid size per axis (even, >= 4)")
    _flag(parser, "--seed", "seed", type=int, help="master seed")
    _flag(parser, "--mollifier", "mollifier",
          choices=("gaussian", "raised-cosine"), help="mollifier kind")
    _flag(parser, "--amplitude", "amplitude", type=float,
          help="noise amplitude multiplier (0 disables the noise)")


def _add_eps(parser, many: bool):
    if many:
        _flag(parser, "--eps", "eps", type=float, nargs="+",
              help="mollification scales, e.g. --eps 0.25 0.125 0.0625")
    else:
        _flag(parser, "--eps", "eps", type=float, help="mollification scale")


def _add_solver_flags(parser):
    _flag(parser, "--lambda", "lam", type=int, choices=(-1, 0, 1),
          help="cubic coupling sign")
    _flag(parser, "--dt", "dt", type=float, help="time step")
    _flag(parser, "--t-end", "t_end", type=float, help="final time")
    _flag(parser, "--snapshot-every", "snapshot_every", type=int,
          help="record every k-th step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wnls",
        description="Pseudospectral NLS on the torus with renormalized "
                    "white-noise potential")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-noise", help="draw one white-noise field")
    _add_common(p)

    p = sub.add_parser("build-env", help="mollified noise environment")
    _add_common(p)
    _add_eps(p, many=False)

    p = sub.add_parser("solve", help="integrate one trajectory")
    _add_common(p)
    _add_eps(p, many=False)
    _add_solver_flags(p)
    _flag(p, "--v0-norm", "v0_norm", type=float, help="L2 size of v0")
    p.add_argument("--no-renormalization", action="store_true",
                   help="drop the C_eps counterterm from the potential")

    p = sub.add_parser("convergence", help="Cauchy sweep in eps")
    _add_common(p)
    _add_eps(p, many=True)
    _add_solver_flags(p)
    _flag(p, "--gamma", "gamma", type=float, help="Sobolev index in (1, 2)")
    _flag(p, "--v0-norm", "v0_norm", type=float, help="L2 size of v0")

    p = sub.add_parser("mc-regularity", help="Besov distance moments")
    _add_common(p)
    _add_eps(p, many=True)
    _flag(p, "--samples", "samples", type=int, help="Monte-Carlo sample count")
    _flag(p, "--kappa", "kappa", type=float, help="exp-weight smoothness gap")
    _flag(p, "--kappa-prime", "kappa_prime", type=float,
          help="Y / wick smoothness gap")

    p = sub.add_parser("mc-moments", help="gradient-square moment ratios")
    _add_common(p)
    _add_eps(p, many=True)
    _flag(p, "--samples", "samples", type=int, help="Monte-Carlo sample count")
    _flag(p, "--oracle-draws", "oracle_draws", type=int,
          help="scalar-oracle sample count")

    p = sub.add_parser("phase-check", help="renormalization as pure phase")
    _add_common(p)
    _add_eps(p, many=False)
    _add_solver_flags(p)

    p = sub.add_parser("ceps-growth", help="renormalization constant vs |ln eps|")
    _add_common(p)
    _add_eps(p, many=True)
    return parser


def _merge(args: argparse.Namespace) -> dict:
    """Defaults <- config file <- explicit flags; unknown config keys fail."""
    merged = dict(_DEFAULTS)
    if args.config:
        overrides = load_config_file(args.config)
        for key, value in overrides.items():
            key = _CONFIG_ALIASES.get(key, key)
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    for key in _DEFAULTS:
        if hasattr(args, key):
            merged[key] = getattr(args, key)
    merged["out"] = args.out
    merged["force"] = args.force
    merged["figures"] = not args.no_figures
    if getattr(args, "no_renormalization", False):
        merged["renormalized"] = False
    return merged


def _grid(p: dict) -> TorusGrid:
    try:
        return TorusGrid(p["n"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _eps_list(p: dict) -> list:
    eps = p["eps"]
    return [float(e) for e in (eps if isinstance(eps, (list, tuple)) else [eps])]


def _check_resolved(eps_values, grid: TorusGrid, force: bool):
    bad = [e for e in eps_values if 0 < e < 4.0 / grid.n]
    if bad and not force:
        raise UnresolvedMollifier(
            f"mollifier unresolved by grid at eps = {min(bad):g} "
            f"(< 4/n = {4.0 / grid.n:g}); pass --force to proceed")
    if bad:
        print(f"warning: mollifier unresolved by grid at eps = {min(bad):g}; "
              "continuing under --force", file=sys.stderr)


def _solver_config(p: dict) -> SolverConfig:
    return SolverConfig(lam=p["lam"], dt=p["dt"], t_end=p["t_end"],
                        snapshot_every=p["snapshot_every"],
                        renormalized=p["renormalized"],
                        enforce_small_data=not p["force"])


def _v0(grid: TorusGrid, seed: int, norm: float):
    rng = np.random.default_rng(seed)
    f = random_band_limited(grid, rng, max_mode=4)
    return f * (norm / lp_norm(f, 2))


def _emit_report(report, p: dict) -> int:
    out = p["out"]
    os.makedirs(out, exist_ok=True)
    write_report_json(report, os.path.join(out, f"{report.name}-report.json"))
    for tname, table in report.tables.items():
        write_table_csv(table, os.path.join(out, f"{report.name}-{tname}.csv"))
    if p["figures"]:
        from . import plots

        plots.save_report_figures(report, out)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.name} | {v.detail}")
    return 0 if report.passed else 1


def _cmd_sample_noise(p: dict) -> int:
    grid = _grid(p)
    noise = sample_white_noise(p["seed"], grid)
    out = p["out"]
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "xi.wnls")
    write_field_snapshot(noise.xi, path)
    if p["figures"]:
        from . import plots

        plots.save_field_heatmap(noise.xi, os.path.join(out, "xi.png"),
                                 title="white noise")
    print(f"n={grid.n} seed={p['seed']} l2={lp_norm(noise.xi, 2):.6f} "
          f"wrote={path}")
    return 0


def _cmd_build_env(p: dict) -> int:
    grid = _grid(p)
    eps = _eps_list(p)[0]
    _check_resolved([eps], grid, p["force"])
    noise = sample_white_noise(p["seed"], grid)
    env = build_environment(noise, eps, get_mollifier(p["mollifier"]),
                            p["amplitude"])
    out = p["out"]
    os.makedirs(out, exist_ok=True)
    for name, fld in (("xi-eps", env.xi_eps), ("y-eps", env.y_eps),
                      ("wick", env.wick)):
        write_field_snapshot(fld, os.path.join(out, f"{name}.wnls"))
    if p["figures"]:
        from . import plots

        plots.save_field_heatmap(env.y_eps, os.path.join(out, "y-eps.png"),
                                 title="Y_eps")
        plots.save_field_heatmap(env.wick, os.path.join(out, "wick.png"),
                                 title="wick square")
    print(f"n={grid.n} seed={p['seed']} eps={eps:g} c_eps={env.c_eps:.12g} "
          f"k_eps={env.k_eps:.12g}")
    return 0


def _cmd_solve(p: dict) -> int:
    grid = _grid(p)
    eps = _eps_list(p)[0]
    _check_resolved([eps], grid, p["force"])
    ss = np.random.SeedSequence(p["seed"]).spawn(2)
    noise = sample_white_noise(int(ss[0].generate_state(1, np.uint64)[0]), grid)
    env = build_environment(noise, eps, get_mollifier(p["mollifier"]),
                            p["amplitude"])
    v0 = _v0(grid, int(ss[1].generate_state(1, np.uint64)[0]), p["v0_norm"])
    u0 = gauge_to_u(v0, env)
    traj = integrate(u0, env, _solver_config(p))
    series = compute_series(traj)
    out = p["out"]
    os.makedirs(out, exist_ok=True)
    write_series_csv(series, os.path.join(out, "series.csv"))
    write_field_snapshot(traj.snapshots[0], os.path.join(out, "u-initial.wnls"))
    write_field_snapshot(traj.snapshots[-1], os.path.join(out, "u-final.wnls"))
    if p["figures"]:
        from . import plots

        plots.save_series_figure(series, os.path.join(out, "series.png"))
        plots.save_field_heatmap(traj.snapshots[-1],
                                 os.path.join(out, "u-final.png"),
                                 title=f"|u| at t={p['t_end']:g}")
    for key, value in drift_report(series).items():
        print(f"{key}={value:.6e}")
    return 0


def _cmd_convergence(p: dict) -> int:
    grid = _grid(p)
    report = run_convergence(p["seed"], _eps_list(p), p["gamma"], p["lam"],
                             grid, _solver_config(p),
                             get_mollifier(p["mollifier"]), p["amplitude"],
                             p["v0_norm"], force=p["force"])
    return _emit_report(report, p)


def _cmd_mc_regularity(p: dict) -> int:
    grid = _grid(p)
    report = run_mc_regularity(p["samples"], _eps_list(p), p["kappa"],
                               p["kappa_prime"], grid, p["seed"],
                               get_mollifier(p["mollifier"]), p["amplitude"])
    return _emit_report(report, p)


def _cmd_mc_moments(p: dict) -> int:
    grid = _grid(p)
    report = run_mc_moments(p["samples"], _eps_list(p), grid, p["seed"],
                            get_mollifier(p["mollifier"]), p["amplitude"],
                            oracle_draws=p["oracle_draws"])
    return _emit_report(report, p)


def _cmd_phase_check(p: dict) -> int:
    grid = _grid(p)
    eps = _eps_list(p)[0]
    _check_resolved([eps], grid, p["force"])
    report = run_phase_check(p["seed"], eps, p["lam"], grid,
                             _solver_config(p), get_mollifier(p["mollifier"]),
                             p["amplitude"])
    return _emit_report(report, p)


def _cmd_ceps_growth(p: dict) -> int:
    grid = _grid(p)
    report = run_ceps_growth(grid, _eps_list(p), get_mollifier(p["mollifier"]))
    return _emit_report(report, p)


_COMMANDS = {
    "sample-noise": _cmd_sample_noise,
    "build-env": _cmd_build_env,
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "mc-regularity": _cmd_mc_regularity,
    "mc-moments": _cmd_mc_moments,
    "phase-check": _cmd_phase_check,
    "ceps-growth": _cmd_ceps_growth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = _merge(args)
        return _COMMANDS[args.command](params)
    except (ConfigError, UnresolvedMollifier, SmallDataViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlowUp as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except WnlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
