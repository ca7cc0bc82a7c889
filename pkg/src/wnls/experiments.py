"""Experiment drivers: convergence sweeps, Monte-Carlo statistics, rate fits.

Every driver is deterministic in (seed, parameters): per-sample noise seeds
are derived from the master seed through a SeedSequence, reductions are
ordered by the sorted scale ladder, and reports carry plain Python values
only, so rendering the same report twice is byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import besov_norm
from .diagnostics import compute_series, drift_report
from .errors import ConfigError, DegenerateFit, UnresolvedMollifier
from .noise import (
    GAUSSIAN,
    MollifierSpec,
    build_environment,
    mollify,
    renorm_constant,
    sample_white_noise,
    solve_poisson,
    wick_gradient_square,
)
from .solver import (
    SolverConfig,
    check_small_data,
    gauge_to_u,
    gauge_to_v,
    integrate,
    with_renormalization,
)
from .spectral import (
    TorusGrid,
    derivative,
    lp_norm,
    random_band_limited,
    sobolev_norm,
    to_physical,
    to_spectral,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RateFit:
    """Least-squares power law through positive (x, y) points.

    model "pure-power" fits y = A x^slope in log-log coordinates; model
    "power-times-log" divides |ln x|^beta out of y first, so the slope is
    the power multiplying a known logarithmic factor.
    """

    model: str
    slope: float
    intercept: float
    r_squared: float
    beta: float
    points: tuple

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "beta": self.beta,
            "points": [[float(x), float(y)] for x, y in self.points],
        }


def fit_log_rate(points, model: str = "pure-power", beta: float = 0.0) -> RateFit:
    """Fit a decay/growth rate through (x, y) pairs.

    Raises DegenerateFit when fewer than two points are given or all
    abscissae coincide.  Points with nonpositive coordinates are invalid.
    """
    if model not in ("pure-power", "power-times-log"):
        raise ValueError(f"unknown fit model '{model}'")
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise DegenerateFit("rate fit needs at least two points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("rate fit requires positive coordinates")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    if np.max(xs) == np.min(xs):
        raise DegenerateFit("all abscissae are equal")
    ly_full = np.log(ys)
    if model == "power-times-log":
        logs = np.abs(np.log(xs))
        if np.any(logs == 0):
            raise ValueError("power-times-log model undefined at x = 1")
        ys = ys / logs ** beta
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    # Residuals are identical in the divided-out and full coordinates; R^2
    # is scored against the original ordinates so it measures how much of
    # the data's variation the full model (power times log factor) explains.
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly_full - np.mean(ly_full)) ** 2))
    if ss_tot <= 1e-30:
        r_squared = 1.0 if ss_res <= 1e-30 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RateFit(model=model, slope=float(slope), intercept=float(intercept),
                   r_squared=float(r_squared), beta=float(beta),
                   points=tuple(pts))


def linear_fit(xs, ys):
    """Plain least squares y = a x + b; returns (a, b, r_squared)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or np.max(xs) == np.min(xs):
        raise DegenerateFit("linear fit needs two distinct abscissae")
    a, b = np.polyfit(xs, ys, 1)
    resid = ys - (a * xs + b)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 and ss_res <= 1e-30 else 1.0 - ss_res / ss_tot
    return float(a), float(b), float(r2)


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "detail": self.detail}


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    tables: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "tables": self.tables,
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
        }


def _sample_seeds(seed: int, count: int):
    """Per-sample integer seeds derived from the master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _initial_datum(grid: TorusGrid, seed: int, norm: float, max_mode: int = 4):
    rng = np.random.default_rng(seed)
    v0 = random_band_limited(grid, rng, max_mode)
    n2 = lp_norm(v0, 2)
    if n2 == 0.0:
        raise ConfigError("degenerate initial datum")
    return v0 * (norm / n2)


def _sorted_eps(eps_list):
    eps = sorted({float(e) for e in eps_list}, reverse=True)
    if len(eps) < 2:
        raise ConfigError("need at least two distinct eps values")
    if any(e <= 0 for e in eps):
        raise ConfigError("eps values must be positive")
    return eps


def run_convergence(seed, eps_list, gamma: float, lam: int, grid: TorusGrid,
                    config: SolverConfig, mollifier: MollifierSpec = GAUSSIAN,
                    amplitude: float = 1.0, v0_norm: float = 0.5,
                    force: bool = False) -> ExperimentReport:
    """Cauchy-in-eps convergence of the transformed trajectories.

    For each eps in the (descending) ladder the same noise draw is mollified
    and integrated from the same v0, converted into each u-gauge.  The
    distance between consecutive scales is D_k = sup over snapshot times of
    ||v_{k+1}(t) - v_k(t)||_{H^gamma}.  ``seed`` may be one seed or a
    sequence; with several seeds the verdicts evaluate the per-pair median
    of D_k over seeds.

    Raises UnresolvedMollifier when min(eps) < 4/n unless ``force``.
    """
    if not (1.0 < gamma < 2.0):
        raise ConfigError("gamma must lie in (1, 2)")
    eps = _sorted_eps(eps_list)
    if min(eps) < 4.0 / grid.n and not force:
        raise UnresolvedMollifier(
            f"min eps {min(eps):g} is below 4/n = {4.0 / grid.n:g}; "
            "pass force=True to run anyway"
        )
    seeds = [int(s) for s in (seed if isinstance(seed, (list, tuple)) else [seed])]

    per_seed_d = {}
    per_seed_ratio = {}
    gate_margins = {}
    c_eps_by_eps = None
    k_eps_rows = {}
    for sd in seeds:
        ss = np.random.SeedSequence(sd).spawn(2)
        noise_seed = int(ss[0].generate_state(1, np.uint64)[0])
        v0_seed = int(ss[1].generate_state(1, np.uint64)[0])
        noise = sample_white_noise(noise_seed, grid)
        v0 = _initial_datum(grid, v0_seed, v0_norm)
        v0_h2 = sobolev_norm(v0, 2.0)
        v0_l2 = lp_norm(v0, 2)
        v_series = []
        h2_ratio_rows = []
        c_rows, k_rows, margins = [], [], []
        for e in eps:
            env = build_environment(noise, e, mollifier, amplitude)
            check = check_small_data(v0, env, lam)
            margins.append(check.margin)
            u0 = gauge_to_u(v0, env)
            traj = integrate(u0, env, config)
            vs = [gauge_to_v(u, env) for u in traj.snapshots]
            v_series.append(vs)
            h2_sup = max(sobolev_norm(v, 2.0) for v in vs)
            h2_ratio_rows.append(
                h2_sup / (v0_h2 + v0_l2 * abs(math.log(e)) ** 2))
            c_rows.append(env.c_eps)
            k_rows.append(env.k_eps)
        d_rows = []
        for a, b in zip(v_series, v_series[1:]):
            d_rows.append(max(sobolev_norm(vb - va, gamma)
                              for va, vb in zip(a, b)))
        per_seed_d[sd] = d_rows
        per_seed_ratio[sd] = h2_ratio_rows
        gate_margins[sd] = margins
        c_eps_by_eps = c_rows
        k_eps_rows[sd] = k_rows

    d_matrix = np.array([per_seed_d[sd] for sd in seeds])
    d_med = np.median(d_matrix, axis=0)
    pair_eps = eps[:-1]

    # Growth guard: sup_t ||v||_{H^2} over ||v0||_{H^2} + ||v0||_{L^2}|ln e|^2
    # must stay comparable across the sweep.
    ratio_med = np.median(np.array([per_seed_ratio[sd] for sd in seeds]),
                          axis=0)
    h2_ratio = [float(r) for r in ratio_med]
    ratio_spread = max(h2_ratio) / min(h2_ratio)

    if float(np.max(d_med)) <= 1e-14:
        # Identical trajectories at every scale (e.g. zero-amplitude noise):
        # convergence holds exactly and there is no decay rate to fit.
        fit = None
        verdicts = [
            Verdict("cauchy-distance-decreasing", True,
                    "all distances at roundoff"),
            Verdict("cauchy-decay-rate-positive", True,
                    "all distances at roundoff"),
        ]
    elif len(pair_eps) < 2:
        # Two eps values give a single consecutive pair: no rate to fit.
        fit = None
        verdicts = [
            Verdict("cauchy-distance-decreasing", True,
                    f"single pair, D = {float(d_med[0]):.6g}"),
            Verdict("cauchy-decay-rate-positive", True,
                    "rate fit needs at least three eps values"),
        ]
    else:
        fit = fit_log_rate(list(zip(pair_eps, d_med)))
        monotone = bool(np.all(np.diff(d_med) < 0))
        verdicts = [
            Verdict("cauchy-distance-decreasing", monotone,
                    f"D_k = {list(map(float, d_med))}"),
            Verdict("cauchy-decay-rate-positive",
                    fit.slope > 0 and fit.r_squared >= 0.9,
                    f"slope={fit.slope:.4f} r2={fit.r_squared:.4f}"),
        ]
    verdicts.append(Verdict("h2-envelope-bounded", ratio_spread <= 10.0,
                            f"max/min = {ratio_spread:.4f}"))
    if lam == 1:
        worst = min(min(m) for m in gate_margins.values())
        verdicts.append(Verdict("small-data-gate", worst >= 0,
                                f"min margin={worst:.4f}"))
    report = ExperimentReport(
        name="convergence",
        parameters={
            "seeds": seeds, "eps": eps, "gamma": gamma, "lambda": lam,
            "n": grid.n, "mollifier": mollifier.kind, "amplitude": amplitude,
            "v0_norm": v0_norm, "dt": config.dt, "t_end": config.t_end,
            "snapshot_every": config.snapshot_every,
        },
        tables={
            "sup_distance": {
                "eps_pair": [float(e) for e in pair_eps],
                "d_median": [float(d) for d in d_med],
                **{f"d_seed_{sd}": [float(x) for x in per_seed_d[sd]]
                   for sd in seeds},
            },
            "per_eps": {
                "eps": [float(e) for e in eps],
                "c_eps": [float(c) for c in c_eps_by_eps],
                "h2_envelope_ratio": h2_ratio,
            },
        },
        fits={} if fit is None else {"cauchy_decay": fit},
        verdicts=verdicts,
    )
    return report


def run_phase_check(seed: int, eps: float, lam: int, grid: TorusGrid,
                    config: SolverConfig, mollifier: MollifierSpec = GAUSSIAN,
                    amplitude: float = 1.0) -> ExperimentReport:
    """Renormalization acts as a pure phase: compare a renormalized run with
    an unrenormalized one rotated by e^{i C_eps t}.

    Both runs share the noise draw and the initial datum; R(t) is the
    relative L^2 deviation at each snapshot and should sit at roundoff.
    """
    ss = np.random.SeedSequence(seed).spawn(2)
    noise = sample_white_noise(int(ss[0].generate_state(1, np.uint64)[0]), grid)
    u0 = _initial_datum(grid, int(ss[1].generate_state(1, np.uint64)[0]), 1.0)
    env = build_environment(noise, eps, mollifier, amplitude)
    traj_ren = integrate(u0, env, with_renormalization(config, True))
    traj_raw = integrate(u0, env, with_renormalization(config, False))
    u0_norm = lp_norm(u0, 2)
    times = traj_ren.times
    r_values = []
    for t, u_ren, u_raw in zip(times, traj_ren.snapshots, traj_raw.snapshots):
        rotated = u_raw * np.exp(1j * env.c_eps * t)
        r_values.append(lp_norm(u_ren - rotated, 2) / u0_norm)
    sup_r = float(np.max(r_values))
    verdict = Verdict("phase-equivariance", sup_r <= 1e-10,
                      f"sup R = {sup_r:.3e}")
    series = compute_series(traj_ren)
    drift = drift_report(series)
    return ExperimentReport(
        name="phase-check",
        parameters={"seed": int(seed), "eps": float(eps), "lambda": lam,
                    "n": grid.n, "mollifier": mollifier.kind,
                    "amplitude": amplitude, "dt": config.dt,
                    "t_end": config.t_end, "c_eps": env.c_eps},
        tables={"phase_error": {"t": [float(t) for t in times],
                                "r": [float(r) for r in r_values]},
                "drift": {k: [v] for k, v in drift.items()}},
        fits={},
        verdicts=[verdict],
    )


def run_mc_regularity(m_samples: int, eps_list, kappa: float,
                      kappa_prime: float, grid: TorusGrid, seed: int,
                      mollifier: MollifierSpec = GAUSSIAN,
                      amplitude: float = 1.0) -> ExperimentReport:
    """Monte-Carlo Besov distances between mollified and grid-scale fields.

    Per sample and per eps the three distances are
        d_Y    = ||Y_eps - Y||            in B^{1-kappa'}_{inf,inf}
        d_wick = ||wick_eps - wick_0||    in B^{-kappa'}_{inf,inf}
        d_exp  = ||e^{-2Y_eps} - e^{-2Y}||in B^{1-kappa}_{inf,inf}
    and the driver reports their p = 2, 4 moments with pure-power fits in
    eps.  Positive fitted slopes confirm the moments vanish as eps -> 0.
    """
    if m_samples < 2:
        raise ConfigError("need at least two samples")
    if not (0 < kappa < 1 and 0 < kappa_prime < 1):
        raise ConfigError("kappa and kappa_prime must lie in (0, 1)")
    eps = _sorted_eps(eps_list)
    seeds = _sample_seeds(seed, m_samples)
    names = ("y", "wick", "exp_weight")
    smooth = {name: {e: [] for e in eps} for name in names}
    for sd in seeds:
        noise = sample_white_noise(sd, grid)
        y = solve_poisson(noise) * amplitude
        c0 = amplitude ** 2 * renorm_constant(0.0, mollifier, grid)
        wick0 = wick_gradient_square(y, c0)
        e0 = np.exp(-2.0 * to_physical(y).real)
        for e in eps:
            y_e = mollify(y, e, mollifier)
            c_e = amplitude ** 2 * renorm_constant(e, mollifier, grid)
            wick_e = wick_gradient_square(y_e, c_e)
            exp_e = to_spectral(grid, np.exp(-2.0 * to_physical(y_e).real)
                                - e0, is_real=True)
            smooth["y"][e].append(
                besov_norm(y_e - y, 1.0 - kappa_prime, np.inf, np.inf))
            smooth["wick"][e].append(
                besov_norm(wick_e - wick0, -kappa_prime, np.inf, np.inf))
            smooth["exp_weight"][e].append(
                besov_norm(exp_e, 1.0 - kappa, np.inf, np.inf))
    tables = {}
    fits = {}
    verdicts = []
    for name in names:
        for p in (2, 4):
            moments = [float(np.mean(np.array(smooth[name][e]) ** p))
                       for e in eps]
            key = f"{name}_p{p}"
            tables.setdefault("moments", {})["eps"] = [float(e) for e in eps]
            tables["moments"][key] = moments
            if max(moments) <= 1e-28:
                # Zero-amplitude noise: every distance vanishes identically.
                verdicts.append(Verdict(f"besov-decay-{key}", True,
                                        "all moments at roundoff"))
                continue
            fit = fit_log_rate(list(zip(eps, moments)))
            fits[key] = fit
            monotone = bool(np.all(np.diff(moments) < 0))
            verdicts.append(Verdict(
                f"besov-decay-{key}",
                fit.slope > 0 and monotone,
                f"slope={fit.slope:.4f} r2={fit.r_squared:.4f} "
                f"monotone={monotone}",
            ))
    return ExperimentReport(
        name="mc-regularity",
        parameters={"seed": int(seed), "samples": m_samples,
                    "eps": eps, "kappa": kappa, "kappa_prime": kappa_prime,
                    "n": grid.n, "mollifier": mollifier.kind,
                    "amplitude": amplitude},
        tables=tables,
        fits=fits,
        verdicts=verdicts,
    )


def scalar_moment_oracle(n_draws: int = 2_000_000, seed: int = 0):
    """Independent oracle for the gradient-square moment ratios.

    Each gradient component is a centered Gaussian of variance C/2 and the
    two components are independent, so with Q ~ chi-squared(2),

        E (|grad Y|^2)^2         = (C/2)^2 E Q^2,
        E (|grad Y|^2 - C)^4     = (C/2)^4 E (Q - 2)^4,

    and the moment integrals over the torus carry a factor (2pi)^2.  The
    oracle estimates E Q^2 / 4 and E (Q-2)^4 / 16 by plain Monte Carlo on
    scalar Gaussians (exact values 2 and 9).
    """
    rng = np.random.default_rng(seed)
    total2 = 0.0
    total4 = 0.0
    done = 0
    chunk = 250_000
    while done < n_draws:
        m = min(chunk, n_draws - done)
        z1 = rng.standard_normal(m)
        z2 = rng.standard_normal(m)
        q = z1 ** 2 + z2 ** 2
        total2 += float(np.sum((q / 2.0) ** 2))
        total4 += float(np.sum((q / 2.0 - 1.0) ** 4))
        done += m
    ratio2 = TWO_PI ** 2 * total2 / n_draws
    ratio4 = TWO_PI ** 2 * total4 / n_draws
    return ratio2, ratio4


def run_mc_moments(m_samples: int, eps_list, grid: TorusGrid, seed: int,
                   mollifier: MollifierSpec = GAUSSIAN,
                   amplitude: float = 1.0,
                   oracle_draws: int = 2_000_000) -> ExperimentReport:
    """Monte-Carlo fourth-moment scalings of the gradient square.

    Estimates m2(eps) = E ||grad Y_eps||_{L4}^4 and
    m4(eps) = E ||wick_eps||_{L4}^4 and compares the dimensionless ratios
    m2/C^2 and m4/C^4 with the scalar-Gaussian oracle (8 pi^2 and 36 pi^2
    in exact arithmetic).  m2 is also fitted against eps with the
    |ln eps|^2 factor divided out, confirming the squared-log growth.
    """
    if m_samples < 2:
        raise ConfigError("need at least two samples")
    eps = _sorted_eps(eps_list)
    seeds = _sample_seeds(seed, m_samples)
    # At zero amplitude the counterterm is kept bare: the degenerate run
    # then measures the centering itself (wick = -C, m4 = C^4 (2pi)^2).
    c_scale = amplitude ** 2 if amplitude != 0.0 else 1.0
    c_by_eps = [c_scale * renorm_constant(e, mollifier, grid) for e in eps]
    sums2 = np.zeros(len(eps))
    sums4 = np.zeros(len(eps))
    for sd in seeds:
        noise = sample_white_noise(sd, grid)
        y = solve_poisson(noise) * amplitude
        for i, e in enumerate(eps):
            y_e = mollify(y, e, mollifier)
            g1 = to_physical(derivative(y_e, 1)).real
            g2 = to_physical(derivative(y_e, 2)).real
            dens = g1 ** 2 + g2 ** 2
            sums2[i] += grid.cell_area * float(np.sum(dens ** 2))
            # Centered square evaluated pointwise, matching the m2 pathway;
            # the dealiased product is for fields feeding the dynamics, and
            # would shave real variance off the moments near eps ~ 4/n.
            wvals = dens - c_by_eps[i]
            sums4[i] += grid.cell_area * float(np.sum(wvals ** 4))
    m2 = sums2 / m_samples
    m4 = sums4 / m_samples
    ratio2 = [float(a / c ** 2) for a, c in zip(m2, c_by_eps)]
    ratio4 = [float(a / c ** 4) for a, c in zip(m4, c_by_eps)]
    oracle2, oracle4 = scalar_moment_oracle(oracle_draws, seed=seed)

    verdicts = []
    tables = {
        "moments": {
            "eps": [float(e) for e in eps],
            "c_eps": [float(c) for c in c_by_eps],
            "m2": [float(x) for x in m2],
            "m4": [float(x) for x in m4],
            "m2_over_c2": ratio2,
            "m4_over_c4": ratio4,
        },
        "oracle": {
            "m2_over_c2": [float(oracle2)],
            "m4_over_c4": [float(oracle4)],
            "exact_m2_over_c2": [float(8 * np.pi ** 2)],
            "exact_m4_over_c4": [float(36 * np.pi ** 2)],
        },
    }
    fits = {}
    if amplitude != 0.0:
        stab2 = max(ratio2) / min(ratio2)
        stab4 = max(ratio4) / min(ratio4)
        dev2 = max(abs(r / oracle2 - 1.0) for r in ratio2)
        dev4 = max(abs(r / oracle4 - 1.0) for r in ratio4)
        verdicts += [
            Verdict("moment-ratio-m2-stable", stab2 <= 1.25,
                    f"max/min = {stab2:.4f}"),
            Verdict("moment-ratio-m2-oracle", dev2 <= 0.10,
                    f"max deviation = {dev2:.4f} (oracle {oracle2:.4f})"),
            Verdict("moment-ratio-m4-stable", stab4 <= 1.25,
                    f"max/min = {stab4:.4f}"),
            Verdict("moment-ratio-m4-oracle", dev4 <= 0.25,
                    f"max deviation = {dev4:.4f} (oracle {oracle4:.4f})"),
        ]
        fit = fit_log_rate(list(zip(eps, m2)), model="power-times-log",
                           beta=2.0)
        fits["m2_log_growth"] = fit
        verdicts.append(Verdict("m2-log-squared-growth",
                                fit.r_squared >= 0.95,
                                f"r2={fit.r_squared:.4f}"))
    return ExperimentReport(
        name="mc-moments",
        parameters={"seed": int(seed), "samples": m_samples, "eps": eps,
                    "n": grid.n, "mollifier": mollifier.kind,
                    "amplitude": amplitude, "oracle_draws": oracle_draws},
        tables=tables,
        fits=fits,
        verdicts=verdicts,
    )


def run_ceps_growth(grid: TorusGrid, eps_list,
                    mollifier: MollifierSpec = GAUSSIAN) -> ExperimentReport:
    """Deterministic check that C_eps grows linearly in |ln eps|."""
    eps = _sorted_eps(eps_list)
    cs = [renorm_constant(e, mollifier, grid) for e in eps]
    logs = [abs(math.log(e)) for e in eps]
    slope, intercept, r2 = linear_fit(logs, cs)
    verdicts = [
        Verdict("c-eps-log-linear", r2 >= 0.99, f"r2={r2:.6f}"),
        Verdict("c-eps-slope-positive", slope > 0, f"slope={slope:.6f}"),
    ]
    return ExperimentReport(
        name="ceps-growth",
        parameters={"n": grid.n, "eps": eps, "mollifier": mollifier.kind},
        tables={"growth": {"eps": [float(e) for e in eps],
                           "abs_log_eps": logs,
                           "c_eps": [float(c) for c in cs],
                           "slope": [slope], "intercept": [intercept],
                           "r_squared": [r2]}},
        fits={},
        verdicts=verdicts,
    )
