"""Experiment drivers. Each returns a :class:`Result` with CSV-ready rows."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .. import davies, metrics
from ..errors import InputError, PreconditionError
from ..hamiltonians import ks_distance, low_energy_fraction, semicircle_cdf, semicircle_window, spectral_cdf
from ..linalg import herm_eig, vectorize
from ..lindblad import dissipator_superop, exact_propagator
from ..metrics import GibbsContext, choi_distance, trace_distance, weighted_l2_norm
from ..qdrift import (DiscreteEnsemble, average_channel_power, average_step_superop,
                      batch_trajectories, derive_rng, propagator_stack, term_propagator,
                      trajectory_finals, weighted_norm_bound)
from .fixtures import (CALIBRATION, MONTE_CARLO, TRAJECTORY, build_ensemble, build_system,
                       make_probes, make_state, sign_method, weight_function)


class SlopeFit(NamedTuple):
    points: list
    slope: float
    intercept: float
    r_squared: float


def fit_loglog_slope(points) -> SlopeFit:
    """Least-squares line through ``(log x, log y)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise InputError("need at least four (x, y) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise InputError("log-log fit needs finite positive values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(list(zip(lx.tolist(), ly.tolist())), float(slope), float(intercept),
                    float(min(max(r2, 0.0), 1.0)))


def fit_decay_rate(t, y):
    """Rate ``r`` of ``y ~ exp(-r t)`` by least squares on ``log y``."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    if len(t) < 4 or np.any(y <= 0):
        raise InputError("decay fit needs at least four positive points")
    return float(-np.polyfit(t, np.log(y), 1)[0])


@dataclass
class Result:
    kind: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    plot: dict | None = None

    def column(self, name):
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows])


def _ensemble(cfg):
    eig = herm_eig(build_system(cfg)) if cfg.ensemble["kind"] != "qubit-pair" else None
    return build_ensemble(cfg, eig)


def _discrete(e, kind):
    if not isinstance(e, DiscreteEnsemble):
        raise PreconditionError(f"{kind} needs a discrete ensemble")
    return e


def _gibbs_context(cfg, H=None, beta=None):
    H = build_system(cfg) if H is None else H
    return GibbsContext(herm_eig(H), cfg.beta if beta is None else beta)


def _safe_fit(xs, ys):
    try:
        return fit_loglog_slope(list(zip(xs, ys)))
    except InputError:
        return None


def _fit_summary(prefix, fit):
    if fit is None:
        return {f"{prefix}_slope": None, f"{prefix}_r_squared": None}
    return {f"{prefix}_slope": fit.slope, f"{prefix}_r_squared": fit.r_squared}


def run_scaling_average(cfg, ensemble=None) -> Result:
    """Average channel ``(E F_{T/M})^M`` against ``exp(T Lbar)`` over ``M_grid``."""
    cfg.require("T", "M_grid")
    e = _discrete(ensemble or _ensemble(cfg), cfg.kind)
    n = e.dim
    probes = make_probes(cfg, n)
    ref = exact_propagator(e.mean_generator(), cfg.T)
    targets = {p: ref.apply(rho) for p, rho in probes.items()}
    rows = []
    for M in cfg.M_grid:
        A = average_channel_power(e, cfg.alg, cfg.T / M, M)
        d = [trace_distance(A.apply(rho), targets[p]) for p, rho in probes.items()]
        rows.append((M, d[0], choi_distance(A, ref), *d))
    cols = ["M", "trace_distance", "choi_distance"] + [f"trace_distance_{p}" for p in probes]
    res = Result(cfg.kind, cols, rows, plot=dict(x="M", y=cols[1:], logx=True, logy=True))
    Ms = res.column("M")
    res.summary.update(_fit_summary("trace", _safe_fit(Ms, res.column("trace_distance"))))
    res.summary.update(_fit_summary("choi", _safe_fit(Ms, res.column("choi_distance"))))
    return res


def _lambda_weighted(e, ctx):
    if e.Lam is not None:
        return e.Lam
    if not isinstance(e, DiscreteEnsemble):
        raise PreconditionError("a sampler ensemble must declare its weighted bound 'Lambda'")
    return max(weighted_norm_bound(t, ctx) for t in e.terms)


def run_scaling_random(cfg, ensemble=None, workers=1) -> Result:
    """Mean squared ``(sigma,-1/2)`` error of random trajectories versus ``exp(T Lbar)``."""
    cfg.require("T", "M_grid")
    ctx = _gibbs_context(cfg)
    e = ensemble or build_ensemble(cfg, ctx.eig)
    n = e.dim
    if ctx.dim != n:
        raise PreconditionError(f"system dimension {ctx.dim} does not match ensemble {n}")
    Lam = _lambda_weighted(e, ctx)
    for M in cfg.M_grid:
        g = (cfg.T / M) * Lam**2 * cfg.T
        if g > 1.0:
            raise PreconditionError(
                f"step guard tau*Lambda^2*T = {g:.3g} > 1 at M={M} (Lambda={Lam:.4g}); use larger M")
    probes = make_probes(cfg, n, ctx)
    if isinstance(e, DiscreteEnsemble):
        ref = exact_propagator(e.mean_generator(), cfg.T)
    else:
        raise PreconditionError("scaling-random needs the exact mean generator of a discrete ensemble")
    rows = []
    for gi, M in enumerate(cfg.M_grid):
        out = [M]
        for pi, (p, rho) in enumerate(probes.items()):
            target = ref.apply(rho)
            finals = trajectory_finals(e, cfg.alg, cfg.T / M, M, rho, cfg.n_traj, cfg.seed,
                                       keys=(TRAJECTORY, gi, pi), workers=workers)
            err = np.array([weighted_l2_norm(f - target, ctx) ** 2 for f in finals])
            out += [err.mean(), err.std(ddof=1) / np.sqrt(len(err))]
        rows.append(tuple(out[:3]) + tuple(out[1:]))
    names = list(probes)
    cols = ["M", "mean_sq_weighted_error", "std_error"]
    for p in names:
        cols += [f"mean_sq_weighted_error_{p}", f"std_error_{p}"]
    res = Result(cfg.kind, cols, rows, plot=dict(x="M", y=["mean_sq_weighted_error"] +
                                                [f"mean_sq_weighted_error_{p}" for p in names],
                                                logx=True, logy=True))
    y = res.column("mean_sq_weighted_error")
    res.summary.update(_fit_summary("mse", _safe_fit(res.column("M"), y)))
    res.summary["pairwise_ratios"] = (y[:-1] / y[1:]).tolist()
    res.summary["Lambda"] = Lam
    return res


def _plateau(y):
    return float(np.mean(y[int(0.8 * len(y)):]))


def _pre_plateau_rate(t, y, plateau, lo=10.0, hi=1e3):
    """Decay rate over the two decades above the plateau, where the slowest mode leads."""
    mask = (y > lo * plateau) & (y < hi * plateau)
    if mask.sum() < 4:
        return None
    return fit_decay_rate(t[mask], y[mask])


def auto_horizon(chi0, eta, floor=1e-6):
    """Total time letting ``chi0 exp(-2 eta t)`` reach ``floor`` within the first 80%."""
    return 1.25 * max(np.log(max(chi0, floor) / floor), 1.0) / (2.0 * eta)


def run_gibbs_convergence(cfg, ensemble=None, workers=1, db_tol=1e-6) -> Result:
    """Chi-square divergence to ``sigma`` along average and random channels, per ``tau``.

    Without ``T`` the horizon comes from :func:`auto_horizon`, so the final
    20% of steps used for the plateau estimate sit past the decay.
    """
    taus = cfg.tau_grid or ([cfg.tau] if cfg.tau is not None else None)
    if taus is None:
        cfg.require("tau_grid")
    ctx = _gibbs_context(cfg)
    e = _discrete(ensemble or build_ensemble(cfg, ctx.eig), cfg.kind)
    Lbar = e.mean_generator()
    db = metrics.detailed_balance_residual(Lbar, ctx)
    if db > db_tol:
        raise PreconditionError(f"mean generator is not detailed balanced: residual {db:.3e} > {db_tol:g}")
    eta = metrics.spectral_gap(Lbar, ctx, db_tol)
    rho0 = make_state(cfg.initial_state, e.dim, derive_rng(cfg.seed, TRAJECTORY, 0), ctx)
    chi0 = metrics.chi_square(rho0, ctx)
    T = cfg.T if cfg.T is not None else auto_horizon(chi0, eta)
    W = ctx.weighting_superop(-0.5)
    sig = vectorize(ctx.sigma.astype(complex))

    def chi_batch(V):
        D = (V - sig[None, :]) @ W.T
        return np.sum(np.abs(D) ** 2, axis=1)

    rows, per_tau = [], []
    for ti, tau in enumerate(taus):
        M = int(cfg.M) if cfg.M is not None and len(taus) == 1 else int(round(T / tau))
        P = propagator_stack(e, cfg.alg, tau)
        Pbar = average_step_superop(e, cfg.alg, tau).matrix
        v = vectorize(rho0)
        chi_avg = np.empty(M)
        for m in range(M):
            v = Pbar @ v
            chi_avg[m] = chi_batch(v[None, :])[0]
        _, obs = batch_trajectories(e, cfg.alg, tau, M, rho0, cfg.n_traj, cfg.seed,
                                    keys=(TRAJECTORY, ti), observe=chi_batch,
                                    workers=workers, stack=P)
        chi_rnd = obs.mean(axis=0)
        chi_se = obs.std(axis=0, ddof=1) / np.sqrt(cfg.n_traj)
        for m in range(M):
            rows.append((tau, m + 1, chi_rnd[m], chi_se[m], chi_avg[m]))
        t = tau * np.arange(1, M + 1)
        pa, pr = _plateau(chi_avg), _plateau(chi_rnd)
        per_tau.append(dict(tau=tau, steps=M, plateau_average=pa, plateau_random=pr,
                            decay_rate_average=_pre_plateau_rate(t, chi_avg, pa),
                            decay_rate_random=_pre_plateau_rate(t, chi_rnd, pr)))
    cols = ["tau", "m", "chi_square_random_mean", "chi_square_random_se", "chi_square_average"]
    res = Result(cfg.kind, cols, rows,
                 plot=dict(x="m", y=["chi_square_random_mean", "chi_square_average"],
                           logx=False, logy=True, group="tau"))
    res.summary.update(spectral_gap=eta, two_eta=2 * eta, db_residual=db,
                       chi_square_initial=chi0, T=T, per_tau=per_tau)
    ratios = []
    for a, b in zip(per_tau[:-1], per_tau[1:]):
        ratios.append(dict(tau_ratio=a["tau"] / b["tau"],
                           random=a["plateau_random"] / b["plateau_random"],
                           average=a["plateau_average"] / b["plateau_average"]))
    res.summary["plateau_ratios"] = ratios
    return res


def _davies_rep(sampler, S_grid, seed, rep, targets):
    rng = derive_rng(seed, MONTE_CARLO, rep)
    acc = np.zeros_like(targets[0])
    out, s_done = [], 0
    for S in S_grid:
        for _ in range(S - s_done):
            acc += dissipator_superop(sampler.draw(rng).V)
        s_done = S
        out.append([np.linalg.norm(acc / S - t) for t in targets])
    return np.array(out)


def run_davies_verify(cfg, gamma=None, workers=1) -> Result:
    """Monte Carlo mean of sampled ``L_K`` against the analytic Davies generator."""
    cfg.require("S_grid")
    H = build_system(cfg)
    if H.shape[0] > 16:
        raise PreconditionError("full-superoperator comparison is limited to 4 qubits")
    eig = herm_eig(H)
    n = eig.dim
    gamma = gamma or weight_function(cfg)
    sampler = davies.RandomJumpSampler(eig, gamma, sign_method(cfg))
    s2 = davies.haar_sigma2(n)
    targets = [davies.analytic_davies(eig, gamma, s2, include_diagonal=inc).matrix
               for inc in (True, False)]
    S_grid = sorted(cfg.S_grid)

    def rep(r):
        return _davies_rep(sampler, S_grid, cfg.seed, r, targets)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(rep, range(cfg.repetitions)))
    else:
        reps = [rep(r) for r in range(cfg.repetitions)]
    D = np.array(reps)  # (rep, S, variant)
    rms = np.sqrt(np.mean(D**2, axis=0))
    rows = [(S, rms[k, 0], rms[k, 1]) for k, S in enumerate(S_grid)]
    cols = ["S", "frobenius_distance", "frobenius_distance_diagonal_excluded"]
    res = Result(cfg.kind, cols, rows, plot=dict(x="S", y=cols[1:], logx=True, logy=True))
    res.summary.update(_fit_summary("frobenius", _safe_fit(res.column("S"), res.column(cols[1]))))
    res.summary.update(_fit_summary("diagonal_excluded",
                                    _safe_fit(res.column("S"), res.column(cols[2]))))
    calib = davies.RandomJumpSampler(eig, gamma, sign_method(cfg))
    res.summary.update(sigma2=s2, sigma2_empirical=calib.calibrate(
        derive_rng(cfg.seed, CALIBRATION), 2000), repetitions=cfg.repetitions)
    return res


def run_gap_certificate(cfg) -> Result:
    """Exact Davies gap (block path) against the ``alpha`` and chain bounds, per ``beta``."""
    vals = np.linalg.eigvalsh(build_system(cfg))
    ks = ks_distance(vals)
    rows = []
    for beta in cfg.beta_grid or [cfg.beta]:
        cert = davies.davies_gap_certificate(vals, beta, weight_function(cfg, beta))
        gb = davies.gap_bounds(vals, beta)
        rows.append((beta, cert.exact_gap, cert.lower_bound, gb.min_ratio,
                     cert.low_energy_fraction, ks, gb.exact_chain_gap, cert.classical_gap,
                     cert.min_coherence_rate, semicircle_window(beta) if beta > 0 else 1.0))
    cols = ["beta", "exact_gap", "alpha", "min_ratio", "low_energy_fraction", "KS_distance",
            "exact_chain_gap", "classical_gap", "min_coherence_rate", "semicircle_window"]
    res = Result(cfg.kind, cols, rows, plot=dict(x="beta", y=["exact_gap", "alpha"],
                                                logx=False, logy=True))
    res.summary.update(dim=len(vals),
                       min_gap_over_alpha=float(min(r[1] / r[2] for r in rows)),
                       chain_bound_holds=bool(all(r[6] >= r[3] - 1e-12 for r in rows)))
    return res


def run_spectrum(cfg, n_grid=201) -> Result:
    """Empirical spectral CDF against the semicircle law."""
    vals = np.linalg.eigvalsh(build_system(cfg))
    F = spectral_cdf(vals)
    xs = np.linspace(-2.5, 2.5, n_grid)
    rows = [(x, float(F(x)), float(semicircle_cdf(x))) for x in xs]
    res = Result(cfg.kind, ["x", "empirical_cdf", "semicircle_cdf"], rows,
                 plot=dict(x="x", y=["empirical_cdf", "semicircle_cdf"], logx=False, logy=False))
    frac = low_energy_fraction(vals, cfg.beta)
    window = semicircle_window(cfg.beta) if cfg.beta > 0 else 1.0
    res.summary.update(KS_distance=ks_distance(vals), beta=cfg.beta, low_energy_fraction=frac,
                       semicircle_window=window, fraction_over_window=frac / window)
    return res


def run_step_order(cfg, ensemble=None) -> Result:
    """Worst single-step trace error of split steps against ``exp(tau L_a)`` over terms and probes."""
    cfg.require("tau_grid")
    e = _discrete(ensemble or _ensemble(cfg), cfg.kind)
    probes = list(make_probes(cfg, e.dim).values())
    algs = cfg.algs or [cfg.alg]
    rows = []
    for alg in algs:
        for tau in cfg.tau_grid:
            err = 0.0
            for a in e.terms:
                F, E = term_propagator(a, alg, tau), term_propagator(a, "exact", tau)
                err = max([err] + [trace_distance(F.apply(r), E.apply(r)) for r in probes])
            rows.append((alg, tau, err))
    res = Result(cfg.kind, ["alg", "tau", "trace_error"], rows,
                 plot=dict(x="tau", y=["trace_error"], logx=True, logy=True, group="alg"))
    for alg in algs:
        sel = [(r[1], r[2]) for r in rows if r[0] == alg]
        res.summary.update(_fit_summary(alg, _safe_fit(*zip(*sel))))
    return res


RUNNERS = {
    "scaling-average": run_scaling_average,
    "scaling-random": run_scaling_random,
    "gibbs": run_gibbs_convergence,
    "davies-verify": run_davies_verify,
    "gap-cert": run_gap_certificate,
    "spectrum": run_spectrum,
    "step-order": run_step_order,
}
PARALLEL = {"scaling-random", "gibbs", "davies-verify"}


def run(cfg, workers=1) -> Result:
    fn = RUNNERS[cfg.kind]
    return fn(cfg, workers=workers) if cfg.kind in PARALLEL else fn(cfg)


def _within(x, target, tol):
    return x is not None and abs(x - target) <= tol


def evaluate(result: Result, tol) -> list:
    """``(name, passed, detail)`` verdicts of a result against its tolerances."""
    s, k = result.summary, result.kind
    out = []
    if k in ("scaling-average", "scaling-random", "davies-verify"):
        key = {"scaling-average": "trace", "scaling-random": "mse",
               "davies-verify": "frobenius"}[k]
        sl, r2 = s[f"{key}_slope"], s[f"{key}_r_squared"]
        out.append(("slope", _within(sl, tol["slope"], tol["slope_tol"]),
                    f"slope={sl} target {tol['slope']} +- {tol['slope_tol']}"))
        if "r2_min" in tol:
            out.append(("r_squared", r2 is not None and r2 >= tol["r2_min"],
                        f"r^2={r2} >= {tol['r2_min']}"))
    elif k == "step-order":
        for name in [key[:-6] for key in s if key.endswith("_slope")]:
            sl = s[f"{name}_slope"]
            out.append((f"{name}_slope", _within(sl, tol["slope"], tol["slope_tol"]),
                        f"slope={sl} target {tol['slope']} +- {tol['slope_tol']}"))
    elif k == "gibbs":
        two_eta, f = s["two_eta"], tol["rate_factor"]
        for p in s["per_tau"]:
            r = p["decay_rate_average"]
            ok = r is not None and two_eta / f <= r <= two_eta * f
            out.append((f"decay_rate tau={p['tau']:g}", ok, f"rate={r} vs 2*eta={two_eta:.6g}"))
        for q in s["plateau_ratios"]:
            if abs(q["tau_ratio"] - 2.0) > 1e-9:
                continue
            out.append(("random plateau ratio", _within(q["random"], tol["random_ratio"],
                                                        tol["random_ratio_tol"]), f"{q['random']:.4g}"))
            out.append(("average plateau ratio", _within(q["average"], tol["average_ratio"],
                                                         tol["average_ratio_tol"]), f"{q['average']:.4g}"))
    elif k == "gap-cert":
        g = s["min_gap_over_alpha"]
        out.append(("gap over alpha", g >= tol["gap_over_alpha_min"], f"min gap/alpha={g:.6g}"))
        out.append(("chain bound", s["chain_bound_holds"], "exact_chain_gap >= min_ratio"))
    elif k == "spectrum":
        f = tol["low_energy_factor"]
        out.append(("KS distance", s["KS_distance"] <= tol["ks_max"], f"KS={s['KS_distance']:.4g}"))
        r = s["fraction_over_window"]
        out.append(("low-energy fraction", 1 / f <= r <= f, f"fraction/window={r:.4g}"))
    return out
