"""Monte Carlo harness for the three percolation regimes.

Each run_* function samples finite graphs at the regime's intensity, reduces
every replicate to scalar records (replicate, quantity, value), and summarizes
them with Monte Carlo standard errors and explicit pass/fail thresholds.  The
critical and comparison regimes also sample the limiting hub graph so that
finite-n statistics can be placed next to their limit-model counterparts.
"""

from __future__ import annotations

import functools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from math import sqrt

import numpy as np
from scipy.stats import ks_2samp, poisson

from .components import connected_components, hub_containment
from .constants import ModelParams, derive_exponents
from .fixedpoint import SubcriticalError, critical_intensity, zeta_infinity
from .graphgen import sample_graph, two_step_count
from .limitmodel import LimitParams, lambda_ij, sample_g_infinity, theta_weight_sequence
from .weights import build_weights

REGIMES = ("subcritical", "critical", "supercritical", "limit_compare")

DEFAULT_LAMBDA_GRID = (0.05, 0.5, 0.8, 1.0, 1.2, 2.0)


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    regime: str
    replicates: int
    seed: int
    lambda_mult: float = 0.8     # intensity as a multiple of lambda_c
    eps0: float = 0.1            # subcritical decay: lambda_n = n^-eps0
    hub_k: int = 5               # hub index range K
    truncation_m: int = 1000     # limit-model truncation M
    a_value: float = 50.0        # heavy-truncation parameter (pass-through)
    delta: float = 0.05          # hub threshold exponent offset
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    tol_ratio: float = 0.15      # relative tolerance on regime means
    tol_tv: float = 0.05         # TV threshold for two-step counts
    tol_ks: float = 0.1          # KS threshold for limit comparison
    workers: int = 1

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.hub_k < 2 or self.hub_k > self.params.n:
            raise ValueError("hub_k out of range")
        if self.truncation_m < 2:
            raise ValueError("truncation_m must be >= 2")
        if self.eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if self.lambda_mult <= 0:
            raise ValueError("lambda_mult must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    records: tuple   # of (replicate, quantity, value)
    summary: dict


@functools.lru_cache(maxsize=8)
def _cached_weights(params: ModelParams):
    return build_weights(params)


@functools.lru_cache(maxsize=8)
def _cached_theta_weights(exps, m: int):
    return theta_weight_sequence(exps, m)


def _map_replicates(fn, arg_list, workers: int):
    if workers <= 1 or len(arg_list) <= 1:
        return [fn(a) for a in arg_list]
    chunk = max(1, len(arg_list) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, arg_list, chunksize=chunk))


def _collect(rows):
    """records -> {quantity: values ordered by replicate}"""
    by = {}
    for r, name, value in rows:
        by.setdefault(name, []).append((r, value))
    return {k: np.array([v for _, v in sorted(pairs)], dtype=float)
            for k, pairs in by.items()}


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / sqrt(len(values))) if len(values) > 1 else 0.0
    return mean, se


def _tv_to_poisson(samples, mean):
    """Total variation between the empirical law of integer samples and Poisson(mean)."""
    samples = np.asarray(samples, dtype=np.int64)
    kmax = int(samples.max(initial=0))
    emp = np.bincount(samples, minlength=kmax + 1) / len(samples)
    pmf = poisson.pmf(np.arange(kmax + 1), mean)
    return 0.5 * (float(np.abs(emp - pmf).sum()) + max(0.0, 1.0 - float(pmf.sum())))


def _hub_component_weight(summary, vertex: int) -> float:
    return float(summary.weights[summary.membership[vertex]])


# --- subcritical -----------------------------------------------------------

def _subcritical_worker(args):
    params, hub_k, seed, r = args
    ws = _cached_weights(params)
    g = sample_graph(ws, params.kernel, params.pi_n(), seed)
    s = connected_components(g, ws)
    exps = derive_exponents(params)
    scale_n = params.n ** exps.alpha
    denom_size = scale_n * params.pi_n()
    rows = []
    for i in range(1, hub_k + 1):
        size = float(s.sizes[i - 1]) if i <= s.num_components else 0.0
        weight = float(s.weights[i - 1]) if i <= s.num_components else 0.0
        rows.append((r, f"size_ratio_{i}", size / denom_size))
        rows.append((r, f"weight_ratio_{i}", weight / scale_n))
    rows.append((r, "hubs_disjoint", float(s.membership[1] != s.membership[2])))
    return rows


def run_subcritical(cfg: ExperimentConfig) -> RegimeReport:
    if cfg.regime != "subcritical":
        raise ValueError("config regime must be 'subcritical'")
    exps = derive_exponents(cfg.params)
    # pi_n = n^-(eta_s + eps0) must dominate n^-alpha for the star picture
    if exps.eta_s + cfg.eps0 >= exps.alpha:
        raise ValueError(
            f"pi_n must dominate n^-alpha: need eta_s + eps0 < alpha "
            f"({exps.eta_s:.4g} + {cfg.eps0:.4g} >= {exps.alpha:.4g})")
    lam_n = cfg.params.n ** (-cfg.eps0)
    params = replace(cfg.params, lam=lam_n)
    args = [(params, cfg.hub_k, cfg.seed + r, r) for r in range(cfg.replicates)]
    rows = [row for chunk in _map_replicates(_subcritical_worker, args, cfg.workers)
            for row in chunk]
    data = _collect(rows)
    summary = {
        "regime": cfg.regime, "n": cfg.params.n, "kernel": cfg.params.kernel,
        "replicates": cfg.replicates, "lambda_n": lam_n, "pi_n": params.pi_n(),
        "tol_ratio": cfg.tol_ratio,
    }
    for i in range(1, cfg.hub_k + 1):
        target = exps.c_F * i ** (-exps.alpha)
        for kind in ("size_ratio", "weight_ratio"):
            mean, se = _mean_se(data[f"{kind}_{i}"])
            summary[f"{kind}_{i}"] = mean
            summary[f"{kind}_{i}_se"] = se
            summary[f"{kind}_{i}_target"] = target
            summary[f"{kind}_{i}_pass"] = bool(abs(mean - target) <= cfg.tol_ratio * target)
    frac, se = _mean_se(data["hubs_disjoint"])
    summary["hubs_disjoint_frac"] = frac
    summary["hubs_disjoint_frac_se"] = se
    summary["hubs_disjoint_required"] = 0.9
    summary["hubs_disjoint_pass"] = bool(frac >= 0.9)
    return RegimeReport(regime=cfg.regime, records=tuple(rows), summary=summary)


# --- critical --------------------------------------------------------------

def _critical_worker(args):
    params, exps, hub_k, truncation_m, seed, r = args
    ws = _cached_weights(params)
    g = sample_graph(ws, params.kernel, params.pi_n(), seed)
    s = connected_components(g, ws)
    scale = params.n ** (-exps.alpha)
    rows = [(r, "w1_scaled", scale * _hub_component_weight(s, 1))]
    for i in range(1, hub_k + 1):
        for j in range(i + 1, hub_k + 1):
            rows.append((r, f"x_{i}_{j}", float(two_step_count(ws, g, i, j))))
    lp = LimitParams(exps=exps, lam=params.lam, truncation_M=truncation_m,
                     kernel=params.kernel)
    gl = sample_g_infinity(lp, seed)
    sl = connected_components(gl, _cached_theta_weights(exps, truncation_m))
    # theta-weights carry a 1/mu relative to the n^-alpha w scaling
    rows.append((r, "limit_w1", exps.mu * _hub_component_weight(sl, 1)))
    return rows


def _strictly_subcritical_params(cfg: ExperimentConfig):
    exps = derive_exponents(cfg.params)
    lam_c = critical_intensity(cfg.params.kernel, exps)
    lam = cfg.lambda_mult * lam_c
    if not 0.0 < lam < lam_c:
        raise ValueError(
            f"lambda must lie strictly below critical: lambda={lam:.6g}, "
            f"lambda_c={lam_c:.6g}")
    return replace(cfg.params, lam=lam), exps, lam_c


def run_critical(cfg: ExperimentConfig) -> RegimeReport:
    if cfg.regime != "critical":
        raise ValueError("config regime must be 'critical'")
    params, exps, lam_c = _strictly_subcritical_params(cfg)
    args = [(params, exps, cfg.hub_k, cfg.truncation_m, cfg.seed + r, r)
            for r in range(cfg.replicates)]
    rows = [row for chunk in _map_replicates(_critical_worker, args, cfg.workers)
            for row in chunk]
    data = _collect(rows)
    summary = {
        "regime": cfg.regime, "n": cfg.params.n, "kernel": cfg.params.kernel,
        "replicates": cfg.replicates, "lambda": params.lam, "lambda_c": lam_c,
        "pi_n": params.pi_n(), "tol_tv": cfg.tol_tv,
    }
    lp = LimitParams(exps=exps, lam=params.lam, truncation_M=cfg.truncation_m,
                     kernel=params.kernel)
    for i in range(1, cfg.hub_k + 1):
        for j in range(i + 1, cfg.hub_k + 1):
            lam_ij = lambda_ij(i, j, lp)
            tv = _tv_to_poisson(data[f"x_{i}_{j}"], lam_ij)
            summary[f"lambda_{i}_{j}"] = lam_ij
            summary[f"tv_x_{i}_{j}"] = tv
            summary[f"tv_x_{i}_{j}_pass"] = bool(tv < cfg.tol_tv)
    mean12, se12 = _mean_se(data["x_1_2"])
    summary["mean_x_1_2"] = mean12
    summary["mean_x_1_2_se"] = se12
    summary["mean_x_1_2_pass"] = bool(abs(mean12 - summary["lambda_1_2"]) <= 3.0 * max(se12, 1e-12))
    summary["x12_ge1_frac"] = float(np.mean(data["x_1_2"] >= 1.0))
    if cfg.hub_k >= 4:
        x12, x34 = data["x_1_2"], data["x_3_4"]
        if x12.std() > 0 and x34.std() > 0:
            corr = float(np.corrcoef(x12, x34)[0, 1])
        else:
            corr = 0.0
        summary["corr_x12_x34"] = corr
        summary["corr_x12_x34_noise"] = 1.0 / sqrt(cfg.replicates)
        summary["corr_x12_x34_pass"] = bool(abs(corr) <= 3.0 / sqrt(cfg.replicates))
    ks = ks_2samp(data["w1_scaled"], data["limit_w1"])
    summary["w1_ks_stat"] = float(ks.statistic)
    mean_w1, se_w1 = _mean_se(data["w1_scaled"])
    summary["mean_w1_scaled"] = mean_w1
    summary["mean_w1_scaled_se"] = se_w1
    return RegimeReport(regime=cfg.regime, records=tuple(rows), summary=summary)


# --- supercritical ---------------------------------------------------------

def _supercritical_worker(args):
    params, delta, seed, r = args
    ws = _cached_weights(params)
    g = sample_graph(ws, params.kernel, params.pi_n(), seed)
    s = connected_components(g, ws)
    c1 = float(s.sizes[0]) if s.num_components else 0.0
    c2 = float(s.sizes[1]) if s.num_components > 1 else 0.0
    return [
        (r, "c1_scaled", c1 / sqrt(params.n)),
        (r, "c2_over_c1", c2 / c1 if c1 > 0 else 0.0),
        (r, "hub_contained", float(hub_containment(s, ws, delta))),
    ]


def run_supercritical(cfg: ExperimentConfig) -> RegimeReport:
    if cfg.regime != "supercritical":
        raise ValueError("config regime must be 'supercritical'")
    exps = derive_exponents(cfg.params)
    lam_c = critical_intensity(cfg.params.kernel, exps)
    lam = cfg.lambda_mult * lam_c
    if lam <= lam_c:
        raise SubcriticalError(
            f"lambda below critical: lambda={lam:.6g}, lambda_c={lam_c:.6g}")
    params = replace(cfg.params, lam=lam)
    args = [(params, cfg.delta, cfg.seed + r, r) for r in range(cfg.replicates)]
    rows = [row for chunk in _map_replicates(_supercritical_worker, args, cfg.workers)
            for row in chunk]
    data = _collect(rows)
    zeta = zeta_infinity(lam, exps, params.kernel, tol=5e-3, n_grid=1024)
    mean_c1, se_c1 = _mean_se(data["c1_scaled"])
    frac_small_c2, se_c2 = _mean_se(data["c2_over_c1"] < 0.1)
    frac_cont, se_cont = _mean_se(data["hub_contained"])
    summary = {
        "regime": cfg.regime, "n": cfg.params.n, "kernel": cfg.params.kernel,
        "replicates": cfg.replicates, "lambda": lam, "lambda_c": lam_c,
        "pi_n": params.pi_n(), "delta": cfg.delta, "tol_ratio": cfg.tol_ratio,
        "zeta_target": zeta,
        "zeta_status": "established" if params.kernel == "nr" else "conjectural",
        "mean_c1_scaled": mean_c1, "mean_c1_scaled_se": se_c1,
        "mean_c1_scaled_pass": bool(abs(mean_c1 - zeta) <= cfg.tol_ratio * zeta),
        "frac_c2_ratio_small": frac_small_c2,
        "frac_c2_ratio_small_se": se_c2,
        "frac_c2_ratio_small_required": 0.9,
        "frac_c2_ratio_small_pass": bool(frac_small_c2 >= 0.9),
        "hub_contained_frac": frac_cont,
        "hub_contained_frac_se": se_cont,
        "hub_contained_required": 0.95,
        "hub_contained_pass": bool(frac_cont >= 0.95),
    }
    return RegimeReport(regime=cfg.regime, records=tuple(rows), summary=summary)


# --- limit comparison ------------------------------------------------------

def _limit_compare_worker(args):
    params, exps, truncation_m, seed, r = args
    ws = _cached_weights(params)
    g = sample_graph(ws, params.kernel, params.pi_n(), seed)
    s = connected_components(g, ws)
    lp = LimitParams(exps=exps, lam=params.lam, truncation_M=truncation_m,
                     kernel=params.kernel)
    gl = sample_g_infinity(lp, seed)
    sl = connected_components(gl, _cached_theta_weights(exps, truncation_m))
    return [
        (r, "w1_scaled", params.n ** (-exps.alpha) * _hub_component_weight(s, 1)),
        (r, "limit_w1", exps.mu * _hub_component_weight(sl, 1)),
    ]


def run_limit_compare(cfg: ExperimentConfig) -> RegimeReport:
    if cfg.regime != "limit_compare":
        raise ValueError("config regime must be 'limit_compare'")
    params, exps, lam_c = _strictly_subcritical_params(cfg)
    args = [(params, exps, cfg.truncation_m, cfg.seed + r, r)
            for r in range(cfg.replicates)]
    rows = [row for chunk in _map_replicates(_limit_compare_worker, args, cfg.workers)
            for row in chunk]
    data = _collect(rows)
    ks = ks_2samp(data["w1_scaled"], data["limit_w1"])
    mean_fin, se_fin = _mean_se(data["w1_scaled"])
    mean_lim, se_lim = _mean_se(data["limit_w1"])
    summary = {
        "regime": cfg.regime, "n": cfg.params.n, "kernel": cfg.params.kernel,
        "replicates": cfg.replicates, "lambda": params.lam, "lambda_c": lam_c,
        "pi_n": params.pi_n(), "truncation_m": cfg.truncation_m,
        "ks_stat": float(ks.statistic), "tol_ks": cfg.tol_ks,
        "ks_pass": bool(ks.statistic < cfg.tol_ks),
        "mean_w1_scaled": mean_fin, "mean_w1_scaled_se": se_fin,
        "mean_limit_w1": mean_lim, "mean_limit_w1_se": se_lim,
    }
    return RegimeReport(regime=cfg.regime, records=tuple(rows), summary=summary)


# --- scaling window scan ---------------------------------------------------

def _scan_worker(args):
    params, label, seed, r = args
    ws = _cached_weights(params)
    g = sample_graph(ws, params.kernel, params.pi_n(), seed)
    s = connected_components(g, ws)
    return [(r, label, float(s.membership[1] == s.membership[2]))]


def scaling_window_scan(cfg: ExperimentConfig) -> RegimeReport:
    grid = tuple(sorted(cfg.lambda_grid))
    if len(grid) < 2 or grid[0] >= 1.0 or grid[-1] <= 1.0:
        raise ValueError("lambda_grid must straddle the critical point")
    exps = derive_exponents(cfg.params)
    lam_c = critical_intensity(cfg.params.kernel, exps)
    args = []
    for gi, mult in enumerate(grid):
        params = replace(cfg.params, lam=mult * lam_c)
        label = f"same12_mult_{mult:g}"
        args.extend((params, label, cfg.seed + gi * cfg.replicates + r, r)
                    for r in range(cfg.replicates))
    rows = [row for chunk in _map_replicates(_scan_worker, args, cfg.workers)
            for row in chunk]
    data = _collect(rows)
    summary = {
        "regime": "scaling_window", "n": cfg.params.n, "kernel": cfg.params.kernel,
        "replicates": cfg.replicates, "lambda_c": lam_c,
        "lambda_grid": list(grid),
    }
    fracs, ses = [], []
    for mult in grid:
        frac, se = _mean_se(data[f"same12_mult_{mult:g}"])
        fracs.append(frac)
        ses.append(se)
        summary[f"same12_mult_{mult:g}"] = frac
        summary[f"same12_mult_{mult:g}_se"] = se
    monotone = all(
        fracs[k + 1] >= fracs[k] - 2.0 * (ses[k] + ses[k + 1])
        for k in range(len(grid) - 1))
    summary["monotone_2se_pass"] = bool(monotone)
    return RegimeReport(regime="scaling_window", records=tuple(rows), summary=summary)


RUNNERS = {
    "subcritical": run_subcritical,
    "critical": run_critical,
    "supercritical": run_supercritical,
    "limit_compare": run_limit_compare,
}


def run_regime(cfg: ExperimentConfig) -> RegimeReport:
    return RUNNERS[cfg.regime](cfg)


def write_report(report: RegimeReport, out_dir) -> None:
    """summary.json plus records.csv with columns (replicate, quantity, value)."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(report.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "records.csv"), "w") as fh:
        fh.write("replicate,quantity,value\n")
        for r, name, value in report.records:
            fh.write(f"{r},{name},{value!r}\n")
