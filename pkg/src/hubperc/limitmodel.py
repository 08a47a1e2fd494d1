"""The limiting hub graph and its ingredients.

Vertices i = 1, 2, ... carry weights theta_i; two hubs are linked through a
Poisson number of two-step paths with intensity lambda_ij, which factors as
lambda^2 * h(i,j) * shape(t) where h is the homogeneous comparison kernel
and the shape depends only on the index ratio t = (min/max)^alpha.  The
module computes lambda_ij two ways (adaptive quadrature and the closed
factorization) and samples both the limit graph and its comparison model,
coupled so the former is always a subgraph of the latter.
"""

import csv
from dataclasses import dataclass
from functools import lru_cache
from math import fsum, gamma as _gamma

import numpy as np
from scipy.integrate import quad

from .constants import DerivedExponents, ModelParams, b_alpha, normalize_kernel
from .graphgen import PercolatedGraph, substream
from .weights import WeightSequence

# Proposal field for the samplers: pair {i,j} is proposed at rate
# RATE * lambda^2 * h(i,j) and thinned.  RATE must dominate
# -log(1-u)/u = 1.3863 at u = CUTOFF; heavier pairs are drawn directly.
_FIELD_RATE = 1.39
_DIRECT_CUTOFF = 0.5
_TABLE_MAX_M = 4000  # full intensity tables above this would not fit sanely


@dataclass(frozen=True)
class LimitParams:
    """Parameters of a truncated limit-graph sample."""

    exps: DerivedExponents
    lam: float
    truncation_M: int
    kernel: str = "nr"

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.truncation_M < 1:
            raise ValueError("truncation_M must be >= 1")
        object.__setattr__(self, "kernel", normalize_kernel(self.kernel))


def theta(i: int, exps: DerivedExponents) -> float:
    """Limit weight of hub i: c_F * i^(-alpha) / mu."""
    if i < 1:
        raise ValueError("hub index must be >= 1")
    return exps.c_F * float(i) ** (-exps.alpha) / exps.mu


def dk_kernel_h(x, y, b_alpha_val: float, alpha: float):
    """Comparison kernel B * min(x,y)^(-(1-alpha)) * max(x,y)^(-alpha)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("kernel arguments must be positive")
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    out = b_alpha_val * lo ** (-(1.0 - alpha)) * hi ** (-alpha)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _cached_b(kernel: str, exps: DerivedExponents) -> float:
    return b_alpha(kernel, exps)


def two_step_shape(kernel, t, s: float):
    """Ratio lambda_ij / (lambda^2 h(i,j)) as a function of t = (min/max)^alpha.

    Tends to 1 as t -> 0 and stays below 1; closed forms per kernel with
    s = 1/alpha in (1,2).
    """
    kernel = normalize_kernel(kernel)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > 1):
        raise ValueError("t must lie in (0, 1]")
    if kernel == "nr":
        a_nr = _gamma(2.0 - s) / (s - 1.0)
        num = np.expm1(s * np.log1p(t)) - t ** s  # (1+t)^s - 1 - t^s
        out = _gamma(-s) * num / (a_nr * t)
    elif kernel == "cl":
        a_cl = 1.0 / (2.0 - s) + 1.0 / (s - 1.0)
        out = (t / (2.0 - s) + (t ** s - t) / (1.0 - s) + t ** s / s) / (a_cl * t)
    else:  # grg
        log_t = np.log(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(np.abs(log_t) < 1e-14, s - 1.0,
                           np.expm1((s - 1.0) * log_t) / np.expm1(log_t))
    return float(out) if out.ndim == 0 else out


def _lambda_over_lamsq(i, j, kernel: str, exps: DerivedExponents):
    """lambda_ij / lambda^2 via the closed factorization h(i,j)*shape(t)."""
    i = np.asarray(i, dtype=float)
    j = np.asarray(j, dtype=float)
    B = _cached_b(kernel, exps)
    h = dk_kernel_h(i, j, B, exps.alpha)
    t = (np.minimum(i, j) / np.maximum(i, j)) ** exps.alpha
    out = h * two_step_shape(kernel, t, 1.0 / exps.alpha)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Quadrature route for lambda_ij.  Substituting u = x^{-alpha} turns
# lambda^2 int_0^inf Theta_i Theta_j dx into
# lambda^2 * s * int_0^inf phi(z_i u) phi(z_j u) u^{-1-s} du,
# z_i = c_F^2 i^{-alpha}/mu, with phi the kernel's base probability shape.
# The u->0 end (the x->infty tail) carries the algebraic u^{1-s} weight and
# is handled by the singular-weight rule; the u->infty end is analytic.
# ---------------------------------------------------------------------------

def _alg_quad_checked(g, hi, s, rel_tol):
    val, err = quad(g, 0.0, hi, weight="alg", wvar=(1.0 - s, 0.0),
                    epsrel=rel_tol * 0.1, epsabs=0.0, limit=400)
    return val, err


def _phi_over_y(kernel, y):
    """phi(y)/y, extended continuously by 1 at y = 0."""
    y = np.asarray(y, dtype=float)
    if kernel == "nr":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(y < 1e-12, 1.0, -np.expm1(-y) / np.where(y > 0, y, 1.0))
    elif kernel == "cl":
        out = np.minimum(1.0, 1.0 / np.maximum(y, 1e-300))
    else:
        out = 1.0 / (1.0 + y)
    return out


def lambda_ij(i: int, j: int, lp: LimitParams, rel_tol: float = 1e-10) -> float:
    """Two-step intensity between hubs i and j by adaptive quadrature."""
    if i < 1 or j < 1:
        raise ValueError("hub indices must be >= 1")
    if lp.lam == 0.0:
        return 0.0
    exps = lp.exps
    s = 1.0 / exps.alpha
    z_i = exps.c_F ** 2 * float(i) ** (-exps.alpha) / exps.mu
    z_j = exps.c_F ** 2 * float(j) ** (-exps.alpha) / exps.mu
    z_lo, z_hi = min(z_i, z_j), max(z_i, z_j)
    kernel = lp.kernel

    def g(u):
        return float(z_i * z_j * _phi_over_y(kernel, z_i * u) * _phi_over_y(kernel, z_j * u))

    if kernel == "nr":
        hi = 40.0 / z_lo
        head, err = _alg_quad_checked(g, hi, s, rel_tol)
        tail = hi ** (-s) / s
        err += 2.0 * np.exp(-40.0) * tail
    elif kernel == "cl":
        # piecewise: both linear below 1/z_hi, one clamped in between, both
        # clamped (integrand exactly u^{-1-s}) beyond 1/z_lo
        u1, u2 = 1.0 / z_hi, 1.0 / z_lo
        head = z_i * z_j * u1 ** (2.0 - s) / (2.0 - s)
        err = 0.0
        if u2 > u1:
            mid, mid_err = quad(lambda u: z_lo * u ** (-s), u1, u2,
                                epsrel=rel_tol * 0.1, epsabs=0.0, limit=200)
            head += mid
            err += mid_err
        tail = u2 ** (-s) / s
    else:  # grg
        hi = 1e4 / z_lo
        head, err = _alg_quad_checked(g, hi, s, rel_tol)
        t0 = hi ** (-s) / s

        def corr(z):
            return sum((-1.0) ** (k + 1) * z ** (-k) * hi ** (-s - k) / (s + k)
                       for k in (1, 2, 3))

        cross = (hi ** (-s - 2.0) / (s + 2.0)
                 - (1.0 / z_i + 1.0 / z_j) * hi ** (-s - 3.0) / (s + 3.0)) / (z_i * z_j)
        tail = t0 - corr(z_i) - corr(z_j) + cross
        err += t0 * 1e-15

    total = s * (head + tail)
    if not (err <= rel_tol * abs(total) + 1e-300):
        raise RuntimeError(
            f"lambda_ij quadrature failure: value={total!r}, error={err!r}")
    return lp.lam ** 2 * total


def lambda_ij_table(lp: LimitParams, use_quadrature: bool = False,
                    rel_tol: float = 1e-10) -> np.ndarray:
    """Dense (M, M) table of lambda_ij; diagonal included.

    Guarded: refuses truncations beyond a memory-sane bound.  The samplers
    never need this table; it exists for exports and cross-checks.
    """
    M = lp.truncation_M
    if M > _TABLE_MAX_M:
        raise ValueError(f"table request M={M} exceeds the cap {_TABLE_MAX_M}")
    if use_quadrature:
        out = np.empty((M, M))
        for a in range(1, M + 1):
            for b in range(a, M + 1):
                val = lambda_ij(a, b, lp, rel_tol)
                out[a - 1, b - 1] = out[b - 1, a - 1] = val
        return out
    idx = np.arange(1, M + 1, dtype=float)
    return lp.lam ** 2 * _lambda_over_lamsq(idx[:, None], idx[None, :], lp.kernel, lp.exps)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def _direct_pairs_limit(lamsq_B, alpha, M):
    """0-based (i, j) pairs whose comparison-kernel mass exceeds the cutoff."""
    rows_i, rows_j = [], []
    i = 1
    while i < M:
        # lam^2 B i^{-(1-alpha)} j^{-alpha} >= CUTOFF
        j_hi = (lamsq_B * float(i) ** (-(1.0 - alpha)) / _DIRECT_CUTOFF) ** (1.0 / alpha)
        j_max = min(M, int(np.floor(j_hi + 1e-12)))
        if j_max <= i:
            break
        rows_i.append(np.full(j_max - i, i - 1, dtype=np.int64))
        rows_j.append(np.arange(i, j_max, dtype=np.int64))
        i += 1
    if not rows_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(rows_i), np.concatenate(rows_j)


def _sample_limit_graphs(lp: LimitParams, seed: int):
    """One coupled draw of (limit graph, comparison graph) on [M].

    A shared Poisson proposal field plus one uniform per proposal gives
    exact marginals for both graphs and a pathwise subgraph relation.
    """
    if lp.truncation_M < 2:
        raise ValueError("sampling needs truncation_M >= 2")
    M = lp.truncation_M
    exps = lp.exps
    alpha = exps.alpha
    s = 1.0 / alpha
    B = _cached_b(lp.kernel, exps)
    lamsq_B = lp.lam ** 2 * B
    rng = substream(seed, "limit", lp.kernel, M)

    empty = np.empty((0, 2), dtype=np.int64)
    if lp.lam == 0.0:
        return empty.copy(), empty.copy()

    idx = np.arange(1, M + 1, dtype=float)
    pj = idx ** (-alpha)
    cum_pj = np.cumsum(pj)
    row_tail = cum_pj[-1] - cum_pj  # sum of pj over j > i (0-based position i-1)
    row_mass = _FIELD_RATE * lamsq_B * idx[:-1] ** (-(1.0 - alpha)) * row_tail[:-1]
    cum_rows = np.cumsum(row_mass)
    lam_total = float(cum_rows[-1])

    n_hits = int(rng.poisson(lam_total))
    u_row = rng.random(n_hits)
    u_col = rng.random(n_hits)
    u_keep = rng.random(n_hits)

    i0 = np.searchsorted(cum_rows, u_row * lam_total, side="right")
    i0 = np.minimum(i0, M - 2)  # 0-based row index, row i = i0+1
    lo = cum_pj[i0]
    pos = lo + u_col * (cum_pj[-1] - lo)
    j0 = np.searchsorted(cum_pj, pos, side="right")
    j0 = np.clip(j0, i0 + 1, M - 1)

    h_val = B * (i0 + 1.0) ** (-(1.0 - alpha)) * (j0 + 1.0) ** (-alpha)
    lam_h = lp.lam ** 2 * h_val
    t = ((i0 + 1.0) / (j0 + 1.0)) ** alpha
    lam_exact = lam_h * two_step_shape(lp.kernel, t, s)

    field = lam_h < _DIRECT_CUTOFF
    nu = _FIELD_RATE * lam_h
    r_inf = lam_exact / nu
    with np.errstate(divide="ignore", invalid="ignore"):
        r_dk = -np.log1p(-lam_h) / nu
    keep_inf = field & (u_keep < r_inf)
    keep_dk = field & (u_keep < r_dk)

    codes_inf = i0[keep_inf] * np.int64(M) + j0[keep_inf]
    codes_dk = i0[keep_dk] * np.int64(M) + j0[keep_dk]

    di, dj = _direct_pairs_limit(lamsq_B, alpha, M)
    if di.size:
        h_d = B * (di + 1.0) ** (-(1.0 - alpha)) * (dj + 1.0) ** (-alpha)
        lam_h_d = lp.lam ** 2 * h_d
        t_d = ((di + 1.0) / (dj + 1.0)) ** alpha
        lam_d = lam_h_d * two_step_shape(lp.kernel, t_d, s)
        u_d = rng.random(di.size)
        p_inf = -np.expm1(-lam_d)
        p_dk = np.minimum(lam_h_d, 1.0)
        codes_inf = np.concatenate([codes_inf, (di * np.int64(M) + dj)[u_d < p_inf]])
        codes_dk = np.concatenate([codes_dk, (di * np.int64(M) + dj)[u_d < p_dk]])

    def decode(codes):
        codes = np.unique(codes)
        out = np.empty((codes.size, 2), dtype=np.int64)
        out[:, 0] = codes // M
        out[:, 1] = codes % M
        return out

    return decode(codes_inf), decode(codes_dk)


def _as_graph(pairs, lp, seed):
    return PercolatedGraph(n=lp.truncation_M, edges=(pairs + 1).astype(np.uint32),
                           kernel=lp.kernel, pi=1.0, seed=seed)


def sample_g_infinity(lp: LimitParams, seed: int) -> PercolatedGraph:
    """Adjacency of the truncated limit graph (multi-edges collapsed)."""
    pairs, _ = _sample_limit_graphs(lp, seed)
    return _as_graph(pairs, lp, seed)


def sample_dk(lp: LimitParams, seed: int) -> PercolatedGraph:
    """The comparison model: pair {i,j} present w.p. min(lambda^2 h(i,j), 1)."""
    _, pairs = _sample_limit_graphs(lp, seed)
    return _as_graph(pairs, lp, seed)


def sample_both(lp: LimitParams, seed: int):
    """Coupled (limit, comparison) pair; the first is a subgraph of the second."""
    inf_pairs, dk_pairs = _sample_limit_graphs(lp, seed)
    return _as_graph(inf_pairs, lp, seed), _as_graph(dk_pairs, lp, seed)


# ---------------------------------------------------------------------------
# Weights on the limit graph
# ---------------------------------------------------------------------------

def theta_weight_sequence(exps: DerivedExponents, M: int) -> WeightSequence:
    """WeightSequence carrying theta_1 >= theta_2 >= ... for component sums."""
    tau = 1.0 / exps.alpha + 1.0
    params = ModelParams(tau=tau, tail_const_C=exps.c_F ** (tau - 1.0), n=M)
    w = exps.c_F * np.arange(1, M + 1, dtype=float) ** (-exps.alpha) / exps.mu
    return WeightSequence(n=M, weights=w, ell_n=fsum(w), params=params, exps=exps)


def ordered_limit_weights(summary, exps: DerivedExponents) -> np.ndarray:
    """Component theta-sums sorted non-increasing (the limit weight vector)."""
    return np.sort(np.asarray(summary.weights, dtype=float))[::-1]


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def write_lambda_table_csv(lp: LimitParams, path, use_quadrature: bool = False) -> None:
    table = lambda_ij_table(lp, use_quadrature=use_quadrature)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["i", "j", "lambda_ij"])
        M = lp.truncation_M
        for a in range(1, M + 1):
            for b in range(a, M + 1):
                out.writerow([a, b, repr(float(table[a - 1, b - 1]))])


def write_ordered_weights_csv(weight_vectors, path) -> None:
    """Rows (replicate, rank, weight) for a list of ordered weight arrays."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["replicate", "rank", "weight"])
        for rep, vec in enumerate(weight_vectors):
            for rank, w in enumerate(vec, start=1):
                out.writerow([rep, rank, repr(float(w))])
