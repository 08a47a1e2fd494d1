"""Exact samplers for percolated rank-1 random graphs.

Candidate pairs are proposed from a Poisson field whose intensity
dominates the edge probability of every kernel, then thinned so that each
pair {i, j} is retained independently with exactly ``edge_prob(...)``.
The handful of heaviest pairs, where the field intensity would not
dominate, are enumerated and drawn directly.  Expected cost is
O(n + number of proposals), and the proposal count is proportional to the
envelope edge mass pi * sum_{i<j} w_i w_j / ell_n.
"""

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from .constants import normalize_kernel
from .weights import WeightSequence

# The field proposes pair {i, j} at rate RATE * pi * w_i w_j / ell_n.  A
# proposal survives with probability -log(1 - p_ij) / rate, which stays
# below 1 because -log(1 - u) <= RATE * u whenever u <= CUTOFF and
# p_ij <= pi * w_i w_j / ell_n for all three kernels.  Pairs above the
# cutoff go through the direct branch instead.
_FIELD_RATE = 1.5
_DIRECT_CUTOFF = 0.5


@dataclass
class PercolatedGraph:
    """One sampled graph: edges as an (m, 2) array of 1-based pairs i < j."""

    n: int
    edges: np.ndarray
    kernel: str
    pi: float
    seed: int

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])


def substream(seed: int, *tags) -> np.random.Generator:
    """Counter-based generator keyed by hashing (seed, tags).

    Distinct tag tuples give statistically independent streams; identical
    arguments reproduce the stream byte-for-byte.  Safe to call from
    worker processes without shared state.
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(b"hubperc.rng")
    h.update(struct.pack("<q", int(seed)))
    for t in tags:
        h.update(repr(t).encode())
        h.update(b"\x1f")
    key = int.from_bytes(h.digest(), "little")
    return np.random.Generator(np.random.Philox(key=key))


def edge_prob(kernel, w_i, w_j, ell_n, pi):
    """Edge probability of pair {i, j} after percolation.

    Accepts scalars or broadcastable arrays for w_i, w_j.
    """
    kernel = normalize_kernel(kernel)
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1], got %r" % (pi,))
    x = np.asarray(w_i, dtype=float) * np.asarray(w_j, dtype=float) / ell_n
    return pi * _base_prob(kernel, x)


def _base_prob(kernel, x):
    # unpercolated connection probability as a function of w_i*w_j/ell_n
    if kernel == "nr":
        return -np.expm1(-x)
    if kernel == "cl":
        return np.minimum(x, 1.0)
    return x / (1.0 + x)  # grg


def hub_count(n: int, tau: float, a: float) -> int:
    """Number of vertices kept when truncating at hub index a*n^((3-tau)/2)."""
    return int(math.floor(a * float(n) ** ((3.0 - tau) / 2.0)))


def expected_proposals(ws: WeightSequence, pi: float) -> float:
    """Mean number of Poisson-field proposals for a full-graph sample."""
    return _FIELD_RATE * pi * ws.ell_n / 2.0


def _direct_pairs(w, ell_n, pi):
    """All 0-based pairs (i, j), i < j, with pi*w_i*w_j/ell_n >= cutoff."""
    rows_i = []
    rows_j = []
    i = 0
    neg_w = -w
    while pi > 0.0 and i < w.size - 1:
        with np.errstate(over="ignore"):  # tiny pi -> inf threshold -> no pairs
            thr = _DIRECT_CUTOFF * ell_n / (pi * w[i])
        n_ge = int(np.searchsorted(neg_w, -thr, side="right"))
        if n_ge <= i + 1:
            break
        rows_i.append(np.full(n_ge - i - 1, i, dtype=np.int64))
        rows_j.append(np.arange(i + 1, n_ge, dtype=np.int64))
        i += 1
    if not rows_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(rows_i), np.concatenate(rows_j)


def _sample_pairs(w, ell_n, kernel, pi, rng):
    """Core sampler over the vertices carrying weights ``w``.

    Returns sorted unique 0-based pairs (i, j), i < j, each present
    independently with probability edge_prob.  ``ell_n`` is always the
    full-graph weight total even when ``w`` is a prefix.
    """
    n_sub = w.size
    if pi == 0.0 or n_sub < 2:
        return np.empty((0, 2), dtype=np.int64)

    cum = np.cumsum(w)
    total = cum[-1]

    # Poisson field: ordered endpoints drawn size-biased by weight.
    lam_total = _FIELD_RATE * pi * total * total / (2.0 * ell_n)
    n_hits = int(rng.poisson(lam_total))
    pos = rng.random((n_hits, 2))
    thin_u = rng.random(n_hits)
    idx = np.searchsorted(cum, pos * total, side="right")
    idx = np.minimum(idx, n_sub - 1)
    u, v = idx[:, 0], idx[:, 1]
    i = np.minimum(u, v)
    j = np.maximum(u, v)

    x = w[i] * w[j] / ell_n
    y = pi * x
    p = pi * _base_prob(kernel, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        keep = (u != v) & (y < _DIRECT_CUTOFF) & (thin_u * (_FIELD_RATE * y) < -np.log1p(-p))
    codes = i[keep] * np.int64(n_sub) + j[keep]
    codes = np.unique(codes)

    # Heaviest pairs: plain Bernoulli, fixed row-major order.
    di, dj = _direct_pairs(w, ell_n, pi)
    if di.size:
        p_direct = pi * _base_prob(kernel, w[di] * w[dj] / ell_n)
        hit = rng.random(di.size) < p_direct
        codes = np.unique(np.concatenate([codes, di[hit] * np.int64(n_sub) + dj[hit]]))

    out = np.empty((codes.size, 2), dtype=np.int64)
    out[:, 0] = codes // n_sub
    out[:, 1] = codes % n_sub
    return out


def sample_graph(ws: WeightSequence, kernel, pi: float, seed: int) -> PercolatedGraph:
    """Sample the percolated graph on all n vertices."""
    kernel = normalize_kernel(kernel)
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1], got %r" % (pi,))
    rng = substream(seed, "graph")
    pairs = _sample_pairs(ws.weights, ws.ell_n, kernel, pi, rng)
    edges = (pairs + 1).astype(np.uint32)
    return PercolatedGraph(n=ws.n, edges=edges, kernel=kernel, pi=pi, seed=seed)


def sample_restricted(ws: WeightSequence, kernel, pi: float, m: int, seed: int) -> PercolatedGraph:
    """Sample only the pairs among the m heaviest vertices (labels kept).

    Same marginal law as the corresponding pairs of sample_graph; the
    edge probabilities still use the full-graph ell_n.
    """
    kernel = normalize_kernel(kernel)
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1], got %r" % (pi,))
    if not 1 <= m <= ws.n:
        raise ValueError("m must lie in [1, n], got %r" % (m,))
    rng = substream(seed, "restricted", m)
    pairs = _sample_pairs(ws.weights[:m], ws.ell_n, kernel, pi, rng)
    edges = (pairs + 1).astype(np.uint32)
    return PercolatedGraph(n=ws.n, edges=edges, kernel=kernel, pi=pi, seed=seed)


def two_step_count(ws: WeightSequence, graph: PercolatedGraph, i: int, j: int) -> int:
    """Number of common neighbors of vertices i and j (1-based labels)."""
    if i == j:
        raise ValueError("two_step_count needs two distinct vertices")
    e = graph.edges
    nb_i = np.concatenate([e[e[:, 0] == i, 1], e[e[:, 1] == i, 0]])
    nb_j = np.concatenate([e[e[:, 0] == j, 1], e[e[:, 1] == j, 0]])
    return int(np.intersect1d(nb_i, nb_j, assume_unique=True).size)


def write_edge_list(graph: PercolatedGraph, path) -> None:
    """CSV export, one 'i,j' row per edge, 1-based, ascending."""
    np.savetxt(path, graph.edges, fmt="%d", delimiter=",",
               header="u,v", comments="")
