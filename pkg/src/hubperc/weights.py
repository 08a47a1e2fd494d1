"""Deterministic power-law weight sequences and their tail summaries.

The weight of vertex i (1-based) is w_i = c_F (n/i)^alpha, non-increasing in i,
so vertex 1 is the heaviest hub.  ell_n = sum_i w_i ~ mu * n.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path

import numpy as np

from hubperc.constants import DerivedExponents, ModelParams, derive_exponents

_HEADER = struct.Struct("<qdd")  # n, tau, C


def _compensated_sum(x: np.ndarray, chunk: int = 65536) -> float:
    """Sum with per-chunk pairwise reduction and exact combination of the
    chunk partials; keeps relative error near machine epsilon for n up to 1e7."""
    partials = [float(np.sum(x[i:i + chunk])) for i in range(0, len(x), chunk)]
    return fsum(partials)


@dataclass
class WeightSequence:
    """Weights w_1 >= ... >= w_n with prefix sums for O(log n) tail queries."""

    n: int
    weights: np.ndarray
    ell_n: float
    params: ModelParams
    exps: DerivedExponents = None
    _prefix_w: np.ndarray = field(default=None, repr=False)
    _prefix_w2: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.exps is None:
            self.exps = derive_exponents(self.params)
        if self._prefix_w is None:
            self._prefix_w = np.concatenate(([0.0], np.cumsum(self.weights)))
        if self._prefix_w2 is None:
            self._prefix_w2 = np.concatenate(([0.0], np.cumsum(self.weights ** 2)))

    def count_at_least(self, threshold: float) -> int:
        """#{k: w_k >= threshold}; weights are sorted non-increasing."""
        return int(np.searchsorted(-self.weights, -threshold, side="right"))


@dataclass(frozen=True)
class TailCounts:
    count_ge: int
    sum_ge: float
    sumsq_le: float


def build_weights(params: ModelParams) -> WeightSequence:
    exps = derive_exponents(params)
    n = params.n
    idx = np.arange(1, n + 1, dtype=np.float64)
    weights = exps.c_F * (n / idx) ** exps.alpha
    ell_n = _compensated_sum(weights)
    return WeightSequence(n=n, weights=weights, ell_n=ell_n, params=params, exps=exps)


def tail_counts(ws: WeightSequence, a: float, i: int) -> TailCounts:
    """Tail summaries at the threshold a*ell_n/w_i:
    count_ge = #{k: w_k >= thr}, sum_ge over those, sumsq_le over the rest."""
    if not (1 <= i <= ws.n):
        raise IndexError(f"vertex index {i} out of range [1, {ws.n}]")
    thr = a * ws.ell_n / ws.weights[i - 1]
    c = ws.count_at_least(thr)
    sum_ge = float(ws._prefix_w[c])
    sumsq_le = float(ws._prefix_w2[ws.n] - ws._prefix_w2[c])
    return TailCounts(count_ge=c, sum_ge=sum_ge, sumsq_le=sumsq_le)


def dump_weights(ws: WeightSequence, path) -> None:
    """Binary dump: little-endian header (n, tau, C) then n float64 weights."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(ws.n, ws.params.tau, ws.params.tail_const_C))
        fh.write(np.ascontiguousarray(ws.weights, dtype="<f8").tobytes())


def load_weights(path, kernel: str = "nr", lam: float = 0.0) -> WeightSequence:
    path = Path(path)
    with path.open("rb") as fh:
        n, tau, C = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(np.float64)
    if len(data) != n:
        raise IOError(f"truncated weight file {path}: expected {n} values, got {len(data)}")
    params = ModelParams(tau=tau, tail_const_C=C, n=n, kernel=kernel, lam=lam)
    return WeightSequence(n=n, weights=data, ell_n=_compensated_sum(data), params=params)
