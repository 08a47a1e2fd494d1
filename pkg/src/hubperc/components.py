"""Connected components, ordered cluster sizes/weights, and diagnostics."""

import csv
from dataclasses import dataclass
from math import fsum

import numpy as np

from .graphgen import PercolatedGraph
from .weights import WeightSequence


@dataclass
class ComponentSummary:
    """Components ordered by size (desc), ties broken by smallest vertex.

    ``membership[v]`` is the 0-based rank of the component containing the
    1-based vertex v.  ``n`` and ``m`` are vertex and edge counts of the
    underlying graph.
    """

    sizes: np.ndarray
    weights: np.ndarray
    min_vertices: np.ndarray
    membership: np.ndarray
    n: int
    m: int

    @property
    def num_components(self) -> int:
        return int(self.sizes.size)


class DisjointSet:
    """Union-find with union-by-size and path compression."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a):
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def connected_components(graph: PercolatedGraph, ws: WeightSequence) -> ComponentSummary:
    """Exact component summary of a sampled graph."""
    if graph.n != ws.n:
        raise ValueError("graph and weight sequence disagree on n")
    n = graph.n
    edges = graph.edges
    if edges.size and (edges.min() < 1 or edges.max() > n):
        raise ValueError("edge endpoint out of range [1, n]")

    flat = edges.ravel().astype(np.int64)
    touched = np.unique(flat)  # ascending vertex labels that carry an edge
    t = touched.size

    dsu = DisjointSet(t)
    local = np.searchsorted(touched, edges.astype(np.int64))
    for a, b in local:
        dsu.union(int(a), int(b))
    root_local = np.fromiter((dsu.find(k) for k in range(t)), dtype=np.int64, count=t)
    _, inv = np.unique(root_local, return_inverse=True)
    n_tc = int(inv.max()) + 1 if t else 0

    # group touched vertices by component; stable sort keeps labels ascending
    order = np.argsort(inv, kind="stable")
    labels_sorted = touched[order]
    counts = np.bincount(inv, minlength=n_tc).astype(np.int64)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    w_sorted = ws.weights[labels_sorted - 1]
    w_tc = np.array([fsum(w_sorted[bounds[k]:bounds[k + 1]]) for k in range(n_tc)])
    minv_tc = labels_sorted[bounds[:-1]] if n_tc else np.empty(0, dtype=np.int64)

    present = np.zeros(n + 1, dtype=bool)
    present[touched] = True
    singles = np.flatnonzero(~present[1:]) + 1

    # every touched component has size >= 2 and so outranks every singleton,
    # and singletons in ascending vertex order are already sorted by
    # (size desc, min vertex asc); only the touched block needs sorting
    order_tc = np.lexsort((minv_tc, -counts))
    rank_tc = np.empty(n_tc, dtype=np.int64)
    rank_tc[order_tc] = np.arange(n_tc)

    membership = np.full(n + 1, -1, dtype=np.int64)
    membership[labels_sorted] = rank_tc[inv[order]]
    membership[singles] = n_tc + np.arange(singles.size)

    return ComponentSummary(
        sizes=np.concatenate([counts[order_tc], np.ones(singles.size, dtype=np.int64)]),
        weights=np.concatenate([w_tc[order_tc], ws.weights[singles - 1]]),
        min_vertices=np.concatenate([minv_tc[order_tc], singles]),
        membership=membership,
        n=n,
        m=int(edges.shape[0]),
    )


def l2_weight_mass(summary: ComponentSummary, skip_top: int = 0) -> float:
    """Sum of squared component weights below the given rank."""
    if skip_top < 0:
        raise ValueError("skip_top must be >= 0")
    tail = summary.weights[skip_top:]
    return float(np.dot(tail, tail))


def hub_containment(summary: ComponentSummary, ws: WeightSequence, delta: float) -> bool:
    """True iff every vertex with w_v >= n^(1/2+delta) sits in the top component."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    thr = float(ws.n) ** (0.5 + delta)
    heavy = int(np.searchsorted(-ws.weights, -thr, side="right"))
    if heavy == 0:
        return True
    return bool(np.all(summary.membership[1:heavy + 1] == 0))


def write_component_csv(summary: ComponentSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["rank", "size", "weight", "min_vertex"])
        for r in range(summary.num_components):
            out.writerow([r + 1, int(summary.sizes[r]),
                          repr(float(summary.weights[r])), int(summary.min_vertices[r])])
