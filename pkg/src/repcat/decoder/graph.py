"""Weighted detection graph built from a list of independent faults."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra


class GraphError(ValueError):
    pass


def merge_xor(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent faults fires."""
    return p1 * (1 - p2) + p2 * (1 - p1)


def edge_weight(p: float) -> float:
    if not 0.0 < p < 0.5:
        raise GraphError(f"edge probability {p} must lie in (0, 0.5)")
    return math.log((1 - p) / p)


class DecodingGraph:
    """Detectors as nodes, plus one boundary node with index ``num_detectors``.

    Faults with identical (detector pair, logical) signatures are merged.
    Shortest paths run on a two-layer copy of the graph whose layer index is
    the accumulated logical parity, so one Dijkstra search from (v, 0) gives
    for every u the lightest path of each parity.

    ``weights``, if given, replaces the log-likelihood weight of each fault;
    parallel faults then keep the lightest weight.
    """

    def __init__(self, num_detectors: int, prob, dets, logical, weights=None):
        self.num_detectors = int(num_detectors)
        self.boundary = self.num_detectors
        nn = self.num_detectors + 1
        prob = np.asarray(prob, dtype=float)
        dets = np.asarray(dets)
        logical = np.asarray(logical)
        explicit = weights is not None
        if explicit:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != prob.shape or np.any(weights <= 0):
                raise GraphError("weights must be positive, one per fault")
        else:
            weights = np.zeros_like(prob)
        merged: dict[tuple[int, int, int], float] = {}
        for p, (a, b), lg, wt in zip(prob, dets, logical, weights):
            if p <= 0:
                continue
            if a < 0 and b < 0:
                raise GraphError("fault without detectors")
            u = int(a) if a >= 0 else self.boundary
            v = int(b) if b >= 0 else self.boundary
            if u == v:
                raise GraphError(f"fault flips detector {u} twice")
            if u > v:
                u, v = v, u
            if v > self.boundary:
                raise GraphError(f"detector index {v} out of range")
            key = (u, v, int(lg))
            if explicit:
                merged[key] = min(merged.get(key, np.inf), float(wt))
            else:
                merged[key] = merge_xor(merged[key], p) if key in merged else float(p)
        if not merged:
            raise GraphError("graph has no edges")
        keys = np.array(list(merged.keys()), dtype=np.int64)
        self.edge_u = keys[:, 0]
        self.edge_v = keys[:, 1]
        self.edge_logical = keys[:, 2].astype(np.uint8)
        values = np.array(list(merged.values()))
        if explicit:
            self.edge_weight = values
            self.edge_prob = 1.0 / (1.0 + np.exp(values))
        else:
            self.edge_prob = values
            self.edge_weight = np.array([edge_weight(p) for p in self.edge_prob])
        # layered graph: node (x, parity) -> x + parity * nn
        rows, cols, vals = [], [], []
        for u, v, lg, w in zip(self.edge_u, self.edge_v, self.edge_logical, self.edge_weight):
            for par in (0, 1):
                rows.append(u + par * nn)
                cols.append(v + (par ^ int(lg)) * nn)
                vals.append(w)
        self._layered = sp.csr_matrix((vals, (rows, cols)), shape=(2 * nn, 2 * nn))
        self._dist = np.full((nn, 2 * nn), np.inf)
        self._have = np.zeros(nn, dtype=bool)

    @property
    def num_nodes(self) -> int:
        return self.num_detectors + 1

    @property
    def num_edges(self) -> int:
        return len(self.edge_u)

    @property
    def layered(self) -> sp.csr_matrix:
        return self._layered

    def ensure_rows(self, nodes) -> None:
        """Compute and cache shortest-path rows for the given source nodes."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        missing = nodes[~self._have[nodes]]
        if len(missing) == 0:
            return
        self._dist[missing] = dijkstra(self._layered, directed=False, indices=missing)
        self._have[missing] = True

    def distance_matrix(self) -> np.ndarray:
        """The cached (nodes, 2*nodes) distance table; only computed rows are valid."""
        return self._dist

    def path(self, u: int, v: int) -> tuple[float, int]:
        """Lightest u-v path weight and its logical parity (ties resolve to 0)."""
        self.ensure_rows([u])
        nn = self.num_nodes
        d0 = self._dist[u, v]
        d1 = self._dist[u, v + nn]
        return (d1, 1) if d1 < d0 else (d0, 0)

    @classmethod
    def from_circuit(cls, circuit) -> "DecodingGraph":
        prob, dets, logical = circuit.graph_faults()
        return cls(circuit.num_detectors, prob, dets, logical)
