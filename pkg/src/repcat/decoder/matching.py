"""Minimum-weight perfect matching decoder over a :class:`DecodingGraph`."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .blossom import max_weight_matching
from .graph import DecodingGraph

# Integer resolution of the matching weights.
WEIGHT_SCALE = float(2 ** 40)


@dataclass(frozen=True)
class Correction:
    logical: int          # predicted logical flip
    weight: float         # total weight of the chosen matching
    pairs: tuple          # ((i, j), ...) detector pairs; j == boundary for boundary matches


@numba.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True)
def _decode_defects(defects, dist, boundary, pair_out):
    """Match ``defects``; fills ``pair_out`` (k, 2) and returns (parity, weight, npairs)."""
    k = defects.shape[0]
    nn = boundary + 1
    if k == 0:
        return 0, 0.0, 0
    D = np.empty((k, k))
    P = np.zeros((k, k), np.int64)
    B = np.empty(k)
    PB = np.zeros(k, np.int64)
    finite_sum = 0.0
    for i in range(k):
        di = defects[i]
        b0 = dist[di, boundary]
        b1 = dist[di, boundary + nn]
        if b1 < b0:
            B[i] = b1
            PB[i] = 1
        else:
            B[i] = b0
        if np.isfinite(B[i]):
            finite_sum += B[i]
        for j in range(k):
            if j == i:
                D[i, j] = 0.0
                continue
            dj = defects[j]
            x0 = dist[di, dj]
            x1 = dist[di, dj + nn]
            if x1 < x0:
                D[i, j] = x1
                P[i, j] = 1
            else:
                D[i, j] = x0
            if np.isfinite(D[i, j]):
                finite_sum += D[i, j]
    # unreachable pairs cost more than any finite matching
    big = 2.0 * finite_sum + 1.0
    for i in range(k):
        if not np.isfinite(B[i]):
            B[i] = big
        for j in range(k):
            if not np.isfinite(D[i, j]):
                D[i, j] = big

    # components over edges that beat two boundary matches
    parent = np.arange(k)
    for i in range(k):
        for j in range(i + 1, k):
            if D[i, j] < B[i] + B[j]:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    parent[ri] = rj
    roots = np.empty(k, np.int64)
    for i in range(k):
        roots[i] = _find(parent, i)

    parity = 0
    weight = 0.0
    npairs = 0
    members = np.empty(k, np.int64)
    done = np.zeros(k, np.bool_)
    for i in range(k):
        if done[i]:
            continue
        r = roots[i]
        m = 0
        for j in range(k):
            if roots[j] == r:
                members[m] = j
                m += 1
                done[j] = True
        if m == 1:
            a = members[0]
            parity ^= PB[a]
            weight += B[a]
            pair_out[npairs, 0] = defects[a]
            pair_out[npairs, 1] = boundary
            npairs += 1
            continue
        size = m + (m & 1)
        W = np.zeros((size, size))
        wmax = 0.0
        for a in range(m):
            ia = members[a]
            for c in range(a + 1, m):
                ic = members[c]
                w = min(D[ia, ic], B[ia] + B[ic])
                W[a, c] = w
                W[c, a] = w
                if w > wmax:
                    wmax = w
            if size > m:
                W[a, m] = B[ia]
                W[m, a] = B[ia]
                if B[ia] > wmax:
                    wmax = B[ia]
        scale = WEIGHT_SCALE / (wmax + 1.0)
        Wi = np.zeros((size, size), np.int64)
        for a in range(size):
            for c in range(size):
                if a != c:
                    Wi[a, c] = np.int64(np.rint((wmax + 1.0 - W[a, c]) * scale))
        mate = max_weight_matching(Wi)
        for a in range(m):
            c = mate[a]
            ia = members[a]
            if c == m:
                parity ^= PB[ia]
                weight += B[ia]
                pair_out[npairs, 0] = defects[ia]
                pair_out[npairs, 1] = boundary
                npairs += 1
            elif c > a:
                ic = members[c]
                if D[ia, ic] <= B[ia] + B[ic]:
                    parity ^= P[ia, ic]
                    weight += D[ia, ic]
                    pair_out[npairs, 0] = defects[ia]
                    pair_out[npairs, 1] = defects[ic]
                    npairs += 1
                else:
                    parity ^= PB[ia] ^ PB[ic]
                    weight += B[ia] + B[ic]
                    pair_out[npairs, 0] = defects[ia]
                    pair_out[npairs, 1] = boundary
                    pair_out[npairs + 1, 0] = defects[ic]
                    pair_out[npairs + 1, 1] = boundary
                    npairs += 2
    return parity, weight, npairs


@numba.njit(cache=True)
def _decode_batch(dets, dist, boundary, out_pred, out_weight):
    n_shots, n_det = dets.shape
    defects = np.empty(n_det, np.int64)
    pair_out = np.empty((n_det, 2), np.int64)
    for s in range(n_shots):
        k = 0
        for v in range(n_det):
            if dets[s, v]:
                defects[k] = v
                k += 1
        par, w, _ = _decode_defects(defects[:k], dist, boundary, pair_out)
        out_pred[s] = par
        out_weight[s] = w


def decode(graph: DecodingGraph, detection_events) -> Correction:
    """MWPM correction for one shot's detection events (0/1 vector)."""
    events = np.asarray(detection_events)
    if events.shape != (graph.num_detectors,):
        raise ValueError(f"expected {graph.num_detectors} detection events, got {events.shape}")
    defects = np.flatnonzero(events).astype(np.int64)
    graph.ensure_rows(defects)
    pairs = np.empty((max(len(defects), 1), 2), np.int64)
    par, w, npairs = _decode_defects(defects, graph.distance_matrix(), graph.boundary, pairs)
    return Correction(int(par), float(w), tuple((int(a), int(b)) for a, b in pairs[:npairs]))


def decode_batch(graph: DecodingGraph, dets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predicted logical flips and matching weights for a (shots, detectors) array."""
    dets = np.ascontiguousarray(dets, dtype=np.uint8)
    if dets.ndim != 2 or dets.shape[1] != graph.num_detectors:
        raise ValueError(f"expected (shots, {graph.num_detectors}) detection events")
    used = np.flatnonzero(dets.any(axis=0))
    graph.ensure_rows(used)
    pred = np.zeros(len(dets), np.uint8)
    weight = np.zeros(len(dets))
    _decode_batch(dets, graph.distance_matrix(), graph.boundary, pred, weight)
    return pred, weight


def logical_failure(prediction, true_flip) -> np.ndarray | bool:
    out = np.asarray(prediction, dtype=np.uint8) != np.asarray(true_flip, dtype=np.uint8)
    return bool(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# reference decoder


def _floyd_warshall_layered(graph: DecodingGraph) -> np.ndarray:
    nn = graph.num_nodes
    m = 2 * nn
    dist = np.full((m, m), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v, lg, w in zip(graph.edge_u, graph.edge_v, graph.edge_logical, graph.edge_weight):
        for par in (0, 1):
            a = u + par * nn
            b = v + (par ^ int(lg)) * nn
            dist[a, b] = min(dist[a, b], w)
            dist[b, a] = min(dist[b, a], w)
    for k in range(m):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def brute_force_decode(graph: DecodingGraph, detection_events, max_defects: int = 12,
                       dist: np.ndarray | None = None) -> tuple[float, float]:
    """Exhaustive minimum over all pairings (defect-defect or defect-boundary).

    Returns the lightest total weight achieving logical parity 0 and parity 1.
    Shortest paths come from an independent Floyd-Warshall pass.
    """
    defects = [int(x) for x in np.flatnonzero(detection_events)]
    if len(defects) > max_defects:
        raise ValueError(f"{len(defects)} defects exceed the brute-force limit {max_defects}")
    if dist is None:
        dist = _floyd_warshall_layered(graph)
    nn = graph.num_nodes
    bnd = graph.boundary

    def pw(u, v):
        return dist[u, v], dist[u, v + nn]

    k = len(defects)
    full = (1 << k) - 1
    # mask -> (lightest weight with parity 0, with parity 1)
    memo: dict[int, tuple[float, float]] = {0: (0.0, np.inf)}

    def solve(mask: int) -> tuple[float, float]:
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        out = [np.inf, np.inf]
        options = [(pw(defects[i], bnd), rest)]
        for j in range(i + 1, k):
            if rest >> j & 1:
                options.append((pw(defects[i], defects[j]), rest & ~(1 << j)))
        for (w0, w1), sub in options:
            s0, s1 = solve(sub)
            out[0] = min(out[0], w0 + s0, w1 + s1)
            out[1] = min(out[1], w0 + s1, w1 + s0)
        memo[mask] = (out[0], out[1])
        return memo[mask]

    return solve(full)
