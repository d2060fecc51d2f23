"""Fault locations of the phase-flip repetition-code memory circuit.

Layout: data qubits d_0..d_{n-1}; ancilla a_s measures X_s X_{s+1}.  Each
round prepares the ancillas in |+>, applies CNOT1 (a_s -> d_s), then CNOT2
(a_s -> d_{s+1}), and measures the ancillas in the X basis.  After the noisy
rounds a final, noiseless read-out of the data closes the syndrome history.

A detector (r, s) fires when the syndrome bit of ancilla s changes between
rounds r-1 and r; row ``rounds`` is the final read-out.  The logical
observable is the phase-flip parity of data qubit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .error_model import NoiseModel, PhenomModel, Strategy
from .gauge import LeakageTable

# fault kinds
DATA_BEFORE = 0
DATA_BETWEEN = 1
DATA_AFTER = 2
ANCILLA = 3
CNOT_ZA = 4
CNOT_ZD = 5
CNOT_ZAZD_SPACE = 6
CNOT_ZAZD_HOOK = 7
DATA_REFRESH = 8
LEAKAGE = 9

KIND_NAMES = {
    DATA_BEFORE: "data_before",
    DATA_BETWEEN: "data_between",
    DATA_AFTER: "data_after",
    ANCILLA: "ancilla",
    CNOT_ZA: "cnot_za",
    CNOT_ZD: "cnot_zd",
    CNOT_ZAZD_SPACE: "cnot_zazd_space",
    CNOT_ZAZD_HOOK: "cnot_zazd_hook",
    DATA_REFRESH: "data_refresh",
    LEAKAGE: "leakage_marginal",
}


@dataclass(frozen=True)
class CircuitSpec:
    d: int
    rounds: int
    strategy: Strategy
    noise: NoiseModel | PhenomModel

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"distance must be odd and >= 3, got {self.d}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        strategy = Strategy.parse(self.strategy)
        object.__setattr__(self, "strategy", strategy)
        if strategy is Strategy.PHENOMENOLOGICAL:
            if not isinstance(self.noise, PhenomModel):
                raise TypeError("phenomenological strategy needs a PhenomModel")
        elif not isinstance(self.noise, NoiseModel) or self.noise.strategy is not strategy:
            raise TypeError(f"{strategy.value} strategy needs a matching NoiseModel")

    @property
    def num_ancillas(self) -> int:
        return self.d - 1

    @property
    def num_detectors(self) -> int:
        return (self.rounds + 1) * (self.d - 1)


def default_rounds(d: int, strategy: Strategy | str, theta: int = 1) -> int:
    if Strategy.parse(strategy) is Strategy.FAST_ASYMMETRIC:
        return d * int(theta)
    return d


@dataclass
class Circuit:
    spec: CircuitSpec
    prob: np.ndarray      # (F,) float64
    dets: np.ndarray      # (F, 2) int32, -1 = no detector
    logical: np.ndarray   # (F,) uint8
    kind: np.ndarray      # (F,) int8
    round: np.ndarray     # (F,) int32
    # fast-asymmetric only: marginal leakage-driven measurement error per (round, ancilla)
    leak_marginal: np.ndarray | None = None
    table: LeakageTable | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def rounds(self) -> int:
        return self.spec.rounds

    @property
    def num_detectors(self) -> int:
        return self.spec.num_detectors

    @property
    def num_faults(self) -> int:
        return len(self.prob)

    def graph_faults(self):
        """(prob, dets, logical) for the decoding graph, with leakage marginals folded in."""
        if self.leak_marginal is None:
            return self.prob, self.dets, self.logical
        r_idx, s_idx = np.nonzero(self.leak_marginal > 0)
        n = self.d - 1
        extra_dets = np.stack([r_idx * n + s_idx, (r_idx + 1) * n + s_idx], axis=1).astype(np.int32)
        prob = np.concatenate([self.prob, self.leak_marginal[r_idx, s_idx]])
        dets = np.concatenate([self.dets, extra_dets])
        logical = np.concatenate([self.logical, np.zeros(len(r_idx), dtype=np.uint8)])
        return prob, dets, logical

    def signature(self, idx: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.dets[idx] if x >= 0)


class _Builder:
    def __init__(self, d: int, rounds: int):
        self.d = d
        self.n = d - 1
        self.rounds = rounds
        self.rows: list[tuple] = []

    def det(self, r: int, s: int) -> int:
        if 0 <= s < self.n and 0 <= r <= self.rounds:
            return r * self.n + s
        return -1

    def add(self, p: float, a: int, b: int, logical: int, kind: int, r: int):
        if p <= 0:
            return
        pair = sorted(x for x in (a, b) if x >= 0)
        if not pair:
            # undetectable: only matters if it flips the logical, which
            # cannot happen for a weight-one data flip with d >= 3
            return
        if len(pair) == 1:
            pair.append(-1)
        self.rows.append((p, pair[0], pair[1], logical, kind, r))

    # signatures of a phase flip on data qubit j in round r
    def data_before(self, p, r, j, kind=DATA_BEFORE):
        self.add(p, self.det(r, j - 1), self.det(r, j), int(j == 0), kind, r)

    def data_between(self, p, r, j, kind=DATA_BETWEEN):
        self.add(p, self.det(r, j - 1), self.det(r + 1, j), int(j == 0), kind, r)

    def data_after(self, p, r, j, kind=DATA_AFTER):
        self.add(p, self.det(r + 1, j - 1), self.det(r + 1, j), int(j == 0), kind, r)

    def ancilla(self, p, r, s, kind=ANCILLA):
        self.add(p, self.det(r, s), self.det(r + 1, s), 0, kind, r)

    def build(self) -> tuple[np.ndarray, ...]:
        if not self.rows:
            z = np.zeros(0)
            return z, np.zeros((0, 2), np.int32), z.astype(np.uint8), z.astype(np.int8), z.astype(np.int32)
        arr = list(zip(*self.rows))
        prob = np.array(arr[0], dtype=np.float64)
        dets = np.stack([np.array(arr[1]), np.array(arr[2])], axis=1).astype(np.int32)
        return (prob, dets, np.array(arr[3], dtype=np.uint8), np.array(arr[4], dtype=np.int8),
                np.array(arr[5], dtype=np.int32))


def _phenom(b: _Builder, model: PhenomModel):
    for r in range(b.rounds):
        for j in range(b.d):
            b.data_before(model.p_data, r, j)
        for s in range(b.n):
            b.ancilla(model.p_meas, r, s)


def _cnot_round(b: _Builder, noise: NoiseModel, r: int, refresh_step: bool, za: float):
    c = noise.cnot
    d, n = b.d, b.n
    pd = noise.p_idle_data
    for s in range(n):
        b.ancilla(noise.p_prep, r, s)
        b.ancilla(noise.p_meas, r, s)
        if refresh_step:
            b.ancilla(noise.p_idle_anc, r, s)
    for j in range(d):
        b.data_before(pd, r, j)
        b.data_after(pd, r, j)
        if refresh_step:
            b.data_between(pd, r, j)
    # qubits left out of one CNOT layer idle for that step
    b.data_before(pd, r, d - 1)
    b.data_between(pd, r, 0)
    for s in range(n):
        b.ancilla(za, r, s, CNOT_ZA)
        b.data_between(c.p_zd, r, s, CNOT_ZD)
        b.data_before(c.p_zazd, r, s, CNOT_ZAZD_SPACE)
        b.ancilla(za, r, s, CNOT_ZA)
        b.data_after(c.p_zd, r, s + 1, CNOT_ZD)
        b.data_between(c.p_zazd, r, s + 1, CNOT_ZAZD_HOOK)


def gauge_marginals(table: LeakageTable, d: int, rounds: int, theta: int):
    """Gauge-bit distributions of every data qubit just before CNOT1 and CNOT2.

    Returns (before1, before2), each (rounds, d, 2).  Gauge bits relax freely
    in steps without a CNOT and are reset by the data refresh closing each
    block of ``theta`` rounds.
    """
    q = 1.0 - math.exp(-table.relaxation_rate() * table.gate_time)
    decay = np.array([[1.0, 0.0], [q, 1.0 - q]])
    trans = table.p_trans
    before1 = np.zeros((rounds, d, 2))
    before2 = np.zeros((rounds, d, 2))
    pi = np.zeros((d, 2))
    pi[:, 0] = 1.0
    for r in range(rounds):
        pi = pi @ decay  # prep
        before1[r] = pi
        nxt = pi @ decay
        nxt[: d - 1] = pi[: d - 1] @ trans
        pi = nxt @ decay  # refresh slot
        before2[r] = pi
        nxt = pi @ decay
        nxt[1:] = pi[1:] @ trans
        pi = nxt @ decay  # measurement
        if (r + 1) % theta == 0:
            pi = np.zeros((d, 2))
            pi[:, 0] = 1.0
    return before1, before2


def leakage_marginals(table: LeakageTable, d: int, rounds: int, theta: int) -> np.ndarray:
    before1, before2 = gauge_marginals(table, d, rounds, theta)
    perr = table.joint.sum(axis=(1, 3))  # (i, i2)
    out = np.zeros((rounds, d - 1))
    for r in range(rounds):
        for s in range(d - 1):
            out[r, s] = before1[r, s] @ perr @ before2[r, s + 1]
    return out


def build_circuit(spec: CircuitSpec, table: LeakageTable | None = None) -> Circuit:
    b = _Builder(spec.d, spec.rounds)
    leak = None
    if spec.strategy is Strategy.PHENOMENOLOGICAL:
        _phenom(b, spec.noise)
    elif spec.strategy is Strategy.FAST_ASYMMETRIC:
        if table is None:
            raise ValueError("fast-asymmetric circuit needs a LeakageTable")
        noise = spec.noise
        if abs(table.theta - noise.theta) > 1e-12 or abs(table.alpha_sq - noise.params.alpha_sq) > 1e-12:
            raise ValueError("leakage table parameters do not match the noise model")
        za = noise.cnot.p_za - noise.cnot.p_za_nonadiabatic
        for r in range(spec.rounds):
            _cnot_round(b, noise, r, True, za)
            if (r + 1) % noise.theta == 0:
                for j in range(spec.d):
                    b.data_after(noise.p_data_refresh, r, j, DATA_REFRESH)
        leak = leakage_marginals(table, spec.d, spec.rounds, noise.theta)
    else:
        refresh = spec.strategy is Strategy.FAST_SYMMETRIC
        for r in range(spec.rounds):
            _cnot_round(b, spec.noise, r, refresh, spec.noise.cnot.p_za)
    prob, dets, logical, kind, rnd = b.build()
    return Circuit(spec=spec, prob=prob, dets=dets, logical=logical, kind=kind, round=rnd,
                   leak_marginal=leak, table=table)


def expected_fault_counts(circuit: Circuit) -> dict[str, float]:
    """Expected number of fired faults per shot, by kind."""
    out = {}
    for k, name in KIND_NAMES.items():
        m = circuit.kind == k
        if m.any():
            out[name] = float(circuit.prob[m].sum())
    if circuit.leak_marginal is not None:
        out[KIND_NAMES[LEAKAGE]] = float(circuit.leak_marginal.sum())
    return out
