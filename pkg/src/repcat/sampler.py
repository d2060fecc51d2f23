"""Monte Carlo sampling of detection events and logical flips.

Randomness is counter based: shot ``i`` of a campaign lives in block
``i // BLOCK`` whose Philox stream is keyed by (seed, circuit hash) with the
block index in the counter.  Any shot or block can therefore be regenerated
on its own, and blocks may be sampled by separate workers in any order.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .circuit import Circuit
from .error_model import Strategy

BLOCK = 1024
SHOT_FILE_MAGIC = b"RCSHOTS1"


@dataclass
class ShotBatch:
    """Samples of ``n`` shots: detection events and the true logical flip."""

    dets: np.ndarray      # (n, num_detectors) uint8
    logical: np.ndarray   # (n,) uint8
    fired: np.ndarray     # (n,) int32, number of faults that fired
    first_shot: int = 0

    def __len__(self) -> int:
        return len(self.logical)

    def defects(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.dets[i])


def circuit_key(circuit: Circuit) -> int:
    """64-bit hash identifying a circuit (and leakage table) for the RNG key."""
    h = hashlib.sha256()
    h.update(struct.pack("<iii", circuit.d, circuit.rounds, circuit.num_detectors))
    h.update(circuit.spec.strategy.value.encode())
    for arr in (circuit.prob, circuit.dets, circuit.logical):
        h.update(np.ascontiguousarray(arr).tobytes())
    if circuit.table is not None:
        h.update(np.ascontiguousarray(circuit.table.joint).tobytes())
        h.update(np.ascontiguousarray(circuit.table.p_trans).tobytes())
    return int.from_bytes(h.digest()[:8], "little")


def block_generator(seed: int, key: int, block: int) -> np.random.Generator:
    if seed < 0 or block < 0:
        raise ValueError("seed and block must be non-negative")
    bitgen = np.random.Philox(key=np.array([seed, key], dtype=np.uint64),
                              counter=np.array([0, 0, block, 0], dtype=np.uint64))
    return np.random.Generator(bitgen)


@numba.njit(cache=True)
def _apply_static(u, prob, dets, logical, out_dets, out_log, out_fired):
    n_shots, n_faults = u.shape
    for i in range(n_shots):
        for f in range(n_faults):
            if u[i, f] < prob[f]:
                out_fired[i] += 1
                a = dets[f, 0]
                b = dets[f, 1]
                if a >= 0:
                    out_dets[i, a] ^= 1
                if b >= 0:
                    out_dets[i, b] ^= 1
                out_log[i] ^= logical[f]


@numba.njit(cache=True)
def _apply_leakage(u_gauge, u_meas, p_trans1, p_meas_err, q_decay, theta, out_dets, out_fired,
                   record, out_err):
    # u_gauge: (shots, rounds, d, 5); u_meas: (shots, rounds, d - 1)
    # with ``record`` the leakage measurement errors go to out_err (shots, rounds, d - 1)
    n_shots, rounds, d, _ = u_gauge.shape
    n = d - 1
    g = np.zeros(d, dtype=np.int64)
    t1_from = np.zeros(d, dtype=np.int64)
    t1_to = np.zeros(d, dtype=np.int64)
    t2_from = np.zeros(d, dtype=np.int64)
    t2_to = np.zeros(d, dtype=np.int64)
    for i in range(n_shots):
        g[:] = 0
        for r in range(rounds):
            for j in range(d):
                # prep slot
                if g[j] == 1 and u_gauge[i, r, j, 0] < q_decay:
                    g[j] = 0
                # CNOT1
                if j < n:
                    t1_from[j] = g[j]
                    g[j] = 1 if u_gauge[i, r, j, 1] < p_trans1[g[j]] else 0
                    t1_to[j] = g[j]
                elif g[j] == 1 and u_gauge[i, r, j, 1] < q_decay:
                    g[j] = 0
                # ancilla refresh slot
                if g[j] == 1 and u_gauge[i, r, j, 2] < q_decay:
                    g[j] = 0
                # CNOT2
                if j > 0:
                    t2_from[j] = g[j]
                    g[j] = 1 if u_gauge[i, r, j, 3] < p_trans1[g[j]] else 0
                    t2_to[j] = g[j]
                elif g[j] == 1 and u_gauge[i, r, j, 3] < q_decay:
                    g[j] = 0
                # measurement slot
                if g[j] == 1 and u_gauge[i, r, j, 4] < q_decay:
                    g[j] = 0
            for s in range(n):
                pe = p_meas_err[t1_from[s], t1_to[s], t2_from[s + 1], t2_to[s + 1]]
                if u_meas[i, r, s] < pe:
                    if record:
                        out_err[i, r, s] = 1
                    out_fired[i] += 1
                    out_dets[i, r * n + s] ^= 1
                    out_dets[i, (r + 1) * n + s] ^= 1
            if (r + 1) % theta == 0:
                g[:] = 0


class Sampler:
    """Draws shots of one circuit in deterministic blocks."""

    def __init__(self, circuit: Circuit, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.circuit = circuit
        self.seed = int(seed)
        self.key = circuit_key(circuit)
        self._prob32 = circuit.prob.astype(np.float32)
        self._asym = circuit.spec.strategy is Strategy.FAST_ASYMMETRIC
        if self._asym:
            t = circuit.table
            self._p_trans1 = np.ascontiguousarray(t.p_trans[:, 1])
            self._p_meas_err = np.ascontiguousarray(t.p_meas_err)
            self._q_decay = 1.0 - np.exp(-t.relaxation_rate() * t.gate_time)
            self._theta = int(circuit.spec.noise.theta)

    def block(self, index: int, size: int = BLOCK, leak_errors: np.ndarray | None = None) -> ShotBatch:
        """Shots index*BLOCK .. index*BLOCK + size - 1.

        For asymmetric circuits ``leak_errors``, a zeroed (size, rounds, d - 1)
        uint8 array, receives the gauge-induced measurement errors.
        """
        if not 0 < size <= BLOCK:
            raise ValueError(f"block size must be in 1..{BLOCK}")
        c = self.circuit
        rng = block_generator(self.seed, self.key, index)
        u = rng.random((BLOCK, c.num_faults), dtype=np.float32)[:size]
        dets = np.zeros((size, c.num_detectors), dtype=np.uint8)
        logical = np.zeros(size, dtype=np.uint8)
        fired = np.zeros(size, dtype=np.int32)
        _apply_static(u, self._prob32, c.dets, c.logical, dets, logical, fired)
        if self._asym:
            ug = rng.random((BLOCK, c.rounds, c.d, 5))[:size]
            um = rng.random((BLOCK, c.rounds, c.d - 1))[:size]
            record = leak_errors is not None
            if not record:
                leak_errors = np.zeros((1, 1, 1), dtype=np.uint8)
            elif leak_errors.shape != (size, c.rounds, c.d - 1):
                raise ValueError("leak_errors must have shape (size, rounds, d - 1)")
            _apply_leakage(ug, um, self._p_trans1, self._p_meas_err, self._q_decay, self._theta,
                           dets, fired, record, leak_errors)
        return ShotBatch(dets, logical, fired, first_shot=index * BLOCK)

    def fault_hits(self, index: int, size: int = BLOCK) -> np.ndarray:
        """How often each independent fault fired in the shots of :meth:`block`."""
        if not 0 < size <= BLOCK:
            raise ValueError(f"block size must be in 1..{BLOCK}")
        rng = block_generator(self.seed, self.key, index)
        u = rng.random((BLOCK, self.circuit.num_faults), dtype=np.float32)[:size]
        return (u < self._prob32).sum(axis=0)

    def shots(self, start: int, count: int) -> ShotBatch:
        """Shots start .. start+count-1, stitched from whole blocks."""
        if start < 0 or count < 0:
            raise ValueError("start and count must be non-negative")
        parts = []
        end = start + count
        b = start // BLOCK
        while b * BLOCK < end:
            full = self.block(b)
            lo = max(start - b * BLOCK, 0)
            hi = min(end - b * BLOCK, BLOCK)
            parts.append((full.dets[lo:hi], full.logical[lo:hi], full.fired[lo:hi]))
            b += 1
        if not parts:
            n = self.circuit.num_detectors
            return ShotBatch(np.zeros((0, n), np.uint8), np.zeros(0, np.uint8), np.zeros(0, np.int32), start)
        return ShotBatch(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
                         np.concatenate([p[2] for p in parts]), first_shot=start)


def sample_shot(circuit: Circuit, seed: int, index: int) -> tuple[np.ndarray, int]:
    """Detection events and true logical flip of shot ``index``."""
    batch = Sampler(circuit, seed).block(index // BLOCK)
    k = index % BLOCK
    return batch.dets[k].copy(), int(batch.logical[k])


def sample_batch(circuit: Circuit, seed: int, n_shots: int, start: int = 0) -> ShotBatch:
    return Sampler(circuit, seed).shots(start, n_shots)


def write_shots(path: str | Path, batch: ShotBatch, d: int, rounds: int) -> Path:
    """Binary shot file: header then per-shot bit-packed detectors and logical bit.

    Header: magic (8 bytes), then little-endian uint32 d, uint32 rounds,
    uint32 num_detectors, uint64 shot count.  Each shot row is the detection
    events followed by the logical flip, packed with ``numpy.packbits``
    (big-endian bit order) and padded to whole bytes.
    """
    path = Path(path)
    rows = np.concatenate([batch.dets, batch.logical[:, None]], axis=1)
    packed = np.packbits(rows, axis=1)
    with path.open("wb") as fh:
        fh.write(SHOT_FILE_MAGIC)
        fh.write(struct.pack("<IIIQ", d, rounds, batch.dets.shape[1], len(batch)))
        fh.write(packed.tobytes())
    return path


class ShotFileError(ValueError):
    """Malformed or truncated shot file."""


def read_shots(path: str | Path) -> tuple[ShotBatch, int, int]:
    """Inverse of :func:`write_shots`; returns (batch, d, rounds)."""
    data = Path(path).read_bytes()
    if len(data) < 28 or data[:8] != SHOT_FILE_MAGIC:
        raise ShotFileError(f"{path}: not a shot file")
    d, rounds, n_det, n_shots = struct.unpack("<IIIQ", data[8:28])
    width = (n_det + 1 + 7) // 8
    body = np.frombuffer(data[28:], dtype=np.uint8)
    if body.size != width * n_shots:
        raise ShotFileError(f"{path}: truncated shot file")
    rows = np.unpackbits(body.reshape(n_shots, width), axis=1)[:, : n_det + 1]
    batch = ShotBatch(np.ascontiguousarray(rows[:, :n_det]), np.ascontiguousarray(rows[:, n_det]),
                      np.zeros(n_shots, dtype=np.int32))
    return batch, d, rounds
