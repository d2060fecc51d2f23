"""Data gauge-bit leakage model for fast CNOTs in the shifted Fock basis.

Two integrators describe a CNOT between an ancilla (control) and a data cat
qubit whose gauge mode may hold one excitation:

* the reduced model, a pair of coupled 2x2 ODEs for the ancilla state
  conditioned on the data gauge bit (the ancilla gauge adiabatically
  eliminated), and
* the truncated oracle, the full Lindblad equation on ancilla qubit x ancilla
  gauge x data gauge with each gauge mode cut at one excitation.

The reduced model yields the classical gauge-bit table consumed by the
circuit sampler.  Time is in units of 1/kappa_2 of the data qubit.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .error_model import CatParams

logger = logging.getLogger(__name__)

TABLE_FORMAT_VERSION = 1
DEFAULT_STEPS = 2000
TRACE_TOL = 1e-9
RICHARDSON_TOL = 1e-7
HERMITIAN_TOL = 1e-12

_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
_PLUS = np.full((2, 2), 0.5, dtype=complex)
_MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


class IntegrationError(RuntimeError):
    """Fixed-step integration failed its step-halving or trace check."""


def _phase_rotation(angle: float) -> np.ndarray:
    """exp(i angle Z / 2)."""
    return np.diag([np.exp(0.5j * angle), np.exp(-0.5j * angle)])


def _conj_super(op: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> op rho op^dagger on row-major vectorised rho."""
    return np.kron(op, op.conj())


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class AncillaState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"ancilla state must be 2x2, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("ancilla state is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -HERMITIAN_TOL:
            raise ValueError("ancilla state is not positive semidefinite")
        tr = np.trace(rho).real
        if tr < -HERMITIAN_TOL or tr > 1 + HERMITIAN_TOL:
            raise ValueError(f"ancilla branch trace {tr} outside [0, 1]")
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @classmethod
    def plus(cls, weight: float = 1.0) -> "AncillaState":
        return cls(weight * _PLUS)

    @classmethod
    def zero(cls) -> "AncillaState":
        return cls(np.zeros((2, 2), dtype=complex))


@dataclass(frozen=True)
class ReducedCnotState:
    rho0: AncillaState
    rho1: AncillaState
    t: float = 0.0

    def __post_init__(self):
        total = self.rho0.trace + self.rho1.trace
        if abs(total - 1.0) > TRACE_TOL:
            raise ValueError(f"total trace {total} differs from 1")

    @property
    def leaked_population(self) -> float:
        return self.rho1.trace


# ---------------------------------------------------------------------------
# reduced two-branch model


def reduced_rates(params: CatParams, gate_time: float) -> tuple[float, float]:
    """Gauge relaxation rate r1 and gauge excitation rate r2."""
    r1 = 4.0 * params.kappa2_d * params.alpha_sq
    r2 = math.pi ** 2 / (16.0 * params.alpha_sq * params.kappa2_a * gate_time ** 2)
    return r1, r2


def _reduced_generator(r1: float, r2: float, gate_time: float):
    eye = np.eye(4, dtype=complex)
    zz = _conj_super(_PAULI_Z)

    def generator(t: float) -> np.ndarray:
        rot = _conj_super(_phase_rotation(2.0 * math.pi * t / gate_time))
        return np.block([[-r2 * eye, r1 * rot], [r2 * zz, -r1 * eye]])

    return generator


def _rk4_propagate(generator, gate_time: float, state: np.ndarray, nsteps: int) -> np.ndarray:
    h = gate_time / nsteps
    y = state
    t = 0.0
    for _ in range(nsteps):
        g0 = generator(t)
        gm = generator(t + 0.5 * h)
        g1 = generator(t + h)
        k1 = g0 @ y
        k2 = gm @ (y + 0.5 * h * k1)
        k3 = gm @ (y + 0.5 * h * k2)
        k4 = g1 @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def _checked_propagate(generator, gate_time: float, state: np.ndarray, nsteps: int,
                       what: str) -> np.ndarray:
    """RK4 at ``nsteps`` and ``2*nsteps``; returns the Richardson-extrapolated result."""
    coarse = _rk4_propagate(generator, gate_time, state, nsteps)
    fine = _rk4_propagate(generator, gate_time, state, 2 * nsteps)
    err = np.abs(fine - coarse).max() / 15.0
    if not np.isfinite(err) or err > RICHARDSON_TOL:
        raise IntegrationError(f"{what}: step-halving error estimate {err:.3g} exceeds "
                               f"{RICHARDSON_TOL:g} with {nsteps} steps")
    return fine + (fine - coarse) / 15.0


def reduced_propagator(params: CatParams, gate_time: float | None = None,
                       nsteps: int = DEFAULT_STEPS) -> np.ndarray:
    """8x8 map taking (vec rho0, vec rho1) at t=0 to t=gate_time."""
    t_gate = 1.0 / params.kappa2_a if gate_time is None else gate_time
    if not t_gate > 0:
        raise ValueError("gate time must be > 0")
    r1, r2 = reduced_rates(params, t_gate)
    gen = _reduced_generator(r1, r2, t_gate)
    prop = _checked_propagate(gen, t_gate, np.eye(8, dtype=complex), max(nsteps, DEFAULT_STEPS),
                              "reduced CNOT")
    return prop


def integrate_reduced_cnot(params: CatParams, initial: ReducedCnotState,
                           gate_time: float | None = None,
                           nsteps: int = DEFAULT_STEPS) -> ReducedCnotState:
    t_gate = 1.0 / params.kappa2_a if gate_time is None else gate_time
    prop = reduced_propagator(params, t_gate, nsteps)
    y0 = np.concatenate([initial.rho0.rho.ravel(), initial.rho1.rho.ravel()])
    y = prop @ y0
    rho0 = y[:4].reshape(2, 2)
    rho1 = y[4:].reshape(2, 2)
    total = np.trace(rho0).real + np.trace(rho1).real
    if abs(total - (initial.rho0.trace + initial.rho1.trace)) > TRACE_TOL:
        raise IntegrationError(f"trace drift {total - 1:.3g} in reduced CNOT")
    return ReducedCnotState(AncillaState(_hermitize(rho0)), AncillaState(_hermitize(rho1)),
                            initial.t + t_gate)


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def kraus_blocks(prop: np.ndarray) -> np.ndarray:
    """Split a reduced propagator into K[i, j] (4x4 superoperators), gauge i -> j."""
    k = np.empty((2, 2, 4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            k[i, j] = prop[4 * j:4 * j + 4, 4 * i:4 * i + 4]
    return k


def apply_kraus(block: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return (block @ rho.ravel()).reshape(2, 2)


# ---------------------------------------------------------------------------
# truncated oracle


def _lowering(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def _lindblad_super(op: np.ndarray) -> np.ndarray:
    n = op.shape[0]
    eye = np.eye(n)
    ldl = op.conj().T @ op
    return np.kron(op, op.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)


def _oracle_generator(params: CatParams, gate_time: float, levels: int, coupling: float):
    a2 = params.alpha_sq
    eye_g = np.eye(levels)
    b = _lowering(levels)
    eye2 = np.eye(2)
    b_a = np.kron(np.kron(eye2, b), eye_g)
    b_d = np.kron(np.kron(eye2, eye_g), b)
    z_a = np.kron(np.kron(_PAULI_Z, eye_g), eye_g)
    dim = 2 * levels * levels
    ham = coupling * math.pi / (4.0 * gate_time) * z_a @ (b_a @ b_d + b_a.conj().T @ b_d.conj().T)
    eye = np.eye(dim)
    static = -1j * (np.kron(ham, eye) - np.kron(eye, ham.T))
    static = static + 4.0 * params.kappa2_a * a2 * _lindblad_super(b_a)
    rate_d = 4.0 * params.kappa2_d * a2

    def generator(t: float) -> np.ndarray:
        rot = np.kron(np.kron(_phase_rotation(2.0 * math.pi * t / gate_time), eye_g), b)
        return static + rate_d * _lindblad_super(rot)

    return generator, dim


def integrate_sfb_cnot_oracle(params: CatParams, initial: np.ndarray,
                              gate_time: float | None = None, *, levels: int = 2,
                              coupling: float = 1.0, nsteps: int = DEFAULT_STEPS) -> np.ndarray:
    """Propagate density matrices through the truncated shifted-Fock-basis CNOT.

    ``initial`` has shape (dim, dim) or (n, dim, dim) with dim = 2*levels**2,
    ordered ancilla qubit x ancilla gauge x data gauge.  ``coupling`` scales
    the gauge-pair Hamiltonian (0 switches it off).
    """
    t_gate = 1.0 / params.kappa2_a if gate_time is None else gate_time
    gen, dim = _oracle_generator(params, t_gate, levels, coupling)
    rhos = np.asarray(initial, dtype=complex)
    single = rhos.ndim == 2
    if single:
        rhos = rhos[None]
    if rhos.shape[1:] != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} density matrices, got {rhos.shape[1:]}")
    vecs = rhos.reshape(len(rhos), dim * dim).T
    # Decay rates up to 4 kappa2_a alpha^2 set the step count.
    stiff = 4.0 * params.kappa2_a * params.alpha_sq * t_gate
    steps = max(nsteps, int(math.ceil(stiff * 100)))
    out = _checked_propagate(gen, t_gate, vecs, steps, "oracle CNOT")
    res = out.T.reshape(len(rhos), dim, dim)
    drift = np.abs(np.einsum("nii->n", res) - np.einsum("nii->n", rhos)).max()
    if drift > 1e-6:
        raise IntegrationError(f"oracle trace drift {drift:.3g}")
    return res[0] if single else res


def oracle_kraus(params: CatParams, gate_time: float | None = None, *, levels: int = 2,
                 nsteps: int = DEFAULT_STEPS) -> np.ndarray:
    """K[i, j] from the oracle: ancilla superoperator for data gauge i -> j.

    The ancilla gauge starts in its ground state and is traced out; data
    gauge levels above one are lumped into the leaked state j = 1.
    """
    g = levels
    ground = np.zeros((g, g), dtype=complex)
    ground[0, 0] = 1
    inputs = []
    basis = []
    for i in range(2):
        gi = np.zeros((g, g), dtype=complex)
        gi[i, i] = 1
        for m in range(4):
            e = np.zeros(4, dtype=complex)
            e[m] = 1
            basis.append((i, m))
            inputs.append(np.kron(np.kron(e.reshape(2, 2), ground), gi))
    outs = integrate_sfb_cnot_oracle(params, np.array(inputs), gate_time, levels=levels, nsteps=nsteps)
    k = np.zeros((2, 2, 4, 4), dtype=complex)
    for (i, m), rho in zip(basis, outs):
        r = rho.reshape(2, g, g, 2, g, g)
        anc = np.einsum("abcdbf->acdf", r)  # trace ancilla gauge
        for jj in range(g):
            j = min(jj, 1)
            k[i, j, :, m] += anc[:, jj, :, jj].ravel()
    return k


def oracle_gauge_coherence(params: CatParams, gate_time: float | None = None,
                           levels: int = 2) -> float:
    """Largest data-gauge off-diagonal element, relative to the diagonal, after one CNOT
    started from |+><+| with the data gauge in an incoherent mixture."""
    g = levels
    ground = np.zeros((g, g), dtype=complex)
    ground[0, 0] = 1
    mix = np.zeros((g, g), dtype=complex)
    mix[0, 0] = mix[1, 1] = 0.5
    rho = np.kron(np.kron(_PLUS, ground), mix)
    out = integrate_sfb_cnot_oracle(params, rho, gate_time, levels=levels)
    r = out.reshape(2, g, g, 2, g, g)
    dgauge = np.einsum("abcabf->cf", r)
    diag = np.abs(np.diag(dgauge)).max()
    off = np.abs(dgauge - np.diag(np.diag(dgauge))).max()
    return float(off / diag)


# ---------------------------------------------------------------------------
# classical gauge-bit table


def _prob(op: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.trace(op @ rho)))


@dataclass(frozen=True)
class LeakageTable:
    """Classical gauge-bit model of one parity check.

    ``p_trans[i, j]``: probability that a data gauge bit goes i -> j during one
    CNOT (independent of the ancilla state).
    ``single[i, j, e]``: joint probability of transition i -> j and ancilla
    X-outcome error e after one CNOT started from |+>.
    ``joint[i, j, i2, j2]``: probability of an erroneous X measurement together
    with transitions i -> j (first CNOT) and i2 -> j2 (second CNOT).
    ``p_meas_err`` is ``joint`` conditioned on the two transitions.
    """

    alpha_sq: float
    eta: float
    theta: float
    gate_time: float
    nsteps: int
    p_trans: np.ndarray
    single: np.ndarray
    joint: np.ndarray
    source: str = "reduced"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def p_meas_err(self) -> np.ndarray:
        denom = self.p_trans[:, :, None, None] * self.p_trans[None, None, :, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(denom > 0, self.joint / np.where(denom > 0, denom, 1.0), 0.0)
        return np.clip(cond, 0.0, 1.0)

    def transition_matrix(self, i: int, i2: int) -> np.ndarray:
        """P(j, j2 | i, i2)."""
        return np.outer(self.p_trans[i], self.p_trans[i2])

    def marginal_meas_err(self, i: int, i2: int) -> float:
        """Measurement error probability given the initial gauge bits."""
        return float(self.joint[i, :, i2, :].sum())

    def decorrelated(self, p_err: float | None = None) -> "LeakageTable":
        """Copy whose measurement error ignores the gauge bits.

        The constant error probability defaults to the one with both
        neighbouring gauge bits unexcited.  Transitions are unchanged.
        """
        p = self.marginal_meas_err(0, 0) if p_err is None else float(p_err)
        joint = p * self.p_trans[:, :, None, None] * self.p_trans[None, None, :, :]
        return replace(self, joint=joint, source=self.source + "-decorrelated")

    def relaxation_rate(self) -> float:
        return 4.0 * self.alpha_sq

    def to_dict(self) -> dict:
        return {
            "format_version": TABLE_FORMAT_VERSION,
            "params": {"alpha_sq": self.alpha_sq, "eta": self.eta, "theta": self.theta},
            "gate_time": self.gate_time,
            "nsteps": self.nsteps,
            "source": self.source,
            "p_trans": self.p_trans.tolist(),
            "single": self.single.tolist(),
            "joint": self.joint.tolist(),
            "p_meas_err": self.p_meas_err.tolist(),
            "entries": [
                {"i": i, "j": j, "i2": i2, "j2": j2,
                 "p_joint": float(self.joint[i, j, i2, j2]),
                 "p_meas_err": float(self.p_meas_err[i, j, i2, j2])}
                for i in range(2) for j in range(2) for i2 in range(2) for j2 in range(2)
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LeakageTable":
        if data.get("format_version") != TABLE_FORMAT_VERSION:
            raise ValueError(f"unsupported leakage table version {data.get('format_version')}")
        p = data["params"]
        return cls(alpha_sq=p["alpha_sq"], eta=p["eta"], theta=p["theta"],
                   gate_time=data["gate_time"], nsteps=data["nsteps"],
                   p_trans=np.array(data["p_trans"]), single=np.array(data["single"]),
                   joint=np.array(data["joint"]), source=data.get("source", "reduced"),
                   meta=data.get("meta", {}))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path

    @classmethod
    def load(cls, path: str | Path) -> "LeakageTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


def table_from_kraus(kraus: np.ndarray, params: CatParams, gate_time: float, nsteps: int,
                     source: str) -> LeakageTable:
    p_trans = np.zeros((2, 2))
    single = np.zeros((2, 2, 2))
    joint = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            after1 = apply_kraus(kraus[i, j], _PLUS)
            p_trans[i, j] = np.trace(after1).real
            single[i, j, 0] = _prob(_PLUS, after1)
            single[i, j, 1] = _prob(_MINUS, after1)
            for i2 in range(2):
                for j2 in range(2):
                    after2 = apply_kraus(kraus[i2, j2], after1)
                    joint[i, j, i2, j2] = _prob(_MINUS, after2)
    sums = p_trans.sum(axis=1)
    if np.abs(sums - 1).max() > TRACE_TOL:
        raise IntegrationError(f"gauge transition rows do not sum to 1: {sums}")
    p_trans = p_trans / sums[:, None]
    return LeakageTable(alpha_sq=params.alpha_sq, eta=params.eta, theta=params.theta,
                        gate_time=gate_time, nsteps=nsteps, p_trans=p_trans,
                        single=np.clip(single, 0, 1), joint=np.clip(joint, 0, 1), source=source,
                        meta={"r1": reduced_rates(params, gate_time)[0],
                              "r2": reduced_rates(params, gate_time)[1]})


def build_leakage_table(params: CatParams, gate_time: float | None = None,
                        nsteps: int = DEFAULT_STEPS, source: str = "reduced") -> LeakageTable:
    """Gauge-bit transition and conditional measurement-error table.

    The ancilla starts in |+><+|, undergoes the first CNOT against gauge bit i
    and the second against gauge bit i2.  The ancilla refresh slot between the
    two CNOTs leaves the ancilla qubit unchanged in this model (kappa_1 = 0),
    so the two Kraus maps compose directly.
    """
    if params.theta < 1:
        raise ValueError("theta must be >= 1")
    t_gate = 1.0 / params.kappa2_a if gate_time is None else gate_time
    if source == "reduced":
        kraus = kraus_blocks(reduced_propagator(params, t_gate, nsteps))
    elif source == "oracle":
        kraus = oracle_kraus(params, t_gate, nsteps=nsteps)
    else:
        raise ValueError(f"unknown table source {source!r}")
    return table_from_kraus(kraus, params, t_gate, nsteps, source)


def table_cache_key(params: CatParams, nsteps: int = DEFAULT_STEPS, source: str = "reduced") -> str:
    payload = json.dumps({"alpha_sq": float(params.alpha_sq), "eta": float(params.eta),
                          "theta": float(params.theta), "kappa2_d": float(params.kappa2_d),
                          "nsteps": int(nsteps), "source": source,
                          "version": TABLE_FORMAT_VERSION}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:20]


def default_cache_dir() -> Path:
    env = os.environ.get("REPCAT_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "repcat"


class CacheMiss(LookupError):
    pass


def cached_leakage_table(params: CatParams, cache_dir: str | Path | None = None, *,
                         nsteps: int = DEFAULT_STEPS, generate: bool | None = None) -> LeakageTable:
    """Load the table for ``params`` from the cache, building it on a miss.

    With ``generate`` unset, a miss builds the table unless the environment
    variable REPCAT_NO_GENERATE is set to a non-empty value.
    """
    if generate is None:
        generate = not os.environ.get("REPCAT_NO_GENERATE")
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"gauge-{table_cache_key(params, nsteps)}.json"
    if path.exists():
        return LeakageTable.load(path)
    if not generate:
        raise CacheMiss(f"no cached leakage table at {path}")
    table = build_leakage_table(params, nsteps=nsteps)
    try:
        table.save(path)
    except OSError as exc:  # read-only cache is not fatal
        logger.warning("could not write leakage table cache %s: %s", path, exc)
    return table


# ---------------------------------------------------------------------------
# repeated single-stabilizer measurement


@dataclass(frozen=True)
class RepeatedMeasurementResult:
    theta: int
    per_round: np.ndarray
    majority_failure: float
    independent_failure: float
    model: str


TIE_RULES = ("success", "failure")


def _majority_fail(counts: np.ndarray, rounds: int, ties: str = "success") -> float:
    # failure = strictly more wrong than right outcomes; ``ties`` decides even splits
    k = np.arange(rounds + 1)
    wrong = 2 * k > rounds
    if ties == "failure":
        wrong |= 2 * k == rounds
    return float(counts[wrong].sum())


def _independent_counts(per_round) -> np.ndarray:
    dist = np.zeros(len(per_round) + 1)
    dist[0] = 1.0
    for p in per_round:
        nxt = dist * (1 - p)
        nxt[1:] += dist[:-1] * p
        dist = nxt
    return dist


def repeated_measurement_sim(params: CatParams, table: LeakageTable | None, theta: int,
                             model: str = "classical", ties: str = "success") -> RepeatedMeasurementResult:
    """Toy circuit: ``theta`` back-to-back CNOT + X-measurement rounds on one data qubit.

    The ancilla is re-prepared in |+> every round while the data gauge bit
    persists.  ``model="classical"`` propagates the gauge bit as a classical
    Markov chain through ``table``; ``model="quantum"`` keeps the full data
    gauge density matrix through the truncated oracle.  A majority of wrong
    outcomes is a failure; ``ties="failure"`` also counts even splits.
    """
    theta = int(theta)
    if theta < 1:
        raise ValueError("theta must be a positive integer")
    if ties not in TIE_RULES:
        raise ValueError(f"ties must be one of {TIE_RULES}")
    if model == "classical":
        if table is None:
            raise ValueError("classical model needs a leakage table")
        if abs(table.theta - theta) > 1e-12:
            raise ValueError(f"table built for theta={table.theta}, requested {theta}")
        per_round, counts = _classical_rounds(table.single, theta)
    elif model == "quantum":
        per_round, counts = _quantum_rounds(params, theta)
    else:
        raise ValueError(f"unknown model {model!r}")
    indep = _independent_counts(per_round)
    return RepeatedMeasurementResult(theta=theta, per_round=np.array(per_round),
                                     majority_failure=_majority_fail(counts, theta, ties),
                                     independent_failure=_majority_fail(indep, theta, ties), model=model)


def _classical_rounds(single: np.ndarray, rounds: int):
    # dist[g, c]: probability of gauge bit g with c erroneous outcomes so far
    dist = np.zeros((2, rounds + 1))
    dist[0, 0] = 1.0
    per_round = []
    for _ in range(rounds):
        nxt = np.zeros_like(dist)
        perr = 0.0
        for i in range(2):
            for j in range(2):
                nxt[j, :] += dist[i, :] * single[i, j, 0]
                nxt[j, 1:] += dist[i, :-1] * single[i, j, 1]
                perr += dist[i].sum() * single[i, j, 1]
        dist = nxt
        per_round.append(perr)
    return per_round, dist.sum(axis=0)


def _quantum_rounds(params: CatParams, rounds: int):
    g = 2
    ground = np.zeros((g, g), dtype=complex)
    ground[0, 0] = 1
    inputs = []
    for m in range(4):
        e = np.zeros(4, dtype=complex)
        e[m] = 1
        inputs.append(np.kron(np.kron(_PLUS, ground), e.reshape(2, 2)))
    outs = integrate_sfb_cnot_oracle(params, np.array(inputs), levels=g)
    # maps[o]: data-gauge superoperator for ancilla outcome o (0 = correct '+')
    maps = np.zeros((2, 4, 4), dtype=complex)
    for m, rho in enumerate(outs):
        r = rho.reshape(2, g, g, 2, g, g)
        anc_dg = np.einsum("abcdbf->acdf", r)  # ancilla x data gauge
        for o, proj in enumerate((_PLUS, _MINUS)):
            cond = np.einsum("ab,acbd->cd", proj.T, anc_dg)
            maps[o, :, m] = cond.ravel()
    states = np.zeros((rounds + 1, 4), dtype=complex)
    states[0] = np.array([1, 0, 0, 0], dtype=complex)
    per_round = []
    for _ in range(rounds):
        nxt = np.zeros_like(states)
        nxt += states @ maps[0].T
        nxt[1:] += states[:-1] @ maps[1].T
        perr = float(np.real(sum(np.trace((states[c] @ maps[1].T).reshape(2, 2))
                                 for c in range(rounds + 1))))
        states = nxt
        per_round.append(perr)
    counts = np.real(states[:, 0] + states[:, 3])
    return per_round, counts
