"""Per-operation phase-flip and bit-flip probabilities for cat-qubit QEC circuits.

Time is measured in units of 1/kappa_2 of the data qubits.  All functions are
pure and operate on immutable dataclasses.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

# Numerical fits of the adiabatic CNOT error model.
NONADIABATIC_COEFF = 0.159
OPTIMAL_TIME_COEFF = 0.282
FAST_BITFLIP_PREFACTOR = 0.5
SLOW_BITFLIP_SQRT = 5.58
SLOW_BITFLIP_LINEAR = 1.68

MAX_PROBABILITY = 0.5


class ModelValidityError(ValueError):
    """A derived error probability left the perturbative regime (> 0.5)."""


class Strategy(str, enum.Enum):
    PHENOMENOLOGICAL = "phenom"
    OPTIMAL_TIME = "optimal-time"
    FAST_SYMMETRIC = "fast-symmetric"
    FAST_ASYMMETRIC = "fast-asymmetric"

    @classmethod
    def parse(cls, value: "str | Strategy") -> "Strategy":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "phenomenological": cls.PHENOMENOLOGICAL,
            "optimal": cls.OPTIMAL_TIME,
            "optimaltime": cls.OPTIMAL_TIME,
            "fast": cls.FAST_SYMMETRIC,
            "fastsymmetric": cls.FAST_SYMMETRIC,
            "symmetric": cls.FAST_SYMMETRIC,
            "asym": cls.FAST_ASYMMETRIC,
            "asymmetric": cls.FAST_ASYMMETRIC,
            "fastasymmetric": cls.FAST_ASYMMETRIC,
        }
        for member in cls:
            if member.value == key:
                return member
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown strategy {value!r}")

    @property
    def is_fast(self) -> bool:
        return self in (Strategy.FAST_SYMMETRIC, Strategy.FAST_ASYMMETRIC)


@dataclass(frozen=True)
class CatParams:
    """Physical parameters of the data and ancilla cat qubits.

    ``eta`` is kappa_1/kappa_2, identical for data and ancilla; ``theta`` is the
    ratio of ancilla to data two-photon dissipation rates.
    """

    alpha_sq: float
    eta: float
    kappa2_d: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if not self.alpha_sq > 0:
            raise ValueError(f"alpha_sq must be > 0, got {self.alpha_sq}")
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.kappa2_d > 0:
            raise ValueError(f"kappa2_d must be > 0, got {self.kappa2_d}")
        if not self.theta >= 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")

    @property
    def kappa1_d(self) -> float:
        return self.eta * self.kappa2_d

    @property
    def kappa2_a(self) -> float:
        return self.theta * self.kappa2_d

    @property
    def kappa1_a(self) -> float:
        return self.eta * self.kappa2_a

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CnotNoise:
    gate_time: float
    p_za: float
    p_zd: float
    p_zazd: float
    p_x: float
    # Non-adiabatic share of p_za; the asymmetric sampler replaces it with
    # the gauge-bit leakage model.
    p_za_nonadiabatic: float = 0.0

    @property
    def p_total(self) -> float:
        return self.p_za + self.p_zd + self.p_zazd


@dataclass(frozen=True)
class NoiseModel:
    strategy: Strategy
    cnot: CnotNoise | None
    p_prep: float
    p_meas: float
    p_idle_data: float
    p_idle_anc: float
    step_time: float
    theta: int = 1
    # Data phase-flip probability of the 1/kappa2_d refresh closing each
    # asymmetric cycle.
    p_data_refresh: float = 0.0
    params: CatParams | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {
            "strategy": self.strategy.value,
            "cnot": None if self.cnot is None else asdict(self.cnot),
            "p_prep": self.p_prep,
            "p_meas": self.p_meas,
            "p_idle_data": self.p_idle_data,
            "p_idle_anc": self.p_idle_anc,
            "step_time": self.step_time,
            "theta": self.theta,
            "p_data_refresh": self.p_data_refresh,
        }
        if self.params is not None:
            out["params"] = self.params.to_dict()
        return out


@dataclass(frozen=True)
class PhenomModel:
    p_data: float
    p_meas: float


def _check(name: str, p: float, limit: float = MAX_PROBABILITY) -> float:
    if not (0.0 <= p <= limit) or math.isnan(p):
        raise ModelValidityError(f"{name}={p:.6g} outside [0, {limit}]: parameters outside model validity")
    return p


def optimal_cnot_time(params: CatParams) -> float:
    """Gate time minimising the total CNOT phase-flip probability."""
    if params.eta <= 0:
        raise ValueError("optimal CNOT time diverges for eta = 0")
    k1, k2 = params.kappa1_d, params.kappa2_d
    return OPTIMAL_TIME_COEFF / (params.alpha_sq * math.sqrt(k1 * k2))


def bitflip_fast(alpha_sq: float) -> float:
    return FAST_BITFLIP_PREFACTOR * math.exp(-2.0 * alpha_sq)


def bitflip_slow(alpha_sq: float, eta: float) -> float:
    return (SLOW_BITFLIP_SQRT * math.sqrt(eta) + SLOW_BITFLIP_LINEAR * eta) * math.exp(-2.0 * alpha_sq)


def cnot_noise(params: CatParams, gate_time: float, *, asymmetric: bool = False,
               fast: bool = True) -> CnotNoise:
    """CNOT phase-flip probabilities for a gate of duration ``gate_time``.

    With ``asymmetric`` the ancilla (control) terms use the ancilla rates and
    the data (target) terms the data rates; otherwise both use the data rates.
    ``fast`` selects the bit-flip fit.
    """
    if not gate_time > 0:
        raise ValueError(f"gate_time must be > 0, got {gate_time}")
    a2 = params.alpha_sq
    if asymmetric:
        k1a, k2a = params.kappa1_a, params.kappa2_a
    else:
        k1a, k2a = params.kappa1_d, params.kappa2_d
    k1d = params.kappa1_d
    nonadiabatic = NONADIABATIC_COEFF / (a2 * k2a * gate_time)
    p_za = a2 * k1a * gate_time + nonadiabatic
    p_zd = 0.5 * a2 * k1d * gate_time
    p_x = bitflip_fast(a2) if fast else bitflip_slow(a2, params.eta)
    _check("p_za", p_za)
    _check("p_zd", p_zd)
    if p_za + 2 * p_zd > 1:
        raise ModelValidityError("CNOT phase-flip probabilities sum above 1")
    return CnotNoise(gate_time=gate_time, p_za=p_za, p_zd=p_zd, p_zazd=p_zd, p_x=_check("p_x", p_x),
                     p_za_nonadiabatic=nonadiabatic)


def build_noise_model(params: CatParams, strategy: Strategy | str,
                      gate_time: float | None = None) -> NoiseModel:
    """Per-operation error table for one QEC strategy.

    ``gate_time`` overrides the strategy's default CNOT duration (T* for the
    optimal-time strategy, 1/kappa_2 otherwise); every other step lasts as
    long as the CNOT.
    """
    strategy = Strategy.parse(strategy)
    a2 = params.alpha_sq
    if strategy is Strategy.PHENOMENOLOGICAL:
        raise ValueError("use phenom_model() for the phenomenological strategy")

    if strategy is Strategy.OPTIMAL_TIME:
        t = optimal_cnot_time(params) if gate_time is None else gate_time
        cnot = cnot_noise(params, t, fast=False)
        p_step = _check("p_step", a2 * params.kappa1_d * t)
        return NoiseModel(strategy, cnot, p_prep=p_step, p_meas=p_step, p_idle_data=p_step,
                          p_idle_anc=p_step, step_time=t, params=params)

    if strategy is Strategy.FAST_SYMMETRIC:
        t = 1.0 / params.kappa2_d if gate_time is None else gate_time
        cnot = cnot_noise(params, t, fast=True)
        p_step = _check("p_step", a2 * params.kappa1_d * t)
        return NoiseModel(strategy, cnot, p_prep=p_step, p_meas=p_step, p_idle_data=p_step,
                          p_idle_anc=p_step, step_time=t, params=params)

    theta = params.theta
    if theta != int(theta):
        raise ValueError(f"fast-asymmetric sampling needs an integer theta, got {theta}")
    t = 1.0 / params.kappa2_a if gate_time is None else gate_time
    cnot = cnot_noise(params, t, asymmetric=True, fast=True)
    p_anc = _check("p_anc_step", a2 * params.kappa1_a * t)
    p_data = _check("p_data_step", a2 * params.kappa1_d * t)
    p_refresh = _check("p_data_refresh", a2 * params.kappa1_d / params.kappa2_d)
    return NoiseModel(strategy, cnot, p_prep=p_anc, p_meas=p_anc, p_idle_data=p_data,
                      p_idle_anc=p_anc, step_time=t, theta=int(theta), p_data_refresh=p_refresh,
                      params=params)


def phenom_model(p_data: float, p_meas: float) -> PhenomModel:
    for name, p in (("p_data", p_data), ("p_meas", p_meas)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    return PhenomModel(float(p_data), float(p_meas))


def per_cycle_rates(noise: NoiseModel) -> tuple[float, float]:
    """Expected number of (data, measurement) phase flips per round.

    Sums every fault location touching one interior data qubit, respectively
    one ancilla, over a single stabilizer round; the joint Z_aZ_d fault counts
    once for each qubit it touches.
    """
    c = noise.cnot
    if noise.strategy is Strategy.OPTIMAL_TIME:
        data = noise.p_idle_data + 2 * (c.p_zd + c.p_zazd) + noise.p_idle_data
        meas = noise.p_prep + 2 * (c.p_za + c.p_zazd) + noise.p_meas
        return data, meas
    if noise.strategy is Strategy.FAST_SYMMETRIC:
        data = 3 * noise.p_idle_data + 2 * (c.p_zd + c.p_zazd)
        meas = noise.p_prep + noise.p_idle_anc + noise.p_meas + 2 * (c.p_za + c.p_zazd)
        return data, meas
    # Asymmetric: one fast round. The sampler replaces the non-adiabatic
    # ancilla term with the leakage table; the fitted value is kept here.
    data = 3 * noise.p_idle_data + 2 * (c.p_zd + c.p_zazd)
    meas = noise.p_prep + noise.p_idle_anc + noise.p_meas + 2 * (c.p_za + c.p_zazd)
    return data, meas


def logical_bitflip(d: int, noise_or_pcnot: NoiseModel | float) -> float:
    """Per-cycle logical bit-flip bound 2(d-1) p_X^CNOT."""
    p_x = noise_or_pcnot.cnot.p_x if isinstance(noise_or_pcnot, NoiseModel) else float(noise_or_pcnot)
    return 2 * (d - 1) * p_x


def format_table(noise: NoiseModel) -> str:
    rows = [("strategy", noise.strategy.value), ("step_time", noise.step_time)]
    if noise.cnot is not None:
        for k, v in asdict(noise.cnot).items():
            rows.append((f"cnot.{k}", v))
    for k in ("p_prep", "p_meas", "p_idle_data", "p_idle_anc", "theta", "p_data_refresh"):
        rows.append((k, getattr(noise, k)))
    p, q = per_cycle_rates(noise)
    rows += [("per_round.p_data", p), ("per_round.p_meas", q)]
    width = max(len(r[0]) for r in rows)
    lines = []
    for name, value in rows:
        text = value if isinstance(value, str) else f"{value:.6g}"
        lines.append(f"{name:<{width}}  {text}")
    return "\n".join(lines)
