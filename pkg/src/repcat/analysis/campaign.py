"""Monte Carlo campaigns: sample and decode until a failure or shot cap is hit."""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from ..circuit import Circuit, CircuitSpec, build_circuit, default_rounds
from ..decoder.graph import DecodingGraph
from ..decoder.matching import decode, decode_batch
from ..error_model import (CatParams, Strategy, bitflip_fast, bitflip_slow, build_noise_model,
                           logical_bitflip, phenom_model)
from ..gauge import cached_leakage_table
from ..sampler import BLOCK, Sampler

logger = logging.getLogger(__name__)

CAMPAIGN_FORMAT_VERSION = 1
CIRCUIT_CAPS = (500, 10 ** 6)
PHENOM_CAPS = (1000, 10 ** 7)


@dataclass(frozen=True)
class PointSpec:
    """One simulation point: strategy, distance and noise parameters."""

    strategy: Strategy
    d: int
    alpha_sq: float | None = None
    eta: float | None = None
    theta: int = 1
    p_data: float | None = None
    p_meas: float | None = None
    rounds: int | None = None

    def __post_init__(self):
        s = Strategy.parse(self.strategy)
        object.__setattr__(self, "strategy", s)
        if s is Strategy.PHENOMENOLOGICAL:
            if self.p_data is None or self.p_meas is None:
                raise ValueError("phenomenological point needs p_data and p_meas")
        elif self.alpha_sq is None or self.eta is None:
            raise ValueError(f"{s.value} point needs alpha_sq and eta")
        if self.rounds is None:
            object.__setattr__(self, "rounds", default_rounds(self.d, s, self.theta))

    @property
    def noise_value(self) -> float:
        """The swept noise parameter: p_data (phenomenological) or eta."""
        return self.p_data if self.strategy is Strategy.PHENOMENOLOGICAL else self.eta

    @property
    def params(self) -> CatParams | None:
        if self.strategy is Strategy.PHENOMENOLOGICAL:
            return None
        return CatParams(self.alpha_sq, self.eta, theta=self.theta)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["strategy"] = self.strategy.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PointSpec":
        return cls(**data)

    def default_caps(self) -> tuple[int, int]:
        return PHENOM_CAPS if self.strategy is Strategy.PHENOMENOLOGICAL else CIRCUIT_CAPS

    def bit_flip_per_cycle(self) -> float:
        """Analytic logical bit-flip probability per cycle (0 for phenomenological)."""
        if self.strategy is Strategy.PHENOMENOLOGICAL:
            return 0.0
        if self.strategy.is_fast:
            p_x = bitflip_fast(self.alpha_sq)
        else:
            p_x = bitflip_slow(self.alpha_sq, self.eta)
        return logical_bitflip(self.d, p_x)


@dataclass(frozen=True)
class CampaignPoint:
    spec: PointSpec
    shots: int
    failures: int
    seed: int
    stop_reason: str
    max_failures: int
    max_shots: int
    wall_time: float = 0.0

    def __post_init__(self):
        if not 0 <= self.failures <= self.shots:
            raise ValueError("need 0 <= failures <= shots")

    @property
    def params(self) -> CatParams | None:
        return self.spec.params

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def p_zl_hat(self) -> float:
        return self.failures / self.shots if self.shots else float("nan")

    @property
    def stderr(self) -> float:
        p = self.p_zl_hat
        return math.sqrt(p * (1 - p) / self.shots) if self.shots else float("nan")

    @property
    def p_xl(self) -> float:
        return self.spec.bit_flip_per_cycle()

    def to_row(self) -> dict:
        s = self.spec
        return {
            "strategy": s.strategy.value, "d": s.d, "rounds": s.rounds, "alpha_sq": s.alpha_sq,
            "eta": s.eta, "theta": s.theta, "p_data": s.p_data, "p_meas": s.p_meas,
            "seed": self.seed, "shots": self.shots, "failures": self.failures,
            "p_zl_hat": self.p_zl_hat, "stderr": self.stderr, "stop_reason": self.stop_reason,
            "p_xl": self.p_xl,
        }

    def to_dict(self) -> dict:
        out = {"spec": self.spec.to_dict()}
        for k in ("shots", "failures", "seed", "stop_reason", "max_failures", "max_shots", "wall_time"):
            out[k] = getattr(self, k)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignPoint":
        data = dict(data)
        data["spec"] = PointSpec.from_dict(data["spec"])
        return cls(**data)


def build_point_circuit(spec: PointSpec, cache_dir=None) -> Circuit:
    if spec.strategy is Strategy.PHENOMENOLOGICAL:
        noise = phenom_model(spec.p_data, spec.p_meas)
        return build_circuit(CircuitSpec(spec.d, spec.rounds, spec.strategy, noise))
    params = spec.params
    noise = build_noise_model(params, spec.strategy)
    table = None
    if spec.strategy is Strategy.FAST_ASYMMETRIC:
        table = cached_leakage_table(params, cache_dir)
    return build_circuit(CircuitSpec(spec.d, spec.rounds, spec.strategy, noise), table)


# worker state for process pools
_WORKER: dict = {}


def _init_worker(spec_dict, seed, cache_dir):
    spec = PointSpec.from_dict(spec_dict)
    circuit = build_point_circuit(spec, cache_dir)
    _WORKER["sampler"] = Sampler(circuit, seed)
    _WORKER["graph"] = _graph_or_none(circuit)


def _graph_or_none(circuit: Circuit) -> DecodingGraph | None:
    prob, _, _ = circuit.graph_faults()
    if not np.any(prob > 0):
        return None
    return DecodingGraph.from_circuit(circuit)


def _block_failures(sampler: Sampler, graph: DecodingGraph | None, index: int, size: int) -> np.ndarray:
    batch = sampler.block(index, size)
    if graph is None:
        return batch.logical.astype(bool)
    pred, _ = decode_batch(graph, batch.dets)
    return pred != batch.logical


def _worker_block(args):
    index, size = args
    return _block_failures(_WORKER["sampler"], _WORKER["graph"], index, size)


def _point_cache_path(cache_dir: Path, spec: PointSpec, seed: int, caps: tuple[int, int]) -> Path:
    key = json.dumps({"spec": spec.to_dict(), "seed": seed, "caps": list(caps),
                      "version": CAMPAIGN_FORMAT_VERSION}, sort_keys=True)
    return cache_dir / "campaigns" / (hashlib.sha256(key.encode()).hexdigest()[:24] + ".json")


def run_point(spec: PointSpec, seed: int, max_failures: int | None = None,
              max_shots: int | None = None, *, workers: int = 1, cache_dir=None,
              result_cache=None) -> CampaignPoint:
    """Sample shots of one point until ``max_failures`` failures or ``max_shots`` shots.

    The shot count stops exactly at the shot producing the last allowed
    failure, so the result does not depend on block size or worker count.
    ``result_cache`` is a directory for memoising finished points.
    """
    if seed is None or seed < 0:
        raise ValueError("a non-negative seed is required")
    cap_f, cap_n = spec.default_caps()
    cap_f = cap_f if max_failures is None else int(max_failures)
    cap_n = cap_n if max_shots is None else int(max_shots)
    if cap_f < 1 or cap_n < 1:
        raise ValueError("caps must be positive")
    cached = None
    if result_cache is not None:
        cached = _point_cache_path(Path(result_cache), spec, seed, (cap_f, cap_n))
        if cached.exists():
            return CampaignPoint.from_dict(json.loads(cached.read_text()))

    t0 = time.perf_counter()
    n_blocks = -(-cap_n // BLOCK)
    tasks = [(b, min(BLOCK, cap_n - b * BLOCK)) for b in range(n_blocks)]
    shots = failures = 0
    reason = "max_shots"

    def consume(fails: np.ndarray, size: int) -> bool:
        nonlocal shots, failures, reason
        total = failures + int(fails.sum())
        if total >= cap_f:
            idx = np.flatnonzero(fails)[cap_f - failures - 1]
            shots += int(idx) + 1
            failures = cap_f
            reason = "max_failures"
            return True
        shots += size
        failures = total
        return False

    if workers <= 1:
        circuit = build_point_circuit(spec, cache_dir)
        sampler = Sampler(circuit, seed)
        graph = _graph_or_none(circuit)
        if graph is None:
            # noiseless circuit: every shot succeeds
            shots = cap_n
        else:
            for b, size in tasks:
                if consume(_block_failures(sampler, graph, b, size), size):
                    break
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(spec.to_dict(), seed, cache_dir)) as pool:
            chunk = 4 * workers
            done = False
            for start in range(0, len(tasks), chunk):
                part = tasks[start:start + chunk]
                for (b, size), fails in zip(part, pool.map(_worker_block, part)):
                    if consume(fails, size):
                        done = True
                        break
                if done:
                    break
    if shots >= cap_n and reason != "max_failures":
        shots = cap_n
    point = CampaignPoint(spec=spec, shots=shots, failures=failures, seed=seed, stop_reason=reason,
                          max_failures=cap_f, max_shots=cap_n,
                          wall_time=round(time.perf_counter() - t0, 3))
    logger.info("%s d=%d x=%.4g: %d/%d failures (%s)", spec.strategy.value, spec.d, spec.noise_value,
                failures, shots, reason)
    if cached is not None:
        cached.parent.mkdir(parents=True, exist_ok=True)
        cached.write_text(json.dumps(point.to_dict(), sort_keys=True))
    return point


def run_campaign(specs, seed: int, max_failures: int | None = None, max_shots: int | None = None, *,
                 workers: int = 1, cache_dir=None, result_cache=None) -> list[CampaignPoint]:
    """Run every point with the same seed (each point has its own RNG key)."""
    return [run_point(s, seed, max_failures, max_shots, workers=workers, cache_dir=cache_dir,
                      result_cache=result_cache) for s in specs]


def grid_specs(strategy, distances, noise_values, *, alpha_sq=None, theta=1, p_meas=None,
               rounds=None) -> list[PointSpec]:
    """Cartesian grid of points over distances and the swept noise parameter."""
    strategy = Strategy.parse(strategy)
    out = []
    for d, x in itertools.product(distances, noise_values):
        if strategy is Strategy.PHENOMENOLOGICAL:
            out.append(PointSpec(strategy, d, p_data=x, p_meas=p_meas, rounds=rounds))
        else:
            out.append(PointSpec(strategy, d, alpha_sq=alpha_sq, eta=x, theta=theta, rounds=rounds))
    return out


# ---------------------------------------------------------------------------
# exact failure probability for small circuits


def exact_failure_probability(circuit: Circuit, min_prob: float = 1e-8) -> float:
    """Logical failure probability summed over every fault subset of probability >= min_prob.

    Subsets are enumerated depth-first with pruning; each distinct syndrome is
    decoded once.  Only independent faults are supported (no leakage model).
    """
    if circuit.leak_marginal is not None:
        raise ValueError("exact enumeration does not support leakage-correlated circuits")
    graph = DecodingGraph.from_circuit(circuit)
    prob = circuit.prob
    order = np.argsort(-prob)
    prob = prob[order]
    dets = circuit.dets[order]
    logical = circuit.logical[order]
    n = len(prob)
    q = 1.0 - prob
    base = float(np.prod(q))
    ratio = prob / q
    nd = circuit.num_detectors
    memo: dict[bytes, int] = {}
    total = 0.0

    def failure(events: np.ndarray, flip: int) -> int:
        key = events.tobytes()
        if key not in memo:
            memo[key] = decode(graph, events).logical
        return int(memo[key] != flip)

    events = np.zeros(nd, dtype=np.uint8)

    def visit(start: int, weight: float, flip: int):
        nonlocal total
        if failure(events, flip):
            total += weight
        for f in range(start, n):
            w = weight * ratio[f]
            if w < min_prob:
                # faults are sorted by probability, later ones are no likelier
                break
            for x in dets[f]:
                if x >= 0:
                    events[x] ^= 1
            visit(f + 1, w, flip ^ int(logical[f]))
            for x in dets[f]:
                if x >= 0:
                    events[x] ^= 1

    visit(0, base, 0)
    return total


def with_rounds(spec: PointSpec, rounds: int) -> PointSpec:
    return replace(spec, rounds=rounds)
