"""End-to-end acceptance checks.

The campaign-backed checks reuse the user result cache (``repcat reproduce``
fills it), so a warm cache makes them cheap.  Each check prints a single
PASS/FAIL line, collected again in the terminal summary.
"""
import itertools
import math

import numpy as np
import pytest

from repcat.analysis import experiments as ex
from repcat.analysis.campaign import PointSpec, exact_failure_probability, run_point
from repcat.analysis.reproduce import preset_config
from repcat.circuit import (ANCILLA, CNOT_ZA, CNOT_ZAZD_HOOK, CNOT_ZAZD_SPACE, CNOT_ZD, DATA_AFTER,
                            DATA_BEFORE, DATA_BETWEEN, CircuitSpec, build_circuit)
from repcat.decoder.graph import DecodingGraph
from repcat.decoder.matching import _floyd_warshall_layered, brute_force_decode, decode_batch
from repcat.error_model import CatParams, build_noise_model, phenom_model
from repcat.gauge import (TRACE_TOL, apply_kraus, build_leakage_table, cached_leakage_table,
                          default_cache_dir, kraus_blocks, oracle_kraus, reduced_propagator,
                          repeated_measurement_sim)
from repcat.sampler import BLOCK, Sampler

pytestmark = pytest.mark.acceptance


def within(value, target, rel):
    return abs(value - target) <= rel * target


def threshold_fits(fig):
    cache = default_cache_dir()
    results = ex.run_threshold(preset_config(fig), cache_dir=cache, result_cache=cache)
    return results


def single_fit(fig):
    (res,) = threshold_fits(fig)
    assert res.fit is not None, res.fit_error
    return res.fit


@pytest.fixture(scope="module")
def fig7():
    cache = default_cache_dir()
    return ex.run_overhead(preset_config("fig7"), cache_dir=cache, result_cache=cache)


def test_c01_optimal_time_threshold(report):
    fit = single_fit("fig3a")
    ok = within(fit.x_th, 7.6e-3, 0.2) and abs(fit.c - 0.258) <= 0.05
    report(1, ok, f"optimal-time eta_th={fit.x_th:.3e} (7.6e-3 +-20%), c={fit.c:.4f} (0.258 +-0.05)")


def test_c02_fast_symmetric_threshold(report):
    fit = single_fit("fig3b")
    ok = within(fit.x_th, 2.3e-3, 0.2) and abs(fit.c - 0.44) <= 0.05
    report(2, ok, f"fast-symmetric eta_th={fit.x_th:.3e} (2.3e-3 +-20%), c={fit.c:.4f} (0.44 +-0.05)")


def test_c03_phenomenological_curve(report):
    results = threshold_fits("fig2")
    assert all(r.fit is not None for r in results), [r.fit_error for r in results]
    q = [r.group.p_meas for r in results]
    th = [r.fit.x_th for r in results]
    cs = [r.fit.c for r in results]
    assert q == [0.01, 0.05, 0.1, 0.15, 0.2]
    monotone = all(b < a for a, b in zip(th, th[1:]))
    band = all(0.01 <= t <= 0.1 for qi, t in zip(q, th) if qi >= 0.1)
    c_ok = all(abs(c - 0.5) <= 0.1 for c in cs)
    report(3, monotone and band and c_ok,
           "p_data_th=" + ",".join(f"{t:.4f}" for t in th) + " c=" + ",".join(f"{c:.3f}" for c in cs))


def test_c04_repeated_measurements(report):
    maj, ind = {}, {}
    for theta in range(1, 16):
        params = CatParams(10.0, 0.0, theta=theta)
        res = repeated_measurement_sim(params, cached_leakage_table(params), theta)
        maj[theta], ind[theta] = res.majority_failure, res.independent_failure
    ok1 = 1.8e-2 / 2 <= maj[1] <= 1.8e-2 * 2
    ok11 = 2.9e-5 / 2 <= maj[11] <= 2.9e-5 * 2
    ordered = all(maj[t] >= ind[t] for t in maj)
    report(4, ok1 and ok11 and ordered,
           f"theta=1 {maj[1]:.3e} (1.8e-2 x/2), theta=11 {maj[11]:.3e} (2.9e-5 x/2), "
           f"correlated>=independent {ordered}")


def test_c05_asymmetric_threshold(report, fig7):
    results, _, _ = fig7
    th = {int(r.group.theta): r.fit.x_th for r in results if r.group.alpha_sq == 8.0 and r.fit}
    assert sorted(th) == [1, 5, 10, 20]
    ok = within(th[20], 1e-2, 0.3) and all(th[a] <= th[b] for a, b in zip([1, 5, 10], [5, 10, 20]))
    report(5, ok, "eta_th(theta)=" + ", ".join(f"{t}:{v:.3e}" for t, v in sorted(th.items()))
           + " (theta=20: 1e-2 +-30%)")


def test_c06_overhead_points(report, fig7):
    cache = default_cache_dir()
    _, _, sym = ex.run_overhead(preset_config("fig4"), cache_dir=cache, result_cache=cache)
    s = next(p for p in sym if p.query.eta == 1e-5)
    _, _, asym = fig7
    a = next(p for p in asym if p.query.eta == 1e-3 and p.query.theta == 20)
    ok_s = s.reachable and abs(s.d - 9) <= 2 and abs(s.alpha_sq - 14) <= 2
    ok_a = a.reachable and abs(a.d - 25) <= 4 and abs(a.alpha_sq - 16) <= 2
    report(6, ok_s and ok_a, f"fast-symmetric d={s.d} alpha_sq={s.alpha_sq} (9+-2, 14+-2); "
           f"fast-asymmetric d={a.d} alpha_sq={a.alpha_sq} (25+-4, 16+-2)")


def test_c07_decoder_exactness(report):
    rng = np.random.default_rng(7)
    mismatches = 0
    for d, rounds in itertools.product((3, 5), (3, 5)):
        c = build_circuit(CircuitSpec(d, rounds, "phenom", phenom_model(0.05, 0.05)))
        # small integer weights make every path weight exact in floating point
        w = rng.integers(1, 10, size=c.num_faults).astype(float)
        g = DecodingGraph(c.num_detectors, c.prob, c.dets, c.logical, weights=w)
        n = c.num_detectors
        events = np.zeros((10 ** 4, n), dtype=np.uint8)
        for row in events:
            row[rng.choice(n, rng.integers(0, min(n, 10) + 1), replace=False)] = 1
        _, weight = decode_batch(g, events)
        dist = _floyd_warshall_layered(g)
        for ev, wt in zip(events, weight):
            mismatches += wt != min(brute_force_decode(g, ev, dist=dist))
    # distance property: every single-round data error of weight <= (d-1)/2 is corrected
    uncorrected = 0
    for d in (3, 5, 7):
        c = build_circuit(CircuitSpec(d, d, "phenom", phenom_model(0.05, 0.05)))
        g = DecodingGraph.from_circuit(c)
        for r in range(d):
            data = np.flatnonzero((c.kind == DATA_BEFORE) & (c.round == r))
            assert len(data) == d
            subsets = [s for k in range((d - 1) // 2 + 1) for s in itertools.combinations(data, k)]
            events = np.zeros((len(subsets), c.num_detectors), dtype=np.uint8)
            flips = np.zeros(len(subsets), dtype=np.uint8)
            for i, s in enumerate(subsets):
                for f in s:
                    events[i, c.dets[f][c.dets[f] >= 0]] ^= 1
                    flips[i] ^= c.logical[f]
            pred, _ = decode_batch(g, events)
            uncorrected += int((pred != flips).sum())
    report(7, mismatches == 0 and uncorrected == 0,
           f"weight mismatches {mismatches} / 40000, uncorrected low-weight errors {uncorrected}")


def test_c08_sampler_calibration(report):
    alpha_sq, eta = 8.0, 1e-3
    c = build_circuit(CircuitSpec(3, 3, "fast-symmetric",
                                  build_noise_model(CatParams(alpha_sq, eta), "fast-symmetric")))
    sampler = Sampler(c, seed=11)
    shots = 10 ** 6
    hits = np.zeros(c.num_faults, dtype=np.int64)
    for b in range(math.ceil(shots / BLOCK)):
        hits += sampler.fault_hits(b, min(BLOCK, shots - b * BLOCK))
    data = np.isin(c.kind, [DATA_BEFORE, DATA_BETWEEN, DATA_AFTER, CNOT_ZD, CNOT_ZAZD_SPACE,
                            CNOT_ZAZD_HOOK])
    anc = np.isin(c.kind, [ANCILLA, CNOT_ZA, CNOT_ZAZD_SPACE, CNOT_ZAZD_HOOK])
    lines, ok = [], True
    for name, mask, qubits, target in (("data", data, c.d, 5 * alpha_sq * eta),
                                       ("ancilla", anc, c.d - 1, 0.318 / alpha_sq + 6 * alpha_sq * eta)):
        norm = shots * c.rounds * qubits
        rate = hits[mask].sum() / norm
        p = c.prob[mask]
        sigma = math.sqrt(shots * np.sum(p * (1 - p))) / norm
        ok &= abs(rate - target) <= 3 * sigma
        lines.append(f"{name} {rate:.5f} vs {target:.5f} ({(rate - target) / sigma:+.2f} sigma)")
    report(8, ok, "; ".join(lines))


def test_c09_gauge_model_consistency(report):
    worst, drift = 0.0, 0.0
    plus = np.full((2, 2), 0.5, dtype=complex)
    for alpha_sq, theta in itertools.product((4.0, 8.0), (5, 10, 20)):
        params = CatParams(alpha_sq, 0.0, theta=theta)
        red = build_leakage_table(params)
        orc = build_leakage_table(params, source="oracle")
        worst = max(worst, float(np.max(np.abs(red.p_meas_err - orc.p_meas_err) / orc.p_meas_err)))
        t_gate = 1.0 / params.kappa2_a
        for kraus in (kraus_blocks(reduced_propagator(params, t_gate)), oracle_kraus(params, t_gate)):
            for i in range(2):
                total = sum(np.trace(apply_kraus(kraus[i, j], plus)).real for j in range(2))
                drift = max(drift, abs(total - 1.0))
    report(9, worst <= 0.05 and drift <= TRACE_TOL,
           f"max relative p_meas_err gap {worst:.3f} (<= 0.05), trace drift {drift:.1e}")


def test_c10_small_instance_exactness(report):
    lines, ok = [], True
    for p_data, p_meas in ((0.05, 0.05), (0.1, 0.02)):
        c = build_circuit(CircuitSpec(3, 3, "phenom", phenom_model(p_data, p_meas)))
        exact = exact_failure_probability(c, min_prob=0.0)
        pt = run_point(PointSpec("phenom", 3, p_data=p_data, p_meas=p_meas), 10, 10 ** 7, 200000)
        sigma = math.sqrt(exact * (1 - exact) / pt.shots)
        ok &= abs(pt.p_zl_hat - exact) <= 3 * sigma
        lines.append(f"({p_data}, {p_meas}) MC {pt.p_zl_hat:.5f} exact {exact:.5f} "
                     f"({(pt.p_zl_hat - exact) / sigma:+.2f} sigma)")
    report(10, ok, "; ".join(lines))
