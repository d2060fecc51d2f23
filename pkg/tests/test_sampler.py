import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repcat.circuit import CircuitSpec, build_circuit
from repcat.error_model import CatParams, build_noise_model, phenom_model
from repcat.gauge import build_leakage_table
from repcat.sampler import (BLOCK, Sampler, ShotFileError, circuit_key, read_shots, sample_batch,
                            sample_shot, write_shots)


def phenom_circuit(d=5, p=0.05, q=0.05):
    return build_circuit(CircuitSpec(d, d, "phenom", phenom_model(p, q)))


@pytest.fixture(scope="module")
def asym():
    table = build_leakage_table(CatParams(8, 0.0, theta=20))
    noise = build_noise_model(CatParams(8, 1e-4, theta=20), "fast-asymmetric")
    return build_circuit(CircuitSpec(5, 20, "fast-asymmetric", noise), table)


def test_same_seed_same_shots():
    c = phenom_circuit()
    a = sample_batch(c, 7, 3000)
    b = sample_batch(c, 7, 3000)
    assert np.array_equal(a.dets, b.dets) and np.array_equal(a.logical, b.logical)
    other = sample_batch(c, 8, 3000)
    assert not np.array_equal(a.dets, other.dets)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3 * BLOCK), st.integers(0, 2 * BLOCK))
def test_shot_ranges_are_consistent(start, count):
    c = phenom_circuit(3)
    full = sample_batch(c, 11, 5 * BLOCK)
    part = sample_batch(c, 11, count, start=start)
    assert np.array_equal(part.dets, full.dets[start:start + count])
    assert np.array_equal(part.logical, full.logical[start:start + count])


def test_single_shot_matches_batch():
    c = phenom_circuit()
    batch = sample_batch(c, 3, BLOCK + 10)
    dets, flip = sample_shot(c, 3, BLOCK + 5)
    assert np.array_equal(dets, batch.dets[BLOCK + 5]) and flip == batch.logical[BLOCK + 5]


def test_key_depends_on_circuit():
    assert circuit_key(phenom_circuit(5, 0.05)) != circuit_key(phenom_circuit(5, 0.06))
    assert circuit_key(phenom_circuit(5)) == circuit_key(phenom_circuit(5))


def test_noiseless_circuit_has_no_events():
    b = sample_batch(phenom_circuit(5, 0.0, 0.0), 1, 2000)
    assert b.dets.sum() == 0 and b.logical.sum() == 0 and b.fired.sum() == 0


def test_certain_data_flips():
    d = 5
    c = build_circuit(CircuitSpec(d, 1, "phenom", phenom_model(1.0, 0.0)))
    b = sample_batch(c, 1, 50)
    # every data qubit flips: interior syndromes cancel, the logical always flips
    assert b.logical.all()
    assert np.all(b.dets == 0)
    assert np.all(b.fired == d)


def test_event_frequency_matches_probabilities():
    p = 0.03
    c = build_circuit(CircuitSpec(3, 3, "phenom", phenom_model(p, 0.0)))
    n = 40000
    b = sample_batch(c, 5, n)
    # data qubit 0 flips the logical; parity of three independent rounds
    expected = (1 - (1 - 2 * p) ** 3) / 2
    sigma = np.sqrt(expected * (1 - expected) / n)
    assert abs(b.logical.mean() - expected) < 3 * sigma
    mean_fired = c.prob.sum()
    assert abs(b.fired.mean() - mean_fired) < 3 * np.sqrt(mean_fired / n)


def test_sampler_argument_checks():
    c = phenom_circuit()
    with pytest.raises(ValueError):
        Sampler(c, -1)
    s = Sampler(c, 0)
    with pytest.raises(ValueError):
        s.block(0, size=BLOCK + 1)
    with pytest.raises(ValueError):
        s.shots(-1, 3)


def test_shot_file_round_trip(tmp_path):
    c = phenom_circuit(5)
    b = sample_batch(c, 9, 777)
    path = write_shots(tmp_path / "s.bin", b, c.d, c.rounds)
    back, d, rounds = read_shots(path)
    assert (d, rounds) == (5, 5)
    assert np.array_equal(back.dets, b.dets) and np.array_equal(back.logical, b.logical)


def test_bad_shot_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nope")
    with pytest.raises(ShotFileError):
        read_shots(bad)
    c = phenom_circuit(5)
    path = write_shots(tmp_path / "s.bin", sample_batch(c, 9, 10), c.d, c.rounds)
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ShotFileError):
        read_shots(path)


def test_asymmetric_leak_errors_shape_check(asym):
    s = Sampler(asym, 1)
    with pytest.raises(ValueError):
        s.block(0, 16, leak_errors=np.zeros((16, 1, 1), np.uint8))


def test_asymmetric_recording_does_not_change_shots(asym):
    s = Sampler(asym, 2)
    plain = s.block(0, 256)
    rec = np.zeros((256, asym.rounds, asym.d - 1), np.uint8)
    again = s.block(0, 256, leak_errors=rec)
    assert np.array_equal(plain.dets, again.dets)
    assert rec.sum() > 0


def _neighbour_correlation(circuit, seed, blocks=4):
    s = Sampler(circuit, seed)
    errs = []
    for i in range(blocks):
        e = np.zeros((BLOCK, circuit.rounds, circuit.d - 1), np.uint8)
        s.block(i, leak_errors=e)
        errs.append(e)
    e = np.concatenate(errs).astype(float)
    # neighbouring ancillas in the same round share a data gauge bit; the gauge
    # relaxes within a step, so there is little memory between rounds
    return np.corrcoef(e[:, :, :-1].ravel(), e[:, :, 1:].ravel())[0, 1], e.mean()


def test_leakage_errors_positively_correlated(asym):
    corr, rate = _neighbour_correlation(asym, 4)
    assert corr > 0.008
    assert abs(rate - asym.leak_marginal.mean()) < 0.1 * asym.leak_marginal.mean()


def test_decorrelated_table_removes_correlation(asym):
    flat = build_circuit(asym.spec, asym.table.decorrelated())
    corr, _ = _neighbour_correlation(flat, 4)
    assert abs(corr) < 0.008


def test_fault_hits_agree_with_block():
    c = phenom_circuit(3)
    s = Sampler(c, 6)
    hits = s.fault_hits(2, 500)
    assert hits.sum() == s.block(2, 500).fired.sum()
    assert hits.shape == (c.num_faults,)
