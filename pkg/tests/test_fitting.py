from types import SimpleNamespace

import numpy as np
import pytest

from repcat.analysis.fitting import (FitError, FitResult, InsufficientDataError, ansatz, exponent,
                                     fit_arrays, fit_threshold, select_asymptotic)

TRUE = dict(a=0.077, c=0.258, x_th=7.6e-3)
DS = np.array([3, 5, 7, 9])
FRACTIONS = np.array([0.05, 0.1, 0.2, 0.3, 0.4])


def design(variant="cd"):
    d, f = np.meshgrid(DS, FRACTIONS, indexing="ij")
    d, x = d.ravel(), f.ravel() * TRUE["x_th"]
    return x, d, ansatz(x, d, variant=variant, **TRUE)


def as_points(x, d, p, shots):
    return [SimpleNamespace(spec=SimpleNamespace(noise_value=xi), d=int(di), p_zl_hat=pi,
                            shots=int(ni), failures=int(round(pi * ni)))
            for xi, di, pi, ni in zip(x, d, p, shots)]


def test_exponent_variants():
    assert exponent(5, "cd") == 5 and exponent(5, "c(d+1)") == 6
    with pytest.raises(ValueError):
        exponent(5, "d^2")


@pytest.mark.parametrize("variant", ["cd", "c(d+1)"])
def test_recovers_exact_parameters(variant):
    x, d, p = design(variant)
    fit = fit_arrays(x, d, p, np.full(len(x), 1e6), variant)
    assert fit.a == pytest.approx(TRUE["a"], rel=1e-6)
    assert fit.c == pytest.approx(TRUE["c"], rel=1e-6)
    assert fit.x_th == pytest.approx(TRUE["x_th"], rel=1e-6)
    assert fit.exponent_variant == variant and fit.distances == (3, 5, 7, 9)


def test_confidence_intervals_cover_truth():
    x, d, p = design()
    shots = np.full(len(x), 10 ** 6)
    rng = np.random.default_rng(0)
    hits = {"a": 0, "c": 0, "x_th": 0}
    reps = 100
    for _ in range(reps):
        p_hat = rng.binomial(shots, p) / shots
        fit = fit_arrays(x, d, p_hat, shots)
        for k in hits:
            hits[k] += abs(getattr(fit, k) - TRUE[k]) <= fit.ci95[k]
    for k, h in hits.items():
        assert h >= 0.9 * reps, (k, h)


def test_insufficient_design():
    x, d, p = design()
    keep = d <= 5
    with pytest.raises(InsufficientDataError):
        fit_arrays(x[keep], d[keep], p[keep], np.full(keep.sum(), 1e6))
    keep = x <= x[1]
    with pytest.raises(InsufficientDataError):
        fit_arrays(x[keep], d[keep], p[keep], np.full(keep.sum(), 1e6))


def test_bad_inputs():
    x, d, p = design()
    with pytest.raises(ValueError):
        fit_arrays(x, d, p[:-1], np.full(len(x), 1e6))
    p = p.copy()
    p[0] = 0.0
    with pytest.raises(ValueError):
        fit_arrays(x, d, p, np.full(len(x), 1e6))


def test_non_physical_fit_raises():
    x, d, _ = design()
    # error rate falling with noise gives c < 0
    p = 1e-2 * (x.max() / x) ** 0.5 * np.where(d > 4, 0.5, 1.0)
    with pytest.raises(FitError):
        fit_arrays(x, d, p, np.full(len(x), 1e6))


def test_selection_rule():
    mask = select_asymptotic([1, 2, 3, 4], [0.01, 0.2, 0.01, 0.01], [50, 50, 5, 50], x_th=7)
    assert list(mask) == [True, False, False, False]


def test_fit_threshold_drops_points_near_threshold():
    true = dict(a=0.01, c=0.5, x_th=1e-2)
    fr = np.array([0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8])
    d, f = np.meshgrid(DS, fr, indexing="ij")
    d, x = d.ravel(), f.ravel() * true["x_th"]
    p = ansatz(x, d, **true)
    fit = fit_threshold(as_points(x, d, p, np.full(len(x), 1e7)))
    kept = (p < 0.1) & (np.round(p * 1e7) >= 20) & (x <= true["x_th"] / 2)
    assert (p[x > true["x_th"] / 2] < 0.1).any()  # the second pass has something to drop
    assert fit.n_points == int(kept.sum())
    assert fit.x_th == pytest.approx(true["x_th"], rel=1e-6)
    loose = fit_threshold(as_points(x, d, p, np.full(len(x), 1e7)), select=False)
    assert loose.n_points == len(x)


def test_result_round_trip():
    x, d, p = design()
    fit = fit_arrays(x, d, p, np.full(len(x), 1e6))
    back = FitResult.from_dict(fit.to_dict())
    assert back == FitResult(fit.a, fit.c, fit.x_th, back.covariance, fit.exponent_variant,
                             fit.n_points, fit.distances)
    assert back.predict(x[0], d[0]) == pytest.approx(p[0])
