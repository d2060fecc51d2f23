"""Fit logical error rates to the threshold ansatz p = a d (x / x_th)^(c e(d))."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from scipy.stats import t as student_t

logger = logging.getLogger(__name__)

VARIANTS = ("cd", "c(d+1)")
Z95 = 1.96


class FitError(RuntimeError):
    """Least squares did not converge; ``residuals`` holds the last residual vector."""

    def __init__(self, msg: str, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class InsufficientDataError(ValueError):
    pass


def exponent(d, variant: str):
    d = np.asarray(d, dtype=float)
    if variant == "cd":
        return d
    if variant == "c(d+1)":
        return d + 1.0
    raise ValueError(f"unknown exponent variant {variant!r}; choose from {VARIANTS}")


def ansatz(x, d, a: float, c: float, x_th: float, variant: str = "cd"):
    """Logical error probability predicted by the threshold ansatz."""
    d = np.asarray(d, dtype=float)
    return a * d * (np.asarray(x, dtype=float) / x_th) ** (c * exponent(d, variant))


@dataclass(frozen=True)
class FitResult:
    a: float
    c: float
    x_th: float
    covariance: np.ndarray            # over (a, c, x_th)
    exponent_variant: str
    n_points: int
    distances: tuple = ()
    residuals: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def eta_th(self) -> float:
        return self.x_th

    @property
    def p_data_th(self) -> float:
        return self.x_th

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def ci95(self) -> dict:
        # the covariance is scaled by the residual variance, so use Student t
        dof = self.n_points - 3
        q = student_t.ppf(0.975, dof) if dof > 0 else Z95
        s = q * self.stderr
        return {"a": float(s[0]), "c": float(s[1]), "x_th": float(s[2])}

    def predict(self, x, d):
        return ansatz(x, d, self.a, self.c, self.x_th, self.exponent_variant)

    def to_dict(self) -> dict:
        return {
            "a": self.a, "c": self.c, "x_th": self.x_th, "exponent_variant": self.exponent_variant,
            "covariance": np.asarray(self.covariance).tolist(), "ci95": self.ci95,
            "n_points": self.n_points, "distances": list(self.distances),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FitResult":
        return cls(a=data["a"], c=data["c"], x_th=data["x_th"],
                   covariance=np.array(data["covariance"]), exponent_variant=data["exponent_variant"],
                   n_points=data["n_points"], distances=tuple(data.get("distances", ())))


def _check_design(x, d, min_distances: int, min_values: int):
    nd = len(np.unique(d))
    nx = len(np.unique(x))
    if nd < min_distances or nx < min_values:
        raise InsufficientDataError(
            f"need >= {min_distances} distances and >= {min_values} noise values in the asymptotic "
            f"regime, got {nd} and {nx}")


def fit_arrays(x, d, p_hat, shots, variant: str = "cd", *, min_distances: int = 3,
               min_values: int = 4, reweight: int = 2) -> FitResult:
    """Weighted least squares on log p_hat with binomial relative-variance weights.

    The weights start from p_hat and are then recomputed ``reweight`` times
    from the fitted rates.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    p = np.asarray(p_hat, dtype=float)
    n = np.asarray(shots, dtype=float)
    if not (len(x) == len(d) == len(p) == len(n)):
        raise ValueError("x, d, p_hat and shots must have equal length")
    if np.any(p <= 0) or np.any(p >= 1) or np.any(x <= 0):
        raise ValueError("fit needs 0 < p_hat < 1 and x > 0")
    _check_design(x, d, min_distances, min_values)
    e = exponent(d, variant)
    y = np.log(p) - np.log(d)
    sigma = np.sqrt((1 - p) / (n * p))  # relative standard error of p_hat
    # linear start: y = log a + c e log x - c e log x_th
    A = np.column_stack([np.ones_like(x), e * np.log(x), e])
    coef, *_ = np.linalg.lstsq(A / sigma[:, None], y / sigma, rcond=None)
    c0 = coef[1] if coef[1] > 0 else 0.5
    p0 = [coef[0], c0, -coef[2] / c0]

    def model(_, log_a, c, log_th):
        return log_a + c * e * (np.log(x) - log_th)

    theta = np.asarray(p0, dtype=float)
    cov = None
    for _ in range(reweight + 1):
        try:
            theta, cov = curve_fit(model, x, y, p0=theta, sigma=sigma, absolute_sigma=False,
                                   ftol=1e-15, xtol=1e-15, gtol=1e-15, maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"threshold fit did not converge: {exc}",
                           residuals=(y - model(x, *theta)) / sigma) from exc
        # refresh the weights from the fitted rates rather than the noisy estimates
        p_fit = np.clip(d * np.exp(model(x, *theta)), 1e-300, 1 - 1e-12)
        sigma = np.sqrt((1 - p_fit) / (n * p_fit))
    resid = (y - model(x, *theta)) / sigma
    if not np.all(np.isfinite(cov)):
        # exact data: zero residuals give an undefined scale factor
        cov = np.zeros((3, 3))
    log_a, c, log_th = theta
    a, x_th = math.exp(log_a), math.exp(log_th)
    jac = np.diag([a, 1.0, x_th])
    cov_nat = jac @ cov @ jac.T
    if not (a > 0 and c > 0 and x_th > 0):
        raise FitError(f"fit produced non-physical parameters a={a}, c={c}, x_th={x_th}", resid)
    return FitResult(a=a, c=float(c), x_th=x_th, covariance=cov_nat, exponent_variant=variant,
                     n_points=len(x), distances=tuple(sorted({int(v) for v in d})), residuals=resid)


def select_asymptotic(x, p_hat, failures, max_p: float = 0.1, min_failures: int = 20,
                      x_th: float | None = None) -> np.ndarray:
    """Mask of points used for fitting: p_hat < max_p, enough failures, x <= x_th / 2."""
    mask = (np.asarray(p_hat) < max_p) & (np.asarray(failures) >= min_failures)
    if x_th is not None:
        mask &= np.asarray(x) <= x_th / 2
    return mask


def fit_threshold(points, exponent_variant: str = "cd", *, select: bool = True,
                  min_distances: int = 3, min_values: int = 4) -> FitResult:
    """Fit campaign points (objects with spec.noise_value, d, p_zl_hat, shots, failures).

    With ``select`` the asymptotic-regime rule is applied: keep p_hat < 0.1 with
    at least 20 failures, fit, then drop points above half the fitted
    threshold and refit once.
    """
    pts = list(points)
    x = np.array([pt.spec.noise_value for pt in pts], dtype=float)
    d = np.array([pt.d for pt in pts], dtype=float)
    p = np.array([pt.p_zl_hat for pt in pts], dtype=float)
    n = np.array([pt.shots for pt in pts], dtype=float)
    f = np.array([pt.failures for pt in pts], dtype=float)
    mask = select_asymptotic(x, p, f) if select else (f > 0)
    kw = dict(min_distances=min_distances, min_values=min_values)
    first = fit_arrays(x[mask], d[mask], p[mask], n[mask], exponent_variant, **kw)
    if not select:
        return first
    mask2 = select_asymptotic(x, p, f, x_th=first.x_th)
    if mask2.sum() == mask.sum():
        return first
    try:
        return fit_arrays(x[mask2], d[mask2], p[mask2], n[mask2], exponent_variant, **kw)
    except InsufficientDataError:
        logger.warning("too few points below x_th/2; keeping the first-pass fit")
        return first
