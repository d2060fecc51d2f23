"""Execute run configurations: threshold campaigns, overhead curves, repeated measurements."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass

from ..config import Group, RunConfig
from ..error_model import CatParams, Strategy
from ..gauge import cached_leakage_table, repeated_measurement_sim
from .campaign import CampaignPoint, grid_specs, run_campaign
from .fitting import FitError, FitResult, InsufficientDataError, fit_threshold
from .overhead import FitGrid, OverheadPoint, overhead_curve

logger = logging.getLogger(__name__)

POINT_COLUMNS = ("strategy", "d", "rounds", "alpha_sq", "eta", "theta", "p_data", "p_meas", "seed",
                 "shots", "failures", "p_zl_hat", "stderr", "p_xl", "stop_reason")
CURVE_COLUMNS = ("group", "alpha_sq", "theta", "p_meas", "exponent_variant", "a", "c", "x_th",
                 "a_ci95", "c_ci95", "x_th_ci95", "n_points", "fit_error")
OVERHEAD_COLUMNS = ("strategy", "theta", "eta", "epsilon_l", "reachable", "d", "alpha_sq",
                    "total_cat_qubits", "p_zl", "p_xl", "reason")
REPEATED_COLUMNS = ("alpha_sq", "theta", "round", "per_round_error", "majority_failure",
                    "independent_failure")


@dataclass
class GroupResult:
    group: Group
    points: list
    fit: FitResult | None
    fit_error: str = ""

    def curve_row(self, variant: str) -> dict:
        g = self.group
        row = {"group": g.label(), "alpha_sq": g.alpha_sq, "theta": g.theta, "p_meas": g.p_meas,
               "exponent_variant": variant, "fit_error": self.fit_error}
        if self.fit is None:
            row.update({k: None for k in ("a", "c", "x_th", "a_ci95", "c_ci95", "x_th_ci95",
                                          "n_points")})
        else:
            ci = self.fit.ci95
            row.update({"a": self.fit.a, "c": self.fit.c, "x_th": self.fit.x_th,
                        "a_ci95": ci["a"], "c_ci95": ci["c"], "x_th_ci95": ci["x_th"],
                        "n_points": self.fit.n_points})
        return row


def group_specs(config: RunConfig, group: Group):
    distances = group.distances or config.distances
    return grid_specs(config.strategy, distances, group.noise, alpha_sq=group.alpha_sq,
                      theta=group.theta, p_meas=group.p_meas)


def run_group(config: RunConfig, group: Group, *, cache_dir=None, result_cache=None) -> GroupResult:
    points = run_campaign(group_specs(config, group), config.seed, config.max_failures,
                          config.max_shots, workers=config.workers, cache_dir=cache_dir,
                          result_cache=result_cache)
    try:
        fit = fit_threshold(points, config.exponent_variant)
        return GroupResult(group, points, fit)
    except (FitError, InsufficientDataError) as exc:
        logger.warning("fit failed for %s: %s", group.label(), exc)
        return GroupResult(group, points, None, str(exc))


def run_threshold(config: RunConfig, *, cache_dir=None, result_cache=None) -> list[GroupResult]:
    """Campaign plus threshold fit for every group of the config."""
    config.validate()
    return [run_group(config, g, cache_dir=cache_dir, result_cache=result_cache)
            for g in config.groups]


@dataclass(frozen=True)
class CurvePoint:
    p_meas: float
    p_data_th: float
    ci95: float
    c: float


def phenom_threshold_curve(p_meas_values, p_data_grid, *, seed: int, distances=(3, 5, 7, 9),
                           max_failures=None, max_shots=None, workers: int = 1,
                           result_cache=None) -> list[CurvePoint]:
    """Data-error threshold at each fixed measurement error, fitted with the c(d+1) exponent.

    ``p_data_grid`` is either one list shared by every p_meas or a callable
    mapping p_meas to its grid.
    """
    groups = []
    for q in p_meas_values:
        if not 0 < q < 0.5:
            raise ValueError("p_meas must lie in (0, 0.5)")
        grid = p_data_grid(q) if callable(p_data_grid) else p_data_grid
        groups.append(Group(noise=list(grid), p_meas=q))
    config = RunConfig(command="threshold", strategy="phenom", seed=seed, groups=groups,
                       distances=list(distances), max_failures=max_failures, max_shots=max_shots,
                       exponent_variant="c(d+1)", workers=workers)
    out = []
    for res in run_threshold(config, result_cache=result_cache):
        if res.fit is None:
            raise FitError(f"threshold fit failed at p_meas={res.group.p_meas}: {res.fit_error}")
        out.append(CurvePoint(res.group.p_meas, res.fit.x_th, res.fit.ci95["x_th"], res.fit.c))
    return out


def fit_grids(config: RunConfig, results: list[GroupResult]) -> dict[int, FitGrid]:
    """FitGrid per theta from the successful group fits."""
    by_theta: dict[int, dict] = {}
    for res in results:
        if res.fit is not None:
            by_theta.setdefault(int(res.group.theta), {})[float(res.group.alpha_sq)] = res.fit
    return {t: FitGrid(config.strategy, fits, t) for t, fits in sorted(by_theta.items())}


def run_overhead(config: RunConfig, *, cache_dir=None, result_cache=None):
    """Fits over alpha_sq, then the minimum-overhead code for each eta in overhead_eta."""
    results = run_threshold(config, cache_dir=cache_dir, result_cache=result_cache)
    grids = fit_grids(config, results)
    curves: list[OverheadPoint] = []
    for grid in grids.values():
        curves.extend(overhead_curve(config.overhead_eta, config.epsilon_l, grid))
    return results, grids, curves


def run_repeated(config: RunConfig, *, cache_dir=None) -> list[dict]:
    """Repeated single-stabilizer measurements for theta = 1..theta_max at each group's alpha_sq."""
    config.validate()
    rows = []
    for g in config.groups:
        for theta in range(1, config.theta_max + 1):
            params = CatParams(g.alpha_sq, 0.0, theta=theta)
            table = cached_leakage_table(params, cache_dir)
            res = repeated_measurement_sim(params, table, theta)
            for r, p in enumerate(res.per_round):
                rows.append({"alpha_sq": g.alpha_sq, "theta": theta, "round": r, "per_round_error": p,
                             "majority_failure": res.majority_failure,
                             "independent_failure": res.independent_failure})
    return rows


# ---------------------------------------------------------------------------
# deterministic CSV


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # numpy scalars repr with their type name
    return str(value)


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def points_csv(points: list[CampaignPoint]) -> str:
    return to_csv([p.to_row() for p in points], POINT_COLUMNS)


def overhead_rows(points: list[OverheadPoint]) -> list[dict]:
    return [p.to_dict() for p in points]


def is_phenom(config: RunConfig) -> bool:
    return Strategy.parse(config.strategy) is Strategy.PHENOMENOLOGICAL


def csv_schema() -> dict:
    """Column names and types of every CSV artifact, as shipped with the package."""
    from importlib.resources import files
    return json.loads(files("repcat").joinpath("data/csv_schema.json").read_text())
