"""Command-line entry point.

Exit codes:

    0  success
    1  unexpected internal error
    2  usage error (unknown subcommand, bad option value)
    3  malformed or incomplete configuration
    4  leakage-table cache miss with generation disabled (--no-generate)
    5  physical parameters outside the error model's validity
    6  threshold fit failed or had too few asymptotic points
    7  unreadable or malformed shot file

Environment variables: REPCAT_CACHE_DIR overrides the cache directory
(default ~/.cache/repcat); REPCAT_NO_GENERATE, when non-empty, turns a
leakage-table cache miss into exit code 4 instead of building the table.
"""
from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import experiments as ex
from .analysis.campaign import PointSpec, build_point_circuit
from .analysis.fitting import FitError, InsufficientDataError
from .analysis.reproduce import (ASYM_ETA, DEFAULT_SEED, OPTIMAL_ETA, PHENOM_CROSSING,
                                 PHENOM_FRACTIONS, SYMMETRIC_ETA, figure_ids, preset_config)
from .config import ConfigError, Group, RunConfig
from .decoder.graph import DecodingGraph
from .decoder.matching import decode_batch
from .error_model import (CatParams, ModelValidityError, Strategy, build_noise_model, format_table,
                          per_cycle_rates)
from .gauge import CacheMiss, cached_leakage_table, default_cache_dir
from .sampler import Sampler, ShotFileError, read_shots, write_shots

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_CACHE_MISS = 4
EXIT_MODEL = 5
EXIT_FIT = 6
EXIT_SHOTS = 7

logger = logging.getLogger("repcat")


def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str | None) -> list[int]:
    return [int(x) for x in _floats(text)]


def _cache_dir(value: str | None) -> Path:
    return Path(value) if value else default_cache_dir()


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _write(out_dir: Path, name: str, text: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


@click.group()
@click.version_option(__version__, prog_name="repcat")
@click.option("-v", "--verbose", is_flag=True, help="Log campaign progress to stderr.")
def cli(verbose):
    """Repetition cat code simulation and analysis."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# model


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON file with alpha_sq, eta, theta, strategy, gate_time.")
@click.option("--alpha-sq", type=float)
@click.option("--eta", type=float)
@click.option("--theta", type=float)
@click.option("--strategy")
@click.option("--gate-time", type=float, help="Override the CNOT duration (units of 1/kappa2).")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON here instead of stdout.")
def model(config_path, alpha_sq, eta, theta, strategy, gate_time, out):
    """Print the per-operation noise model as JSON and as a table."""
    conf = {"alpha_sq": 8.0, "eta": 1e-3, "theta": 1.0, "strategy": "fast-symmetric", "gate_time": None}
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        unknown = set(data) - set(conf)
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        conf.update(data)
    for key, val in (("alpha_sq", alpha_sq), ("eta", eta), ("theta", theta), ("strategy", strategy),
                     ("gate_time", gate_time)):
        if val is not None:
            conf[key] = val
    try:
        strat = Strategy.parse(conf["strategy"])
        params = CatParams(float(conf["alpha_sq"]), float(conf["eta"]), theta=float(conf["theta"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelValidityError):
            raise
        raise ConfigError(str(exc)) from None
    if strat is Strategy.PHENOMENOLOGICAL:
        raise ConfigError("the model command needs a cat-qubit strategy")
    try:
        noise = build_noise_model(params, strat, gate_time=conf["gate_time"])
    except ValueError as exc:
        if isinstance(exc, ModelValidityError):
            raise
        raise ConfigError(str(exc)) from None
    p, q = per_cycle_rates(noise)
    conf["strategy"] = strat.value
    _emit({"config": conf, "noise_model": noise.to_dict(),
           "per_round": {"p_data": p, "p_meas": q}}, out)
    click.echo(format_table(noise), err=out is None)


# ---------------------------------------------------------------------------
# gauge-table


@cli.command("gauge-table")
@click.option("--alpha-sq", type=float, required=True)
@click.option("--eta", type=float, default=0.0, show_default=True)
@click.option("--theta", type=float, default=1.0, show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), help="Overrides REPCAT_CACHE_DIR.")
@click.option("--no-generate", is_flag=True, help="Fail with exit code 4 on a cache miss.")
@click.option("--out", type=click.Path(dir_okay=False))
def gauge_table(alpha_sq, eta, theta, cache_dir, no_generate, out):
    """Build or load the gauge-bit leakage table and write it as JSON."""
    params = CatParams(alpha_sq, eta, theta=theta)
    table = cached_leakage_table(params, _cache_dir(cache_dir), generate=False if no_generate else None)
    payload = table.to_dict()
    payload["config"] = {"alpha_sq": alpha_sq, "eta": eta, "theta": theta}
    payload["marginals"] = {f"{i}{i2}": table.marginal_meas_err(i, i2) for i in range(2) for i2 in range(2)}
    _emit(payload, out)


# ---------------------------------------------------------------------------
# sample / decode


def _circuit_options(f):
    opts = [
        click.option("--strategy", required=True),
        click.option("--d", "d", type=int, required=True, help="Code distance (odd, >= 3)."),
        click.option("--rounds", type=int, help="Noisy rounds (default: d, times theta if asymmetric)."),
        click.option("--alpha-sq", type=float),
        click.option("--eta", type=float),
        click.option("--theta", type=int, default=1, show_default=True),
        click.option("--p-data", type=float),
        click.option("--p-meas", type=float),
        click.option("--cache-dir", type=click.Path(file_okay=False)),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _point_spec(strategy, d, rounds, alpha_sq, eta, theta, p_data, p_meas) -> PointSpec:
    try:
        return PointSpec(strategy, d, alpha_sq=alpha_sq, eta=eta, theta=theta, p_data=p_data,
                         p_meas=p_meas, rounds=rounds)
    except ValueError as exc:
        if isinstance(exc, ModelValidityError):
            raise
        raise ConfigError(str(exc)) from None


@cli.command()
@_circuit_options
@click.option("--shots", type=int, required=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--start", type=int, default=0, show_default=True, help="Index of the first shot.")
@click.option("--out", type=click.Path(dir_okay=False), help="Binary shot file; JSON summary if omitted.")
def sample(strategy, d, rounds, alpha_sq, eta, theta, p_data, p_meas, cache_dir, shots, seed, start, out):
    """Sample shots: raw binary records or aggregated counts as JSON."""
    spec = _point_spec(strategy, d, rounds, alpha_sq, eta, theta, p_data, p_meas)
    circuit = build_point_circuit(spec, _cache_dir(cache_dir))
    batch = Sampler(circuit, seed).shots(start, shots)
    conf = {"spec": spec.to_dict(), "seed": seed, "start": start, "shots": shots}
    summary = {"config": conf, "shots": len(batch), "logical_flips": int(batch.logical.sum()),
               "mean_detection_events": float(batch.dets.sum(axis=1).mean()) if len(batch) else 0.0}
    if out:
        write_shots(out, batch, circuit.d, circuit.rounds)
        summary["shot_file"] = str(out)
    _emit(summary, None)


@cli.command()
@click.argument("shot_file", type=click.Path(dir_okay=False))
@_circuit_options
@click.option("--out", type=click.Path(dir_okay=False))
def decode(shot_file, strategy, d, rounds, alpha_sq, eta, theta, p_data, p_meas, cache_dir, out):
    """Decode a shot file; reports per-shot failure bits and counts."""
    spec = _point_spec(strategy, d, rounds, alpha_sq, eta, theta, p_data, p_meas)
    try:
        batch, fd, frounds = read_shots(shot_file)
    except OSError as exc:
        raise ShotFileError(str(exc)) from None
    circuit = build_point_circuit(spec, _cache_dir(cache_dir))
    if (fd, frounds, batch.dets.shape[1]) != (circuit.d, circuit.rounds, circuit.num_detectors):
        raise ShotFileError(f"shot file is for d={fd}, rounds={frounds}; circuit has "
                            f"d={circuit.d}, rounds={circuit.rounds}")
    graph = DecodingGraph.from_circuit(circuit)
    pred, _ = decode_batch(graph, batch.dets)
    fails = (pred != batch.logical).astype(int)
    _emit({"config": {"spec": spec.to_dict(), "shot_file": str(shot_file)}, "shots": len(fails),
           "failures": int(fails.sum()), "failure_bits": fails.tolist()}, out)


# ---------------------------------------------------------------------------
# threshold / overhead / reproduce


def _default_noise(strategy: Strategy, alpha_sq: float | None, theta: int, p_meas: float | None):
    if strategy is Strategy.PHENOMENOLOGICAL:
        qs = sorted(PHENOM_CROSSING)
        crossing = float(np.exp(np.interp(np.log(p_meas), np.log(qs),
                                          np.log([PHENOM_CROSSING[q] for q in qs]))))
        return [float(f"{f * crossing:.3g}") for f in PHENOM_FRACTIONS]
    if strategy is Strategy.OPTIMAL_TIME:
        return list(OPTIMAL_ETA)
    base = SYMMETRIC_ETA
    if strategy is Strategy.FAST_ASYMMETRIC:
        base = ASYM_ETA[min(ASYM_ETA, key=lambda t: abs(t - theta))]
    return [float(f"{x * 8 / alpha_sq:.3g}") for x in base]


def _flag_config(command, strategy, alpha_sq, theta, p_meas, noise, distances, seed, max_failures,
                 max_shots, variant, workers, overhead_eta=None, epsilon_l=None) -> RunConfig:
    if strategy is None:
        raise ConfigError("either --config or --strategy is required")
    strat = Strategy.parse(strategy)
    phenom = strat is Strategy.PHENOMENOLOGICAL
    groups = []
    if phenom:
        for q in _floats(p_meas) or [0.01]:
            groups.append(Group(noise=_floats(noise) or _default_noise(strat, None, 1, q), p_meas=q))
    else:
        for a in _floats(alpha_sq) or [8.0]:
            groups.append(Group(noise=_floats(noise) or _default_noise(strat, a, theta, None),
                                alpha_sq=a, theta=theta))
    data = {"command": command, "strategy": strat.value, "seed": seed, "groups": groups,
            "distances": _ints(distances) or ([3, 5, 7] if strat is Strategy.FAST_ASYMMETRIC
                                              else [3, 5, 7, 9, 11]),
            "max_failures": max_failures, "max_shots": max_shots, "workers": workers,
            "exponent_variant": variant or ("c(d+1)" if strat in (Strategy.PHENOMENOLOGICAL,
                                                                  Strategy.FAST_ASYMMETRIC) else "cd")}
    if command == "overhead":
        data["overhead_eta"] = _floats(overhead_eta)
        data["epsilon_l"] = epsilon_l
    return RunConfig(**data).validate()


def _load_config(path: str, workers: int | None) -> RunConfig:
    config = RunConfig.load(path)
    if workers is not None:
        config.workers = workers
    return config


def _result_cache(cache_dir: Path, enabled: bool):
    return cache_dir if enabled else None


def _run(config: RunConfig, out: str | None, cache_dir: Path, use_result_cache: bool):
    """Execute a config and write its artifacts; returns the JSON payload."""
    rc = _result_cache(cache_dir, use_result_cache)
    payload = {"config": config.to_dict(), "version": __version__}
    files = {}
    if config.command == "repeated":
        rows = ex.run_repeated(config, cache_dir=cache_dir)
        files["repeated.csv"] = ex.to_csv(rows, ex.REPEATED_COLUMNS)
        payload["repeated"] = rows
    else:
        if config.command == "overhead":
            results, grids, curve = ex.run_overhead(config, cache_dir=cache_dir, result_cache=rc)
            payload["fit_grids"] = {str(t): g.to_dict() for t, g in grids.items()}
            payload["overhead"] = ex.overhead_rows(curve)
            files["overhead.csv"] = ex.to_csv(payload["overhead"], ex.OVERHEAD_COLUMNS)
        else:
            results = ex.run_threshold(config, cache_dir=cache_dir, result_cache=rc)
        points = [p for r in results for p in r.points]
        files["points.csv"] = ex.points_csv(points)
        curve_rows = [r.curve_row(config.exponent_variant) for r in results]
        files["fits.csv"] = ex.to_csv(curve_rows, ex.CURVE_COLUMNS)
        payload["fits"] = [{"group": r.group.label(), "fit": None if r.fit is None else r.fit.to_dict(),
                            "fit_error": r.fit_error} for r in results]
        payload["points"] = [p.to_row() for p in points]
    if out:
        out_dir = Path(out)
        for name, text in files.items():
            _write(out_dir, name, text)
        _write(out_dir, "result.json", json.dumps(payload, indent=2, sort_keys=True,
                                                  default=_json_default) + "\n")
    return payload, files


def _check_fits(payload: dict):
    failed = [f["group"] for f in payload.get("fits", []) if f["fit"] is None]
    if failed:
        raise FitError(f"threshold fit failed for {', '.join(failed)} (artifacts were still written)")


def _campaign_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="RunConfig JSON (or a previous result.json); other grid flags are ignored."),
        click.option("--strategy"),
        click.option("--alpha-sq", help="Comma-separated photon numbers."),
        click.option("--theta", type=int, default=1, show_default=True),
        click.option("--p-meas", help="Comma-separated measurement errors (phenomenological)."),
        click.option("--noise", help="Comma-separated swept eta (or p_data) values."),
        click.option("--distances", help="Comma-separated odd distances."),
        click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True),
        click.option("--max-failures", type=int),
        click.option("--max-shots", type=int),
        click.option("--variant", type=click.Choice(["cd", "c(d+1)"])),
        click.option("--workers", type=int),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
        click.option("--cache-dir", type=click.Path(file_okay=False), help="Overrides REPCAT_CACHE_DIR."),
        click.option("--no-result-cache", is_flag=True, help="Do not reuse or store finished points."),
        click.option("--no-generate", is_flag=True, help="Fail with exit code 4 on a table cache miss."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _apply_no_generate(flag: bool):
    if flag:
        os.environ["REPCAT_NO_GENERATE"] = "1"


@cli.command()
@_campaign_options
def threshold(config_path, strategy, alpha_sq, theta, p_meas, noise, distances, seed, max_failures,
              max_shots, variant, workers, out, cache_dir, no_result_cache, no_generate):
    """Run a threshold campaign and fit it; prints the point CSV."""
    _apply_no_generate(no_generate)
    if config_path:
        config = _load_config(config_path, workers)
    else:
        config = _flag_config("threshold", strategy, alpha_sq, theta, p_meas, noise, distances, seed,
                              max_failures, max_shots, variant, workers or 1)
    payload, files = _run(config, out, _cache_dir(cache_dir), not no_result_cache)
    click.echo(files["points.csv"], nl=False)
    _check_fits(payload)


@cli.command()
@_campaign_options
@click.option("--eta", "overhead_eta", help="Comma-separated eta values to optimise for.")
@click.option("--epsilon-l", type=float, default=1e-10, show_default=True)
def overhead(config_path, strategy, alpha_sq, theta, p_meas, noise, distances, seed, max_failures,
             max_shots, variant, workers, out, cache_dir, no_result_cache, no_generate, overhead_eta,
             epsilon_l):
    """Fit thresholds over photon numbers and optimise (d, alpha_sq); prints the overhead CSV."""
    _apply_no_generate(no_generate)
    if config_path:
        config = _load_config(config_path, workers)
    else:
        config = _flag_config("overhead", strategy, alpha_sq, theta, p_meas, noise, distances, seed,
                              max_failures, max_shots, variant, workers or 1, overhead_eta, epsilon_l)
    if config.command != "overhead":
        raise ConfigError("config command must be 'overhead'")
    payload, files = _run(config, out, _cache_dir(cache_dir), not no_result_cache)
    click.echo(files["overhead.csv"], nl=False)
    _check_fits(payload)


@cli.command()
@click.argument("figure_id")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), help="Output directory (default: ./<figure_id>).")
@click.option("--cache-dir", type=click.Path(file_okay=False))
@click.option("--no-result-cache", is_flag=True)
@click.option("--no-generate", is_flag=True)
def reproduce(figure_id, seed, workers, out, cache_dir, no_result_cache, no_generate):
    """Run a canned experiment: fig2, fig3a, fig3b, fig4, fig6d or fig7."""
    if figure_id not in figure_ids():
        raise click.BadParameter(f"unknown figure id {figure_id!r}; choose from {figure_ids()}",
                                 param_hint="FIGURE_ID")
    _apply_no_generate(no_generate)
    config = preset_config(figure_id, seed=seed, workers=workers)
    payload, _ = _run(config, out or figure_id, _cache_dir(cache_dir), not no_result_cache)
    summary = {"config": payload["config"], "output_dir": str(out or figure_id)}
    for key in ("fits", "overhead"):
        if key in payload:
            summary[key] = payload[key]
    _emit(summary, None)
    _check_fits(payload)


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="repcat", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INTERNAL
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE if isinstance(exc, click.UsageError) else EXIT_INTERNAL
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except CacheMiss as exc:
        click.echo(f"cache miss: {exc}", err=True)
        return EXIT_CACHE_MISS
    except ModelValidityError as exc:
        click.echo(f"model error: {exc}", err=True)
        return EXIT_MODEL
    except (FitError, InsufficientDataError) as exc:
        click.echo(f"fit error: {exc}", err=True)
        return EXIT_FIT
    except ShotFileError as exc:
        click.echo(f"shot file error: {exc}", err=True)
        return EXIT_SHOTS
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
