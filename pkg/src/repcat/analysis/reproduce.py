"""Canned run configurations for the standard experiments.

Each preset is a plain RunConfig dictionary, so the output of a reproduction
embeds exactly what was run and can be re-run from the output file.
"""
from __future__ import annotations

import copy

from ..config import RunConfig

DEFAULT_SEED = 20240601

# caps for the asymmetric circuits, whose fast rounds make each shot costly
ASYM_CAPS = {"max_failures": 200, "max_shots": 20000}


def _sig(x: float) -> float:
    return float(f"{x:.3g}")


def _scaled(grid, factor):
    return [_sig(x * factor) for x in grid]


OPTIMAL_ETA = [1e-4, 2e-4, 4e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3, 6e-3, 8e-3, 1e-2]
SYMMETRIC_ETA = [5e-5, 1e-4, 2e-4, 3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3]
ASYM_ETA = {1: [1e-4, 2e-4, 3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3],
            5: [2e-4, 3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3],
            10: [3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3, 6e-3],
            20: [3e-4, 5e-4, 7e-4, 1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3, 6e-3, 8e-3]}
# rough data-error crossing per measurement error, used to centre each p_data grid
PHENOM_CROSSING = {0.01: 0.2, 0.05: 0.15, 0.1: 0.1, 0.15: 0.07, 0.2: 0.055}
PHENOM_FRACTIONS = [0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0]
OVERHEAD_ALPHA_SQ = [8, 12, 16, 20]

PRESETS = {
    "fig2": {
        "name": "fig2", "command": "threshold", "strategy": "phenom",
        "distances": [3, 5, 7, 9], "exponent_variant": "c(d+1)",
        "max_failures": 1000, "max_shots": 10 ** 6,
        "groups": [{"p_meas": q, "noise": _scaled(PHENOM_FRACTIONS, th)}
                   for q, th in PHENOM_CROSSING.items()],
    },
    "fig3a": {
        "name": "fig3a", "command": "threshold", "strategy": "optimal-time",
        "distances": [3, 5, 7, 9, 11], "exponent_variant": "cd",
        "groups": [{"alpha_sq": 8.0, "noise": OPTIMAL_ETA}],
    },
    "fig3b": {
        "name": "fig3b", "command": "threshold", "strategy": "fast-symmetric",
        "distances": [3, 5, 7, 9, 11], "exponent_variant": "cd",
        "groups": [{"alpha_sq": 8.0, "noise": SYMMETRIC_ETA}],
    },
    "fig4": {
        "name": "fig4", "command": "overhead", "strategy": "fast-symmetric",
        "distances": [3, 5, 7, 9, 11], "exponent_variant": "cd",
        "groups": [{"alpha_sq": float(a), "noise": _scaled(SYMMETRIC_ETA, 8 / a)}
                   for a in OVERHEAD_ALPHA_SQ],
        "overhead_eta": [1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
        "epsilon_l": 1e-10,
    },
    "fig6d": {
        "name": "fig6d", "command": "repeated", "strategy": "fast-asymmetric",
        "groups": [{"alpha_sq": 10.0, "noise": []}], "theta_max": 15,
    },
    "fig7": {
        "name": "fig7", "command": "overhead", "strategy": "fast-asymmetric",
        "distances": [3, 5, 7], "exponent_variant": "c(d+1)", **ASYM_CAPS,
        "groups": [{"alpha_sq": 8.0, "theta": t, "noise": ASYM_ETA[t]} for t in (1, 5, 10, 20)]
        + [{"alpha_sq": float(a), "theta": 20, "noise": _scaled(ASYM_ETA[20], 8 / a)}
           for a in OVERHEAD_ALPHA_SQ[1:]],
        "overhead_eta": [1e-4, 3e-4, 1e-3, 2e-3],
        "epsilon_l": 1e-10,
    },
}


def figure_ids() -> list[str]:
    return sorted(PRESETS)


def preset_config(figure_id: str, seed: int = DEFAULT_SEED, workers: int = 1) -> RunConfig:
    if figure_id not in PRESETS:
        raise KeyError(f"unknown figure id {figure_id!r}; choose from {figure_ids()}")
    data = copy.deepcopy(PRESETS[figure_id])
    data["seed"] = seed
    data["workers"] = workers
    return RunConfig.from_dict(data)
