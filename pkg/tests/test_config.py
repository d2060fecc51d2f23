import json

import pytest

from repcat.analysis.reproduce import PRESETS, figure_ids, preset_config
from repcat.config import ConfigError, RunConfig

BASE = {"command": "threshold", "strategy": "phenom", "seed": 1,
        "groups": [{"p_meas": 0.05, "noise": [0.01, 0.02]}]}


def make(**kw):
    data = json.loads(json.dumps(BASE))
    data.update(kw)
    return RunConfig.from_dict(data)


def test_round_trip():
    c = make()
    assert RunConfig.from_dict(json.loads(c.dumps())) == c


def test_embedded_config_is_accepted():
    c = make()
    assert RunConfig.from_dict({"config": c.to_dict(), "points": []}) == c


@pytest.mark.parametrize("change", [
    {"seed": None}, {"seed": -1}, {"seed": 1.5}, {"command": "plot"}, {"strategy": "nope"},
    {"exponent_variant": "d2"}, {"groups": []}, {"distances": [4]}, {"distances": []},
    {"groups": [{"noise": [0.01]}]}, {"groups": [{"p_meas": 0.1}]}, {"extra": 1}, {"workers": 0},
])
def test_invalid_configs(change):
    with pytest.raises(ConfigError):
        make(**change)


def test_seed_is_mandatory():
    data = dict(BASE)
    del data["seed"]
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_overhead_requirements():
    circuit = {"strategy": "fast-symmetric", "groups": [{"alpha_sq": 8, "noise": [1e-4]}]}
    with pytest.raises(ConfigError):
        make(command="overhead", **circuit)
    c = make(command="overhead", overhead_eta=[1e-5], **circuit)
    assert c.epsilon_l == 1e-10
    with pytest.raises(ConfigError):
        make(command="overhead", overhead_eta=[1e-5])


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        RunConfig.load(bad)


@pytest.mark.parametrize("fig", sorted(PRESETS))
def test_presets_are_valid(fig):
    c = preset_config(fig, seed=3)
    assert c.seed == 3 and c.name == fig


def test_unknown_preset():
    assert figure_ids() == ["fig2", "fig3a", "fig3b", "fig4", "fig6d", "fig7"]
    with pytest.raises(KeyError):
        preset_config("fig9")
