import json

import pytest

from repcat.cli import main

SMALL = ["threshold", "--strategy", "phenom", "--p-meas", "0.05", "--noise", "0.04,0.05,0.06,0.07",
         "--distances", "3,5,7", "--seed", "5", "--max-failures", "200", "--max-shots", "20000",
         "--no-result-cache"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_model_reference_point(capsys):
    code, out, err = run(capsys, "model", "--alpha-sq", "8", "--eta", "1e-3", "--strategy",
                         "fast-symmetric", "--gate-time", "1")
    assert code == 0
    data = json.loads(out)
    assert data["noise_model"]["cnot"]["p_za"] == pytest.approx(0.027875)
    assert data["config"]["alpha_sq"] == 8.0
    assert "p_za" in err


def test_model_from_config_file(tmp_path, capsys):
    conf = tmp_path / "m.json"
    conf.write_text(json.dumps({"alpha_sq": 10, "eta": 1e-4, "strategy": "optimal-time"}))
    code, out, _ = run(capsys, "model", "--config", str(conf))
    assert code == 0
    assert json.loads(out)["per_round"]["p_data"] == pytest.approx(1.128e-2)


@pytest.mark.parametrize("argv, expected", [
    (["frobnicate"], 2),
    (["model", "--alpha-sq", "abc"], 2),
    (["reproduce", "fig9"], 2),
    (["model", "--strategy", "nope"], 3),
    (["model", "--strategy", "phenom"], 3),
    (["model", "--alpha-sq", "8", "--eta", "0.2"], 5),
    (["threshold", "--strategy", "phenom", "--p-meas", "0.05", "--noise", "0.05", "--distances", "4"], 3),
    (["threshold", "--noise", "0.05"], 3),
    (["overhead", "--strategy", "fast-symmetric", "--noise", "1e-4"], 3),
])
def test_exit_codes(capsys, argv, expected):
    assert run(capsys, *argv)[0] == expected


def test_bad_config_file(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"command": "threshold", "strategy": "phenom", "groups": []}))
    assert run(capsys, "threshold", "--config", str(bad))[0] == 3


def test_gauge_table_cache_miss(tmp_path, capsys):
    argv = ["gauge-table", "--alpha-sq", "6", "--theta", "3", "--cache-dir", str(tmp_path)]
    assert run(capsys, *argv, "--no-generate")[0] == 4
    code, out, _ = run(capsys, *argv)
    assert code == 0
    data = json.loads(out)
    assert set(data["marginals"]) == {"00", "01", "10", "11"}
    assert run(capsys, *argv, "--no-generate")[0] == 0


def test_gauge_table_env_switch(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("REPCAT_NO_GENERATE", "1")
    assert run(capsys, "gauge-table", "--alpha-sq", "6", "--theta", "2", "--cache-dir", str(tmp_path))[0] == 4


def test_sample_decode_round_trip(tmp_path, capsys):
    shots = tmp_path / "s.bin"
    circ = ["--strategy", "phenom", "--d", "5", "--p-data", "0.05", "--p-meas", "0.05"]
    code, out, _ = run(capsys, "sample", *circ, "--shots", "500", "--seed", "3", "--out", str(shots))
    assert code == 0
    summary = json.loads(out)
    assert summary["shots"] == 500
    code, out, _ = run(capsys, "decode", str(shots), *circ)
    assert code == 0
    res = json.loads(out)
    assert res["shots"] == 500 and len(res["failure_bits"]) == 500
    assert 0 < res["failures"] < 100
    # a circuit that does not match the file
    other = ["--strategy", "phenom", "--d", "3", "--p-data", "0.05", "--p-meas", "0.05"]
    assert run(capsys, "decode", str(shots), *other)[0] == 7


def test_decode_rejects_garbage(tmp_path, capsys):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"0123")
    circ = ["--strategy", "phenom", "--d", "3", "--p-data", "0.05", "--p-meas", "0.05"]
    assert run(capsys, "decode", str(junk), *circ)[0] == 7
    assert run(capsys, "decode", str(tmp_path / "none.bin"), *circ)[0] == 7


def test_threshold_rerun_from_result_is_byte_identical(tmp_path, capsys):
    first = tmp_path / "a"
    code, out, _ = run(capsys, *SMALL, "--out", str(first))
    assert code == 0
    assert out == (first / "points.csv").read_text()
    result = json.loads((first / "result.json").read_text())
    fit = result["fits"][0]["fit"]
    assert 0.1 < fit["x_th"] < 0.3
    second = tmp_path / "b"
    code, _, _ = run(capsys, "threshold", "--config", str(first / "result.json"), "--out", str(second),
                     "--no-result-cache")
    assert code == 0
    for name in ("points.csv", "fits.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_fit_failure_still_writes_artifacts(tmp_path, capsys):
    out_dir = tmp_path / "f"
    argv = ["threshold", "--strategy", "phenom", "--p-meas", "0.05", "--noise", "0.04,0.05",
            "--distances", "3,5", "--seed", "1", "--max-failures", "20", "--max-shots", "2000",
            "--no-result-cache", "--out", str(out_dir)]
    assert run(capsys, *argv)[0] == 6
    assert (out_dir / "points.csv").exists() and (out_dir / "fits.csv").exists()


def test_repeated_preset(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "fig6d", "--out", str(tmp_path / "r"))
    assert code == 0
    lines = (tmp_path / "r" / "repeated.csv").read_text().splitlines()
    assert lines[0].startswith("alpha_sq,theta,round")
    assert len(lines) == 1 + sum(range(1, 16))


def test_csv_schema_matches_writers():
    from repcat.analysis import experiments as ex
    files = ex.csv_schema()["files"]
    for name, cols in (("points.csv", ex.POINT_COLUMNS), ("fits.csv", ex.CURVE_COLUMNS),
                       ("overhead.csv", ex.OVERHEAD_COLUMNS), ("repeated.csv", ex.REPEATED_COLUMNS)):
        assert tuple(c["name"] for c in files[name]["columns"]) == cols
