import json

import numpy as np
import pytest

from sparse_cran.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from sparse_cran.simulator import CampaignResult
from sparse_cran.topology import NetworkConfig, dump_config


@pytest.fixture(scope="module")
def toy_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    rc = main(["run", "--preset", "toy", "--slots", "3", "--seed", "0",
               "--scheme", "dynamic,baseline:strongest_s", "--backhaul", "200,40",
               "--out", str(out)])
    return rc, out


def test_run_writes_results(toy_runs):
    rc, out = toy_runs
    assert rc == EXIT_OK
    for name in ("dynamic_seed0", "baseline_strongest_s_seed0"):
        d = out / name
        for f in ("rates.csv", "backhaul.csv", "utility.csv", "slots.csv", "manifest.json"):
            assert (d / f).is_file(), f
    doc = json.loads((out / "dynamic_seed0" / "manifest.json").read_text())
    assert doc["seed"] == 0 and doc["scheme"] == "dynamic"
    assert len(doc["slot_seconds"]) == 3


def test_schemes_share_user_ids(toy_runs):
    _, out = toy_runs
    a = CampaignResult.read(out / "dynamic_seed0")
    b = CampaignResult.read(out / "baseline_strongest_s_seed0")
    assert a.num_users == b.num_users == 4
    ids = [(out / d / "rates.csv").read_text().splitlines()[1:] for d in
           ("dynamic_seed0", "baseline_strongest_s_seed0")]
    assert [r.split(",")[0] for r in ids[0]] == [r.split(",")[0] for r in ids[1]]


def test_report_against_self_is_zero_gain(toy_runs, tmp_path, capsys):
    _, out = toy_runs
    d = str(out / "dynamic_seed0")
    assert main(["report", d, "--baseline", d, "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "report.json").read_text())
    assert all(g == 0.0 for s in doc["schemes"] for g in s["gains"].values())
    assert "(+0.0%)" in capsys.readouterr().out


def test_report_two_schemes(toy_runs, tmp_path):
    _, out = toy_runs
    rc = main(["report", str(out / "dynamic_seed0"), "--baseline",
               str(out / "baseline_strongest_s_seed0"), "--out", str(tmp_path)])
    assert rc == EXIT_OK
    assert (tmp_path / "report.csv").is_file()


def test_calibrate_is_repeatable(tmp_path, capsys):
    args = ["calibrate", "--preset", "toy", "--slots", "2", "--seed", "5"]
    assert main(args + ["--out", str(tmp_path)]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out == first
    macro, pico = (float(x) for x in first.split(","))
    assert macro > 0 and pico > 0
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert doc["calibrated_mbps"] == pytest.approx([macro, pico], rel=1e-5)


def test_calibrate_without_users(tmp_path, capsys):
    cfg = tmp_path / "empty.ini"
    dump_config(NetworkConfig.toy(users_per_cell=0), cfg)
    assert main(["calibrate", str(cfg), "--slots", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0,0"


def test_config_file_drives_the_run(tmp_path):
    cfg = tmp_path / "net.ini"
    dump_config(NetworkConfig.toy(users_per_cell=3), cfg)
    out = tmp_path / "r"
    assert main(["run", str(cfg), "--slots", "1", "--out", str(out), "--backhaul", "100,20"]) == EXIT_OK
    r = CampaignResult.read(out)
    assert r.num_users == 3
    assert np.allclose(r.budgets_bps_hz, [10.0, 2.0, 2.0, 2.0])


@pytest.mark.parametrize("argv", [
    ["run", "--preset", "toy", "--scheme", "greedy", "--out", "x"],
    ["run", "--preset", "toy", "--slots", "0", "--out", "x"],
    ["run", "--preset", "toy", "--backhaul", "1", "--out", "x"],
    ["run", "--preset", "toy"],
    ["run", "no_such_config.ini", "--out", "x"],
    ["bogus"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_USAGE


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[network]\nmacro_power_watts = 3\n")
    assert main(["calibrate", str(cfg), "--slots", "1"]) == EXIT_USAGE


def test_report_needs_result_dirs(toy_runs, tmp_path):
    _, out = toy_runs
    assert main(["report", str(out / "dynamic_seed0"), "--baseline", str(tmp_path / "missing"),
                 "--out", str(tmp_path)]) == EXIT_USAGE


def test_unwritable_output_is_a_runtime_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc = main(["run", "--preset", "toy", "--slots", "1", "--out", str(blocker / "sub")])
    assert rc == EXIT_RUNTIME
