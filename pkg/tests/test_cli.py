import csv
import io

import pytest

from irspilot.channel_model import GeometryConfig, SystemDims
from irspilot.cli import main, sweep_rows
from irspilot.config import ConfigError, ExperimentConfig, load_config, parse_config
from irspilot.scheduler import parse_schedule


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_empty_config_is_default(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == ExperimentConfig()
    assert cfg.dims == SystemDims(8, 64, 32)
    assert cfg.geo == GeometryConfig()
    assert (cfg.geo.alpha_direct, cfg.geo.alpha_user_irs, cfg.geo.alpha_bs_irs) == (4.2, 2.1, 2.2)
    assert (cfg.geo.d_bs_irs, cfg.geo.circle_radius, cfg.geo.power_dbm) == (100.0, 5.0, 23.0)


def test_config_dims():
    cfg = parse_config("K = 3\nM = 2\nN = 3\n")
    assert cfg.dims == SystemDims(3, 2, 3)
    assert cfg.geo == GeometryConfig() and cfg.trials == 100


def test_config_comments_and_geo():
    cfg = parse_config("# comment\n\npower_dbm = 30 # inline\nseed=12\n")
    assert cfg.geo.power_dbm == 30.0 and cfg.seed == 12


@pytest.mark.parametrize(
    "text, match",
    [
        ("trials = 0", "trials"),
        ("colour = 3", "line 1: unknown key"),
        ("K = 3\nM two", "line 2"),
        ("K = x", "line 1: bad value"),
        ("K = 0", "K"),
        ("noise_variance = -1", "noise"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_min_length(capsys):
    code, out, _ = run(capsys, "min-length")
    assert code == 0 and out == "8 32 7 47\n264\n"
    assert run(capsys, "min-length", "-M", "16")[1] == "8 32 14 54\n264\n"
    out = run(capsys, "min-length", "-K", "1", "-N", "4", "-M", "2")[1].split("\n")
    assert out[0].split()[-1] == out[1] == "5"


def test_sweep_rows():
    rows = {m: (p, b) for m, p, b in sweep_rows(8, 32, 1, 64)}
    assert rows[1] == (264, 264) and rows[8] == (68, 264) and rows[16] == (54, 264)
    assert rows[32] == (47, 264) and rows[64] == (47, 264)
    assert sweep_rows(8, 32, 5, 5) == [(5, 8 + 32 + 45, 264)]
    assert {b for _, _, b in sweep_rows(2, 2, 1, 10)} == {6}
    with pytest.raises(ConfigError):
        sweep_rows(8, 32, 0, 3)


def test_sweep_csv(capsys, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--out", str(out_path))
    assert code == 0
    data = out_path.read_bytes()
    assert b"\r" not in data
    rows = list(csv.DictReader(io.StringIO(data.decode())))
    assert len(rows) == 64 and rows[0] == {"M": "1", "tau_proposed": "264", "tau_benchmark": "264"}
    props = [int(r["tau_proposed"]) for r in rows]
    assert all(a >= b for a, b in zip(props, props[1:]))


def test_sweep_bad_range(capsys):
    assert run(capsys, "sweep", "--m-min", "5", "--m-max", "2")[0] == 2


def test_simulate_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--trials", "1", "--seed", "99", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--trials", "1", "--seed", "99", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "trial,strategy,pilot_len,max_rel_err_h,max_rel_err_g,success"
    trial, strategy, plen, eh, eg, ok = lines[1].split(",")
    assert (trial, strategy, plen, ok) == ("0", "proposed", "47", "1")
    mantissa = eh.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 17


def test_simulate_parallel_matches_serial(capsys):
    _, serial, _ = run(capsys, "simulate", "--trials", "4", "-K", "3", "-M", "2", "-N", "3")
    _, parallel, _ = run(capsys, "simulate", "--trials", "4", "-K", "3", "-M", "2", "-N", "3", "--jobs", "2")
    assert serial == parallel


def test_simulate_truncated(capsys):
    code, out, err = run(capsys, "simulate", "--trials", "3", "--truncate-phase3", "1",
                         "--strategy", "proposed", "-K", "3", "-M", "2", "-N", "3")
    assert code == 1
    assert "success fraction 0.000000" in err and "Phase III" in err
    assert all(line.endswith(",0") for line in out.splitlines()[1:])


def test_simulate_summary(capsys):
    code, out, err = run(capsys, "simulate", "--trials", "5")
    assert code == 0 and "success fraction 1.000000 (10/10)" in err


def test_env_seed(capsys, monkeypatch):
    _, base, _ = run(capsys, "simulate", "--trials", "1", "-K", "2", "-M", "2", "-N", "2", "--seed", "5")
    monkeypatch.setenv("IRSPILOT_SEED", "5")
    _, env, _ = run(capsys, "simulate", "--trials", "1", "-K", "2", "-M", "2", "-N", "2")
    assert base == env
    monkeypatch.setenv("IRSPILOT_SEED", "nope")
    assert run(capsys, "min-length")[0] == 2


def test_schedule_dump(capsys):
    code, out, _ = run(capsys, "schedule", "-K", "1", "-N", "2", "-M", "4")
    assert code == 0
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert body[0] == "PHASES 1 2 0" and body[1] == "A" and body[3] == "PHI"
    assert len(body) == 6 and len(body[2].split()) == 3


def test_schedule_round_trip(capsys, tmp_path):
    path = tmp_path / "s.txt"
    run(capsys, "schedule", "-K", "3", "-M", "2", "-N", "3", "--out", str(path))
    s = parse_schedule(path.read_text())
    assert [(i.users, i.elements) for i in s.instants] == [((2,), (2, 3)), ((3,), (1, 3)), ((2, 3), (1, 2))]


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", "-K", "3", "-M", "2", "-N", "3", "--trials", "5")
    assert code == 0
    assert out.splitlines()[1].startswith("3,2,3,5,") and out.strip().endswith(",1")


def test_missing_config_file(capsys, tmp_path):
    assert run(capsys, "min-length", "--config", str(tmp_path / "none.cfg"))[0] == 2


def test_config_file_used(capsys, tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("K = 3\nM = 2\nN = 3\n")
    assert run(capsys, "--config", str(path), "min-length")[1] == "3 3 3 9\n12\n"
    assert run(capsys, "min-length", "--config", str(path), "-M", "4")[1] == "3 3 2 8\n12\n"
