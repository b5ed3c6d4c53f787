import json
import subprocess
import sys

import numpy as np
import pytest

from micropolar import io
from micropolar.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, main
from micropolar.grid import GridSpec, random_field
from micropolar.scenario import ConfigError, parse_balls, parse_scenario, single_mode, taylor_green
from micropolar.solver import SolverConfig, integrate

G8 = GridSpec(8)

ZERO = """
[scenario]
name = zero
[grid]
n = 8
[initial]
kind = zero
[solver]
t_end = 0.05
dt = 0.01
[output]
directory = out
"""

SMALL = """
[scenario]
name = small
[grid]
n = 16
[initial]
kind = random
seed = 4
amplitude = 1.0
[solver]
t_end = 0.1
dt = 0.01
record_every = 5
[output]
directory = out
[diagnostics]
balls = 0.09 1 1 1 0.2 Q; 0.05 0 0 0 0.2 QQ
morrey_p = 2
morrey_q = 3
type_one_r0 = 0.3
"""

BLOWUP = """
[grid]
n = 16
[initial]
kind = random
seed = 1
amplitude = 1e4
w_amplitude = 1e4
k_max = 5
[solver]
t_end = 20
dt = 0.5
dealias = false
"""


def _scenario(tmp_path, text, name="s.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "micropolar", *map(str, args)], capture_output=True, text=True)


# ---------------------------------------------------------------------------
# snapshots and CSV


def test_snapshot_round_trip_bit_exact(tmp_path):
    u = random_field(G8, 1, solenoidal=True).data
    w = random_field(G8, 2).data
    p = np.random.default_rng(3).standard_normal(G8.shape)
    for pp in (p, None):
        snap = io.Snapshot(G8, 0.125, u, w, pp)
        io.write_snapshot(tmp_path / "a.mpf", snap)
        back = io.read_snapshot(tmp_path / "a.mpf")
        assert back.grid == G8 and back.t == 0.125
        assert back.u.tobytes() == u.tobytes() and back.w.tobytes() == w.tobytes()
        assert (back.p is None) == (pp is None)
        if pp is not None:
            assert back.p.tobytes() == p.tobytes()
        assert io.encode_snapshot(back) == io.encode_snapshot(snap)


def test_snapshot_layout_axis_one_fastest():
    u = np.zeros((3,) + G8.shape)
    u[0, 1, 0, 0] = 7.0
    raw = io.encode_snapshot(io.Snapshot(G8, 0.0, u, np.zeros_like(u)))
    payload = np.frombuffer(raw, dtype="<f8", offset=io._HEADER.size)
    assert payload[1] == 7.0 and np.count_nonzero(payload) == 1


def test_snapshot_corruption_detected(tmp_path):
    snap = io.Snapshot(G8, 0.0, np.zeros((3,) + G8.shape), np.zeros((3,) + G8.shape))
    raw = io.encode_snapshot(snap)
    with pytest.raises(io.SnapshotError):
        io.decode_snapshot(b"XXXX" + raw[4:])
    with pytest.raises(io.SnapshotError):
        io.decode_snapshot(raw[:-8])
    with pytest.raises(io.SnapshotError):
        io.decode_snapshot(raw[:10])
    with pytest.raises(io.SnapshotError):
        io.read_trajectory(tmp_path)


def test_trajectory_round_trip(tmp_path):
    tr = integrate(taylor_green(G8), SolverConfig(t_end=0.04, dt=0.01))
    io.write_trajectory(tmp_path / "snaps", tr)
    back = io.read_trajectory(tmp_path / "snaps")
    assert back.times.tobytes() == tr.times.tobytes()
    assert back.u.tobytes() == tr.u.tobytes() and back.p.tobytes() == tr.p.tobytes()


def test_energy_csv_deterministic(tmp_path):
    runs = [integrate(taylor_green(G8), SolverConfig(t_end=0.05, dt=0.01)) for _ in range(2)]
    for i, tr in enumerate(runs):
        io.write_energy_csv(tmp_path / f"e{i}.csv", tr)
    a, b = (tmp_path / "e0.csv").read_bytes(), (tmp_path / "e1.csv").read_bytes()
    assert a == b
    data = io.read_energy_csv(tmp_path / "e0.csv")
    np.testing.assert_array_equal(data["energy_u"], runs[0].energy.energy_u)
    assert tuple(data) == io.CSV_COLUMNS


# ---------------------------------------------------------------------------
# scenarios


def test_scenario_defaults_and_errors(tmp_path):
    sc = parse_scenario(ZERO)
    assert sc.grid == G8 and sc.initial["kind"] == "zero" and sc.solver.dt == 0.01
    assert len(sc.digest) == 64
    with pytest.raises(ConfigError, match="grid.m"):
        parse_scenario("[grid]\nm = 8\n")
    with pytest.raises(ConfigError):
        parse_scenario("[extra]\na = 1\n")
    with pytest.raises(ConfigError):
        parse_scenario("[initial]\nkind = vortex\n")
    with pytest.raises(ConfigError):
        parse_scenario("[grid]\nn = eight\n")
    with pytest.raises(ConfigError):
        parse_scenario("[initial]\nkind = snapshot\npath = nowhere.mpf\n", tmp_path)
    with pytest.raises(ConfigError):
        parse_balls("0.1 0 0 0")
    with pytest.raises(ConfigError):
        parse_balls("0.01 0 0 0 0.5 Q")  # r^2 >= t0
    assert [b.flavor for b in parse_balls("1 0 0 0 0.5; 1 0 0 0 2 QQ")] == ["Q", "QQ"]


def test_single_mode_rejects_compressible_direction():
    with pytest.raises(ConfigError):
        single_mode(G8, (0, 0, 1), (0, 0, 1))


# ---------------------------------------------------------------------------
# command line


def test_simulate_zero_scenario(tmp_path):
    path = _scenario(tmp_path, ZERO)
    assert main(["simulate", str(path)]) == EXIT_OK
    out = tmp_path / "out"
    data = io.read_energy_csv(out / "energy.csv")
    for col in io.CSV_COLUMNS[1:]:
        assert np.all(data[col] == 0)
    assert len(list((out / "snapshots").glob("*.mpf"))) == 6
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario_hash"] == parse_scenario(ZERO).digest and not summary["blew_up"]


def test_single_mode_decay_without_coupling(tmp_path):
    text = """
[grid]
n = 8
[initial]
kind = single-mode
mode = 0 0 1
direction = 1 0 0
amplitude = 0.5
[solver]
t_end = 0.5
dt = 0.01
coupling = false
"""
    assert main(["simulate", str(_scenario(tmp_path, text))]) == EXIT_OK
    data = io.read_energy_csv(tmp_path / "out" / "energy.csv")
    e0 = data["energy_u"][0]
    # a single Fourier mode is an exact Stokes solution: |u|^2 decays like exp(-2 |k|^2 t)
    np.testing.assert_allclose(data["energy_u"], e0 * np.exp(-2 * data["t"]), rtol=1e-12)
    assert np.all(data["energy_w"] == 0)


def test_simulate_determinism(tmp_path):
    path = _scenario(tmp_path, SMALL)
    assert main(["simulate", str(path), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["simulate", str(path), "--out", str(tmp_path / "b")]) == EXIT_OK
    for rel in ["energy.csv", "summary.json", "reports/ckn_000.json", "reports/ckn_001.json",
                "reports/morrey.json", "reports/type_one.json"]:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel
    snaps = sorted((tmp_path / "a" / "snapshots").glob("*.mpf"))
    assert len(snaps) == 3
    for s in snaps:
        assert s.read_bytes() == (tmp_path / "b" / "snapshots" / s.name).read_bytes()
    rep = json.loads((tmp_path / "a" / "reports" / "ckn_001.json").read_text())
    assert rep["verdict"] == "inconclusive" and rep["flavor"] == "QQ"


def test_diagnose_and_morrey_on_zero_snapshots(tmp_path, capsys):
    path = _scenario(tmp_path, ZERO)
    main(["simulate", str(path)])
    capsys.readouterr()
    snaps = tmp_path / "out" / "snapshots"
    assert main(["diagnose", "--snapshots", str(snaps), "--ball", "0.04 1 1 1 0.1"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["reports"][0]["verdict"] == "regular-candidate"
    assert body["scenario_hash"] == parse_scenario(ZERO).digest
    assert main(["morrey", "--snapshots", str(snaps), "--p", "2", "--q", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["value"] == 0.0
    assert main(["diagnose", "--snapshots", str(snaps)]) == EXIT_CONFIG
    assert main(["diagnose", "--snapshots", str(tmp_path / "missing"), "--ball", "1 0 0 0 0.1"]) == EXIT_CONFIG


def test_kappa_and_gronwall_subcommands(capsys):
    assert main(["kappa", "--C", "1", "--tau0", "6"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert abs(body["residual"]) <= 1e-10 * 0.25
    assert main(["gronwall", "--a", "1", "--b", "2", "--m", "1", "--T1", "10", "--c", "0.6"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["passed"] and abs(body["t_hit"] - np.log(2) / 4) <= 1e-8 * np.log(2) / 4
    assert main(["kappa", "--tau0", "9"]) == EXIT_CONFIG
    assert main(["gronwall", "--a", "-1", "--b", "1"]) == EXIT_CONFIG


def test_pressure_split_subcommand(tmp_path, capsys):
    g = GridSpec(32)
    st = taylor_green(g)
    io.write_snapshot(tmp_path / "tg.mpf", io.Snapshot(g, 0.0, st.u.data, st.w.data))
    assert main(["pressure-split", "--snapshot", str(tmp_path / "tg.mpf"), "--center", "1", "1", "1", "--rho", "1.2"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["additivity_error"] <= 1e-10 and body["harmonicity_error"] <= 1e-8


def test_exit_codes_subprocess(tmp_path):
    ok = _cli("kappa", "--C", "2")
    assert ok.returncode == EXIT_OK and json.loads(ok.stdout)["kind"] == "kappa"
    bad = _cli("simulate", tmp_path / "missing.ini")
    assert bad.returncode == EXIT_CONFIG and "error" in bad.stderr
    assert _cli("no-such-command").returncode == EXIT_CONFIG
    assert _cli("gronwall", "--a", "1").returncode == EXIT_CONFIG
    blow = _cli("simulate", _scenario(tmp_path, BLOWUP, "blow.ini"))
    assert blow.returncode == EXIT_BLOWUP, blow.stderr
    assert "blow-up" in blow.stderr
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["blew_up"]
    # the last written snapshot is finite and readable
    last = sorted((tmp_path / "out" / "snapshots").glob("*.mpf"))[-1]
    assert np.all(np.isfinite(io.read_snapshot(last).u))
