import csv
import io
import math

import numpy as np
import pytest

from talanov_nls import cli
from talanov_nls.spectral import read_snapshot

FAST = ["--points", "2048", "--epsilon", "0.3", "--tail-tol", "1e-6"]


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_classify_blowup(capsys):
    code, out, _ = run(["classify", "--alpha0", "0", "--gamma0", "-1", "--mu0", "1"], capsys)
    assert code == 0
    assert out.startswith("BlowUp t_c=0.785398")
    table = rows(out.splitlines(True)[1] + out.splitlines(True)[2])
    assert table[0] == list(cli.CLASSIFY_HEADER)
    assert float(table[1][2]) == pytest.approx(math.pi / 4, rel=1e-15)


def test_classify_relaxation_and_turning(capsys):
    code, out, _ = run(["classify", "--alpha0", "4"], capsys)
    assert code == 0 and out.startswith("Relaxation")
    code, out, _ = run(["classify", "--alpha0", "1"], capsys)
    assert "t_min=" in out and "sigma_min=0.750000" in out


def test_classify_rejects_convex(capsys):
    code, _, err = run(["classify", "--alpha0", "0", "--gamma0", "1", "--mu0", "1"], capsys)
    assert code == 2
    assert "gamma0" in err and "< 0" in err


def test_missing_and_malformed_flags(capsys):
    assert run(["classify"], capsys)[0] == 2
    assert run(["classify", "--alpha0", "x"], capsys)[0] == 2
    assert run(["evolve", "--alpha0", "0", "--epsilon", "0.1", "--points", "1000"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2


def test_dispersionless_table(capsys):
    code, out, _ = run(["dispersionless", "--alpha0", "2", "--t-end", "1"], capsys)
    assert code == 0
    table = rows(out)
    assert ",".join(table[0]) == "t,sigma,alpha,mu,gamma,support_halfwidth,center_amp"
    last = dict(zip(table[0], map(float, table[-1])))
    assert last["t"] == 1.0
    assert last["sigma"] == pytest.approx(0.39685, abs=1e-5)
    assert last["support_halfwidth"] == pytest.approx(4 ** (2 / 3))


def test_dispersionless_caps_at_blowup(capsys):
    code, out, _ = run(["dispersionless", "--alpha0", "0", "--t-end", "5"], capsys)
    assert code == 0
    data = np.array(rows(out)[1:], float)
    assert data[-1, 0] == pytest.approx(0.999 * math.pi / 4)
    amp = data[:, 6]
    assert np.all(np.diff(amp) > 0) and amp[-1] > 7


def test_dispersionless_bad_time(capsys):
    assert run(["dispersionless", "--alpha0", "0", "--t-end", "-1"], capsys)[0] == 2


def test_dispersionless_default_horizon(capsys):
    code, out, _ = run(["dispersionless", "--alpha0", "4"], capsys)
    assert code == 0
    assert float(rows(out)[-1][0]) == pytest.approx(3.0)


def test_evolve_csv(capsys):
    code, out, _ = run(["evolve", "--alpha0", "-0.5", "--t-end", "0.05"] + FAST, capsys)
    assert code == 0
    table = rows(out)
    assert ",".join(table[0]) == "t,center_amp,max_amp,argmax_x,mass,hamiltonian"
    data = np.array(table[1:], float)
    assert data.shape == (26, 6)
    mass = data[:, 4]
    assert np.max(np.abs(mass - mass[0])) <= 1e-8 * mass[0]


def test_evolve_zero_field(capsys):
    code, out, _ = run(["evolve", "--alpha0", "0", "--zero-field", "--t-end", "0.01"] + FAST,
                       capsys)
    assert code == 0
    data = np.array(rows(out)[1:], float)
    assert not np.any(data[:, [1, 2, 4, 5]])


def test_evolve_rejects_general_parabola(capsys):
    code, _, err = run(["evolve", "--alpha0", "0", "--mu0", "2"] + FAST, capsys)
    assert code == 2 and "mu0=1" in err
    assert run(["evolve", "--alpha0", "0", "--gamma0", "-2"] + FAST, capsys)[0] == 2


def test_evolve_abort_writes_partial_csv(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code, _, err = run(["evolve", "--alpha0", "-1", "--epsilon", str(1 / 15), "--points", "2048",
                        "--t-end", "0.5", "--out", str(out)], capsys)
    assert code == 3
    lines = out.read_text().splitlines()
    assert lines[0] == "t,center_amp,max_amp,argmax_x,mass,hamiltonian"
    assert lines[-1].startswith("# aborted: underresolved at t=")
    t_abort = float(lines[-1].split("t=")[1])
    assert 0.0 < t_abort < 0.5
    assert float(lines[-2].split(",")[0]) == t_abort


def test_evolve_snapshots(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code, _, _ = run(["evolve", "--alpha0", "0", "--t-end", "0.02", "--snapshots", "0.01,0.02",
                      "--out", str(out)] + FAST, capsys)
    assert code == 0
    snaps = sorted(tmp_path.glob("run_t*.nlsf"))
    assert [s.name for s in snaps] == ["run_t0.01.nlsf", "run_t0.02.nlsf"]
    f = read_snapshot(snaps[1])
    assert f.t == 0.02 and f.grid.points == 2048 and f.epsilon == 0.3


def test_evolve_is_byte_identical(capsys):
    args = ["evolve", "--alpha0", "0.5", "--t-end", "0.02"] + FAST
    assert run(args, capsys)[1] == run(args, capsys)[1]


def test_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# dispersionless run\nalpha0 = 2\nt-end = 1\nsample_interval=0.5\n")
    code, out, _ = run(["dispersionless", "--config", str(conf)], capsys)
    assert code == 0
    assert [r[0] for r in rows(out)[1:]] == ["0.0", "0.5", "1.0"]
    code, out, _ = run(["dispersionless", "--config", str(conf), "--t-end", "0.5"], capsys)
    assert [r[0] for r in rows(out)[1:]] == ["0.0", "0.5"]
    conf.write_text("bogus = 1\n")
    assert run(["dispersionless", "--config", str(conf)], capsys)[0] == 2
    assert run(["dispersionless", "--config", str(tmp_path / "none")], capsys)[0] == 2


def test_paper_scale_grid():
    args = cli.parse(["evolve", "--alpha0", "0", "--epsilon", "0.1", "--paper-scale"])
    cfg = cli.to_config(args)
    assert (cfg.grid.length, cfg.grid.points) == (64.0, 131072)


def test_sweep_empty_lists(capsys):
    code, out, _ = run(["sweep", "--alpha0-list", "", "--epsilon-list", "0.1"], capsys)
    assert code == 0
    assert out == ",".join(cli.SWEEP_HEADER) + "\n"


def test_sweep_serial_equals_parallel(tmp_path, capsys):
    base = ["sweep", "--alpha0-list", "4,-1", "--epsilon-list", "0.3,0.5", "--t-end", "0.05",
            "--points", "2048", "--tail-tol", "1e-6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(base + ["--out", str(a)]) == 0
    assert cli.main(base + ["--workers", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    table = rows(a.read_text())
    assert [(r[0], r[1]) for r in table[1:]] == [("4.0", "0.3"), ("4.0", "0.5"),
                                                 ("-1.0", "0.3"), ("-1.0", "0.5")]
    relax = dict(zip(table[0], table[1]))
    assert relax["t_c"] == "" and relax["rel_err"] == "" and relax["status"] == "ok"
    assert relax["regime_agreement"] == "true"


def test_sweep_records_failures_in_row(capsys):
    code, out, _ = run(["sweep", "--alpha0-list", "-1", "--epsilon-list", str(1 / 15),
                        "--points", "512", "--t-end", "0.5"], capsys)
    assert code == 0  # the sweep itself never aborts
    row = dict(zip(*rows(out)))
    assert row["status"].startswith("underresolved@")
    assert row["t_max"] == "" and row["t_c"] != ""


def test_compare_command(capsys):
    code, out, _ = run(["compare", "--alpha0", "4", "--t-end", "0.2"] + FAST, capsys)
    assert code == 0
    row = dict(zip(*rows(out)))
    assert row["regime_agreement"] == "true" and row["t_max"] == ""


def test_float_format_round_trips():
    for v in (0.1, 1 / 3, 1e-300, -2.5e10, math.pi):
        assert float(cli.fmt(v)) == v
    assert cli.fmt(None) == "" and cli.fmt(True) == "true" and cli.fmt(np.float64(0.5)) == "0.5"
