import math
import subprocess
import sys

import pytest

from qscissors import __version__
from qscissors.cli import Sweep, UsageError, fmt, main, parse_n


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(text):
    return [line.split(",") for line in text.splitlines() if line and not line.startswith("#")]


def test_parse_n_forms():
    assert parse_n("3") == [3]
    assert parse_n("1-4") == [1, 2, 3, 4]
    assert parse_n("1,2,6") == [1, 2, 6]
    with pytest.raises(UsageError):
        parse_n("0-2")
    with pytest.raises(UsageError):
        parse_n("x")


def test_sweep_parsing():
    s = Sweep.parse("g:0.5:3:6")
    assert s.values().tolist() == pytest.approx([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    assert Sweep.parse("distance:10:1000:3:log").values().tolist() == pytest.approx([10, 100, 1000])
    for bad in ("g:1:1:5", "g:2:1:5", "g:0:1:1", "g:0:1", "g:0:1:3:cubic", "g:0:1:3:log"):
        with pytest.raises(UsageError):
            Sweep.parse(bad)


def test_fmt_is_twelve_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(3) == "3"
    assert fmt(math.nan) == "nan"


def test_amplify_table(capsys):
    code, out, _ = run(["amplify", "--n", "1-3", "--sweep", "g:0.5:2:4"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith(f"# qscissors {__version__} amplify ")
    assert "alpha=0.3" in lines[0] and "n=1,2,3" in lines[0]
    assert lines[1] == "g,n,fidelity,infidelity,P,P_BP,P_SP,P_XP"
    data = rows(out)[1:]
    assert len(data) == 12
    assert [int(r[1]) for r in data[:3]] == [1, 2, 3]


def test_amplify_single_point_matches_library(capsys):
    from qscissors.fock import coherent_state
    from qscissors.scissors import ScissorConfig, nqs_output

    code, out, _ = run(["amplify", "--n", "2", "--g", "1.5"], capsys)
    assert code == 0
    row = rows(out)[1]
    ref = nqs_output(ScissorConfig(2, 1.5), coherent_state(0.3, 40))
    assert float(row[4]) == pytest.approx(ref.probability, rel=1e-11)
    assert float(row[5]) == pytest.approx(3 * ref.probability, rel=1e-11)


def test_deterministic_output(capsys, monkeypatch):
    argv = ["amplify", "--n", "1-4", "--sweep", "g:0.5:3:5"]
    monkeypatch.setenv("QSCISSOR_THREADS", "1")
    _, first, _ = run(argv, capsys)
    monkeypatch.setenv("QSCISSOR_THREADS", "4")
    _, second, _ = run(argv, capsys)
    assert first == second


def test_noisy_ideal_profile_matches_amplify(capsys):
    args = ["--n", "1-2", "--sweep", "g:0.5:3:4"]
    _, amp, _ = run(["amplify"] + args, capsys)
    _, noisy, _ = run(["noisy", "--profile", "ideal"] + args, capsys)
    assert amp.splitlines()[1:] == noisy.splitlines()[1:]


def test_noisy_realistic_rows(capsys):
    code, out, _ = run(["noisy", "--profile", "realistic", "--n", "1", "--g", "1.0"], capsys)
    assert code == 0
    assert "tau_d=0.7" in out.splitlines()[0]
    row = rows(out)[1]
    assert 0 < float(row[2]) < 1
    assert row[4] == "nan" and float(row[5]) > 0


def test_teleport_cat_rows(capsys):
    code, out, _ = run(["teleport", "--state", "cat", "--n", "10", "--alpha", "2"], capsys)
    assert code == 0
    assert float(rows(out)[1][2]) > 0.99
    _, out, _ = run(["teleport", "--n", "1-3", "--alpha", "0"], capsys)
    assert all(float(r[2]) == pytest.approx(1.0) for r in rows(out)[1:])


def test_relay_distance_sweep_with_fit(capsys):
    code, out, _ = run(["relay", "--n", "1-2", "--sweep", "distance:50:150:5", "--placement", "end"], capsys)
    assert code == 0
    fits = [line for line in out.splitlines() if line.startswith("# fit")]
    assert len(fits) == 2
    slopes = [float(line.split("exponent=")[1]) for line in fits]
    assert slopes == pytest.approx([1.0, 2.0], rel=0.05)
    assert rows(out)[0][-1] == "g"


def test_relay_unit_transmission_row(capsys):
    from qscissors.channels import RelayConfig, relay_success_probability

    code, out, _ = run(["relay", "--n", "2", "--eta", "1", "--g", "1.5"], capsys)
    assert code == 0
    row = rows(out)[1]
    assert float(row[6]) == pytest.approx(relay_success_probability(RelayConfig(2, 1.5, 1.0, 1.0)), rel=1e-11)
    assert row[7] == "inf"


def test_exit_codes(capsys):
    assert run(["amplify", "--sweep", "g:1:1:3"], capsys)[0] == 2
    assert run(["amplify", "--placement", "side"], capsys)[0] == 2
    assert run(["amplify", "--profile", "realistic"], capsys)[0] == 2
    assert run(["teleport", "--g", "2"], capsys)[0] == 2
    code, _, err = run(["noisy", "--n", "3"], capsys)
    assert code == 3 and "n <= 2" in err
    assert run(["amplify", "--n", "1", "--g", "6", "--cutoff", "5"], capsys)[0] == 3


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[amplify]\nn = 2\ng = 1.5\nalpha = 0.5\n")
    _, out, _ = run(["amplify", "--config", str(cfg)], capsys)
    header = out.splitlines()[0]
    assert "g=1.5" in header and "alpha=0.5" in header and "n=2" in header
    _, out, _ = run(["amplify", "--config", str(cfg), "--alpha", "0.2"], capsys)
    assert "alpha=0.2" in out.splitlines()[0]
    bad = tmp_path / "bad.ini"
    bad.write_text("[amplify]\nbogus = 1\n")
    assert run(["amplify", "--config", str(bad)], capsys)[0] == 2


def test_profile_file(tmp_path, capsys):
    path = tmp_path / "dev.ini"
    path.write_text("[profile]\ntau_d = 0.9\ndark_count = 1e-6\ntau_r = 0.95\n")
    code, out, _ = run(["noisy", "--profile", str(path), "--n", "1", "--g", "1"], capsys)
    assert code == 0
    assert "tau_r=0.95" in out.splitlines()[0]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    assert run(["amplify", "--n", "1", "--out", str(target)], capsys)[1] == ""
    assert target.read_text().startswith("# qscissors")


def test_selftest(capsys):
    code, out, _ = run(["selftest", "--max-n", "5"], capsys)
    assert code == 0
    assert out.count("PASS") == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qscissors", "amplify", "--n", "1"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("# qscissors")
