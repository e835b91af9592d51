import csv
import io
import math
import subprocess
import sys

import pytest

from casimir_scatter import __version__, asymptotics, cli, geometries
from casimir_scatter.errors import ConvergenceError


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = text.splitlines()
    return lines[0], list(csv.reader(io.StringIO("\n".join(lines[1:]))))


def test_header_lists_sorted_parameters(capsys):
    code, out, _ = run(["cp", "--alpha-z", "1", "--d", "2"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head.startswith(f"# casimir-scatter {__version__} cp ")
    keys = [kv.split("=")[0] for kv in head.split()[4:]]
    assert keys == sorted(keys) and "d" in keys
    assert rows[0] == ["d", "H", "energy"]
    assert float(rows[1][2]) == asymptotics.cp_isotropic(0.0, 1.0, 0.0, 0.0, 2.0)


def test_cp_sweep_with_wall(capsys):
    code, out, _ = run(["cp", "--alpha-z", "1", "--alpha-par", "1", "--H", "0.5", "--sweep", "d",
                        "--start", "1", "--stop", "4", "--points", "4", "--log"], capsys)
    rows = table(out)[1][1:]
    assert code == 0 and len(rows) == 4
    assert float(rows[-1][0]) == pytest.approx(4.0)
    assert float(rows[1][0]) == pytest.approx(4 ** (1 / 3))


def test_cyl_cyl_row(capsys):
    code, out, _ = run(["cyl-cyl", "--d", "3", "--nmax", "6"], capsys)
    assert code == 0
    rows = table(out)[1]
    assert rows[0][:2] == ["d", "energy"]
    want = geometries.two_cylinders_energy(1.0, 3.0, geometries.SolveOptions(nmax=6)).value
    assert float(rows[1][1]) == pytest.approx(want, rel=1e-5)
    assert rows[1][4] == "6"


def test_cyl_plate_phi_e_mode(capsys):
    code, out, _ = run(["cyl-plate", "--mode", "phi-e", "--sweep", "inv-eps", "--start", "0", "--stop", "1",
                        "--points", "3"], capsys)
    rows = table(out)[1]
    assert code == 0
    vals = [float(r[1]) for r in rows[1:]]
    assert vals[0] == pytest.approx(1.0) and vals[-1] == pytest.approx(0.0, abs=1e-14)


def test_parabola_theta_sweep(capsys):
    code, out, _ = run(["parabola-plate", "--nmax", "10", "--sweep", "theta", "--start", "0", "--stop", "0.4",
                        "--points", "2"], capsys)
    rows = table(out)[1]
    assert code == 0 and rows[0][0] == "theta" and rows[0][-1] == "c_theta"
    first = rows[1]
    assert float(first[-1]) == pytest.approx(-float(first[1]))


def test_spheroid_grid_and_pfa(capsys):
    code, out, _ = run(["spheroid", "--grid", "3"], capsys)
    assert code == 0 and len(table(out)[1]) == 10
    code, out, _ = run(["pfa", "--kind", "parabola", "--R", "1", "--H", "0.1"], capsys)
    assert code == 0
    assert float(table(out)[1][1][1]) == asymptotics.parabola_pfa(1.0, 0.1)


def test_stability_verdict(capsys):
    code, out, _ = run(["stability", "--eps-a", "2", "--eps-b", "pc"], capsys)
    rows = table(out)[1]
    assert code == 0
    assert rows[-1][:2] == ["verdict", "StableEquilibriumExcluded"]
    code, out, _ = run(["stability", "--eps-a", "2", "--eps-b", "1.5", "--medium", "1.7"], capsys)
    assert table(out)[1][-1][:2] == ["verdict", "NotExcluded"]


@pytest.mark.parametrize("argv", [
    ["cyl-cyl", "--d", "1.5"],
    ["stability", "--eps-a", "3:1"],
    ["cyl-cyl", "--medium", "water"],
    ["pfa", "--kind", "parabola", "--R", "1"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) if argv == ["nonsense"] else _nullcontext():
        code = cli.main(argv)
        assert code == 2
    assert "error" in capsys.readouterr().err


class _nullcontext:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_nonconvergence_exits_3_and_marks_output(capsys, monkeypatch):
    calls = []
    real = geometries.two_cylinders_energy

    def flaky(R, d, opts):
        calls.append(d)
        if len(calls) > 1:
            raise ConvergenceError("quadrature did not converge", [1.0, 2.0])
        return real(R, d, geometries.SolveOptions(nmax=2))

    monkeypatch.setattr(geometries, "two_cylinders_energy", flaky)
    code, out, err = run(["cyl-cyl", "--sweep", "d", "--start", "3", "--stop", "4", "--points", "3"], capsys)
    assert code == 3
    lines = out.splitlines()
    assert len(lines) == 4 and lines[-1].startswith("# INCOMPLETE")
    assert "converge" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha_z = 2\nd = 3\n")
    code, out, _ = run(["cp", "--config", str(cfg), "--d", "1.5"], capsys)
    assert code == 0
    row = table(out)[1][1]
    assert float(row[0]) == 1.5
    assert float(row[2]) == asymptotics.cp_isotropic(0.0, 2.0, 0.0, 0.0, 1.5)
    cfg.write_text("colour = red\n")
    assert cli.main(["cp", "--config", str(cfg)]) == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    assert cli.main(["pfa", "--kind", "two-spheres", "--r", "1", "--R", "1", "-o", str(path)]) == 0
    assert capsys.readouterr().out == ""
    text = path.read_text()
    assert text.startswith("# casimir-scatter")
    assert float(table(text)[1][1][1]) == pytest.approx(-math.pi ** 3 / 720)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "casimir_scatter", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
