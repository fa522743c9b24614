import math

import numpy as np
import pytest

from bellmax.cli import main, parse_state_spec
from bellmax.correlation import parse_tensor_dump, reconstruct_density
from bellmax.errors import SpecParseError
from bellmax.states import (make_generalized_ghz, make_w, maximally_mixed,
                            mix, random_mixed_state, save_density)

FAST = ["--restarts", "2", "--grid", "8"]


class TestStateSpecParser:
    def test_ghz(self):
        rho = parse_state_spec("ghz:n=3,alpha=0.5")
        assert np.allclose(rho.matrix, make_generalized_ghz(3, 0.5).matrix)

    def test_w(self):
        assert np.allclose(parse_state_spec("w:n=4").matrix, make_w(4).matrix)

    def test_w4noise(self):
        want = mix([(0.25, maximally_mixed(4)), (0.75, make_w(4))])
        assert np.allclose(parse_state_spec("w4noise:x=0.25").matrix, want.matrix)

    def test_nested_mixed(self):
        spec = "mixed:x=0.3,a=w:n=3,b=ghz:n=3,alpha=0.7853981633974483"
        rho = parse_state_spec(spec)
        want = mix([(0.3, make_w(3)),
                    (0.7, make_generalized_ghz(3, math.pi / 4))])
        assert np.allclose(rho.matrix, want.matrix)

    def test_parenthesized(self):
        rho = parse_state_spec("mixed:x=0.5,a=(w:n=3),b=(ghz:n=3,alpha=0.1)")
        want = mix([(0.5, make_w(3)), (0.5, make_generalized_ghz(3, 0.1))])
        assert np.allclose(rho.matrix, want.matrix)

    def test_file(self, tmp_path, rng):
        rho = random_mixed_state(2, rng)
        path = tmp_path / "rho.txt"
        save_density(rho, path)
        back = parse_state_spec(f"file:{path}")
        assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-12

    @pytest.mark.parametrize("bad", [
        "ghz:n=3", "ghz:alpha=0.5", "w:n=x", "nothing:a=1",
        "mixed:x=2.0,a=w:n=3,b=w:n=3", "w:n=3,extra",
        "(w:n=3", "w:n=3)",
    ])
    def test_rejects(self, bad):
        with pytest.raises(SpecParseError):
            parse_state_spec(bad)

    def test_error_carries_position(self):
        with pytest.raises(SpecParseError) as exc:
            parse_state_spec("ghz:n=3,alpha=oops")
        assert exc.value.pos is not None


class TestViolationCommand:
    def test_formula(self, capsys):
        rc = main(["violation", "--state", "ghz:n=3,alpha=0.7853981633974483",
                   "--operator", "recursive:N=3,k=3", "--method", "formula", *FAST])
        out = capsys.readouterr().out
        assert rc == 0
        assert "method=formula" in out
        assert "value=1.41421" in out
        assert "b3 =" in out

    def test_both_reports_discrepancy(self, capsys):
        rc = main(["violation", "--state", "ghz:n=3,alpha=0.7853981633974483",
                   "--operator", "recursive:N=3,k=1", "--method", "both", *FAST])
        out = capsys.readouterr().out
        assert rc == 0
        assert "method=formula" in out and "method=oracle" in out
        line = next(l for l in out.splitlines() if l.startswith("discrepancy="))
        assert float(line.split("=")[1]) <= 1e-5

    def test_oracle_settings_printed(self, capsys):
        rc = main(["violation", "--state", "ghz:n=3,alpha=0.7853981633974483",
                   "--operator", "mabk:N=3", "--method", "oracle", *FAST])
        out = capsys.readouterr().out
        assert rc == 0
        assert "qubit 1: a =" in out

    def test_formula_incompatible_with_chsh(self, capsys):
        rc = main(["violation", "--state", "ghz:n=3,alpha=0.5",
                   "--operator", "chsh", "--method", "formula", *FAST])
        assert rc == 4
        assert "error:incompatible:" in capsys.readouterr().err

    def test_bad_operator_spec(self, capsys):
        rc = main(["violation", "--state", "w:n=3",
                   "--operator", "recursive:N=3", "--method", "formula", *FAST])
        assert rc == 2
        assert "error:parse:" in capsys.readouterr().err

    def test_bad_state_spec(self, capsys):
        rc = main(["violation", "--state", "w:n=", "--operator",
                   "recursive:N=3,k=1", "--method", "formula", *FAST])
        assert rc == 2

    def test_missing_file(self, capsys, tmp_path):
        rc = main(["violation", "--state", f"file:{tmp_path}/absent.txt",
                   "--operator", "recursive:N=3,k=1", "--method", "formula", *FAST])
        assert rc == 5
        assert "error:io:" in capsys.readouterr().err

    def test_qubit_mismatch(self, capsys):
        rc = main(["violation", "--state", "w:n=4",
                   "--operator", "recursive:N=3,k=1", "--method", "formula", *FAST])
        assert rc == 3
        assert "error:validation:" in capsys.readouterr().err


class TestTensorCommand:
    def test_stdout_dump(self, capsys):
        rc = main(["tensor", "--state", "ghz:n=3,alpha=0.7853981633974483"])
        out = capsys.readouterr().out
        assert rc == 0
        lines = out.splitlines()
        assert len(lines) == 65  # 64 entries + check line
        assert lines[0] == "0 0 0 0.125"
        assert lines[-1].startswith("# unit-trace check: T[0..0] = 0.125")

    def test_round_trip_through_dump(self, capsys, rng):
        rho = random_mixed_state(2, rng)
        import tempfile, os
        from bellmax.states import save_density
        with tempfile.TemporaryDirectory() as td:
            path = os.path.join(td, "rho.txt")
            save_density(rho, path)
            rc = main(["tensor", "--state", f"file:{path}"])
        lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
        assert rc == 0
        back = reconstruct_density(parse_tensor_dump(lines, 2))
        assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-10

    def test_file_output(self, tmp_path):
        out = tmp_path / "t.txt"
        rc = main(["tensor", "--state", "w:n=2", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 17


class TestScanCommand:
    def test_csv_and_figure(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        rc = main(["scan", "--family", "w-ghz-mix", "--operator", "recursive:N=3,k=3",
                   "--points", "3", "--out", str(out), *FAST])
        stdout = capsys.readouterr().out
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,f"
        assert len(lines) == 4
        assert (tmp_path / "scan.png").exists()
        assert "csv written" in stdout

    def test_no_fig_flag(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        rc = main(["scan", "--family", "w-ghz-mix", "--operator", "recursive:N=3,k=3",
                   "--points", "2", "--out", str(out), "--no-fig", *FAST])
        assert rc == 0
        assert not (tmp_path / "scan.png").exists()
        capsys.readouterr()

    def test_deterministic_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            main(["scan", "--family", "w-ghz-mix", "--operator", "recursive:N=3,k=3",
                  "--points", "3", "--out", str(path), "--no-fig", *FAST])
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_family(self, tmp_path, capsys):
        rc = main(["scan", "--family", "nope", "--operator", "recursive:N=3,k=3",
                   "--points", "2", "--out", str(tmp_path / "x.csv"), *FAST])
        assert rc == 2
        capsys.readouterr()

    def test_non_recursive_operator(self, tmp_path, capsys):
        rc = main(["scan", "--family", "w-ghz-mix", "--operator", "mabk:N=3",
                   "--points", "2", "--out", str(tmp_path / "x.csv"), *FAST])
        assert rc == 4
        capsys.readouterr()


class TestAuditCommand:
    def test_passes_small_run(self, capsys):
        rc = main(["audit", "--n", "3", "--samples", "2", "--restarts", "8",
                   "--grid", "8"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("pass") == 2

    def test_fails_with_zero_budget(self, capsys):
        rc = main(["audit", "--n", "3", "--samples", "1",
                   "--agreement-budget", "0", "--separable-budget", "-1",
                   "--restarts", "4", "--grid", "8"])
        err = capsys.readouterr().err
        assert rc == 6
        assert "error:audit:" in err

    def test_rejects_bad_n(self, capsys):
        rc = main(["audit", "--n", "5", "--samples", "1"])
        assert rc == 2
        capsys.readouterr()
