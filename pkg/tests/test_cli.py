"""Command-line contract: exit codes, deterministic output, tolerances on
every numeric, bundled example states."""

import json
from importlib import resources

import numpy as np
import pytest

from chiralkit.cli import main
from chiralkit.io import parse_state_file, write_state_file
from chiralkit.sampling import random_mixed_state, split_rng
from chiralkit.states import bell_state, chiral_qutrit_qubit


@pytest.fixture()
def bell_file(tmp_path):
    path = tmp_path / "bell.json"
    write_state_file(path, bell_state(), label="bell")
    return str(path)


@pytest.fixture()
def example_file(tmp_path):
    path = tmp_path / "example1.json"
    write_state_file(path, chiral_qutrit_qubit((0.5, 0.3, 0.2)))
    return str(path)


class TestBundledData:
    def test_bell_round_trip(self):
        with resources.as_file(resources.files("chiralkit.data") / "bell.json") as path:
            rho = parse_state_file(path)
        assert rho.dims == (2, 2)
        assert np.max(np.abs(rho.data - bell_state().data)) < 1e-10

    def test_example_state(self):
        with resources.as_file(resources.files("chiralkit.data") / "example1.json") as path:
            rho = parse_state_file(path)
        assert rho.dims == (3, 2)
        assert np.max(np.abs(rho.data - chiral_qutrit_qubit((0.5, 0.3, 0.2)).data)) < 1e-10


class TestStateFileErrors:
    def test_malformed_json_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dims": [2,')
        assert main(["measure", "--state", str(bad), "--split", "0|1"]) == 2

    def test_missing_file_exit_2(self):
        assert main(["measure", "--state", "/nonexistent.json", "--split", "0|1"]) == 2

    def test_shape_mismatch_exit_3(self, tmp_path):
        doc = {"dims": [2, 2], "matrix": [[1.0, 0.0]] * 4}
        path = tmp_path / "shape.json"
        path.write_text(json.dumps(doc))
        assert main(["measure", "--state", str(path), "--split", "0|1"]) == 3

    def test_invariant_violation_exit_4(self, tmp_path):
        matrix = [[0.0, 0.0]] * 16
        matrix[0] = [2.0, 0.0]
        path = tmp_path / "inv.json"
        path.write_text(json.dumps({"dims": [2, 2], "matrix": matrix}))
        assert main(["measure", "--state", str(path), "--split", "0|1"]) == 4

    def test_unknown_flag_exit_64(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["measure", "--nope"])
        assert info.value.code == 64
        assert "usage" in capsys.readouterr().err


class TestMeasureCommand:
    def test_product_state_all_zero(self, tmp_path, capsys):
        prod = random_mixed_state((2,), split_rng(140, 0))
        other = random_mixed_state((2,), split_rng(140, 1))
        from chiralkit.qmat import tensor_product

        path = tmp_path / "prod.json"
        write_state_file(path, tensor_product(prod, other))
        assert main(["measure", "--state", str(path), "--split", "0|1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        for name, entry in doc["measures"].items():
            assert abs(entry["value"]) <= entry["tolerance"], name

    def test_every_numeric_carries_tolerance(self, example_file, capsys):
        assert main(["measure", "--state", example_file, "--split", "0|1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        for name, entry in doc["measures"].items():
            assert ("tolerance" in entry) or (entry["value"] is None), name

    def test_byte_identical_reruns(self, example_file, capsys):
        main(["measure", "--state", example_file, "--split", "0|1", "--s", "0.3"])
        first = capsys.readouterr().out
        main(["measure", "--state", example_file, "--split", "0|1", "--s", "0.3"])
        assert capsys.readouterr().out == first


class TestLogdistCommand:
    def test_reports_expected_fields(self, example_file, capsys):
        code = main(
            ["logdist", "--state", example_file, "--split", "0|1", "--restarts", "10",
             "--seed", "3"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["best_fidelity"]["value"] < 1 - 1e-3
        assert not doc["nonchirality_certified"]
        assert doc["restarts"] == 10

    def test_seed_determinism(self, bell_file, capsys):
        argv = ["logdist", "--state", bell_file, "--split", "0|1", "--restarts", "5",
                "--seed", "11"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first


class TestStabilizerCommand:
    def test_ghz_tableau(self, tmp_path, capsys):
        path = tmp_path / "ghz.tab"
        path.write_text("+XXX\n+ZZI\n+IZZ\n")
        assert main(["stabilizer", "--tableau", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["conjugation_pauli"] == "III"
        assert doc["nullity"] == 0
        assert doc["stabilizer_fidelity"]["value"] == pytest.approx(1.0, abs=1e-9)
        assert doc["solution_set_log2"] == 3

    def test_mixed_group_skips_pure_monotones(self, tmp_path, capsys):
        path = tmp_path / "mixed.tab"
        path.write_text("+XX\n")
        assert main(["stabilizer", "--tableau", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "nullity" not in doc
        assert doc["solution_set_log2"] == 3  # 2n - k


class TestQfiCommand:
    def test_block_state_verdicts(self, example_file, capsys):
        assert main(["qfi", "--state", example_file, "--split", "0|1", "--party", "A"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["intrinsic_ip_A"]["value"]) <= doc["intrinsic_ip_A"]["tolerance"]
        assert doc["intrinsic_ip_B"]["value"] > 0.1
        assert doc["classical_quantum"]["detected"] is True
        assert doc["nonchirality"]["verdict"] == "undecided"


class TestBoundsCommand:
    def test_small_suite_passes(self, capsys):
        assert main(["bounds", "--n", "6", "--seed", "7", "--restarts", "8"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["violations"] == 0
        assert doc["magic_bounds_worst_excess"]["value"] <= 1e-7


class TestScanCommand:
    def test_writes_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        assert main(["scan", "--n", "40", "--seed", "5", "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["n"] == 40
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "sample_index,E_N,abs_J2,seed"
        assert len(lines) == 41

    def test_identical_argv_identical_bytes(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["scan", "--n", "25", "--seed", "9", "--out", str(out1)])
        first = capsys.readouterr().out
        main(["scan", "--n", "25", "--seed", "9", "--out", str(out2)])
        assert capsys.readouterr().out == first
        assert out1.read_bytes() == out2.read_bytes()


class TestSelftestCommand:
    def test_single_criterion(self, capsys):
        assert main(["selftest", "--only", "C3"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("[PASS] C3")
