from unittest.mock import patch

import numpy as np
import orjson
import orjsonl
import pytest

from ukblab.errors import InconsistentAlgebra
from ukblab.geometry.bundle import CROSS_FIBER_DISTANCE
from ukblab.geometry.hereditary import Region
from ukblab.harness.run import (
    EXIT_INPUT_ERROR,
    EXIT_PASS,
    EXIT_VIOLATION,
    Report,
    RunConfig,
    main,
    resolve_algebra,
    run,
)
from ukblab.utils.report import CheckResult, CheckSuite

#: E_11 + E_11 corner of M_2 ⊕ M_3 in block-diagonal position
M2M3_CORNER = np.diag([1, 0, 1, 0, 0]).tolist()
#: E_11 corner of M_2
M2_CORNER = [[1, 0], [0, 0]]

E11 = [[1, 0], [0, 0]]
E22 = [[0, 0], [0, 1]]
#: density of (e_1 + e_2)/√2
PLUS = [[0.5, 0.5], [0.5, 0.5]]
#: density of (e_1 + i·e_2)/√2
PLUS_I = [[0.5, [0, -0.5]], [[0, 0.5], 0.5]]


def padded_density(density, size):
    full = np.zeros((size, size)).tolist()
    for r, row in enumerate(density):
        for s, value in enumerate(row):
            full[r][s] = value
    return full


@pytest.fixture
def write_spec(tmp_path):
    def write(spec, name="input.json"):
        path = tmp_path / name
        path.write_bytes(orjson.dumps(spec))
        return path

    return write


def run_command(command, path=None, **kwargs):
    return run(RunConfig(command, input_path=path, progress=False, **kwargs))


def test_run_config():
    config = RunConfig("decompose", seed=7, tol_eq=1e-8)
    assert config.tolerances.rng_seed == 7
    assert config.tolerances.tol_eq == 1e-8

    with pytest.raises(ValueError, match="Unknown command"):
        RunConfig("transmogrify")
    with pytest.raises(ValueError, match="samples must be at least 1"):
        RunConfig("norm", samples=0)


def test_report_as_dict():
    report = Report("decompose", [CheckResult("block_reconstruction", True)], {"dim": 4})
    assert report.passed
    assert report.as_dict() == {
        "command": "decompose",
        "pass": True,
        "checks": [
            {"check": "block_reconstruction", "pass": True, "witnesses": [], "max_residual": 0.0}
        ],
        "result": {"dim": 4},
    }
    report.checks.append(CheckSuite("failing", [CheckResult("other", False, 1.0)]))
    report.timing_ms = 1.5
    assert not report.passed
    assert report.as_dict()["timing_ms"] == 1.5


def test_resolve_algebra():
    assert resolve_algebra({"catalog": "M2"}).dim == 4
    generated = resolve_algebra({"ambient_dim": 2, "generators": [E11]})
    assert [block.n for block in generated.blocks] == [1]


def test_decompose(write_spec):
    report = run_command("decompose", write_spec({"algebra": {"catalog": "M2+M3"}}))
    assert report.passed
    assert report.result["dim"] == 13
    assert report.result["ambient_dim"] == 5
    assert [block["n"] for block in report.result["blocks"]] == [2, 3]
    assert report.timing_ms is None


def test_ideals(write_spec):
    report = run_command("ideals", write_spec({"algebra": {"catalog": "M2+M3"}}))
    assert report.passed
    assert sorted(entry["dim"] for entry in report.result["ideals"]) == [0, 4, 9, 13]
    assert [check.name for check in report.checks] == [
        "ideal_is_kernel",
        "quotient_homomorphism",
        "ideal_bundle_correspondence",
    ]


@pytest.mark.parametrize(
    "density,hilbert_dim,pure",
    [(E11, 2, True), ([[0.5, 0], [0, 0.5]], 4, False)],
)
def test_gns(write_spec, density, hilbert_dim, pure):
    spec = {"algebra": {"catalog": "M2"}, "state": {"density": density}}
    report = run_command("gns", write_spec(spec))
    assert report.passed
    assert report.result["hilbert_dim"] == hilbert_dim
    assert report.result["state"]["pure"] is pure


def test_distance(write_spec):
    spec = {
        "algebra": {"catalog": "M2+M3"},
        "first": {"density": padded_density(E11, 5)},
        "second": {"density": padded_density([[0, 0, 0], [0, 0, 0], [0, 0, 1]], 5)},
    }
    report = run_command("distance", write_spec(spec))
    assert report.passed
    assert report.result["distance"] == CROSS_FIBER_DISTANCE
    assert report.result["fibers"] == [1, 2]


def test_distance_same_point(write_spec):
    spec = {
        "algebra": {"catalog": "M2"},
        "first": {"density": PLUS},
        "second": {"density": PLUS},
    }
    report = run_command("distance", write_spec(spec))
    assert report.result["distance"] == pytest.approx(0, abs=1e-9)


def test_gelfand_element(write_spec):
    spec = {"algebra": {"catalog": "M2"}, "element": [[1, 2], [0, 3]]}
    report = run_command("gelfand", write_spec(spec))
    assert report.passed
    np.testing.assert_allclose(report.result["element"], [[1, 2], [0, 3]], atol=1e-10)
    assert report.result["condition"] >= 1


def test_gelfand_samples_file(write_spec, tmp_path):
    # values of a = [[1, 2], [0, 3]] at four pure states
    records = [
        {"state": {"density": E11}, "value": 1},
        {"state": {"density": E22}, "value": 3},
        {"state": {"density": PLUS}, "value": 3},
        {"state": {"density": PLUS_I}, "value": [2, 1]},
    ]
    orjsonl.save(tmp_path / "samples.jsonl", records)
    spec = {"algebra": {"catalog": "M2"}, "samples": "samples.jsonl"}
    report = run_command("gelfand", write_spec(spec))
    assert report.passed
    np.testing.assert_allclose(report.result["element"], [[1, 2], [0, 3]], atol=1e-9)


def test_gelfand_samples_inconsistent(write_spec):
    spec = {
        "algebra": {"catalog": "M2"},
        "samples": [{"state": {"density": E11}, "value": 1}],
    }
    with pytest.raises(ValueError, match="determine only"):
        run_command("gelfand", write_spec(spec))


def test_star(write_spec):
    spec = {"algebra": {"catalog": "M2"}, "first": [[0, 1], [0, 0]], "second": [[0, 0], [1, 0]]}
    report = run_command("star", write_spec(spec))
    assert report.passed
    np.testing.assert_allclose(report.result["product"], E11, atol=1e-9)


def test_norm(write_spec):
    spec = {"algebra": {"catalog": "M2"}, "element": [[0, 1], [0, 0]]}
    report = run_command("norm", write_spec(spec), samples=20)
    assert report.passed
    assert report.result["exact"] == pytest.approx(1)
    assert report.result["sampled"] <= 1 + 1e-12


def test_hereditary_classify(write_spec):
    spec = {
        "algebra": {"catalog": "M2"},
        "projection": M2_CORNER,
        "states": [{"density": E11}, {"density": E22}, {"density": PLUS}],
    }
    report = run_command("hereditary-classify", write_spec(spec))
    assert report.passed
    regions = [entry["region"] for entry in report.result["states"]]
    assert regions == [Region.ON_IMAGE, Region.BOUNDARY_SPHERE, Region.INSIDE_DISK]
    assert report.result["states"][2]["weight"] == pytest.approx(0.5)


def test_theta_of_state(write_spec):
    spec = {
        "algebra": {"catalog": "M2+M3"},
        "projection": M2M3_CORNER,
        "state": {"density": padded_density(PLUS, 5)},
    }
    report = run_command("theta", write_spec(spec))
    assert report.passed
    assert report.result["t"] == pytest.approx(0.5)
    assert report.result["rho_prime"]["pure"]


@pytest.mark.parametrize("t", [0.25, 1.0])
def test_theta_preimage(write_spec, t):
    spec = {
        "algebra": {"catalog": "M2+M3"},
        "projection": M2M3_CORNER,
        "t": t,
        "rho_prime": {"ray": {"fiber": 2, "vector": [1]}},
    }
    report = run_command("theta", write_spec(spec))
    assert report.passed
    assert report.result["state"]["pure"]


def test_theta_out_of_range(write_spec):
    spec = {
        "algebra": {"catalog": "M2+M3"},
        "projection": M2M3_CORNER,
        "t": 1.5,
        "rho_prime": {"ray": {"fiber": 1, "vector": [1]}},
    }
    with pytest.raises(ValueError, match="t must lie in"):
        run_command("theta", write_spec(spec))


def test_xi(write_spec):
    spec = {
        "algebra": {"catalog": "M2+M3"},
        "projection": M2M3_CORNER,
        "state": {"ray": {"fiber": 1, "vector": [1]}},
    }
    report = run_command("xi", write_spec(spec))
    assert report.passed
    assert report.result["state"]["fiber"] == 1


def test_sphere(write_spec):
    spec = {
        "algebra": {"catalog": "M2"},
        "projection": M2_CORNER,
        "mu": {"ray": {"fiber": 1, "vector": [1]}},
        "radius": 1.0,
    }
    report = run_command("sphere", write_spec(spec))
    assert report.passed
    assert abs(complex(report.result["phase"])) == pytest.approx(1)


def test_subbundle_check(write_spec):
    spec = {"algebra": {"catalog": "M2+M3"}, "projection": M2M3_CORNER}
    report = run_command("subbundle-check", write_spec(spec), samples=3)
    assert report.passed
    assert report.result["is_ideal"] is False
    assert [check.name for check in report.checks] == ["subbundle_check", "ball_cover_check"]


def test_missing_key(write_spec):
    with pytest.raises(ValueError, match="needs a 'state' entry"):
        run_command("gns", write_spec({"algebra": {"catalog": "M2"}}))


def test_missing_input():
    with pytest.raises(ValueError, match="needs an --input file"):
        run_command("decompose")


@patch("ukblab.harness.run.verify_all")
def test_verify_all_without_input(mock_verify_all):
    mock_verify_all.return_value = [CheckSuite("structure", [CheckResult("gns_purity", True)])]
    report = run_command("verify-all", seed=3, samples=11)
    assert report.passed
    assert report.result == {"seed": 3, "samples": 11}
    args = mock_verify_all.call_args.args
    assert args[0] is None
    assert args[1] == 11
    assert args[3] is False


def test_main_stdout(write_spec, capsys):
    path = write_spec({"algebra": {"catalog": "M2"}})
    with patch("sys.argv", ["ukb-lab", "decompose", "--input", str(path)]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_PASS
    report = orjson.loads(capsys.readouterr().out)
    assert report["command"] == "decompose"
    assert report["pass"] is True
    assert report["result"]["dim"] == 4
    assert "timing_ms" not in report


def test_main_out_file(write_spec, tmp_path, capsys):
    path = write_spec({"algebra": {"catalog": "D3"}})
    out = tmp_path / "report.json"
    argv = ["ukb-lab", "decompose", "-i", str(path), "--out", str(out), "--timing"]
    with patch("sys.argv", argv):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_PASS
    assert capsys.readouterr().out == ""
    report = orjson.loads(out.read_bytes())
    assert report["result"]["spectrum"] == "1-3"
    assert report["timing_ms"] >= 0


def test_main_out_file_exists(write_spec, tmp_path, capsys):
    path = write_spec({"algebra": {"catalog": "M2"}})
    out = tmp_path / "report.json"
    out.touch()
    with patch("sys.argv", ["ukb-lab", "decompose", "-i", str(path), "--out", str(out)]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_INPUT_ERROR
    captured = capsys.readouterr()
    assert "already exists; not overwriting" in captured.err
    assert out.read_bytes() == b""


@pytest.mark.parametrize(
    "content,message",
    [
        (b"{not json", "SpecError: Invalid JSON"),
        (b'{"algebra": {"catalog": "M9"}}', "Unknown catalog algebra"),
        (b'{"algebra": {"ambient_dim": 2}}', "needs a 'generators' entry"),
    ],
)
def test_main_input_errors(tmp_path, capsys, content, message):
    path = tmp_path / "input.json"
    path.write_bytes(content)
    with patch("sys.argv", ["ukb-lab", "decompose", "-i", str(path)]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_INPUT_ERROR
    assert message in capsys.readouterr().err


def test_main_missing_file(tmp_path, capsys):
    with patch("sys.argv", ["ukb-lab", "decompose", "-i", str(tmp_path / "missing.json")]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_INPUT_ERROR
    assert "does not exist" in capsys.readouterr().err


def test_main_bad_samples(capsys):
    with patch("sys.argv", ["ukb-lab", "verify-all", "--samples", "0"]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_INPUT_ERROR
    assert "samples must be at least 1" in capsys.readouterr().err


def test_main_inconsistent_algebra(write_spec, capsys):
    path = write_spec({"algebra": {"catalog": "M2"}})

    def broken(spec, config, tol):
        raise InconsistentAlgebra("broken unit")

    with patch.dict("ukblab.harness.run.COMMANDS", {"decompose": broken}):
        with patch("sys.argv", ["ukb-lab", "decompose", "-i", str(path)]):
            with pytest.raises(SystemExit) as execinfo:
                main()
    assert execinfo.value.code == EXIT_VIOLATION
    assert "InconsistentAlgebra: broken unit" in capsys.readouterr().err


@patch("ukblab.harness.run.verify_all")
def test_main_failed_check(mock_verify_all, capsys):
    mock_verify_all.return_value = [
        CheckSuite("distance", [CheckResult("cross_fiber", False, 2.0, [{"first": 1}])])
    ]
    with patch("sys.argv", ["ukb-lab", "verify-all", "--no-progress"]):
        with pytest.raises(SystemExit) as execinfo:
            main()
    assert execinfo.value.code == EXIT_VIOLATION
    report = orjson.loads(capsys.readouterr().out)
    assert report["pass"] is False
    assert report["checks"][0]["clauses"][0]["witnesses"] == [{"first": 1}]
    assert mock_verify_all.call_args.args[3] is False
