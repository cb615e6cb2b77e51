import json
import logging

import numpy as np
import pytest
from loguru import logger

from app import InterceptHandler, main


def write(path, payload):
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


def header_config(path):
    [line] = [line for line in path.read_text().splitlines() if line.startswith("# config: ")]
    return json.loads(line.removeprefix("# config: "))


@pytest.fixture
def kernel_files(tmp_path):
    return {
        "f": write(tmp_path / "f.json", {"szego": [0.5, 0.0]}),
        "subspace": write(tmp_path / "sub.json", {"generators": [{"szego": [0.5, 0.0]}]}),
    }


def test_space_command(tmp_path):
    out = tmp_path / "out"
    assert main(["space", "--N", "64", "--out", str(out)]) == 0
    report = json.loads((out / "space.json").read_text())
    assert report["space"]["kind"] == "Hardy"
    assert report["space"]["N"] == 64
    assert report["report"]["passed"]
    assert (out / "space.meta.json").exists()


def test_space_command_fails_on_a_larger_disc(tmp_path):
    space = write(
        tmp_path / "space.json",
        {"kind": "Custom", "N": 32, "beta": (2.0 ** np.arange(33)).tolist()},
    )
    assert main(["space", "--space", space, "--out", str(tmp_path / "out")]) == 1


def test_continue_through_subspace(tmp_path, kernel_files):
    out = tmp_path / "out"
    status = main(
        [
            "continue",
            "--f", kernel_files["f"],
            "--subspace", kernel_files["subspace"],
            "--lambda", "1.6",
            "--out", str(out),
        ]
    )
    assert status == 0
    payload = json.loads((out / "continuation.json").read_text())
    [result] = payload["results"]
    assert result["lambda"] == [1.6, 0.0]
    assert result["value"][0][0] == pytest.approx(5.0, abs=1e-10)
    assert result["value"][0][1] == pytest.approx(0.0, abs=1e-10)
    assert result["in_paper_domain"]
    assert payload["config"]["command"] == "continue"


def test_continue_reports_spectrum_hits(tmp_path, kernel_files):
    out = tmp_path / "out"
    status = main(
        [
            "continue",
            "--f", kernel_files["f"],
            "--subspace", kernel_files["subspace"],
            "--lambda", "1.6",
            "--lambda", "2",
            "--out", str(out),
        ]
    )
    assert status == 1
    results = json.loads((out / "continuation.json").read_text())["results"]
    assert "error" not in results[0]
    assert results[1] == {"lambda": [2.0, 0.0], "error": "SpectrumHitError"}


def test_continue_inside_the_disc(tmp_path, kernel_files):
    out = tmp_path / "out"
    args = ["continue", "--f", kernel_files["f"], "--lambda", "0.5+0.2j", "--out", str(out)]
    assert main(args) == 0
    [result] = json.loads((out / "continuation.json").read_text())["results"]
    expected = 1 / (1 - 0.5 * (0.5 + 0.2j))
    assert complex(*result["value"][0]) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize(
    "contents",
    [
        "{not json",
        {"kind": "Hyperbolic"},
        {"kind": "Custom", "N": 16},
    ],
)
def test_invalid_space_descriptors(tmp_path, contents):
    space = write(tmp_path / "space.json", contents)
    assert main(["space", "--space", space, "--out", str(tmp_path / "out")]) == 2


def test_input_errors(tmp_path, kernel_files):
    out = str(tmp_path / "out")
    assert main(["space", "--space", str(tmp_path / "missing.json"), "--out", out]) == 2
    assert main(["continue", "--lambda", "2", "--out", out]) == 2
    assert main(["continue", "--f", kernel_files["f"], "--out", out]) == 2
    assert main(["scan", "--operator", "RestrictionMatrix", "--out", out]) == 2
    assert main(["subspace", "--out", out]) == 2
    mismatched = write(tmp_path / "g.json", {"fiber_dim": 2, "szego": [0.5, 0.0]})
    assert main(["continue", "--f", mismatched, "--lambda", "0.5", "--out", out]) == 2


def test_scan_command(tmp_path):
    out = tmp_path / "out"
    status = main(["scan", "--operator", "L", "--grid", "0,1.5,8", "--N", "32", "--out", str(out)])
    assert status == 0
    path = out / "scan_L.csv"
    text = path.read_text()
    assert "# operator_tag: L" in text
    assert "# N: 32" in text
    table = np.loadtxt(path, delimiter=",", comments="#")
    assert table.shape == (64, 3)
    assert (out / "scan_L.meta.json").exists()


def test_scan_resolution_override(tmp_path, kernel_files):
    out = tmp_path / "out"
    status = main(
        [
            "scan",
            "--operator", "RestrictionMatrix",
            "--subspace", kernel_files["subspace"],
            "--resolution", "10",
            "--N", "64",
            "--out", str(out),
        ]
    )
    assert status == 0
    table = np.loadtxt(out / "scan_RestrictionMatrix.csv", delimiter=",", comments="#")
    assert table.shape == (100, 3)
    np.testing.assert_allclose(table[:, 2], np.abs(table[:, 0] + 1j * table[:, 1] - 0.5), atol=1e-9)
    echo = header_config(out / "scan_RestrictionMatrix.csv")
    assert echo["grid"]["resolution"] == 10
    assert echo["N"] == 64


def test_subspace_command(tmp_path, kernel_files):
    out = tmp_path / "out"
    assert main(["subspace", "--subspace", kernel_files["subspace"], "--out", str(out)]) == 0
    payload = json.loads((out / "subspace.json").read_text())
    assert payload["dimension"] == 1
    assert payload["spectrum"][0] == pytest.approx([0.5, 0.0])
    assert payload["arr_disc_passed"]
    assert payload["arr_disc"][0]["in_spectrum"]


def test_check_output_is_reproducible(tmp_path):
    out = tmp_path / "out"
    args = ["check", "--suite", "sot", "--N", "64", "--seed", "5", "--out", str(out)]
    assert main(args) == 0
    first = (out / "check_sot.json").read_bytes(), (out / "sot.csv").read_bytes()
    assert main(args) == 0
    second = (out / "check_sot.json").read_bytes(), (out / "sot.csv").read_bytes()
    assert first == second


def test_check_echoes_the_resolved_space(tmp_path):
    space = write(tmp_path / "space.json", {"kind": "Bergman", "N": 32, "tol": 1e-9})
    out = tmp_path / "out"
    args = ["check", "--suite", "sot", "--space", space, "--seed", "1", "--out", str(out)]
    assert main(args) in (0, 1)
    config = json.loads((out / "check_sot.json").read_text())["config"]
    assert (config["N"], config["tol"], config["seed"]) == (32, 1e-9, 1)
    assert config["space"]["kind"] == "Bergman"
    assert config["space"]["radius"] == 1.0
    assert len(config["space"]["beta"]) == 33
    assert header_config(out / "sot.csv") == config


def test_check_all(tmp_path):
    out = tmp_path / "out"
    assert main(["check", "--suite", "all", "--N", "128", "--out", str(out)]) == 0
    summary = json.loads((out / "check_all.json").read_text())
    assert summary["suite"]["passed"]
    for name in ("axioms", "blowup", "cd", "density", "reciprocal", "solvability", "sot"):
        assert (out / f"{name}.csv").exists()


def test_check_failure_exit_code(tmp_path):
    space = write(
        tmp_path / "space.json",
        {"kind": "Custom", "N": 32, "beta": (2.0 ** np.arange(33)).tolist()},
    )
    out = str(tmp_path / "out")
    assert main(["check", "--suite", "axioms", "--space", space, "--out", out]) == 1


def test_argument_errors(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["continue", "--lambda", "one"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "cdlab" in capsys.readouterr().out


def test_captured_warnings_are_logged_on_one_line():
    messages = []
    sink = logger.add(messages.append, level="WARNING", format="{extra[origin]}: {message}")
    try:
        record = logging.LogRecord(
            "py.warnings",
            logging.WARNING,
            __file__,
            1,
            "spectra.py:3: RuntimeWarning: overflow encountered\n  value = base**power\n",
            None,
            None,
        )
        InterceptHandler().handle(record)
    finally:
        logger.remove(sink)
    assert [message.strip() for message in messages] == [
        "py.warnings: spectra.py:3: RuntimeWarning: overflow encountered"
    ]
