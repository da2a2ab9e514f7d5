import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from mehler_sos.cli import main

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
SCHEMAS = ROOT / "docs" / "schemas"

MOTZKIN = str(DATA / "motzkin.json")
Z2 = str(DATA / "z2.json")


def _registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


@pytest.fixture(autouse=True)
def _restore_threads_env(monkeypatch):
    # main() exports --threads into the environment; monkeypatch restores it afterwards
    monkeypatch.setenv("MEHLER_SOS_THREADS", "1")


def validate(obj, name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(obj)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


CASES = {
    "bound": (["bound", "-i", MOTZKIN, "--epsilon", "1", "--t", "1/2"], "bound-report"),
    "perturb": (["perturb", "-i", Z2, "--N", "3", "--t", "1"], "polynomial"),
    "apply-kernel": (["apply-kernel", "-i", Z2, "--N", "1", "--lambda-sq", "1/2"], "operator-image"),
    "tail": (["tail", "-i", MOTZKIN, "--N", "3", "--lambda-sq", "1/4"], "polynomial"),
    "decompose": (["decompose", "-i", Z2, "--N", "1", "--lambda-sq", "1/2"], "operator-image"),
    "certify": (["certify", "-i", MOTZKIN, "--N", "2", "--lambda-sq", "1/2"], "certificate"),
    "check-estimates": (["check-estimates", "-i", MOTZKIN, "--samples", "2000", "--seed", "3"], "verification-report"),
    "synthesis": (
        ["synthesis", "-i", Z2, "--N", "3", "--lambda-sq", "1/4", "--N-pert", "7", "--samples", "2000", "--seed", "7"],
        "verification-report",
    ),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_schema_and_determinism(capsys, name):
    argv, schema = CASES[name]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    validate(json.loads(first), schema)
    code, second, _ = run(capsys, *argv)
    assert first == second


def test_verify_certificate_round_trip(capsys, tmp_path):
    cert_path = tmp_path / "cert.json"
    assert main(["certify", "-i", MOTZKIN, "--N", "2", "--lambda-sq", "1/2", "-o", str(cert_path)]) == 0
    code, out, _ = run(capsys, "verify-certificate", "-i", str(cert_path))
    assert code == 0
    report = json.loads(out)
    validate(report, "verification-report")
    assert report["ok"] and report["gram_psd"]
    _, again, _ = run(capsys, "verify-certificate", "-i", str(cert_path))
    assert again == out


def test_bound_values(capsys):
    _, out, _ = run(capsys, "bound", "-i", MOTZKIN, "--t", "1/2")
    report = json.loads(out)
    assert abs(report["mu"]["upper"] - 89.7998) < 1e-3
    assert report["mu"]["exact"] == "24*sqrt(14)"
    assert report["n_expl"] == report["term_relevant"]


def test_decompose_identity(capsys):
    _, out, _ = run(capsys, "decompose", "-i", Z2, "--N", "1", "--lambda-sq", "1/2")
    assert json.loads(out)["exact_identity"] is True


def test_zero_polynomial(capsys, tmp_path):
    zero = tmp_path / "zero.json"
    zero.write_text('{"vars": 1, "terms": []}')
    code, out, _ = run(capsys, "bound", "-i", str(zero))
    assert code == 0 and json.loads(out)["trivial"] is True
    validate(json.loads(out), "bound-report")


def test_negative_input_exit_2(capsys, tmp_path):
    neg = tmp_path / "neg.json"
    neg.write_text('{"vars": 1, "terms": [{"exp": [2], "coef": "1"}, {"exp": [0], "coef": "-1"}]}')
    code, _, err = run(capsys, "certify", "-i", str(neg), "--N", "1", "--lambda-sq", "1/2")
    assert code == 2
    assert json.loads(err)["error"] == "HypothesisViolation"
    code, _, _ = run(capsys, "synthesis", "-i", str(neg), "--N", "2", "--lambda-sq", "1/4")
    assert code == 2


def test_precision_exit_3(capsys):
    code, _, err = run(capsys, "certify", "-i", MOTZKIN, "--N", "2", "--lambda-sq", "1/2", "--coef-tol", "1e-30")
    assert code == 3
    assert json.loads(err)["exit_code"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["apply-kernel", "-i", Z2],
        ["apply-kernel", "-i", Z2, "--N", "1", "--lambda-sq", "3/2"],
        ["bound", "-i", Z2, "--epsilon", "0"],
        ["bound", "-i", "/nonexistent.json"],
        ["bound", "-i", Z2, "--t", "abc"],
        ["nosuch"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 1


def test_stdin_and_console_script():
    text = (DATA / "z2.json").read_text()
    out = subprocess.run(
        [sys.executable, "-m", "mehler_sos.cli", "tail", "-i", "-", "--N", "1", "--lambda-sq", "1/2"],
        input=text,
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["terms"] == [{"exp": [4], "coef": "1/8"}]


def test_threads_do_not_change_output(capsys):
    argv = ["synthesis", "-i", Z2, "--N", "3", "--lambda-sq", "1/4", "--samples", "9000"]
    _, one, _ = run(capsys, *argv, "--threads", "1")
    _, four, _ = run(capsys, *argv, "--threads", "4")
    assert one == four
