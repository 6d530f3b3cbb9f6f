import dataclasses
import json
import math
import re
import shlex
import subprocess
import sys
from pathlib import Path

import pytest

from hadamard_rho import cli, search
from hadamard_rho.bounds import BoundReport, sylvester_report
from hadamard_rho.characteristics import RhoProfile, sylvester_profile
from hadamard_rho.matrices import catalog_representative, parse_matrix, read_matrix, sylvester_matrix
from hadamard_rho.norms import NormSpec
from hadamard_rho.report import read_csv
from hadamard_rho.search import SearchResult

README = Path(__file__).resolve().parents[1] / "README.md"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def doc_examples():
    blocks = re.findall(r"```console\n(.*?)```", README.read_text(), flags=re.S)
    out = []
    for block in blocks:
        first, _, rest = block.partition("\n")
        assert first.startswith("$ hadamard-rho "), first
        out.append((shlex.split(first[len("$ hadamard-rho "):]), rest))
    return out


def matches(expected, actual, path="$"):
    """Every field in ``expected`` appears in ``actual``; floats within 1e-9, everything else exact."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict), path
        for k, v in expected.items():
            assert k in actual, f"{path}.{k} missing"
            matches(v, actual[k], f"{path}.{k}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(expected) == len(actual), path
        for i, (e, a) in enumerate(zip(expected, actual)):
            matches(e, a, f"{path}[{i}]")
    elif isinstance(expected, float) and not isinstance(actual, bool):
        assert math.isclose(expected, actual, rel_tol=1e-9), f"{path}: {expected} != {actual}"
    else:
        assert expected == actual and type(expected) is type(actual), f"{path}: {expected!r} != {actual!r}"


EXAMPLES = doc_examples()


def test_readme_has_examples():
    assert len(EXAMPLES) >= 8


@pytest.mark.parametrize("argv,expected", EXAMPLES, ids=[" ".join(a) for a, _ in EXAMPLES])
def test_readme_example(capsys, argv, expected):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    if "--format" in argv and argv[argv.index("--format") + 1] == "csv":
        assert out.splitlines() == expected.strip().splitlines()
    else:
        matches(json.loads(expected), json.loads(out))


class TestSpecExamples:
    def test_rho_csv(self, capsys):
        code, out, _ = run(capsys, "rho", "--matrix", "sylvester:3", "--norm", "l1", "--format", "csv")
        header, rows = read_csv(out)
        assert header == ["m", "rho"] and len(rows) == 8
        best = max(int(r[1]) for r in rows)
        assert best == 14 and [int(r[0]) for r in rows if int(r[1]) == best] == [5, 7]

    def test_closed_form(self, capsys):
        code, out, _ = run(capsys, "closed-form", "--n", "4")
        assert code == 0
        assert json.loads(out) == {"n": 4, "value": 34, "m": 11, "m_prime": 13}

    def test_conjecture(self, capsys):
        code, out, _ = run(capsys, "conjecture", "--n", "2", "--mode", "exhaustive-subsets")
        data = json.loads(out)
        assert code == 0
        assert (data["min"], data["rhs"], data["verdict"]) == (6, 6, "holds")


class TestExitCodes:
    def test_invalid_matrix_is_verdict(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("order 2\n1 1\n1 1\n")
        code, out, _ = run(capsys, "validate", "--matrix", str(bad))
        assert code == 1 and json.loads(out)["valid"] is False

    def test_counterexample_is_verdict(self, capsys, monkeypatch):
        fake = SearchResult(objective=5, witness={"subset": [1, 2, 3]}, mode="exhaustive-subsets", exact=True,
                            rhs=6, verdict="counterexample")
        monkeypatch.setattr(search, "conjecture_min", lambda *a, **k: fake)
        code, out, _ = run(capsys, "conjecture", "--n", "2")
        assert code == 1 and json.loads(out)["verdict"] == "counterexample"

    def test_broken_bound_is_verdict(self, capsys, monkeypatch):
        from hadamard_rho import characteristics

        real = characteristics.sylvester_profile

        def inflated(n, norm):
            prof = real(n, norm)
            return dataclasses.replace(prof, values=tuple(v * 100 for v in prof.values), rho_max=prof.rho_max * 100)

        monkeypatch.setattr(characteristics, "sylvester_profile", inflated)
        code, out, _ = run(capsys, "bounds", "--n", "3")
        assert code == 1
        assert not BoundReport.from_json(out).ok

    @pytest.mark.parametrize(
        "argv,needle",
        [
            (["rho", "--matrix", "sylvester:2", "--norm", "l2"], "norm"),
            (["rho", "--matrix", "no/such/file.txt"], "neither"),
            (["rho-n", "--order", "24", "--mode", "subset-sign"], "budget"),
            (["alpha", "--n", "8", "--budget", "10"], "budget"),
            (["bounds", "--norm", "l1"], "--n"),
            (["rho-n", "--order", "6"], "implemented orders"),
        ],
    )
    def test_usage_errors(self, capsys, argv, needle):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == ""
        assert needle in err and f"hadamard-rho {argv[0]}" in err

    def test_malformed_matrix_file(self, capsys, tmp_path):
        f = tmp_path / "m.txt"
        f.write_text("order 2\n1 1\n")
        code, _, err = run(capsys, "validate", "--matrix", str(f))
        assert code == 2 and "FormatError" in err

    def test_argparse_errors(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2
        assert run(capsys, "rho")[0] == 2
        assert run(capsys, "--help")[0] == 0

    def test_corrupt_checkpoint(self, capsys, tmp_path):
        ck = tmp_path / "ck.json"
        ck.write_text("[")
        code, _, err = run(capsys, "conjecture", "--n", "3", "--checkpoint", str(ck))
        assert code == 2 and "CheckpointError" in err


class TestRoundTrips:
    def test_rho_json_and_csv(self, capsys):
        norm = NormSpec.lp(1.5)
        want = sylvester_profile(4, norm)
        _, out, _ = run(capsys, "rho", "--matrix", "sylvester:4", "--norm", "lp:1.5")
        got = RhoProfile.from_json(out)
        assert got.values == want.values and got.argmax == want.argmax
        _, out, _ = run(capsys, "rho", "--matrix", "sylvester:4", "--norm", "lp:1.5", "--format", "csv")
        assert RhoProfile.from_csv(out, norm).values == want.values

    def test_bounds_json(self, capsys):
        _, out, _ = run(capsys, "bounds", "--n", "5", "--norm", "example39")
        got = BoundReport.from_json(out)
        want = sylvester_report(5, NormSpec.example39(), sylvester_profile(5, NormSpec.example39()).rho_max)
        assert got == want

    def test_bounds_csv(self, capsys):
        _, out, _ = run(capsys, "bounds", "--n", "4", "--norm", "l1", "--format", "csv")
        header, rows = read_csv(out)
        assert header == ["name", "side", "value", "ok", "slack"]
        assert all(r[3] == "true" for r in rows)

    def test_hadamard_bounds(self, capsys):
        code, out, _ = run(capsys, "bounds", "--kind", "hadamard", "--n", "8", "--norm", "l1")
        rep = BoundReport.from_json(out)
        assert code == 0 and rep.rho == 20 and not rep.rho_is_lower_bound

    def test_conjecture_json(self, capsys):
        _, out, _ = run(capsys, "conjecture", "--n", "3")
        res = SearchResult.from_json(out)
        assert res.objective == res.rhs == 14 and res.verdict == "holds"

    def test_gen_text_and_file_input(self, capsys, tmp_path):
        _, out, _ = run(capsys, "gen", "--matrix", "catalog:12", "--format", "text")
        assert parse_matrix(out) == catalog_representative(12)
        path = tmp_path / "h12.txt"
        code, out, _ = run(capsys, "gen", "--matrix", "catalog:12", "--format", "text", "--output", str(path))
        assert code == 0 and out == ""
        assert read_matrix(path) == catalog_representative(12)
        assert run(capsys, "validate", "--matrix", str(path))[0] == 0

    def test_gen_json(self, capsys):
        _, out, _ = run(capsys, "gen", "--matrix", "sylvester:2", "--format", "json")
        assert json.loads(out)["entries"] == sylvester_matrix(2).tolist()

    def test_output_file(self, capsys, tmp_path):
        dest = tmp_path / "cf.json"
        code, out, _ = run(capsys, "closed-form", "--n", "5", "--output", str(dest))
        assert code == 0 and out == ""
        assert json.loads(dest.read_text())["value"] == 78


class TestOtherCommands:
    def test_alpha_json(self, capsys):
        _, out, _ = run(capsys, "alpha", "--n", "3")
        data = json.loads(out)
        assert data["max_abs"] == [2**f for f in data["f"]]

    def test_rho_n_anneal(self, capsys):
        code, out, _ = run(capsys, "rho-n", "--order", "16", "--mode", "anneal", "--budget", "300", "--seed", "4")
        data = json.loads(out)
        assert code == 0 and data["exact"] is False and "lower bound" in data["label"]

    def test_hat_rho_hadamard(self, capsys):
        code, out, _ = run(capsys, "hat-rho", "--kind", "hadamard", "--n", "4", "--trials", "10", "--format", "csv")
        header, rows = read_csv(out)
        assert code == 0 and rows[0][header.index("ok")] == "true"

    def test_diagnostics_hadamard(self, capsys):
        _, out, _ = run(capsys, "diagnostics", "--kind", "hadamard", "--n", "4", "--format", "csv")
        assert out.splitlines() == ["n,rho,ratio,note", "4,8,1.0,"]

    def test_checkpoint_resume(self, capsys, tmp_path):
        ck = str(tmp_path / "ck.json")
        base = ["conjecture", "--n", "4", "--no-symmetry", "--checkpoint", ck]
        code, out, _ = run(capsys, *base, "--stop-after", "100")
        assert code == 0 and json.loads(out)["verdict"] == "incomplete"
        code, out, _ = run(capsys, *base)
        assert json.loads(out)["verdict"] == "holds" and json.loads(out)["min"] == 34


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hadamard_rho.cli", "closed-form", "--n", "3", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["n,value,m,m_prime", "3,14,5,7"]
