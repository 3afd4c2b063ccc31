"""End-to-end runs of the presets and subcommands through the command line."""

import json
from pathlib import Path

import pytest
import yaml

from charlab.cli import EXIT_ASSERTION, EXIT_OK, main

ROOT = Path(__file__).resolve().parents[2]
CONFIG = str(ROOT / "charlab.yaml")


def definitions(name: str) -> str:
    return str(ROOT / "definitions" / f"{name}.cdl")


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CHARLAB_BUDGET", raising=False)
    return tmp_path


def run_json(workdir, argv):
    out = workdir / "report.json"
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    return json.loads(out.read_text())


@pytest.mark.integration
class TestPresets:
    def test_gauss_preset_with_assertions(self, workdir):
        expectations = workdir / "gauss.yaml"
        expectations.write_text(
            yaml.dump(
                {
                    "summary": {"within_constant": True, "max_normalized": {"max": 1.000001}},
                    "every_row": {"normalized": {"value": 1.0, "tolerance": 1e-6}},
                }
            )
        )
        argv = ["weil-scan", "--config", CONFIG, "--preset", "gauss", "--primes", "5..61"]
        assert main(argv + ["--assert", str(expectations), "--out", str(workdir / "gauss.csv")]) == EXIT_OK

    def test_elliptic_preset(self, workdir):
        report = run_json(workdir, ["weil-scan", "--config", CONFIG, "--preset", "elliptic", "--primes", "5..61"])
        assert report["summary"]["constant"] == 5.0
        assert report["summary"]["within_constant"] is True

    def test_squares_preset(self, workdir):
        report = run_json(workdir, ["measure-fit", "--config", CONFIG, "--preset", "squares", "--profile", "ci"])
        assert report["summary"]["d"] == 1
        assert report["summary"]["mu"] == "1/2"
        assert report["config"]["budget"] == 10**6
        assert report["family"] == "phi"
        assert (report["d"], report["mu_num"], report["mu_den"]) == (1, 1, 2)
        assert [q for q, _ in report["counts"]] == report["primes"]
        assert len(report["residuals"]) == len(report["primes"])
        assert max(r for _, r in report["residuals"]) == pytest.approx(report["C"])

    @pytest.mark.parametrize("preset,subcommand", [("gauss", "weil-scan"), ("squares", "measure-fit")])
    def test_shipped_expectations(self, workdir, preset, subcommand):
        expectations = str(ROOT / "expectations" / f"{preset}.yaml")
        argv = [subcommand, "--config", CONFIG, "--preset", preset, "--assert", expectations]
        assert main(argv + ["--out", str(workdir / "r.json")]) == EXIT_OK

    def test_failed_expectation(self, workdir):
        expectations = workdir / "expect.yaml"
        expectations.write_text(yaml.dump({"summary": {"mu": "1/3"}}))
        argv = ["measure-fit", "--config", CONFIG, "--preset", "squares", "--assert", str(expectations)]
        assert main(argv + ["--out", str(workdir / "r.json")]) == EXIT_ASSERTION


@pytest.mark.integration
class TestSubcommands:
    def test_theta_sum(self, workdir):
        argv = ["theta", "--def", definitions("theta"), "--primes", "7,11", "--combine", "sum"]
        report = run_json(workdir, argv)
        assert report["summary"]["max_delta"] < 1e-9
        assert len(report["rows"]) == 18

    def test_integrate_over_units(self, workdir):
        argv = ["integrate", "--def", definitions("gauss"), "--primes", "11..101", "--domain", "units"]
        report = run_json(workdir, argv)
        assert report["summary"]["within_bound"] is True
        assert report["summary"]["slope"] < 0
        assert report["slope"] == report["summary"]["slope"]
        assert report["tail_max"] == report["summary"]["tail_max"]
        assert all(len(value) == 3 for value in report["values"])
        assert [value[0] for value in report["values"]] == [row["q"] for row in report["rows"]]

    def test_decompose_trace_cosets(self, workdir):
        report = run_json(workdir, ["decompose", "--q", "3^2,3^3", "--trace-cosets"])
        assert [row["cells"] for row in report["rows"]] == [3, 3]
        assert report["summary"]["all_match"] is True

    def test_discrepancy(self, workdir):
        report = run_json(workdir, ["discrepancy", "--alpha", "0.41421356237309503", "--n", "100", "--H", "4,16"])
        assert report["summary"] == {"rows": 2, "violations": 0}

    def test_etk_search(self, workdir):
        argv = ["etk-search", "--gammas", "1/5", "--center", "0", "--radius", "1/10"]
        assert run_json(workdir, argv)["summary"]["l"] == 5

    def test_witness(self, workdir):
        argv = ["witness", "--def", definitions("sqrt2"), "--pmin", "3", "--pmax", "5000", "--max-records", "1"]
        report = run_json(workdir, argv)
        assert report["summary"]["verified"] == 1

    def test_same_run_gives_same_report(self, workdir):
        argv = ["sum", "--def", definitions("elliptic"), "--primes", "5..31"]
        first = run_json(workdir, argv)
        assert run_json(workdir, argv) == first
