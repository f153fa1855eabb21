import subprocess
import sys

import pytest

from newsflow import cli, fixture
from newsflow.pipeline import PipelineConfig


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-fixture")
    fixture.generate(d, fixture.FixtureSpec(n_records=1500, n_days=3))
    return d


def _paths(d):
    return ["--records", str(d / "records.jsonl"), "--catalog", str(d / "catalog.csv"),
            "--redirects", str(d / "redirects.csv"), "--supporters", str(d / "supporters.csv")]


def test_print_config_lists_every_key(capsys):
    assert cli.main(["tally", "--print-config"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split(" = ")[0] for l in lines] == PipelineConfig.keys()
    assert "granger_lag = 37" in lines and "r0 = 0.5" in lines


def test_config_file_and_flag_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("ci_ell = 3\nr0 = 0.3\n")
    assert cli.main(["rank", "--config", str(conf), "--r0", "0.7", "--print-config"]) == 0
    out = capsys.readouterr().out
    assert "ci_ell = 3" in out and "r0 = 0.7" in out


def test_tally_subcommand(corpus, tmp_path):
    assert cli.main(["tally", *_paths(corpus), "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "tally.csv").is_file()
    assert (tmp_path / "MANIFEST").read_text().startswith("# status: complete")


@pytest.mark.parametrize("argv", [
    ["tally"],
    ["tally", "--records", "/nonexistent.jsonl", "--catalog", "/nonexistent.csv"],
    ["rank", "--ci-ell", "0"],
    ["series", "--records", "x"],
])
def test_validation_errors_exit_2(argv, corpus, tmp_path):
    if argv[0] == "rank":
        argv = argv + _paths(corpus)
    assert cli.main(argv + ["--output-dir", str(tmp_path)]) == 2


def test_unparseable_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["rank", "--ci-ell", "two"])
    assert info.value.code == 2


def test_bad_config_file_exits_2(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("unknown_key = 1\n")
    assert cli.main(["tally", "--config", str(conf)]) == 2


def test_stage_failure_exits_3(corpus, tmp_path):
    bad = tmp_path / "catalog.csv"
    bad.write_text("not,a,catalog\n")
    argv = ["tally", "--records", str(corpus / "records.jsonl"), "--catalog", str(bad),
            "--output-dir", str(tmp_path / "out")]
    assert cli.main(argv) == 3
    assert "# status: incomplete" in (tmp_path / "out" / "MANIFEST").read_text()


def test_gen_fixture(tmp_path):
    assert cli.main(["gen-fixture", str(tmp_path), "--n-records", "300", "--days", "2"]) == 0
    assert sum(1 for _ in open(tmp_path / "records.jsonl")) == 300
    assert cli.main(["gen-fixture", str(tmp_path), "--n-records", "1"]) == 2


def test_report_twice_is_byte_identical(corpus, tmp_path):
    hashes = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        argv = ["report", *_paths(corpus), "--outages", str(corpus / "outages.csv"),
                "--het-samples", "20", "--het-sample-size", "2000", "--granger-lag", "8",
                "--output-dir", str(out)]
        assert cli.main(argv) == 0
        hashes.append((out / "MANIFEST").read_text())
    assert hashes[0] == hashes[1]
    assert "granger.csv" in hashes[0] and "causality.dot" in hashes[0]


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "newsflow.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("newsflow")
