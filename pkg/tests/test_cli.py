import json
import os

import pytest

from gltlab.cli import (
    ExperimentConfig,
    config_from_file,
    main,
    parse_sizes,
    run_experiment,
)
from gltlab.errors import ConfigurationError


def write_config(tmp_path, body):
    path = tmp_path / "exp.cfg"
    path.write_text(body)
    return str(path)


DIST_CFG = """
[experiment]
kind = distribution
d = 1
expr = T(2-2*cos(t1))
sizes = 32; 64
mode = lambda
out = {out}
basket = x,x^2

[tolerances]
tolerance = 0.05
"""


def test_parse_sizes_forms():
    assert parse_sizes("64;128", 1) == [(64,), (128,)]
    assert parse_sizes("64,128,256", 1) == [(64,), (128,), (256,)]
    assert parse_sizes("8,8; 16,16", 2) == [(8, 8), (16, 16)]
    assert parse_sizes("8,8", 2) == [(8, 8)]


def test_config_roundtrip_and_run(tmp_path):
    out = tmp_path / "artifacts"
    path = write_config(tmp_path, DIST_CFG.format(out=out))
    cfg = config_from_file(path)
    assert cfg.kind == "distribution"
    assert cfg.sizes == [(32,), (64,)]
    result = run_experiment(cfg)
    assert result.passed
    report = (out / "report.csv").read_text()
    assert report.splitlines()[0] == "n,d_n,mode,F_id,empirical,symbol,abs_error"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "PASS"
    assert summary["kind"] == "distribution"
    assert main(["run", path]) == 0


def test_run_outputs_are_byte_identical(tmp_path):
    out = tmp_path / "artifacts"
    path = write_config(tmp_path, DIST_CFG.format(out=out))
    run_experiment(config_from_file(path))
    first = {f: (out / f).read_bytes() for f in os.listdir(out)}
    run_experiment(config_from_file(path))
    second = {f: (out / f).read_bytes() for f in os.listdir(out)}
    assert first == second


def test_invalid_config_names_fields(tmp_path):
    body = """
[experiment]
kind = distribution
d = 1
expr = T(2-2*cos(t1))
sizes = 64; 32
"""
    with pytest.raises(ConfigurationError) as err:
        config_from_file(write_config(tmp_path, body))
    assert any("sizes" in f for f in err.value.fields)


def test_missing_config_file():
    with pytest.raises(ConfigurationError):
        config_from_file("/nonexistent/exp.cfg")


def test_validation_collects_all_problems():
    cfg = ExperimentConfig(kind="sacs", sizes=[], m_list=[], model="nope")
    problems = cfg.validate()
    joined = " ".join(problems)
    assert "sizes" in joined and "seed" in joined and "m_list" in joined and "model" in joined


def test_main_exit_codes(tmp_path):
    # usage error: bad config
    bad = write_config(tmp_path, "[experiment]\nkind = nope\n")
    assert main(["run", bad]) == 2

    # verdict FAIL -> 1
    code = main([
        "check-zero", "--model", "identity", "--sizes", "16;32", "--p", "2",
        "--out", str(tmp_path / "z1"),
    ])
    assert code == 1

    # verdict PASS -> 0
    code = main([
        "check-zero", "--model", "spike", "--sizes", "64;128;256", "--p", "1",
        "--out", str(tmp_path / "z2"),
    ])
    assert code == 0


def test_main_parse_and_spectrum(tmp_path, capsys):
    assert main(["parse", "--expr", "T(2-2*cos(t1))"]) == 0
    printed = capsys.readouterr().out.strip()
    assert printed == "T(-exp(-i*t1)+2-exp(i*t1))"

    assert main(["parse", "--expr", "T("]) == 2

    assert main(["spectrum", "--expr", "T(2-2*cos(t1))", "--n", "4",
                 "--mode", "lambda"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    first = float(lines[0].split(",")[0])
    assert abs(first - 0.3819660112501051) < 1e-9


def test_spectrum_artifacts(tmp_path):
    out = tmp_path / "spec"
    assert main(["spectrum", "--expr", "T(2-2*cos(t1))", "--n", "8",
                 "--mode", "sigma", "--out", str(out)]) == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "index,re,im"
    assert len(lines) == 9


def test_check_acs_cli(tmp_path):
    out = tmp_path / "acs"
    code = main([
        "check-acs", "--expr", "T(1+cos(t1)+0.25*cos(2*t1))",
        "--sizes", "16;32", "--m-list", "1,2", "--out", str(out),
    ])
    assert code == 0
    cert = (out / "certificate.csv").read_text().splitlines()
    assert cert[0] == "m,n,d_n,rank_frac,norm_part,freq_rank,freq_norm,freq_S,verdict"


def test_check_sacs_cli(tmp_path):
    out = tmp_path / "sacs"
    code = main([
        "check-sacs", "--model", "designed", "--sizes", "10;12",
        "--m-list", "2,4", "--trials", "200", "--seed", "7", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 7
    # missing seed is a config error
    assert main([
        "check-sacs", "--model", "designed", "--sizes", "10;12",
        "--m-list", "2,4", "--trials", "200", "--out", str(out),
    ]) == 2


def test_check_glt5_cli(tmp_path):
    out = tmp_path / "glt5"
    code = main([
        "check-glt5", "--expr", "T(2-2*cos(t1))", "--sizes", "16;32",
        "--out", str(out),
    ])
    assert code == 0
    lines = (out / "split.csv").read_text().splitlines()
    assert lines[0] == "n,norm_x,norm_y,trace_norm_y_over_nu,verdict"
    assert main([
        "check-glt5", "--expr", "T(exp(i*t1))", "--sizes", "16;32;64",
        "--out", str(out),
    ]) == 1


def test_plot_artifact(tmp_path):
    out = tmp_path / "plots"
    code = main([
        "check-dist", "--expr", "T(2-2*cos(t1))", "--sizes", "32;64",
        "--mode", "lambda", "--basket", "x,x^2", "--out", str(out), "--plot",
    ])
    assert code == 0
    svg = (out / "plot.svg").read_text()
    assert svg.startswith("<svg")
    assert "xlink:href" not in svg and "http://" not in svg.replace(
        "http://www.w3.org/2000/svg", "")


def test_no_partial_outputs_on_failure(tmp_path):
    out = tmp_path / "partial"
    with pytest.raises(Exception):
        run_experiment(ExperimentConfig(
            kind="distribution", expr="T(", d=1, sizes=[(8,), (16,)],
            out=str(out),
        ))
    assert not (out / "report.csv").exists()
    assert not list(out.glob("*.tmp")) if out.exists() else True
