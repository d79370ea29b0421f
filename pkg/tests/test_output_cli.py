import json

import pytest

from llgen import cli, output


def run(args, tmp_path):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_out_dir_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv(output.OUT_DIR_ENV, str(tmp_path / "env"))
    assert output.resolve_out_dir(str(tmp_path / "cli"), "cfg") == tmp_path / "cli"
    assert output.resolve_out_dir(None, str(tmp_path / "cfg")) == tmp_path / "env"
    monkeypatch.delenv(output.OUT_DIR_ENV)
    assert output.resolve_out_dir(None, str(tmp_path / "cfg")) == tmp_path / "cfg"


def test_csv_has_provenance_and_header(tmp_path):
    path = output.write_csv(tmp_path / "x.csv", ["a", "b"], [[1, 0.5]], {"k": 1})
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# llgen ") and "config_sha256=" in lines[0]
    assert output.read_csv(path) == (["a", "b"], [["1", "0.5"]])


def test_otoc_command_and_reproducibility(tmp_path):
    args = ["otoc", "--w-max", "2", "--tau-max", "2", "--seed", "3"]
    assert run(args, tmp_path / "a") == 0
    assert run(args, tmp_path / "b") == 0
    first = (tmp_path / "a" / "otoc.csv").read_bytes()
    assert first == (tmp_path / "b" / "otoc.csv").read_bytes()
    assert (tmp_path / "a" / "otoc.gp").exists()
    header, rows = output.read_csv(tmp_path / "a" / "otoc.csv")
    err = header.index("err_abs")
    assert max(float(r[err]) for r in rows if r[7] != "left") < 1e-9


def test_config_file_and_cli_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nw-max = 1\ntau_max = 2\nmodel = RPM\nseed = 5\n")
    assert run(["otoc", "--config", str(cfg), "--tau-max", "3", "--methods", "left"], tmp_path / "o") == 0
    _, rows = output.read_csv(tmp_path / "o" / "otoc.csv")
    assert {r[0] for r in rows} == {"RPM"} and len(rows) == 3


def test_threads_do_not_change_results(tmp_path):
    base = ["otoc", "--w-max", "1", "--tau-max", "2", "--methods", "left", "--n-seeds", "3",
            "--arrangement", "random"]
    assert run(base, tmp_path / "a") == 0
    assert run(base + ["--threads", "2"], tmp_path / "b") == 0
    assert (tmp_path / "a" / "otoc.csv").read_bytes() == (tmp_path / "b" / "otoc.csv").read_bytes()


@pytest.mark.parametrize(
    "args,code",
    [
        (["otoc", "--q", "3", "--model", "XYZc"], 2),
        (["otoc", "--nonsense"], 2),
        (["otoc", "--w-max", "14", "--methods", "left"], 4),
        (["spectrum", "--w-max", "4"], 4),
        (["levelstats", "--L", "16"], 4),
        (["levelstats", "--L", "6", "--arrangement", "random"], 2),
    ],
)
def test_exit_codes(tmp_path, args, code):
    assert run(args, tmp_path) == code


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wmax = 2\n")
    assert run(["otoc", "--config", str(cfg)], tmp_path) == 2


def test_numerical_failure_exit_code(tmp_path):
    args = ["tailfit", "--averaged", "--w", "3", "--tau-max", "5"]
    assert run(args, tmp_path) == 3


@pytest.mark.parametrize(
    "args,files",
    [
        (["lsva", "--averaged", "--w", "4", "--tau-max", "14"], ["lsva.csv", "lsva.gp"]),
        (["lsva", "--w", "3", "--tau-max", "2", "--right-tau-max", "2"], ["lsva.csv"]),
        (["variational", "--averaged", "--w", "3", "--tau-max", "8"], ["variational.csv", "variational.gp"]),
        (["spectrum", "--w-max", "2"], ["spectrum.json", "spectrum.csv", "spectrum.gp"]),
        (["spectrum", "--averaged", "--w-max", "4"], ["spectrum.json"]),
        (["tailfit", "--averaged", "--w", "3", "--tau-max", "300"], ["tailfit.json", "tailfit.csv"]),
        (["avg-hrm", "--w", "8", "--tau-max", "40", "--spectrum-w-max", "4"], ["avg_hrm.csv", "avg_hrm.json"]),
        (["special", "--w-max", "2", "--tau-max", "3"], ["special.csv", "special.gp"]),
        (["levelstats", "--model", "3PM", "--L", "8", "--ref-count", "4"], ["levelstats.csv", "levelstats.json"]),
        (["verify", "--w-max", "2", "--n-vectors", "10"], ["verify.json"]),
    ],
)
def test_subcommands_write_artifacts(tmp_path, args, files):
    assert run(args, tmp_path) == 0
    for name in files:
        assert (tmp_path / name).stat().st_size > 0


def test_spectrum_json_contents(tmp_path):
    assert run(["spectrum", "--averaged", "--w-max", "3", "--q", "3"], tmp_path) == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())["result"]
    assert data["3"]["z2"][0] == pytest.approx(0.9, abs=1e-12)
    table = {round(e["z"][0], 6): e for e in data["recursion"]}
    # multiplicity C(w, n): the second difference vanishes for n = 1 and is 1 for n = 2
    assert table[0.9]["second_difference"] == 0 and table[0.9]["consistent"]
    assert table[0.09]["second_difference"] == 1 and table[0.09]["in_previous"]
    assert table[0.081]["second_difference"] == 1 and not table[0.081]["in_previous"]
