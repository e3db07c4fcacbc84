"""Command-line client: config handling, report artifacts, exit codes."""

import json

import pytest

from k3count.cli import (
    EXIT_BUDGET,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_WALL,
    build_parser,
    main,
)

CHARGE = {"ns_gram": [[2]], "B": ["0"], "omega_ray": ["1"], "t_sq": "3/2"}

CSV_HEADER = ("R,total,square_nonneg,spherical_multiples,normalized,"
              "analytic_C,rel_err,elapsed_ms")


def run_cli(*argv):
    return main(list(argv))


def test_count_to_stdout(write_config, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "5"})
    assert run_cli("--config", cfg) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == CSV_HEADER
    assert out[1] == "5,118,86,32,0.944,,,0"


def test_flags_override_config(write_config, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "5"})
    assert run_cli("--config", cfg, "--R", "2") == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[1].startswith("2,14,6,8,")


def test_count_json_document(write_config, tmp_path, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "5", "format": "json"})
    target = tmp_path / "report.json"
    assert run_cli("--config", cfg, "--output", str(target)) == EXIT_OK
    doc = json.loads(target.read_text())
    assert doc["meta"]["schema_version"] == 1
    assert doc["meta"]["mode"] == "count"
    assert doc["rows"][0]["total"] == 118
    assert doc["rows"][0]["elapsed_ms"] == 0


def test_sweep_csv_columns_and_rel_err(write_config, tmp_path):
    cfg = write_config({"schema_version": 1, "mode": "sweep",
                        "charge": CHARGE, "R_list": ["10", "20"]})
    target = tmp_path / "sweep.csv"
    assert run_cli("--config", cfg, "--output", str(target)) == EXIT_OK
    lines = target.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    row10 = lines[1].split(",")
    assert row10[0] == "10" and row10[1] == "710"
    assert float(row10[5]) == pytest.approx(0.5700221467386062)
    assert float(row10[6]) > float(lines[2].split(",")[6])


def test_sweep_rerun_is_byte_identical(write_config, tmp_path):
    cfg = write_config({"schema_version": 1, "mode": "sweep",
                        "charge": CHARGE, "R_list": ["10", "20"]})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("--config", cfg, "--output", str(a)) == EXIT_OK
    assert run_cli("--config", cfg, "--output", str(b), "--threads", "4") == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_sweep_svg_artifact(write_config, tmp_path):
    cfg = write_config({"schema_version": 1, "mode": "sweep",
                        "charge": CHARGE, "R_list": ["10", "20"]})
    target = tmp_path / "sweep.csv"
    assert run_cli("--config", cfg, "--output", str(target), "--svg") == EXIT_OK
    svg = (tmp_path / "sweep.svg").read_text()
    assert svg.startswith("<svg ")
    assert "polyline" in svg

    # --svg without --output has no path to derive and must be refused
    assert run_cli("--config", cfg, "--svg") == EXIT_INPUT


def test_wall_exit_code(write_config, capsys):
    # omega^2 = t_sq * h.h = 2: Z vanishes on the spherical class (1, 0, 1)
    wall = {"ns_gram": [[2]], "B": ["0"], "omega_ray": ["1"], "t_sq": "1"}
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": wall, "R": "5"})
    assert run_cli("--config", cfg) == EXIT_WALL
    err = capsys.readouterr().err
    diag = json.loads(err.splitlines()[-1])
    assert diag["code"] == "wall_violation"
    assert diag["witness"] == [1, 0, 1]


def test_budget_exit_code(write_config, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "5"})
    assert run_cli("--config", cfg, "--budget", "10") == EXIT_BUDGET
    diag = json.loads(capsys.readouterr().err.splitlines()[-1])
    assert diag["code"] == "budget_exceeded"


def test_input_error_exit_codes(write_config, tmp_path, capsys):
    # schema version mismatch
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 2, "mode": "count"}))
    assert run_cli("--config", str(bad)) == EXIT_INPUT
    # missing mode entirely
    empty = write_config({"schema_version": 1}, name="empty.json")
    assert run_cli("--config", empty) == EXIT_INPUT
    # mode without its section
    assert run_cli("--mode", "count", "--R", "5") == EXIT_INPUT
    # empty R list
    cfg = write_config({"schema_version": 1, "mode": "sweep",
                        "charge": CHARGE})
    assert run_cli("--config", cfg, "--R-list", ",") == EXIT_INPUT
    # out-of-order R list
    assert run_cli("--config", cfg, "--R-list", "20,10") == EXIT_INPUT
    capsys.readouterr()


def test_unwritable_output_path(write_config, tmp_path, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "5"})
    missing = tmp_path / "no" / "such" / "dir" / "out.csv"
    assert run_cli("--config", cfg, "--output", str(missing)) == EXIT_INPUT
    diag = json.loads(capsys.readouterr().err.splitlines()[-1])
    assert diag["code"] == "input_error"


def test_lattice_info_json_only(write_config, capsys):
    cfg = write_config({"schema_version": 1, "mode": "lattice-info",
                        "lattice": {"name": "U"}, "format": "json"})
    assert run_cli("--config", cfg) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["lattice"]["rank"] == 2
    assert run_cli("--config", cfg, "--format", "csv") == EXIT_INPUT
    capsys.readouterr()


def test_coefficient_mode(write_config, capsys):
    cfg = write_config({
        "schema_version": 1, "mode": "coefficient", "format": "json",
        "coefficient": {"formula": "phase1", "rho": 1,
                        "omega_sq": "3", "disc": 2},
    })
    assert run_cli("--config", cfg) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["coefficient"]["value"] == pytest.approx(0.5700221467386062)


def test_volume_mode_seed_flag(write_config, capsys):
    cfg = write_config({
        "schema_version": 1, "mode": "volume", "format": "json",
        "volume": {"region": {"kind": "stability", "rho": 1,
                              "omega_sq": "3", "disc": 2},
                   "samples": 65536},
    })
    assert run_cli("--config", cfg, "--seed", "7") == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["meta"]["seed"] == 7
    assert doc["volume"]["seed"] == 7
    assert doc["volume"]["stderr"] > 0


def test_twistor_mode_r_list(write_config, capsys):
    cfg = write_config({
        "schema_version": 1, "mode": "twistor",
        "twistor": {"gram": [[2, 0, 0, 0], [0, 2, 0, 0],
                             [0, 0, 2, 0], [0, 0, 0, -2]],
                    "plane": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]},
        "R_list": ["2", "3"],
    })
    assert run_cli("--config", cfg) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split(",")[1] == "56"
    assert lines[2].split(",")[1] == "126"


def test_slag_mode(write_config, capsys):
    cfg = write_config({
        "schema_version": 1, "mode": "slag",
        "slag": {"ambient_gram": [[0, 0, -1], [0, 2, 0], [-1, 0, 0]],
                 "lag_basis": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                 "re_omega_form": ["1", "0", "-3/2"],
                 "im_ray": ["0", "1", "0"],
                 "im_t_sq": "3/2"},
        "R": "5",
    })
    assert run_cli("--config", cfg) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[1].startswith("5,96,86,10,")


def test_threads_auto_parses():
    args = build_parser().parse_args(["--mode", "count", "--threads", "auto"])
    assert args.threads >= 1
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--threads", "0"])


def test_rational_radius_round_trip(write_config, capsys):
    cfg = write_config({"schema_version": 1, "mode": "count",
                        "charge": CHARGE, "R": "1/2"})
    assert run_cli("--config", cfg) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[1].startswith("1/2,2,0,2,")
