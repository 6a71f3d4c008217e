"""CLI-level smoke and exit-code tests for plotgen."""

from pathlib import Path

import pytest

from afdplot.cli import EXIT_IO, EXIT_OK, EXIT_SCHEMA, EXIT_USAGE, main

GOLDEN = Path(__file__).parent / "golden"

RENDER_CASES = [
    ("intensity", "intensity_dsv3_h800.csv"),
    ("intensity", "intensity_dsv3_gb200.csv"),
    ("intensity", "intensity_single_row.csv"),
    ("hfu", "hfu_h800.csv"),
    ("hfu", "hfu_gb200.csv"),
    ("hfu", "hfu_all_infeasible.csv"),
    ("penalty", "penalty_default.csv"),
    ("penalty", "penalty_sigma1.csv"),
    ("timeline", "trace_3bo.csv"),
]


@pytest.mark.parametrize("kind,name", RENDER_CASES)
def test_every_kind_renders_from_golden(kind, name, tmp_path, capsys):
    out = tmp_path / f"{name}.png"
    rc = main([kind, str(GOLDEN / name), "-o", str(out), "--quiet"])
    assert rc == EXIT_OK
    assert out.stat().st_size > 1000
    capsys.readouterr()


def test_render_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        rc = main(["penalty", str(GOLDEN / "penalty_sigma1.csv"),
                   "-o", str(out), "--quiet"])
        assert rc == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_schema_mismatch_exit_2_with_diff(tmp_path, capsys):
    rc = main(["intensity", str(GOLDEN / "penalty_sigma1.csv"),
               "-o", str(tmp_path / "x.png")])
    err = capsys.readouterr().err
    assert rc == EXIT_SCHEMA
    assert "missing columns" in err and "regime" in err
    assert "unexpected columns" in err and "alpha_ep" in err


def test_missing_input_exit_3(tmp_path, capsys):
    rc = main(["hfu", str(tmp_path / "absent.csv"),
               "-o", str(tmp_path / "x.png")])
    assert rc == EXIT_IO
    assert "I/O error" in capsys.readouterr().err


def test_unwritable_output_exit_3(tmp_path, capsys):
    rc = main(["timeline", str(GOLDEN / "trace_3bo.csv"),
               "-o", str(tmp_path / "no-dir" / "x.png"), "--quiet"])
    assert rc == EXIT_IO
    capsys.readouterr()


def test_unknown_kind_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["histogram", str(GOLDEN / "trace_3bo.csv"), "-o", "x.png"])
    assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_corrupt_cap_sidecar_exit_3(tmp_path, capsys):
    csv_copy = tmp_path / "hfu.csv"
    csv_copy.write_bytes((GOLDEN / "hfu_gb200.csv").read_bytes())
    (tmp_path / "hfu.json").write_text("{not json")
    rc = main(["hfu", str(csv_copy), "-o", str(tmp_path / "x.png"), "--quiet"])
    assert rc == EXIT_IO
    assert "sidecar" in capsys.readouterr().err


def test_explicit_cap_json_flag(tmp_path, capsys):
    out = tmp_path / "fig.png"
    rc = main(["hfu", str(GOLDEN / "hfu_gb200_nosidecar.csv"),
               "--cap-json", str(GOLDEN / "hfu_gb200.json"),
               "-o", str(out), "--quiet"])
    assert rc == EXIT_OK
    assert out.exists()
    capsys.readouterr()
