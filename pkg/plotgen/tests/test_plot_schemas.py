"""Schema validation: exact headers in, typed rows out, loud diffs otherwise."""

from pathlib import Path

import pytest

from afdplot.schemas import KINDS, SchemaMismatch, expected_header, read_table

GOLDEN = Path(__file__).parent / "golden"


def test_every_kind_has_a_schema():
    assert set(KINDS) == {"intensity", "hfu", "penalty", "timeline"}


def test_read_intensity_types():
    rows = read_table(GOLDEN / "intensity_dsv3_h800.csv", "intensity")
    assert len(rows) == 64
    first = rows[0]
    assert isinstance(first["nf"], int)
    assert isinstance(first["regime"], str)
    assert isinstance(first["intensity_ub_norm"], float)
    assert max(r["intensity_ub_norm"] for r in rows) == 1.0


def test_read_hfu_bool_and_optional_reason():
    rows = read_table(GOLDEN / "hfu_h800.csv", "hfu")
    assert len(rows) == 128
    assert rows[0]["feasible"] is False
    assert rows[0]["reason"] == "bandwidth_exceeds_budget"
    feasible = [r for r in rows if r["feasible"]]
    assert feasible and all(r["reason"] is None for r in feasible)


def test_read_penalty_and_timeline():
    rows = read_table(GOLDEN / "penalty_default.csv", "penalty")
    assert len(rows) == 972
    trace = read_table(GOLDEN / "trace_3bo.csv", "timeline")
    assert len(trace) == 6 * 3 * 4
    assert {r["resource"] for r in trace} == {
        "attention", "dispatch", "ffn", "combine"}


def test_header_mismatch_reports_column_diff(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("nf,regime,tokens,intensity_ub_norm\n1,stable,2,0.5\n")
    with pytest.raises(SchemaMismatch) as exc:
        read_table(bad, "intensity")
    message = str(exc.value)
    assert "missing columns" in message
    assert "rank_tokens" in message and "tokens_per_expert" in message
    assert "unexpected columns" in message and "'tokens'" in message


def test_header_order_mismatch_detected(tmp_path):
    cols = expected_header("penalty")
    swapped = cols[:]
    swapped[0], swapped[1] = swapped[1], swapped[0]
    bad = tmp_path / "swapped.csv"
    bad.write_text(",".join(swapped) + "\n")
    with pytest.raises(SchemaMismatch) as exc:
        read_table(bad, "penalty")
    assert "wrong order" in str(exc.value)


def test_empty_file_is_a_schema_mismatch(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaMismatch):
        read_table(empty, "hfu")


def test_bad_cell_names_row_and_column(tmp_path):
    bad = tmp_path / "cell.csv"
    bad.write_text(",".join(expected_header("timeline"))
                   + "\nattention,0,zero,0,1\n")
    with pytest.raises(ValueError) as exc:
        read_table(bad, "timeline")
    assert "layer" in str(exc.value) and ":2" in str(exc.value)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        read_table(GOLDEN / "trace_3bo.csv", "gantt")
