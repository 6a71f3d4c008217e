"""Figure-builder tests: introspect the returned Figure objects directly.

All artists of interest carry gid tags, so assertions never depend on
matplotlib draw order or rcParams.
"""

from pathlib import Path

from afdplot.figures import (
    build_hfu,
    build_intensity,
    build_penalty,
    build_timeline,
)
from afdplot.schemas import read_table

GOLDEN = Path(__file__).parent / "golden"


def _gids(artists):
    return [a.get_gid() for a in artists if a.get_gid()]


def _bands(fig):
    return [p for p in fig.axes[0].patches
            if (p.get_gid() or "").startswith("band:")]


# ---------------------------------------------------------------- intensity

def test_intensity_band_count_matches_csv_runs():
    rows = read_table(GOLDEN / "intensity_dsv3_h800.csv", "intensity")
    runs = 1
    for prev, nxt in zip(rows, rows[1:]):
        if prev["regime"] != nxt["regime"]:
            runs += 1
    fig = build_intensity(rows)
    bands = _bands(fig)
    assert len(bands) == runs == 4
    assert [b.get_gid() for b in bands] == [
        "band:scaleup", "band:stable", "band:scaleout", "band:max"]


def test_intensity_superpod_single_band():
    rows = read_table(GOLDEN / "intensity_dsv3_gb200.csv", "intensity")
    fig = build_intensity(rows)
    assert len(_bands(fig)) == 1


def test_intensity_single_row_degenerates_gracefully():
    rows = read_table(GOLDEN / "intensity_single_row.csv", "intensity")
    fig = build_intensity(rows, title="one point")
    assert len(_bands(fig)) == 1
    (curve,) = [ln for ln in fig.axes[0].lines if ln.get_gid() == "curve:ub"]
    assert list(curve.get_xdata()) == [4]


def test_intensity_curves_carry_csv_values_verbatim():
    rows = read_table(GOLDEN / "intensity_dsv3_h800.csv", "intensity")
    fig = build_intensity(rows)
    by_gid = {ln.get_gid(): ln for ln in fig.axes[0].lines}
    assert list(by_gid["curve:ub"].get_ydata()) == [
        r["intensity_ub_norm"] for r in rows]
    assert list(by_gid["curve:actual"].get_ydata()) == [
        r["intensity_actual_norm"] for r in rows]


# ---------------------------------------------------------------- hfu

def test_hfu_cap_lines_from_sidecar():
    rows = read_table(GOLDEN / "hfu_h800.csv", "hfu")
    caps = {("deepseek-v3", "h800"): {"cap_clamped": 0.331157},
            ("step3", "h800"): {"cap_clamped": 0.77615}}
    fig = build_hfu(rows, caps=caps)
    ax = fig.axes[0]
    cap_lines = {ln.get_gid(): ln.get_ydata()[0] for ln in ax.lines
                 if (ln.get_gid() or "").startswith("cap:")}
    assert cap_lines == {"cap:deepseek-v3:h800": 0.331157,
                         "cap:step3:h800": 0.77615}


def test_hfu_cap_falls_back_to_data_max():
    rows = read_table(GOLDEN / "hfu_gb200_nosidecar.csv", "hfu")
    fig = build_hfu(rows, caps=None)
    ax = fig.axes[0]
    (cap_line,) = [ln for ln in ax.lines
                   if (ln.get_gid() or "").startswith("cap:")]
    assert cap_line.get_ydata()[0] == max(r["hfu"] for r in rows)


def test_hfu_superpod_cap_equals_curve_max():
    # flat-topped sweep: the closed-form cap must sit exactly on the curve
    rows = read_table(GOLDEN / "hfu_gb200.csv", "hfu")
    caps = {("deepseek-v3", "gb200"): {"cap_clamped": 0.65536}}
    fig = build_hfu(rows, caps=caps)
    ax = fig.axes[0]
    (curve,) = [ln for ln in ax.lines
                if (ln.get_gid() or "").startswith("curve:")]
    (cap_line,) = [ln for ln in ax.lines
                   if (ln.get_gid() or "").startswith("cap:")]
    assert max(curve.get_ydata()) == cap_line.get_ydata()[0]


def test_hfu_infeasible_markers_present():
    rows = read_table(GOLDEN / "hfu_h800.csv", "hfu")
    fig = build_hfu(rows)
    gids = _gids(fig.axes[0].collections)
    assert "infeasible:deepseek-v3:h800" in gids
    n_infeasible_dsv3 = sum(1 for r in rows
                            if r["model"] == "deepseek-v3" and not r["feasible"])
    (scat,) = [c for c in fig.axes[0].collections
               if c.get_gid() == "infeasible:deepseek-v3:h800"]
    assert len(scat.get_offsets()) == n_infeasible_dsv3


def test_hfu_empty_feasible_set_still_renders():
    rows = read_table(GOLDEN / "hfu_all_infeasible.csv", "hfu")
    assert not any(r["feasible"] for r in rows)
    fig = build_hfu(rows)
    ax = fig.axes[0]
    assert not [ln for ln in ax.lines
                if (ln.get_gid() or "").startswith("curve:")]
    assert _gids(ax.collections) == ["infeasible:deepseek-v3:h800"]
    assert [ln for ln in ax.lines if (ln.get_gid() or "").startswith("cap:")]


# ---------------------------------------------------------------- penalty

def test_penalty_panel_grid_matches_value_sets():
    rows = read_table(GOLDEN / "penalty_default.csv", "penalty")
    nfs = {r["nf"] for r in rows}
    sigmas = {r["sigma"] for r in rows}
    fig = build_penalty(rows)
    assert len(fig.axes) == len(nfs) * len(sigmas) == 12


def test_penalty_curves_match_csv_per_panel():
    rows = read_table(GOLDEN / "penalty_default.csv", "penalty")
    fig = build_penalty(rows)
    lines = {ln.get_gid(): ln for ax in fig.axes for ln in ax.lines}
    cell = sorted((r for r in rows if r["nf"] == 4 and r["sigma"] == 0.8),
                  key=lambda r: r["lambda"])
    assert list(lines["ep:4:0.8"].get_ydata()) == [r["alpha_ep"] for r in cell]
    assert list(lines["afd:4:0.8"].get_ydata()) == [r["alpha_afd"] for r in cell]
    # data-driven dominance: dashed sits at or below solid wherever the CSV says
    for r in cell:
        assert r["alpha_afd"] <= r["alpha_ep"] + 1e-12


def test_penalty_sigma_one_flat_at_unity():
    rows = read_table(GOLDEN / "penalty_sigma1.csv", "penalty")
    fig = build_penalty(rows)
    assert len(fig.axes) == 2  # two group sizes, one occupancy
    for ax in fig.axes:
        for ln in ax.lines:
            if (ln.get_gid() or "").startswith("afd:"):
                assert set(ln.get_ydata()) == {1.0}


# ---------------------------------------------------------------- timeline

def test_timeline_lanes_and_bar_groups():
    rows = read_table(GOLDEN / "trace_3bo.csv", "timeline")
    fig = build_timeline(rows, title="schedule")
    ax = fig.axes[0]
    labels = [t.get_text() for t in ax.get_yticklabels()]
    assert labels == ["attention", "dispatch", "ffn", "combine"]
    bar_gids = _gids(ax.collections)
    assert len(bar_gids) == 4 * 3  # resource lanes x micro-batches
    assert "bars:attention:0" in bar_gids and "bars:combine:2" in bar_gids
