import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from afdplan import ScenarioConfig, preset
from afdplan.budget import stage_budget
from afdplan.interconnect import (
    RegimeKind,
    classify_regime,
    link_tokens,
    rank_inbound_tokens,
    token_bytes,
)


def _tb50(model):
    return stage_budget(ScenarioConfig(slo_tpot=0.050), model).stage_budget


def test_token_bytes_default_widths(dsv3, scenario50):
    # 1 B/element out, 2 B/element back, whole hidden vector each way
    assert token_bytes(dsv3, scenario50) == 3 * 7168


def test_token_bytes_with_overhead(dsv3):
    sc = ScenarioConfig(slo_tpot=0.05, extra_bytes_per_token=64.0)
    assert token_bytes(dsv3, sc) == 3 * 7168 + 64


def test_link_tokens_headline_values(dsv3, scenario50):
    t_b = _tb50(dsv3)
    width = token_bytes(dsv3, scenario50)
    # Exact-rational oracles evaluated from the same operands.
    oracle_out = float(Fraction(50e9) * Fraction(t_b) / 21504)
    oracle_up = float(Fraction(160e9) * Fraction(t_b) / 21504)
    assert link_tokens(50e9, t_b, width) == pytest.approx(oracle_out, rel=1e-12)
    assert link_tokens(160e9, t_b, width) == pytest.approx(oracle_up, rel=1e-12)
    assert link_tokens(50e9, t_b, width) == pytest.approx(935.405, rel=1e-6)
    assert link_tokens(160e9, t_b, width) == pytest.approx(2993.295, rel=1e-6)


def test_link_tokens_is_real_valued_not_floored():
    assert link_tokens(10.0, 1.0, 3.0) == pytest.approx(10 / 3)


def test_link_tokens_rejects_nonpositive():
    with pytest.raises(ValueError):
        link_tokens(0.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        link_tokens(1.0, -1.0, 3.0)


def test_rank_tokens_scaleup_capped_at_small_groups(dsv3, h800, scenario50):
    """With few FFN ranks the fan-out gain saturates the intra-node link."""
    tp = rank_inbound_tokens(dsv3, h800, _tb50(dsv3), 2, scenario50)
    assert tp.rank_tokens == tp.scaleup_tokens
    assert tp.rank_tokens == pytest.approx(2993.295, rel=1e-6)
    assert tp.scaleout_tokens * (8 / 2) > tp.scaleup_tokens


def test_rank_tokens_scaleout_bound_at_large_groups(dsv3, h800, scenario50):
    tp = rank_inbound_tokens(dsv3, h800, _tb50(dsv3), 8, scenario50)
    assert tp.rank_tokens == tp.scaleout_tokens  # fan-out gain is exactly 1
    tp16 = rank_inbound_tokens(dsv3, h800, _tb50(dsv3), 16, scenario50)
    assert tp16.rank_tokens == tp.rank_tokens  # flat beyond top_k ranks


def test_rank_tokens_superpod_constant(dsv3, gb200, scenario50):
    t_b = _tb50(dsv3)
    values = {rank_inbound_tokens(dsv3, gb200, t_b, n, scenario50).rank_tokens
              for n in (1, 2, 5, 9, 30)}
    assert len(values) == 1
    assert values.pop() == link_tokens(720e9, t_b, 3 * 7168)


def test_rank_tokens_rejects_bad_group_size(dsv3, h800, scenario50):
    with pytest.raises(ValueError):
        rank_inbound_tokens(dsv3, h800, 1e-4, 0, scenario50)


def test_regime_sequence_h800(dsv3, h800):
    kinds = [classify_regime(dsv3, h800, n).kind for n in range(1, 34)]
    assert kinds[0] == kinds[1] == RegimeKind.SCALE_UP_BOUND
    assert kinds[2] == RegimeKind.STABLE_INTENSITY          # first at n_f = 3
    assert kinds[6] == RegimeKind.STABLE_INTENSITY
    assert kinds[7] == RegimeKind.SCALE_OUT_BOUND           # first at n_f = 8
    assert kinds[30] == RegimeKind.SCALE_OUT_BOUND
    assert kinds[31] == RegimeKind.MAX_INTENSITY            # first at n_f = 32


def test_regime_step3_reaches_max_at_six(h800):
    step3 = preset("step3")
    assert classify_regime(step3, h800, 5).kind != RegimeKind.MAX_INTENSITY
    assert classify_regime(step3, h800, 6).kind == RegimeKind.MAX_INTENSITY


def test_regime_superpod_only_two_kinds(dsv3, gb200):
    kinds = {classify_regime(dsv3, gb200, n).kind for n in range(1, 64)}
    assert kinds <= {RegimeKind.SCALE_OUT_BOUND, RegimeKind.MAX_INTENSITY}
    assert classify_regime(dsv3, gb200, 32).kind == RegimeKind.MAX_INTENSITY


def test_regime_rejects_bad_group_size(dsv3, h800):
    with pytest.raises(ValueError):
        classify_regime(dsv3, h800, 0)


@given(n_f=st.integers(1, 128))
def test_max_intensity_iff_one_local_expert(n_f):
    dsv3, h800 = preset("deepseek-v3"), preset("h800")
    one_each = math.ceil(256 / (n_f * 8)) == 1
    is_max = classify_regime(dsv3, h800, n_f).kind == RegimeKind.MAX_INTENSITY
    assert one_each == is_max


@given(n_f=st.integers(1, 64), t_b=st.floats(1e-6, 1e-2))
def test_rank_tokens_bounded_by_both_links(n_f, t_b):
    dsv3, h800 = preset("deepseek-v3"), preset("h800")
    scenario50 = ScenarioConfig(slo_tpot=0.050)
    tp = rank_inbound_tokens(dsv3, h800, t_b, n_f, scenario50)
    fanout = max(1.0, dsv3.top_k / n_f)
    assert tp.rank_tokens <= tp.scaleup_tokens * (1 + 1e-12)
    assert tp.rank_tokens <= tp.scaleout_tokens * fanout * (1 + 1e-12)
    assert tp.rank_tokens > 0
