import json

import pytest
from hypothesis import given, strategies as st

from afdplan.configs import (
    ConfigError,
    HARDWARE_PRESETS,
    HardwareConfig,
    MODEL_PRESETS,
    ModelConfig,
    ScenarioConfig,
    derived_metrics,
    load_config,
    preset,
    to_dict,
    to_json,
)


def test_preset_registries_complete():
    assert set(MODEL_PRESETS) == {
        "deepseek-v3", "kimi-k2", "step3", "qwen3-coder", "ernie-4.5", "glm-4.7",
    }
    assert set(HARDWARE_PRESETS) == {
        "h20", "h100", "h200", "h800", "b200", "b300", "gb200", "gb300",
    }


def test_preset_lookup_case_insensitive():
    assert preset("DeepSeek-V3") is MODEL_PRESETS["deepseek-v3"]
    assert preset("H800") is HARDWARE_PRESETS["h800"]


def test_preset_unknown_name():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("tpu-v5")


def test_model_preset_spot_values():
    m = preset("deepseek-v3")
    assert (m.hidden_size, m.num_layers, m.num_dense_layers, m.num_moe_layers) == \
        (7168, 61, 3, 58)
    assert (m.num_routed_experts, m.top_k, m.moe_intermediate) == (256, 8, 2048)
    s = preset("step3")
    assert (s.num_routed_experts, s.top_k, s.moe_intermediate) == (48, 3, 5120)


def test_layer_sum_invariant_holds_for_all_presets():
    for m in MODEL_PRESETS.values():
        assert m.num_dense_layers + m.num_moe_layers == m.num_layers


def test_hardware_preset_spot_values():
    h = preset("h800")
    assert h.peak_fp8 == 1979e12
    assert h.scaleup_bandwidth == 160e9
    assert h.scaleout_bandwidth == 50e9
    assert not h.superpod
    g = preset("gb200")
    assert g.superpod
    assert g.scaleout_bandwidth == g.scaleup_bandwidth == 720e9


def test_effective_scaleout():
    assert preset("h800").effective_scaleout == 50e9
    assert preset("gb200").effective_scaleout == 720e9


def test_layer_mismatch_rejected():
    with pytest.raises(ConfigError, match="num_layers"):
        ModelConfig(name="x", hidden_size=8, num_layers=10, num_dense_layers=3,
                    num_moe_layers=6, num_routed_experts=4, top_k=2,
                    moe_intermediate=8)


def test_top_k_bounded_by_experts():
    with pytest.raises(ConfigError, match="top_k"):
        ModelConfig(name="x", hidden_size=8, num_layers=2, num_dense_layers=0,
                    num_moe_layers=2, num_routed_experts=4, top_k=5,
                    moe_intermediate=8)


def test_nonpositive_field_rejected_with_key():
    with pytest.raises(ConfigError, match="hidden_size"):
        ModelConfig(name="x", hidden_size=0, num_layers=2, num_dense_layers=0,
                    num_moe_layers=2, num_routed_experts=4, top_k=2,
                    moe_intermediate=8)
    with pytest.raises(ConfigError, match="mem_bandwidth"):
        HardwareConfig(name="x", peak_fp8=1e12, mem_bandwidth=0.0,
                       mem_capacity=1e9, scaleout_bandwidth=1e9,
                       scaleup_bandwidth=1e9)


def test_superpod_requires_equal_links():
    with pytest.raises(ConfigError, match="superpod"):
        HardwareConfig(name="x", peak_fp8=1e12, mem_bandwidth=1e12,
                       mem_capacity=1e9, scaleout_bandwidth=1e9,
                       scaleup_bandwidth=2e9, superpod=True)


def test_scenario_validation():
    with pytest.raises(ConfigError, match="l_accept"):
        ScenarioConfig(slo_tpot=0.05, l_accept=0.5)
    with pytest.raises(ConfigError, match="n_bo"):
        ScenarioConfig(slo_tpot=0.05, n_bo=0)
    with pytest.raises(ConfigError, match="gemm_efficiency"):
        ScenarioConfig(slo_tpot=0.05, gemm_efficiency=1.5)
    # t_gap >= step latency is a budget-time failure, not a construction error
    ScenarioConfig(slo_tpot=0.05, t_gap=1.0)


def test_round_trip_every_preset():
    for cfg in (*MODEL_PRESETS.values(), *HARDWARE_PRESETS.values(),
                ScenarioConfig(slo_tpot=0.05)):
        assert load_config(to_dict(cfg)) == cfg
        assert load_config(to_json(cfg)) == cfg


def test_load_config_from_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(to_json(preset("kimi-k2")))
    assert load_config(path) == preset("kimi-k2")
    assert load_config(str(path)) == preset("kimi-k2")


def test_load_config_missing_field_names_key():
    doc = to_dict(preset("deepseek-v3"))
    del doc["top_k"]
    with pytest.raises(ConfigError, match="top_k"):
        load_config(doc)


def test_load_config_unknown_field_names_key():
    doc = to_dict(preset("h800"))
    doc["nvlink_version"] = 4
    with pytest.raises(ConfigError, match="nvlink_version"):
        load_config(doc)


def test_load_config_type_errors():
    doc = to_dict(preset("deepseek-v3"))
    doc["top_k"] = 2.5
    with pytest.raises(ConfigError, match="top_k"):
        load_config(doc)
    doc = to_dict(preset("gb200"))
    doc["superpod"] = "yes"
    with pytest.raises(ConfigError, match="superpod"):
        load_config(doc)


def test_load_config_unrecognized_kind():
    with pytest.raises(ConfigError, match="marker"):
        load_config({"name": "mystery"})


def test_load_config_bad_json():
    with pytest.raises(ConfigError, match="JSON"):
        load_config("{not json")


def test_derived_metrics():
    d = derived_metrics(preset("deepseek-v3"))
    assert d["sparsity"] == 32.0
    assert d["granularity"] == 3.5
    s = derived_metrics(preset("step3"))
    assert s["sparsity"] == 16.0
    assert s["granularity"] == pytest.approx(1.4)


@given(
    hidden=st.integers(1, 1 << 15),
    dense=st.integers(0, 8),
    moe=st.integers(1, 128),
    experts=st.integers(1, 512),
    inter=st.integers(1, 1 << 14),
    data=st.data(),
)
def test_random_model_round_trips(hidden, dense, moe, experts, inter, data):
    top_k = data.draw(st.integers(1, experts))
    m = ModelConfig(name="rand", hidden_size=hidden, num_layers=dense + moe,
                    num_dense_layers=dense, num_moe_layers=moe,
                    num_routed_experts=experts, top_k=top_k,
                    moe_intermediate=inter)
    assert load_config(json.loads(to_json(m))) == m
