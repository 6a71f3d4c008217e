"""Model, hardware, and serving-scenario configuration for the capacity planner.

Configs are frozen dataclasses.  Built-in presets cover the open MoE model
family and the NVIDIA hardware generations the planner targets; anything else
can be supplied as a JSON document with the same field names.

Units are SI throughout: seconds, bytes, FLOPs/s, bytes/s.  Rates use decimal
prefixes (1 GB/s = 1e9 B/s), matching vendor datasheets.
"""

from __future__ import annotations

import json
from dataclasses import MISSING, dataclass, fields, asdict
from pathlib import Path
from typing import Any, Mapping, Union


class ConfigError(ValueError):
    """Raised when a config document is malformed; message names the bad key."""


@dataclass(frozen=True)
class ModelConfig:
    """Static architecture description of an MoE transformer."""

    name: str
    hidden_size: int
    num_layers: int
    num_dense_layers: int
    num_moe_layers: int
    num_routed_experts: int
    top_k: int
    moe_intermediate: int

    def __post_init__(self) -> None:
        for key in ("hidden_size", "num_layers", "num_moe_layers",
                    "num_routed_experts", "top_k", "moe_intermediate"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")
        if self.num_dense_layers < 0:
            raise ConfigError(f"num_dense_layers must be >= 0, got {self.num_dense_layers}")
        if self.num_dense_layers + self.num_moe_layers != self.num_layers:
            raise ConfigError(
                "num_layers mismatch: num_dense_layers + num_moe_layers = "
                f"{self.num_dense_layers + self.num_moe_layers} != num_layers = {self.num_layers}"
            )
        if self.top_k > self.num_routed_experts:
            raise ConfigError(
                f"top_k = {self.top_k} exceeds num_routed_experts = {self.num_routed_experts}"
            )


@dataclass(frozen=True)
class HardwareConfig:
    """One accelerator rank plus its interconnect, in SI units.

    ``scaleup_bandwidth`` is the intra-node (NVLink domain) per-rank rate and
    ``scaleout_bandwidth`` the inter-node (RDMA) per-rank rate, both unidirectional.
    Superpod parts expose the scale-up fabric at rack scale, so their scale-out
    entry equals the scale-up rate and ``superpod`` is set.
    """

    name: str
    peak_fp8: float            # dense fp8 FLOPs/s per rank
    mem_bandwidth: float       # HBM bytes/s per rank
    mem_capacity: float        # HBM bytes per rank
    scaleout_bandwidth: float  # bytes/s per rank
    scaleup_bandwidth: float   # bytes/s per rank
    gpus_per_node: int = 8
    superpod: bool = False

    def __post_init__(self) -> None:
        for key in ("peak_fp8", "mem_bandwidth", "mem_capacity",
                    "scaleout_bandwidth", "scaleup_bandwidth"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")
        if self.gpus_per_node < 1:
            raise ConfigError(f"gpus_per_node must be >= 1, got {self.gpus_per_node}")
        if self.superpod and self.scaleout_bandwidth != self.scaleup_bandwidth:
            raise ConfigError(
                "superpod hardware must report scaleout_bandwidth == scaleup_bandwidth; "
                f"got scaleout_bandwidth = {self.scaleout_bandwidth}"
            )

    @property
    def effective_scaleout(self) -> float:
        """Per-rank cross-node rate; on superpods the scale-up fabric is it."""
        return self.scaleup_bandwidth if self.superpod else self.scaleout_bandwidth


@dataclass(frozen=True)
class ScenarioConfig:
    """Serving-side knobs: latency target, overlap depth, protocol widths."""

    slo_tpot: float                  # target time-per-output-token, seconds
    l_accept: float = 1.7            # accepted tokens per decode step (MTP), >= 1
    t_gap: float = 0.015             # non-overlapped per-step time, seconds
    n_bo: int = 3                    # micro-batches overlapped per stage
    dispatch_bytes_per_element: float = 1.0
    combine_bytes_per_element: float = 2.0
    extra_bytes_per_token: float = 0.0
    ep_reference_hfu: float = 0.60   # large-EP utilization baseline for verdicts
    memory_reserve_fraction: float = 0.8
    gemm_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.slo_tpot <= 0:
            raise ConfigError(f"slo_tpot must be positive, got {self.slo_tpot}")
        if self.l_accept < 1:
            raise ConfigError(f"l_accept must be >= 1, got {self.l_accept}")
        if self.t_gap < 0:
            raise ConfigError(f"t_gap must be >= 0, got {self.t_gap}")
        if self.n_bo < 1:
            raise ConfigError(f"n_bo must be >= 1, got {self.n_bo}")
        for key in ("dispatch_bytes_per_element", "combine_bytes_per_element"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")
        if self.extra_bytes_per_token < 0:
            raise ConfigError(
                f"extra_bytes_per_token must be >= 0, got {self.extra_bytes_per_token}"
            )
        for key in ("ep_reference_hfu", "memory_reserve_fraction", "gemm_efficiency"):
            value = getattr(self, key)
            if not 0 < value <= 1:
                raise ConfigError(f"{key} must be in (0, 1], got {value}")


AnyConfig = Union[ModelConfig, HardwareConfig, ScenarioConfig]

_INT_FIELDS = {
    "hidden_size", "num_layers", "num_dense_layers", "num_moe_layers",
    "num_routed_experts", "top_k", "moe_intermediate", "gpus_per_node", "n_bo",
}

# Field that uniquely identifies each config kind in a plain JSON document.
_KIND_MARKERS = (
    ("hidden_size", ModelConfig),
    ("peak_fp8", HardwareConfig),
    ("slo_tpot", ScenarioConfig),
)


MODEL_PRESETS: dict[str, ModelConfig] = {
    "deepseek-v3": ModelConfig(
        name="deepseek-v3", hidden_size=7168, num_layers=61, num_dense_layers=3,
        num_moe_layers=58, num_routed_experts=256, top_k=8, moe_intermediate=2048,
    ),
    "kimi-k2": ModelConfig(
        name="kimi-k2", hidden_size=7168, num_layers=61, num_dense_layers=1,
        num_moe_layers=60, num_routed_experts=384, top_k=8, moe_intermediate=2048,
    ),
    "step3": ModelConfig(
        name="step3", hidden_size=7168, num_layers=61, num_dense_layers=5,
        num_moe_layers=56, num_routed_experts=48, top_k=3, moe_intermediate=5120,
    ),
    "qwen3-coder": ModelConfig(
        name="qwen3-coder", hidden_size=6144, num_layers=62, num_dense_layers=0,
        num_moe_layers=62, num_routed_experts=160, top_k=8, moe_intermediate=2560,
    ),
    "ernie-4.5": ModelConfig(
        name="ernie-4.5", hidden_size=8192, num_layers=54, num_dense_layers=3,
        num_moe_layers=51, num_routed_experts=64, top_k=8, moe_intermediate=3584,
    ),
    # Published layer table for glm-4.7 double-counts the dense layers; we keep
    # the total/dense counts and derive the MoE count so the sum invariant holds.
    "glm-4.7": ModelConfig(
        name="glm-4.7", hidden_size=5120, num_layers=92, num_dense_layers=3,
        num_moe_layers=89, num_routed_experts=160, top_k=8, moe_intermediate=1536,
    ),
}

HARDWARE_PRESETS: dict[str, HardwareConfig] = {
    "h20": HardwareConfig(
        name="h20", peak_fp8=296e12, mem_bandwidth=4.0e12, mem_capacity=96e9,
        scaleout_bandwidth=50e9, scaleup_bandwidth=360e9,
    ),
    "h100": HardwareConfig(
        name="h100", peak_fp8=1979e12, mem_bandwidth=3.35e12, mem_capacity=80e9,
        scaleout_bandwidth=50e9, scaleup_bandwidth=360e9,
    ),
    "h200": HardwareConfig(
        name="h200", peak_fp8=1979e12, mem_bandwidth=4.0e12, mem_capacity=141e9,
        scaleout_bandwidth=50e9, scaleup_bandwidth=360e9,
    ),
    "h800": HardwareConfig(
        name="h800", peak_fp8=1979e12, mem_bandwidth=3.35e12, mem_capacity=80e9,
        scaleout_bandwidth=50e9, scaleup_bandwidth=160e9,
    ),
    "b200": HardwareConfig(
        name="b200", peak_fp8=4500e12, mem_bandwidth=7.7e12, mem_capacity=180e9,
        scaleout_bandwidth=50e9, scaleup_bandwidth=720e9,
    ),
    "b300": HardwareConfig(
        name="b300", peak_fp8=4500e12, mem_bandwidth=8.0e12, mem_capacity=270e9,
        scaleout_bandwidth=100e9, scaleup_bandwidth=720e9,
    ),
    "gb200": HardwareConfig(
        name="gb200", peak_fp8=4500e12, mem_bandwidth=7.7e12, mem_capacity=180e9,
        scaleout_bandwidth=720e9, scaleup_bandwidth=720e9, superpod=True,
    ),
    "gb300": HardwareConfig(
        name="gb300", peak_fp8=4500e12, mem_bandwidth=8.0e12, mem_capacity=270e9,
        scaleout_bandwidth=720e9, scaleup_bandwidth=720e9, superpod=True,
    ),
}


def preset(name: str) -> AnyConfig:
    """Look up a built-in model or hardware preset by (case-insensitive) name."""
    key = name.lower()
    if key in MODEL_PRESETS:
        return MODEL_PRESETS[key]
    if key in HARDWARE_PRESETS:
        return HARDWARE_PRESETS[key]
    known = sorted(MODEL_PRESETS) + sorted(HARDWARE_PRESETS)
    raise ConfigError(f"unknown preset {name!r}; known presets: {', '.join(known)}")


def _coerce(cls: type, record: Mapping[str, Any]) -> AnyConfig:
    declared = {f.name for f in fields(cls)}
    unknown = set(record) - declared
    if unknown:
        raise ConfigError(f"unknown field {sorted(unknown)[0]!r} for {cls.__name__}")
    kwargs: dict[str, Any] = {}
    for f in fields(cls):
        if f.name in record:
            raw = record[f.name]
        elif f.default is not MISSING:
            continue
        else:
            raise ConfigError(f"missing field {f.name!r} for {cls.__name__}")
        if f.name == "name":
            kwargs[f.name] = str(raw)
        elif f.name == "superpod":
            if not isinstance(raw, bool):
                raise ConfigError(f"superpod must be a boolean, got {raw!r}")
            kwargs[f.name] = raw
        elif f.name in _INT_FIELDS:
            if isinstance(raw, bool) or not isinstance(raw, int):
                raise ConfigError(f"{f.name} must be an integer, got {raw!r}")
            kwargs[f.name] = raw
        else:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ConfigError(f"{f.name} must be a number, got {raw!r}")
            kwargs[f.name] = float(raw)
    return cls(**kwargs)


def load_config(document: Union[str, Path, Mapping[str, Any]]) -> AnyConfig:
    """Parse a config from a mapping, a JSON string, or a path to a JSON file.

    The config kind is inferred from its fields (``hidden_size`` -> model,
    ``peak_fp8`` -> hardware, ``slo_tpot`` -> scenario).  Raises
    :class:`ConfigError` naming the offending key on any malformed input.
    """
    if isinstance(document, Mapping):
        record = document
    else:
        if isinstance(document, Path) or (isinstance(document, str) and "\n" not in document
                                          and "{" not in document and Path(document).exists()):
            text = Path(document).read_text()
        else:
            text = str(document)
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config document: {exc}") from exc
        if not isinstance(record, dict):
            raise ConfigError("config document must be a JSON object")
    for marker, cls in _KIND_MARKERS:
        if marker in record:
            return _coerce(cls, record)
    raise ConfigError(
        "cannot infer config kind: expected one of the marker fields "
        "'hidden_size' (model), 'peak_fp8' (hardware), 'slo_tpot' (scenario)"
    )


def to_dict(config: AnyConfig) -> dict[str, Any]:
    """Plain-dict form of a config; ``load_config(to_dict(c)) == c`` round-trips."""
    return asdict(config)


def to_json(config: AnyConfig) -> str:
    return json.dumps(to_dict(config), indent=2, sort_keys=False)


def derived_metrics(model: ModelConfig) -> dict[str, float]:
    """Routing sparsity (experts per activated expert) and expert granularity.

    Sparsity = num_routed_experts / top_k; granularity = hidden_size / moe_intermediate.
    Sparser models route each token to a smaller expert fraction; finer
    granularity means skinnier expert GEMMs for the same hidden size.
    """
    return {
        "sparsity": model.num_routed_experts / model.top_k,
        "granularity": model.hidden_size / model.moe_intermediate,
    }
