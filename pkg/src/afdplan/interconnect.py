"""Interconnect-bound token throughput for a disaggregated FFN rank.

During decode the FFN ranks do almost no compute per byte moved: every routed
token costs one dispatch transfer (fp8 activations) and one combine transfer
(bf16 results) across the fabric.  The number of tokens a rank can absorb per
stage slice is therefore set by link bandwidth alone, and which link saturates
first depends on how many FFN ranks share the expert pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .configs import HardwareConfig, ModelConfig, ScenarioConfig


class RegimeKind(Enum):
    """Which resource limits per-rank token intake as the FFN group grows."""

    SCALE_UP_BOUND = "scaleup"    # intra-node link saturates first
    STABLE_INTENSITY = "stable"   # scale-out bound with per-expert load flat
    SCALE_OUT_BOUND = "scaleout"  # cross-node link saturates, load growing
    MAX_INTENSITY = "max"         # one expert per rank; densest possible GEMM


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    n_f: int


@dataclass(frozen=True)
class TokenThroughput:
    """Per-stage token counts each link could feed one rank, and their min."""

    scaleout_tokens: float
    scaleup_tokens: float
    rank_tokens: float
    bytes_per_token: float


def token_bytes(model: ModelConfig, scenario: ScenarioConfig) -> float:
    """Fabric bytes moved per routed token: dispatch + combine, whole hidden vector."""
    per_element = (scenario.dispatch_bytes_per_element
                   + scenario.combine_bytes_per_element)
    return per_element * model.hidden_size + scenario.extra_bytes_per_token


def link_tokens(bandwidth: float, t_b: float, bytes_per_token: float) -> float:
    """Tokens a link at ``bandwidth`` B/s can carry within one stage slice.

    Real-valued on purpose: rates this size are averaged over many stages, so
    flooring would understate sustained throughput.
    """
    if bandwidth <= 0 or t_b <= 0 or bytes_per_token <= 0:
        raise ValueError("bandwidth, t_b, and bytes_per_token must all be positive")
    return bandwidth * t_b / bytes_per_token


def rank_inbound_tokens(model: ModelConfig, hw: HardwareConfig, t_b: float,
                        n_f: int, scenario: ScenarioConfig) -> TokenThroughput:
    """Tokens one FFN rank can take per stage slice when n_f ranks share the experts.

    A token fans out to top_k experts; with n_f ranks, each rank sees on average
    max(1, top_k / n_f) copies of the scale-out traffic it would see alone, so
    growing the group multiplies effective cross-node intake until the fan-out is
    fully spread (n_f >= top_k).  Intake is always capped by the scale-up link.
    """
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    width = token_bytes(model, scenario)
    scaleout = link_tokens(hw.effective_scaleout, t_b, width)
    scaleup = link_tokens(hw.scaleup_bandwidth, t_b, width)
    fanout_gain = max(1.0, model.top_k / n_f)
    rank = min(scaleout * fanout_gain, scaleup)
    return TokenThroughput(
        scaleout_tokens=scaleout,
        scaleup_tokens=scaleup,
        rank_tokens=rank,
        bytes_per_token=width,
    )


def classify_regime(model: ModelConfig, hw: HardwareConfig, n_f: int) -> Regime:
    """Name the binding regime at FFN group size ``n_f``.

    Checked in precedence order: a group large enough to leave one expert per
    rank is at maximal GEMM intensity regardless of links; otherwise a group
    that already spreads the full token fan-out is scale-out bound; otherwise
    the scale-up link binds whenever the fan-out gain exceeds the link-rate
    ratio; anything else sits in the stable-intensity middle.  Superpod fabrics
    have no scale-up/scale-out distinction, so only the last-expert threshold
    applies there.
    """
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    local = math.ceil(model.num_routed_experts / (n_f * hw.gpus_per_node))
    if local == 1:
        return Regime(RegimeKind.MAX_INTENSITY, n_f)
    if hw.superpod:
        return Regime(RegimeKind.SCALE_OUT_BOUND, n_f)
    if n_f >= model.top_k:
        return Regime(RegimeKind.SCALE_OUT_BOUND, n_f)
    if model.top_k / n_f > hw.scaleup_bandwidth / hw.scaleout_bandwidth:
        return Regime(RegimeKind.SCALE_UP_BOUND, n_f)
    return Regime(RegimeKind.STABLE_INTENSITY, n_f)
