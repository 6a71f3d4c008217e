"""Grouped-GEMM roofline and hardware-utilization ceilings for FFN ranks.

Given the interconnect-fed token rate, this module sizes the per-stage expert
GEMM workload, places it on the compute/memory roofline, and folds in the
stage-time clamp to produce an achievable hardware FLOPs utilization (HFU).
A closed-form bandwidth-only ceiling gives the headline number a deployment
cannot exceed no matter how the FFN group is tuned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .budget import Budget, stage_budget
from .configs import HardwareConfig, ModelConfig, ScenarioConfig
from .interconnect import Regime, TokenThroughput, classify_regime, rank_inbound_tokens

# fp8 expert weights: three projection matrices of hidden_size x moe_intermediate,
# one byte per parameter.
_MATRICES_PER_EXPERT = 3
_FLOPS_PER_MAC = 2


class BindingConstraint(Enum):
    COMMUNICATION = "communication"     # stage slice outlasts the GEMM: links bind
    COMPUTE = "compute"                 # GEMM math fills (or overflows) the slice
    MEMORY_BANDWIDTH = "memory_bandwidth"  # weight streaming dominates the GEMM


class InfeasibilityReason(Enum):
    CAPACITY_EXCEEDED = "capacity_exceeded"          # weights exceed reserved HBM
    BANDWIDTH_EXCEEDS_BUDGET = "bandwidth_exceeds_budget"  # weight read > stage slice


@dataclass(frozen=True)
class GemmWorkload:
    """One rank's grouped GEMM for a single MoE layer stage."""

    local_experts: int
    tokens_per_rank: float
    tokens_per_expert: float
    flops: float
    weight_bytes: float
    intensity: float  # FLOPs per weight byte actually streamed


@dataclass(frozen=True)
class HfuPoint:
    """Roofline outcome at one FFN group size."""

    n_f: int
    regime: Regime
    throughput: TokenThroughput
    workload: GemmWorkload
    operator_time: float       # seconds for the grouped GEMM
    ofu: float                 # operator FLOPs utilization while running
    temporal_sparsity: float   # fraction of the stage slice the GEMM runs
    hfu: float                 # ofu * temporal_sparsity
    binding: BindingConstraint
    feasible: bool
    reason: Optional[InfeasibilityReason]


@dataclass(frozen=True)
class IntensityPoint:
    """Arithmetic-intensity trend entry at one FFN group size."""

    n_f: int
    regime: Regime
    rank_tokens: float
    local_experts: int
    tokens_per_expert: float
    intensity_ub_norm: float      # exact-division upper bound, sweep-normalized
    intensity_actual_norm: float  # ceiling-quantized actual, sweep-normalized


class EpVerdict(Enum):
    EP_FAVORED = "ep_favored"
    AFD_FAVORED = "afd_favored"
    COMPARABLE = "comparable"


@dataclass(frozen=True)
class EpComparison:
    verdict: EpVerdict
    margin: float  # achievable cap minus the EP reference utilization


def local_experts(model: ModelConfig, hw: HardwareConfig, n_f: int) -> int:
    """Experts each rank hosts when n_f nodes of gpus_per_node share the pool."""
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    return math.ceil(model.num_routed_experts / (n_f * hw.gpus_per_node))


def gemm_workload(model: ModelConfig, hw: HardwareConfig,
                  throughput: TokenThroughput, n_f: int) -> GemmWorkload:
    """Size the grouped GEMM one rank runs per stage at the given token intake."""
    g = local_experts(model, hw, n_f)
    tokens = throughput.rank_tokens
    per_expert = tokens / g
    flops = (_FLOPS_PER_MAC * _MATRICES_PER_EXPERT * tokens
             * model.hidden_size * model.moe_intermediate)
    weight_bytes = float(_MATRICES_PER_EXPERT * g
                         * model.hidden_size * model.moe_intermediate)
    intensity = flops / weight_bytes  # simplifies to 2 * tokens / g
    return GemmWorkload(
        local_experts=g,
        tokens_per_rank=tokens,
        tokens_per_expert=per_expert,
        flops=flops,
        weight_bytes=weight_bytes,
        intensity=intensity,
    )


def operator_time(workload: GemmWorkload, hw: HardwareConfig,
                  efficiency: float = 1.0) -> float:
    """Roofline time for the grouped GEMM: max of math time and weight-read time."""
    if not 0 < efficiency <= 1:
        raise ValueError(f"efficiency must be in (0, 1], got {efficiency}")
    compute_time = workload.flops / (hw.peak_fp8 * efficiency)
    memory_time = workload.weight_bytes / hw.mem_bandwidth
    return max(compute_time, memory_time)


def capacity_check(model: ModelConfig, hw: HardwareConfig,
                   scenario: ScenarioConfig, n_f: int) -> bool:
    """Whether one stage's expert weights fit in the reserved HBM slice."""
    g = local_experts(model, hw, n_f)
    weight_bytes = (_MATRICES_PER_EXPERT * g
                    * model.hidden_size * model.moe_intermediate)
    return weight_bytes <= hw.mem_capacity * scenario.memory_reserve_fraction


def hfu_point(model: ModelConfig, hw: HardwareConfig, scenario: ScenarioConfig,
              budget: Budget, n_f: int) -> HfuPoint:
    """Achievable utilization at one FFN group size under the stage budget.

    The GEMM may finish early (communication-bound, temporal sparsity < 1) or
    overrun the slice (clamped to 1 so HFU never exceeds the roofline OFU).
    """
    t_b = budget.stage_budget
    throughput = rank_inbound_tokens(model, hw, t_b, n_f, scenario)
    workload = gemm_workload(model, hw, throughput, n_f)
    compute_time = workload.flops / (hw.peak_fp8 * scenario.gemm_efficiency)
    memory_time = workload.weight_bytes / hw.mem_bandwidth
    t_op = max(compute_time, memory_time)
    # min-clamp guards a 1-ulp overshoot when t_op is the compute term itself
    ofu = min(1.0, workload.flops / (t_op * hw.peak_fp8)) if t_op > 0 else 0.0
    s_t = min(1.0, t_op / t_b)
    hfu = ofu * s_t
    if memory_time >= compute_time:
        binding = BindingConstraint.MEMORY_BANDWIDTH
    elif compute_time >= t_b:
        binding = BindingConstraint.COMPUTE
    else:
        binding = BindingConstraint.COMMUNICATION
    capacity_ok = capacity_check(model, hw, scenario, n_f)
    bandwidth_ok = memory_time <= t_b
    if not capacity_ok:
        reason: Optional[InfeasibilityReason] = InfeasibilityReason.CAPACITY_EXCEEDED
    elif not bandwidth_ok:
        reason = InfeasibilityReason.BANDWIDTH_EXCEEDS_BUDGET
    else:
        reason = None
    return HfuPoint(
        n_f=n_f,
        regime=classify_regime(model, hw, n_f),
        throughput=throughput,
        workload=workload,
        operator_time=t_op,
        ofu=ofu,
        temporal_sparsity=s_t,
        hfu=hfu,
        binding=binding,
        feasible=capacity_ok and bandwidth_ok,
        reason=reason,
    )


def hfu_cap_closed_form(model: ModelConfig, hw: HardwareConfig) -> float:
    """Bandwidth-only HFU ceiling, independent of the stage budget.

    At best, tokens arrive at the limiting link rate and each costs
    6 * hidden * intermediate FLOPs over 3 * hidden bytes moved, so
    cap = 2 * limiting_bandwidth * moe_intermediate / peak_fp8.  The limiting
    rate is the scale-up link on superpods and otherwise the smaller of the
    scale-up link and the fan-out-amplified scale-out intake (top_k links).
    """
    if hw.superpod:
        limiting = hw.scaleup_bandwidth
    else:
        limiting = min(hw.scaleup_bandwidth, model.top_k * hw.scaleout_bandwidth)
    return 2.0 * limiting * model.moe_intermediate / hw.peak_fp8


def compare_vs_ep(cap: float, scenario: ScenarioConfig,
                  comparable_band: float = 0.02) -> EpComparison:
    """Rate the AFD ceiling against the large-EP reference utilization."""
    margin = cap - scenario.ep_reference_hfu
    if abs(margin) <= comparable_band:
        verdict = EpVerdict.COMPARABLE
    elif margin > 0:
        verdict = EpVerdict.AFD_FAVORED
    else:
        verdict = EpVerdict.EP_FAVORED
    return EpComparison(verdict=verdict, margin=margin)


def hfu_sweep(model: ModelConfig, hw: HardwareConfig, scenario: ScenarioConfig,
              nf_range: Sequence[int]) -> list[HfuPoint]:
    """HFU points across FFN group sizes under one scenario's stage budget."""
    budget = stage_budget(scenario, model)
    return [hfu_point(model, hw, scenario, budget, n_f) for n_f in nf_range]


def intensity_sweep(model: ModelConfig, hw: HardwareConfig,
                    scenario: ScenarioConfig,
                    nf_range: Sequence[int]) -> list[IntensityPoint]:
    """Arithmetic-intensity trend across FFN group sizes, sweep-normalized.

    The upper bound divides the expert pool exactly (fractional experts per
    rank); the actual value quantizes hosting with a ceiling, which dips
    whenever the division leaves a remainder.  Both columns are normalized by
    the sweep-wide maximum of the upper bound so the trend reads in [0, 1].
    """
    if not nf_range:
        return []
    budget = stage_budget(scenario, model)
    t_b = budget.stage_budget
    rows = []
    for n_f in nf_range:
        throughput = rank_inbound_tokens(model, hw, t_b, n_f, scenario)
        g = local_experts(model, hw, n_f)
        exact_share = model.num_routed_experts / (n_f * hw.gpus_per_node)
        ub = 2.0 * throughput.rank_tokens / exact_share
        actual = 2.0 * throughput.rank_tokens / g
        rows.append((n_f, throughput, g, ub, actual))
    norm = max(row[3] for row in rows)
    points = []
    for n_f, throughput, g, ub, actual in rows:
        points.append(IntensityPoint(
            n_f=n_f,
            regime=classify_regime(model, hw, n_f),
            rank_tokens=throughput.rank_tokens,
            local_experts=g,
            tokens_per_expert=throughput.rank_tokens / g,
            intensity_ub_norm=ub / norm,
            intensity_actual_norm=actual / norm,
        ))
    return points
