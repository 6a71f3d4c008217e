"""Capacity planning for attention/FFN-disaggregated MoE decoding.

The package answers, with closed-form arithmetic plus a small deterministic
pipeline simulator: given a model, an accelerator, and a latency target, how
many tokens can a disaggregated FFN rank absorb, what hardware utilization is
achievable, which interconnect binds, how much does load imbalance cost, and
does the overlapped micro-batch schedule actually stay bubble-free?
"""

from .budget import Budget, NonPositiveBudget, fits_stage_budget, run_batch_latency, stage_budget
from .configs import (
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
from .imbalance import (
    DegenerateScale,
    DpMode,
    ImbalanceQuery,
    PenaltyPoint,
    alpha_afd_discrete,
    alpha_afd_exact,
    alpha_afd_oracle,
    alpha_ep,
    dp_penalty,
    penalty_sweep,
)
from .interconnect import (
    Regime,
    RegimeKind,
    TokenThroughput,
    classify_regime,
    link_tokens,
    rank_inbound_tokens,
    token_bytes,
)
from .pipeline_sim import (
    BoMode,
    Bubble,
    JitterKind,
    JitterSpec,
    NoBubbleReport,
    SimResult,
    SimSpec,
    StageTiming,
    TraceItem,
    jitter_sensitivity,
    no_bubble_conditions,
    simulate,
)
from .roofline import (
    BindingConstraint,
    EpComparison,
    EpVerdict,
    GemmWorkload,
    HfuPoint,
    InfeasibilityReason,
    IntensityPoint,
    capacity_check,
    compare_vs_ep,
    gemm_workload,
    hfu_cap_closed_form,
    hfu_point,
    hfu_sweep,
    intensity_sweep,
    local_experts,
    operator_time,
)

__version__ = "0.1.0"
