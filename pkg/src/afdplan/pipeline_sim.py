"""Deterministic micro-batch pipeline simulator for disaggregated decode.

Four single-capacity resources — the attention stream, the FFN stream, and the
dispatch and combine link directions — serve every (micro-batch, layer) stage
in the chain attention -> dispatch -> ffn -> combine -> next layer's attention.
Items are served FIFO by ready time with ties broken by (layer, micro-batch).
Because each resource's ready times are non-decreasing in that same (layer,
micro-batch) order (every predecessor chain runs through serialized resources),
FIFO service equals canonical order, so the schedule is computed with a plain
layer-major loop: no event queue, bit-for-bit reproducible.

Makespan covers pipeline fill and drain; "interior" metrics exclude the first
and last layer rounds per resource, which is where steady-state claims about
bubble-free overlap live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .budget import Budget

ATTENTION = "attention"
DISPATCH = "dispatch"
FFN = "ffn"
COMBINE = "combine"
# Service-chain order; the scheduling loop relies on it.
RESOURCES: tuple[str, ...] = (ATTENTION, DISPATCH, FFN, COMBINE)

# Gaps below this are float-tie artifacts (ready and free computed along
# different summation paths landing 1 ulp apart), not schedule bubbles.
_GAP_FLOOR = 1e-12  # seconds


class BoMode(Enum):
    """Micro-batch overlap discipline; value = in-flight micro-batches."""

    NBO = 1
    TWO_BO = 2
    THREE_BO = 3

    @property
    def n_microbatches(self) -> int:
        return self.value

    @property
    def token(self) -> str:
        return {1: "nbo", 2: "2bo", 3: "3bo"}[self.value]


class JitterKind(Enum):
    NONE = "none"
    UNIFORM_FRACTION = "uniform"
    LOG_NORMAL = "lognormal"


@dataclass(frozen=True)
class JitterSpec:
    """Multiplicative, per-stage-instance duration noise.

    ``uniform`` draws factors from U[1-magnitude, 1+magnitude]; ``lognormal``
    from exp(N(0, magnitude)) (median 1).  Draws are seeded and consumed in a
    fixed (layer, micro-batch, stage) order, so runs are reproducible.
    """

    kind: JitterKind = JitterKind.NONE
    magnitude: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be >= 0, got {self.magnitude}")
        if self.kind is JitterKind.UNIFORM_FRACTION and self.magnitude > 1:
            raise ValueError(
                f"uniform jitter magnitude must be <= 1 to keep durations "
                f"non-negative, got {self.magnitude}"
            )


@dataclass(frozen=True)
class StageTiming:
    """Base per-layer stage durations, seconds."""

    t_a: float
    t_dispatch: float
    t_f: float
    t_combine: float

    def __post_init__(self) -> None:
        for key in ("t_a", "t_dispatch", "t_f", "t_combine"):
            if getattr(self, key) < 0:
                raise ValueError(f"{key} must be >= 0, got {getattr(self, key)}")

    @property
    def t_c(self) -> float:
        """Total per-layer communication time, both directions."""
        return self.t_dispatch + self.t_combine


@dataclass(frozen=True)
class SimSpec:
    mode: BoMode
    n_layers: int
    timings: StageTiming
    jitter: JitterSpec = JitterSpec()
    budget: Optional[Budget] = None
    n_microbatches: Optional[int] = None  # defaults to the mode's cardinality

    def __post_init__(self) -> None:
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.n_microbatches is None:
            object.__setattr__(self, "n_microbatches", self.mode.n_microbatches)
        elif self.n_microbatches != self.mode.n_microbatches:
            raise ValueError(
                f"invalid micro-batch count for mode {self.mode.token}: "
                f"{self.n_microbatches} != {self.mode.n_microbatches}"
            )


@dataclass(frozen=True)
class TraceItem:
    resource: str
    mb: int
    layer: int
    start: float
    end: float


@dataclass(frozen=True)
class Bubble:
    resource: str
    start: float
    duration: float


@dataclass(frozen=True)
class SimResult:
    spec: SimSpec
    trace: tuple[TraceItem, ...]
    makespan: float
    busy: dict[str, float]
    utilization: dict[str, float]            # busy / makespan
    bubbles: tuple[Bubble, ...]              # idle gaps inside each active window
    interior_window: dict[str, Optional[tuple[float, float]]]
    interior_utilization: dict[str, Optional[float]]
    interior_bubbles: tuple[Bubble, ...]
    slo_violation: bool


@dataclass(frozen=True)
class NoBubbleReport:
    attention_ok: bool
    ffn_ok: bool
    budget_ok: bool
    ideal: bool


@dataclass(frozen=True)
class JitterSummary:
    p_violation: float
    mean_makespan: float
    bubble_growth: float
    bubble_growth_is_absolute: bool  # True when the zero-jitter baseline had no bubbles
    trials: int


def _stage_factors(spec: SimSpec) -> np.ndarray:
    shape = (spec.n_layers, spec.n_microbatches, len(RESOURCES))
    jitter = spec.jitter
    if jitter.kind is JitterKind.NONE or jitter.magnitude == 0.0:
        return np.ones(shape)
    rng = np.random.default_rng(jitter.seed)
    if jitter.kind is JitterKind.UNIFORM_FRACTION:
        return rng.uniform(1.0 - jitter.magnitude, 1.0 + jitter.magnitude, shape)
    return rng.lognormal(mean=0.0, sigma=jitter.magnitude, size=shape)


def simulate(spec: SimSpec) -> SimResult:
    """Run the pipeline to completion and measure occupancy and bubbles."""
    n_layers, n_mb = spec.n_layers, spec.n_microbatches
    base = (spec.timings.t_a, spec.timings.t_dispatch,
            spec.timings.t_f, spec.timings.t_combine)
    factors = _stage_factors(spec)
    free = dict.fromkeys(RESOURCES, 0.0)
    mb_front = [0.0] * n_mb  # end of the stage each micro-batch last completed
    trace: list[TraceItem] = []
    for layer in range(n_layers):
        for stage, resource in enumerate(RESOURCES):
            for mb in range(n_mb):
                duration = float(base[stage] * factors[layer, mb, stage])
                start = max(mb_front[mb], free[resource])
                end = start + duration
                free[resource] = end
                mb_front[mb] = end
                trace.append(TraceItem(resource, mb, layer, start, end))
    makespan = free[COMBINE]

    by_resource: dict[str, list[TraceItem]] = {r: [] for r in RESOURCES}
    for item in trace:
        by_resource[item.resource].append(item)

    busy: dict[str, float] = {}
    utilization: dict[str, float] = {}
    bubbles: list[Bubble] = []
    interior_window: dict[str, Optional[tuple[float, float]]] = {}
    interior_utilization: dict[str, Optional[float]] = {}
    interior_bubbles: list[Bubble] = []
    for resource in RESOURCES:
        items = by_resource[resource]
        busy[resource] = math.fsum(item.end - item.start for item in items)
        utilization[resource] = busy[resource] / makespan if makespan > 0 else 0.0
        gaps = []
        for prev, nxt in zip(items, items[1:]):
            if nxt.start - prev.end > _GAP_FLOOR:
                gaps.append(Bubble(resource, prev.end, nxt.start - prev.end))
        bubbles.extend(gaps)

        window = _interior_window(items, n_layers)
        interior_window[resource] = window
        if window is None:
            interior_utilization[resource] = None
            continue
        lo, hi = window
        covered = _covered_length(items, lo, hi)
        width = hi - lo
        interior_utilization[resource] = covered / width if width > 0 else 1.0
        for gap in gaps:
            g_lo = max(gap.start, lo)
            g_hi = min(gap.start + gap.duration, hi)
            if g_hi > g_lo:
                interior_bubbles.append(Bubble(resource, g_lo, g_hi - g_lo))

    if spec.budget is not None:
        violation = bool(makespan + spec.budget.t_gap > spec.budget.run_batch_latency)
    else:
        violation = False

    return SimResult(
        spec=spec,
        trace=tuple(trace),
        makespan=makespan,
        busy=busy,
        utilization=utilization,
        bubbles=tuple(bubbles),
        interior_window=interior_window,
        interior_utilization=interior_utilization,
        interior_bubbles=tuple(interior_bubbles),
        slo_violation=violation,
    )


def _interior_window(items: Sequence[TraceItem],
                     n_layers: int) -> Optional[tuple[float, float]]:
    """Steady-state window: after the first layer round, before the last one."""
    if n_layers < 3:
        return None
    lo = max(item.end for item in items if item.layer == 0)
    hi = min(item.start for item in items if item.layer == n_layers - 1)
    if hi <= lo:
        return None
    return (lo, hi)


def _covered_length(items: Sequence[TraceItem], lo: float, hi: float) -> float:
    """Length of [lo, hi] covered by the (already sorted) busy intervals.

    Abutting intervals are merged first so a gap-free stream covers the window
    in one piece and the utilization ratio comes out as exactly 1.0.
    """
    merged: list[list[float]] = []
    for item in items:
        if merged and item.start <= merged[-1][1]:
            if item.end > merged[-1][1]:
                merged[-1][1] = item.end
        else:
            merged.append([item.start, item.end])
    covered = 0.0
    for a, b in merged:
        seg_lo = max(a, lo)
        seg_hi = min(b, hi)
        if seg_hi > seg_lo:
            if seg_lo == lo and seg_hi == hi:
                return hi - lo
            covered += seg_hi - seg_lo
    return covered


def no_bubble_conditions(t: StageTiming, t_b: float) -> NoBubbleReport:
    """Steady-state gap-free tests for the two streams, plus the budget fit.

    With the communication round-trip t_c = t_dispatch + t_combine:
    the attention stream stays gap-free iff 2*t_a >= t_f + t_c, the FFN stream
    iff 2*t_f >= t_a + t_c, and the stage slice fits iff max(t_a, t_f, t_c)
    <= t_b.  The ideal operating point pins t_a == t_f == t_b with t_c <= t_b,
    which meets all three with zero slack.
    """
    t_c = t.t_c
    attention_ok = 2 * t.t_a >= t.t_f + t_c
    ffn_ok = 2 * t.t_f >= t.t_a + t_c
    budget_ok = max(t.t_a, t.t_f, t_c) <= t_b
    ideal = (t.t_a == t.t_f == t_b) and t_c <= t_b
    return NoBubbleReport(attention_ok=attention_ok, ffn_ok=ffn_ok,
                          budget_ok=budget_ok, ideal=ideal)


def total_bubble_time(result: SimResult) -> float:
    return math.fsum(b.duration for b in result.bubbles)


def jitter_sensitivity(spec: SimSpec, trials: int) -> JitterSummary:
    """Monte-Carlo spread of makespan, SLO violations, and bubble growth.

    Trials reuse ``spec`` with seeds seed, seed+1, ..., seed+trials-1.  Bubble
    growth is relative to the zero-jitter baseline of the same spec; when that
    baseline has no bubbles at all, the absolute mean bubble time in seconds is
    reported instead (flagged via ``bubble_growth_is_absolute``).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if spec.jitter.kind is JitterKind.NONE:
        raise ValueError("jitter_sensitivity needs a jitter kind other than 'none'")
    violations = 0
    makespans = []
    bubble_totals = []
    for i in range(trials):
        jitter = JitterSpec(kind=spec.jitter.kind, magnitude=spec.jitter.magnitude,
                            seed=spec.jitter.seed + i)
        trial_spec = SimSpec(mode=spec.mode, n_layers=spec.n_layers,
                             timings=spec.timings, jitter=jitter, budget=spec.budget)
        result = simulate(trial_spec)
        violations += int(result.slo_violation)
        makespans.append(result.makespan)
        bubble_totals.append(total_bubble_time(result))
    baseline_spec = SimSpec(mode=spec.mode, n_layers=spec.n_layers,
                            timings=spec.timings, jitter=JitterSpec(),
                            budget=spec.budget)
    baseline_bubbles = total_bubble_time(simulate(baseline_spec))
    mean_bubbles = math.fsum(bubble_totals) / trials
    if baseline_bubbles > 0:
        growth = mean_bubbles / baseline_bubbles
        absolute = False
    else:
        growth = mean_bubbles
        absolute = True
    return JitterSummary(
        p_violation=violations / trials,
        mean_makespan=math.fsum(makespans) / trials,
        bubble_growth=growth,
        bubble_growth_is_absolute=absolute,
        trials=trials,
    )
