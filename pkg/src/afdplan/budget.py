"""Decode-latency budgeting for micro-batch-overlapped MoE serving.

A decode step must finish one full forward pass within ``slo_tpot * l_accept``
seconds.  After subtracting the non-overlapped remainder (dense layers, sampling,
scheduling — ``t_gap``), the rest is split evenly across the MoE layers times the
number of overlapped micro-batches, giving the per-stage time slice every
attention, FFN, and communication stage has to fit inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .configs import ModelConfig, ScenarioConfig


class NonPositiveBudget(ValueError):
    """Raised when t_gap consumes the whole latency target, leaving no stage time."""


@dataclass(frozen=True)
class Budget:
    """Per-step latency envelope and the per-stage slice carved out of it."""

    run_batch_latency: float  # seconds per decode step (slo_tpot * l_accept)
    stage_budget: float       # seconds available to each overlapped stage
    n_overlap_layers: int     # layers whose stages are overlap-scheduled
    n_bo: int                 # micro-batches overlapped per layer
    t_gap: float              # seconds outside the overlapped region

    def __post_init__(self) -> None:
        if self.n_overlap_layers < 1:
            raise ValueError(f"n_overlap_layers must be >= 1, got {self.n_overlap_layers}")
        if self.n_bo < 1:
            raise ValueError(f"n_bo must be >= 1, got {self.n_bo}")
        if self.stage_budget <= 0:
            raise NonPositiveBudget(
                f"stage_budget must be positive, got {self.stage_budget:.6g} s"
            )
        reconstructed = self.t_gap + self.n_overlap_layers * self.n_bo * self.stage_budget
        if abs(reconstructed - self.run_batch_latency) > 4 * math.ulp(self.run_batch_latency):
            raise ValueError(
                "inconsistent budget: t_gap + n_overlap_layers * n_bo * stage_budget = "
                f"{reconstructed:.9g} != run_batch_latency = {self.run_batch_latency:.9g}"
            )


def run_batch_latency(scenario: ScenarioConfig) -> float:
    """Wall-clock seconds one decode step may take: slo_tpot * l_accept."""
    return scenario.slo_tpot * scenario.l_accept


def stage_budget(scenario: ScenarioConfig, model: ModelConfig) -> Budget:
    """Split the step latency into equal per-stage slices across the MoE layers.

    Raises :class:`NonPositiveBudget` if ``t_gap`` already exceeds the step
    latency, i.e. no overlap schedule can meet the target.
    """
    total = run_batch_latency(scenario)
    usable = total - scenario.t_gap
    if usable <= 0:
        raise NonPositiveBudget(
            f"t_gap = {scenario.t_gap:.6g} s leaves no time inside the "
            f"step latency of {total:.6g} s"
        )
    layers = model.num_moe_layers
    t_b = usable / (layers * scenario.n_bo)
    return Budget(
        run_batch_latency=total,
        stage_budget=t_b,
        n_overlap_layers=layers,
        n_bo=scenario.n_bo,
        t_gap=scenario.t_gap,
    )


def fits_stage_budget(t_a: float, t_f: float, t_c: float, t_b: float) -> bool:
    """True when every stage of one layer fits its slice: max(t_a, t_f, t_c) <= t_b."""
    return max(t_a, t_f, t_c) <= t_b
