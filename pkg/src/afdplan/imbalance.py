"""Throughput retention under attention-side load imbalance.

When decode batches drain unevenly, the attention fleet runs at an average
occupancy sigma < 1 while the FFN group's intake stays sized for full batches.
The retention factor alpha (achieved / balanced throughput) depends on the
attention-to-FFN rank ratio lambda, and on whether capacity can be rebalanced
continuously or only in whole attention ranks.

All alphas here are ratios in (0, 1]; sigma == 1 retains everything exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class DegenerateScale(ValueError):
    """Raised when occupancy rounds the useful attention group down to zero ranks."""


class DpMode(Enum):
    """How a deployment absorbs occupancy sigma on its attention data-parallel fleet."""

    AFD = "afd"
    EP_NO_RECLAIM = "ep_no_reclaim"
    EP_RECLAIM_BOUND = "ep_reclaim_bound"


@dataclass(frozen=True)
class ImbalanceQuery:
    """One imbalance evaluation point.

    ``n_a`` may be fractional for trend sweeps; whole-rank quantization applies
    the floor/ceiling to ``sigma * n_a``.  The nominal batch sizes are carried
    for reporting only — they cancel out of every ratio.
    """

    sigma: float
    n_a: float
    n_f: int
    nominal_batch_attention: float = 1.0
    nominal_batch_ffn: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.sigma <= 1:
            raise ValueError(f"sigma must be in (0, 1], got {self.sigma}")
        if self.n_a <= 0:
            raise ValueError(f"n_a must be positive, got {self.n_a}")
        if self.n_f < 1:
            raise ValueError(f"n_f must be >= 1, got {self.n_f}")

    @property
    def lam(self) -> float:
        """Attention ranks per FFN rank."""
        return self.n_a / self.n_f


@dataclass(frozen=True)
class PenaltyPoint:
    """All retention variants at one query point (one CSV row)."""

    query: ImbalanceQuery
    alpha_ep: float
    alpha_exact: float
    alpha_floor: float
    alpha_ceil: float
    alpha_afd: float


def alpha_ep(sigma: float, lam: float) -> float:
    """Continuous retention at occupancy sigma and rank ratio lam.

    alpha = (lam + 1) / (lam + 1/sigma): the idle attention fraction is the
    only loss, because shared ranks shrink their useful work smoothly.
    """
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must be in (0, 1], got {sigma}")
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return (lam + 1) / (lam + 1 / sigma)


def alpha_afd_exact(sigma: float, n_a: float, n_f: int) -> float:
    """Continuous-resize retention for a disaggregated group; equals
    :func:`alpha_ep` at lam = n_a / n_f by construction (same expression,
    same evaluation order)."""
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    if n_a <= 0:
        raise ValueError(f"n_a must be positive, got {n_a}")
    return alpha_ep(sigma, n_a / n_f)


def _candidate(n: float, sigma: float, n_a: float, n_f: int) -> float:
    """Retention when the attention group is resized to n whole ranks.

    Useful attention work is capped both by the n ranks kept and by the
    occupied load sigma * n_a; total footprint is n + n_f ranks, normalized
    against the balanced n_a + n_f deployment.
    """
    return (min(n, sigma * n_a) * (n_a + n_f)) / ((n + n_f) * n_a)


def alpha_afd_discrete(sigma: float, n_a: float, n_f: int) -> PenaltyPoint:
    """Retention when the attention group can only be resized in whole ranks.

    The continuous optimum sits at sigma * n_a ranks; quantization evaluates
    its floor and ceiling and keeps the better one.  Raises
    :class:`DegenerateScale` when the floor is zero ranks (sigma * n_a < 1),
    since a zero-rank attention group serves nothing.
    """
    query = ImbalanceQuery(sigma=sigma, n_a=n_a, n_f=n_f)
    loaded = sigma * n_a
    n_floor = math.floor(loaded)
    if n_floor == 0:
        raise DegenerateScale(
            f"sigma * n_a = {loaded:.6g} < 1: whole-rank resize leaves no "
            "attention capacity"
        )
    n_ceil = math.ceil(loaded)
    a_floor = _candidate(n_floor, sigma, n_a, n_f)
    a_ceil = _candidate(n_ceil, sigma, n_a, n_f)
    return PenaltyPoint(
        query=query,
        alpha_ep=alpha_ep(sigma, query.lam),
        alpha_exact=alpha_afd_exact(sigma, n_a, n_f),
        alpha_floor=a_floor,
        alpha_ceil=a_ceil,
        alpha_afd=max(a_floor, a_ceil),
    )


def alpha_afd_oracle(sigma: float, n_a: float, n_f: int) -> float:
    """Brute-force whole-rank retention: best over every group size 1..n_a+n_f.

    Requires integral n_a so the enumeration range is well defined.  This is
    the reference the closed-form floor/ceiling rule is validated against.
    """
    if n_a <= 0 or n_a != math.floor(n_a):
        raise ValueError(f"n_a must be a positive integer for enumeration, got {n_a}")
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must be in (0, 1], got {sigma}")
    upper = int(n_a) + n_f
    return max(_candidate(n, sigma, n_a, n_f) for n in range(1, upper + 1))


def dp_penalty(mode: DpMode, sigma: float, lam: float) -> float:
    """Fleet-wide throughput retention for one rebalancing strategy.

    A disaggregated fleet and a monolithic fleet that cannot reclaim idle
    capacity both degrade linearly with occupancy; a monolithic fleet that
    reassigns idle attention ranks to FFN work recovers up to
    (sigma * lam + 1) / (lam + 1).
    """
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must be in (0, 1], got {sigma}")
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if mode in (DpMode.AFD, DpMode.EP_NO_RECLAIM):
        return sigma
    if mode is DpMode.EP_RECLAIM_BOUND:
        return (sigma * lam + 1) / (lam + 1)
    raise ValueError(f"unknown mode {mode!r}")


DEFAULT_NF_VALUES: tuple[int, ...] = (2, 4, 6)
DEFAULT_SIGMA_VALUES: tuple[float, ...] = (0.7, 0.75, 0.8, 0.85)
DEFAULT_LAMBDA_RANGE: tuple[float, float, float] = (1.0, 5.0, 0.05)


def lambda_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid built by index so the spacing never drifts."""
    if step <= 0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


def penalty_sweep(nf_values: Sequence[int] = DEFAULT_NF_VALUES,
                  sigma_values: Sequence[float] = DEFAULT_SIGMA_VALUES,
                  lam_range: tuple[float, float, float] = DEFAULT_LAMBDA_RANGE,
                  ) -> list[PenaltyPoint]:
    """Whole-rank retention across the (n_f, sigma, lambda) grid.

    Points come out sorted by (n_f, sigma, lambda).  n_a = lambda * n_f may be
    fractional; grid cells where whole-rank resize degenerates are skipped the
    same way a deployment planner would refuse them.
    """
    points: list[PenaltyPoint] = []
    lams = lambda_grid(*lam_range)
    for n_f in sorted(nf_values):
        for sigma in sorted(sigma_values):
            for lam in lams:
                n_a = lam * n_f
                try:
                    points.append(alpha_afd_discrete(sigma, n_a, n_f))
                except DegenerateScale:
                    continue
    return points
