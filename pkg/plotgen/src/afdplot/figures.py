"""Figure builders: rows in, matplotlib Figure out, nothing recomputed.

Each builder is a pure function of already-parsed CSV rows (plus the optional
cap sidecar for the utilization grid).  No pyplot and no global state — the
figures are constructed directly so tests can introspect artists without a
backend, and repeated calls on the same rows build identical figures.

Artists carry ``gid`` tags (``band:<regime>``, ``cap:<model>:<hardware>``,
``curve:...``, ``infeasible:...``) so tests and downstream tooling can find
them without guessing at draw order.
"""

from __future__ import annotations

from typing import Optional, Sequence

from matplotlib.figure import Figure
from matplotlib.patches import Patch

# fixed, colorblind-friendly palette; regime colors intentionally pale so the
# two data curves stay readable on top of the bands
REGIME_COLORS = {
    "scaleup": "#c6dbef",
    "stable": "#c7e9c0",
    "scaleout": "#fdd0a2",
    "max": "#dadaeb",
}
_FALLBACK_BAND = "#eeeeee"
_MB_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3")
_CURVE_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                 "#937860", "#da8bc3", "#8c8c8c")


def _regime_runs(rows: Sequence[dict]) -> list[tuple[str, int, int]]:
    """Contiguous (regime, first_nf, last_nf) runs in row order."""
    runs: list[tuple[str, int, int]] = []
    for row in rows:
        if runs and runs[-1][0] == row["regime"]:
            runs[-1] = (runs[-1][0], runs[-1][1], row["nf"])
        else:
            runs.append((row["regime"], row["nf"], row["nf"]))
    return runs


def build_intensity(rows: Sequence[dict], title: Optional[str] = None) -> Figure:
    """Normalized-intensity trend: smooth bound vs whole-expert actual, with
    one shaded band per contiguous bandwidth regime."""
    fig = Figure(figsize=(7.0, 4.2), constrained_layout=True)
    ax = fig.add_subplot()
    xs = [r["nf"] for r in rows]
    for regime, lo, hi in _regime_runs(rows):
        span = ax.axvspan(lo - 0.5, hi + 0.5,
                          color=REGIME_COLORS.get(regime, _FALLBACK_BAND),
                          lw=0, zorder=0)
        span.set_gid(f"band:{regime}")
        label = ax.text((lo + hi) / 2.0, 1.02, regime, ha="center", va="bottom",
                        fontsize=8, transform=ax.get_xaxis_transform())
        label.set_gid(f"band-label:{regime}")
    (ub_line,) = ax.plot(xs, [r["intensity_ub_norm"] for r in rows],
                         "-o", ms=3.5, color="#4c72b0", zorder=3,
                         label="upper bound (fractional experts)")
    ub_line.set_gid("curve:ub")
    (actual_line,) = ax.plot(xs, [r["intensity_actual_norm"] for r in rows],
                             "--s", ms=3.5, color="#c44e52", zorder=3,
                             label="actual (whole experts)")
    actual_line.set_gid("curve:actual")
    ax.set_xlabel("FFN group size (ranks)")
    ax.set_ylabel("normalized arithmetic intensity")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="lower right", fontsize=8)
    if title:
        ax.set_title(title)
    return fig


def build_hfu(rows: Sequence[dict],
              caps: Optional[dict[tuple[str, str], dict]] = None,
              title: Optional[str] = None) -> Figure:
    """Utilization vs group size per (model, hardware), with the cap drawn as
    a dashed horizontal line — from the sidecar when given, else the data max.

    Infeasible rows (insufficient HBM capacity or bandwidth) appear as hollow
    down-triangles instead of joining the curve.
    """
    fig = Figure(figsize=(7.0, 4.2), constrained_layout=True)
    ax = fig.add_subplot()
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["model"], row["hardware"]), []).append(row)
    for idx, ((model, hardware), grp) in enumerate(groups.items()):
        color = _CURVE_COLORS[idx % len(_CURVE_COLORS)]
        feasible = [r for r in grp if r["feasible"]]
        infeasible = [r for r in grp if not r["feasible"]]
        if feasible:
            (line,) = ax.plot([r["nf"] for r in feasible],
                              [r["hfu"] for r in feasible],
                              "-o", ms=3.5, color=color,
                              label=f"{model} / {hardware}")
            line.set_gid(f"curve:{model}:{hardware}")
        if infeasible:
            scat = ax.scatter([r["nf"] for r in infeasible],
                              [r["hfu"] for r in infeasible],
                              marker="v", s=22, facecolors="none",
                              edgecolors=color,
                              label=f"{model} / {hardware} (infeasible)")
            scat.set_gid(f"infeasible:{model}:{hardware}")
        if caps is not None and (model, hardware) in caps:
            cap_value = caps[(model, hardware)]["cap_clamped"]
        else:
            cap_value = max(r["hfu"] for r in grp)
        cap_line = ax.axhline(cap_value, ls="--", lw=1.0, color=color,
                              alpha=0.8, zorder=1)
        cap_line.set_gid(f"cap:{model}:{hardware}")
        note = ax.text(1.002, cap_value, f"cap {cap_value:.3g}", fontsize=7,
                       color=color, ha="left", va="center",
                       transform=ax.get_yaxis_transform())
        note.set_gid(f"cap-label:{model}:{hardware}")
    ax.set_xlabel("FFN group size (ranks)")
    ax.set_ylabel("hardware FLOPS utilization")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="lower right", fontsize=7)
    if title:
        ax.set_title(title)
    return fig


def build_penalty(rows: Sequence[dict], title: Optional[str] = None) -> Figure:
    """One panel per (group size, occupancy): continuous retention solid,
    whole-rank retention dashed, over the rank-ratio axis."""
    nfs = sorted({r["nf"] for r in rows})
    sigmas = sorted({r["sigma"] for r in rows})
    fig = Figure(figsize=(2.4 * max(len(nfs), 1) + 1.2,
                          1.9 * max(len(sigmas), 1) + 0.8),
                 constrained_layout=True)
    axes = fig.subplots(len(sigmas), len(nfs), squeeze=False,
                        sharex=True, sharey=True)
    for i, sigma in enumerate(sigmas):
        for j, nf in enumerate(nfs):
            ax = axes[i][j]
            cell = [r for r in rows if r["sigma"] == sigma and r["nf"] == nf]
            cell.sort(key=lambda r: r["lambda"])
            xs = [r["lambda"] for r in cell]
            (ep_line,) = ax.plot(xs, [r["alpha_ep"] for r in cell], "-",
                                 color="#4c72b0", lw=1.2, label="continuous")
            ep_line.set_gid(f"ep:{nf}:{sigma:g}")
            (afd_line,) = ax.plot(xs, [r["alpha_afd"] for r in cell], "--",
                                  color="#c44e52", lw=1.2, label="whole-rank")
            afd_line.set_gid(f"afd:{nf}:{sigma:g}")
            ax.set_title(f"n_f={nf}, sigma={sigma:g}", fontsize=8)
            if i == len(sigmas) - 1:
                ax.set_xlabel("attention/FFN rank ratio")
            if j == 0:
                ax.set_ylabel("retention")
    if rows:
        axes[0][0].legend(fontsize=7, loc="lower right")
    if title:
        fig.suptitle(title)
    return fig


def build_timeline(rows: Sequence[dict], title: Optional[str] = None) -> Figure:
    """Gantt-style schedule: one lane per resource, bars colored by micro-batch."""
    lanes: list[str] = []
    for row in rows:
        if row["resource"] not in lanes:
            lanes.append(row["resource"])
    mbs = sorted({r["mb"] for r in rows})
    fig = Figure(figsize=(8.5, 0.8 * max(len(lanes), 1) + 1.4),
                 constrained_layout=True)
    ax = fig.add_subplot()
    for (lane_idx, resource) in enumerate(lanes):
        for mb in mbs:
            spans = [(r["start_us"], r["end_us"] - r["start_us"])
                     for r in rows
                     if r["resource"] == resource and r["mb"] == mb]
            if not spans:
                continue
            coll = ax.broken_barh(
                spans, (lane_idx - 0.38, 0.76),
                facecolors=_MB_COLORS[mb % len(_MB_COLORS)],
                edgecolors="none")
            coll.set_gid(f"bars:{resource}:{mb}")
    ax.set_yticks(range(len(lanes)), labels=lanes)
    ax.invert_yaxis()
    ax.set_xlabel("time (us)")
    ax.legend(handles=[Patch(facecolor=_MB_COLORS[mb % len(_MB_COLORS)],
                             label=f"micro-batch {mb}") for mb in mbs],
              fontsize=7, loc="upper left", ncols=max(len(mbs), 1))
    if title:
        ax.set_title(title)
    return fig
