"""Command-line front end: every analysis as a subcommand with stable CSV/JSON.

Output is deliberately boring: fixed header strings, floats at 6 significant
digits, '\\n' line endings, lowercase enum tokens.  Byte-identical inputs give
byte-identical outputs, so downstream plotting and regression tests can diff
files directly.

Exit codes: 0 success, 1 usage/config error, 2 infeasible scenario,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .budget import Budget, NonPositiveBudget, stage_budget
from .configs import (
    ConfigError,
    HardwareConfig,
    ModelConfig,
    ScenarioConfig,
    load_config,
    preset,
    to_dict,
)
from .imbalance import (
    DEFAULT_LAMBDA_RANGE,
    DEFAULT_NF_VALUES,
    DEFAULT_SIGMA_VALUES,
    penalty_sweep,
)
from .pipeline_sim import (
    BoMode,
    JitterKind,
    JitterSpec,
    SimSpec,
    StageTiming,
    jitter_sensitivity,
    simulate,
    total_bubble_time,
)
from .roofline import compare_vs_ep, hfu_cap_closed_form, hfu_sweep, intensity_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3

INTENSITY_HEADER = ("nf,regime,rank_tokens,local_experts,tokens_per_expert,"
                    "intensity_ub_norm,intensity_actual_norm")
HFU_HEADER = "model,hardware,nf,hfu,ofu,s_t,binding,feasible,reason"
PENALTY_HEADER = "nf,sigma,lambda,alpha_ep,alpha_exact,alpha_floor,alpha_ceil,alpha_afd"
TRACE_HEADER = "resource,mb,layer,start_us,end_us"

_MODE_TOKENS = {"nbo": BoMode.NBO, "2bo": BoMode.TWO_BO, "3bo": BoMode.THREE_BO}
_JITTER_TOKENS = {
    "none": JitterKind.NONE,
    "uniform": JitterKind.UNIFORM_FRACTION,
    "lognormal": JitterKind.LOG_NORMAL,
}


class CliError(Exception):
    """Usage-level problem; maps to exit code 1."""


def fmt(value) -> str:
    """Render one CSV/JSON-text cell with the fixed 6-significant-digit policy."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _resolve(arg: str, want: type, label: str):
    """Turn a preset name or a JSON config path into a config of type ``want``."""
    path = Path(arg)
    if path.exists() and path.is_file():
        cfg = load_config(path)
    else:
        try:
            cfg = preset(arg)
        except ConfigError:
            if arg.endswith(".json"):
                raise CliError(f"{label} config file not found: {arg}")
            raise
    if not isinstance(cfg, want):
        raise CliError(f"{label} argument {arg!r} resolved to a "
                       f"{type(cfg).__name__}, expected {want.__name__}")
    return cfg


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario")
    group.add_argument("--slo-ms", type=float, required=True,
                       help="target time per output token, milliseconds")
    group.add_argument("--l-accept", type=float, default=1.7,
                       help="accepted tokens per decode step (default 1.7)")
    group.add_argument("--t-gap-ms", type=float, default=15.0,
                       help="non-overlapped time per step, ms (default 15)")
    group.add_argument("--n-bo", type=int, default=3,
                       help="overlapped micro-batches per stage (default 3)")
    group.add_argument("--gemm-efficiency", type=float, default=1.0,
                       help="fraction of peak the grouped GEMM sustains (default 1)")
    group.add_argument("--ep-ref-hfu", type=float, default=0.60,
                       help="reference utilization for the verdict (default 0.60)")
    group.add_argument("--mem-reserve", type=float, default=0.8,
                       help="HBM fraction usable for expert weights (default 0.8)")


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    return ScenarioConfig(
        slo_tpot=args.slo_ms * 1e-3,
        l_accept=args.l_accept,
        t_gap=args.t_gap_ms * 1e-3,
        n_bo=args.n_bo,
        gemm_efficiency=args.gemm_efficiency,
        ep_reference_hfu=args.ep_ref_hfu,
        memory_reserve_fraction=args.mem_reserve,
    )


def _parse_nf_range(text: str) -> range:
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise CliError(f"--nf-range expects A:B with integers, got {text!r}")
    if lo < 1 or hi < lo:
        raise CliError(f"--nf-range needs 1 <= A <= B, got {text!r}")
    return range(lo, hi + 1)


def _parse_jitter(text: str) -> tuple[JitterKind, float]:
    kind_s, sep, mag_s = text.partition(":")
    if kind_s not in _JITTER_TOKENS:
        raise CliError(f"unknown jitter kind {kind_s!r}; "
                       f"expected one of {sorted(_JITTER_TOKENS)}")
    kind = _JITTER_TOKENS[kind_s]
    if not sep:
        if kind is not JitterKind.NONE:
            raise CliError(f"jitter {kind_s!r} needs a magnitude, e.g. {kind_s}:0.1")
        return kind, 0.0
    try:
        magnitude = float(mag_s)
    except ValueError:
        raise CliError(f"bad jitter magnitude {mag_s!r}")
    return kind, magnitude


def _split_list(values: Sequence[str]) -> list[str]:
    out: list[str] = []
    for value in values:
        out.extend(part for part in value.split(",") if part)
    return out


def _write_text(path: str, text: str, quiet: bool, what: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IoFailure(f"cannot write {path}: {exc}")
    if not quiet:
        print(f"wrote {what} to {path}", file=sys.stderr)


class _IoFailure(Exception):
    pass


def _csv_text(header: str, rows: list[list]) -> str:
    lines = [header]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _rows_as_json(header: str, rows: list[list]) -> str:
    keys = header.split(",")
    records = [{k: (None if cell is None else cell if not isinstance(cell, float)
                    else float(fmt(cell)))
                for k, cell in zip(keys, row)} for row in rows]
    return json.dumps(records, indent=2) + "\n"


def _emit_rows(args: argparse.Namespace, header: str, rows: list[list],
               what: str) -> None:
    if args.format == "json":
        _write_text(args.out, _rows_as_json(header, rows), args.quiet, what)
    else:
        _write_text(args.out, _csv_text(header, rows), args.quiet, what)


def _budget_fields(budget: Budget) -> dict:
    return {
        "run_batch_latency_ms": budget.run_batch_latency * 1e3,
        "t_b_us": budget.stage_budget * 1e6,
        "n_overlap_layers": budget.n_overlap_layers,
        "n_bo": budget.n_bo,
        "t_gap_ms": budget.t_gap * 1e3,
    }


def cmd_budget(args: argparse.Namespace) -> int:
    model = _resolve(args.model, ModelConfig, "--model")
    scenario = _scenario(args)
    budget = stage_budget(scenario, model)
    fields = _budget_fields(budget)
    if args.format == "json":
        text = json.dumps({k: (float(fmt(v)) if isinstance(v, float) else v)
                           for k, v in fields.items()}, indent=2) + "\n"
    elif args.format == "csv":
        text = _csv_text(",".join(fields), [list(fields.values())])
    else:
        text = "".join(f"{key} = {fmt(value)}\n" for key, value in fields.items())
    _write_text(args.out, text, args.quiet, "budget")
    return EXIT_OK


def cmd_intensity(args: argparse.Namespace) -> int:
    model = _resolve(args.model, ModelConfig, "--model")
    hw = _resolve(args.hardware, HardwareConfig, "--hardware")
    scenario = _scenario(args)
    points = intensity_sweep(model, hw, scenario, _parse_nf_range(args.nf_range))
    rows = [[p.n_f, p.regime.kind.value, p.rank_tokens, p.local_experts,
             p.tokens_per_expert, p.intensity_ub_norm, p.intensity_actual_norm]
            for p in points]
    _emit_rows(args, INTENSITY_HEADER, rows, f"{len(rows)} intensity rows")
    return EXIT_OK


def cmd_hfu(args: argparse.Namespace) -> int:
    models = [_resolve(name, ModelConfig, "--model")
              for name in _split_list(args.model)]
    hardwares = [_resolve(name, HardwareConfig, "--hardware")
                 for name in _split_list(args.hardware)]
    scenario = _scenario(args)
    nf_range = _parse_nf_range(args.nf_range)
    rows: list[list] = []
    caps: list[dict] = []
    for model in models:
        for hw in hardwares:
            points = hfu_sweep(model, hw, scenario, nf_range)
            for p in points:
                rows.append([model.name, hw.name, p.n_f, p.hfu, p.ofu,
                             p.temporal_sparsity, p.binding.value, p.feasible,
                             p.reason.value if p.reason else None])
            cap = hfu_cap_closed_form(model, hw)
            cap_clamped = min(1.0, cap)
            feasible = [p for p in points if p.feasible]
            best = max(feasible, key=lambda p: p.hfu) if feasible else None
            comparison = compare_vs_ep(cap_clamped, scenario)
            caps.append({
                "model": model.name,
                "hardware": hw.name,
                "cap": float(fmt(cap)),
                "cap_clamped": float(fmt(cap_clamped)),
                "max_hfu": float(fmt(best.hfu)) if best else None,
                "argmax_nf": best.n_f if best else None,
                "verdict": comparison.verdict.value,
                "margin": float(fmt(comparison.margin)),
            })
    _emit_rows(args, HFU_HEADER, rows, f"{len(rows)} hfu rows")
    if args.format == "csv" and args.out != "-":
        sidecar = str(Path(args.out).with_suffix(".json"))
        text = json.dumps({"tool_version": __version__, "caps": caps},
                          indent=2) + "\n"
        _write_text(sidecar, text, args.quiet, "hfu cap summary")
    return EXIT_OK


def cmd_penalty(args: argparse.Namespace) -> int:
    try:
        nf_values = [int(v) for v in _split_list(args.nf)]
        sigma_values = [float(v) for v in _split_list(args.sigma)]
    except ValueError as exc:
        raise CliError(f"bad --nf/--sigma value: {exc}")
    try:
        parts = args.lambda_range.split(":")
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise CliError(f"--lambda-range expects A:B:step, got {args.lambda_range!r}")
    points = penalty_sweep(nf_values, sigma_values, (start, stop, step))
    rows = [[p.query.n_f, p.query.sigma, p.query.lam, p.alpha_ep, p.alpha_exact,
             p.alpha_floor, p.alpha_ceil, p.alpha_afd] for p in points]
    _emit_rows(args, PENALTY_HEADER, rows, f"{len(rows)} penalty rows")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.mode not in _MODE_TOKENS:
        raise CliError(f"unknown mode {args.mode!r}; expected one of "
                       f"{sorted(_MODE_TOKENS)}")
    mode = _MODE_TOKENS[args.mode]
    timings = StageTiming(
        t_a=args.ta_us * 1e-6,
        t_dispatch=args.tdispatch_us * 1e-6,
        t_f=args.tf_us * 1e-6,
        t_combine=args.tcombine_us * 1e-6,
    )
    kind, magnitude = _parse_jitter(args.jitter)
    jitter = JitterSpec(kind=kind, magnitude=magnitude, seed=args.seed)
    budget: Optional[Budget] = None
    if args.slo_ms is not None:
        total = args.slo_ms * 1e-3 * args.l_accept
        usable = total - args.t_gap_ms * 1e-3
        if usable <= 0:
            raise NonPositiveBudget(
                f"t_gap {args.t_gap_ms} ms leaves no time in {total * 1e3} ms")
        budget = Budget(
            run_batch_latency=total,
            stage_budget=usable / (args.layers * mode.n_microbatches),
            n_overlap_layers=args.layers,
            n_bo=mode.n_microbatches,
            t_gap=args.t_gap_ms * 1e-3,
        )
    spec = SimSpec(mode=mode, n_layers=args.layers, timings=timings,
                   jitter=jitter, budget=budget)
    result = simulate(spec)
    doc: dict = {
        "tool_version": __version__,
        "mode": mode.token,
        "n_layers": args.layers,
        "n_microbatches": spec.n_microbatches,
        "makespan_us": float(fmt(result.makespan * 1e6)),
        "busy_us": {r: float(fmt(v * 1e6)) for r, v in result.busy.items()},
        "utilization": {r: float(fmt(v)) for r, v in result.utilization.items()},
        "interior_utilization": {
            r: (None if v is None else float(fmt(v)))
            for r, v in result.interior_utilization.items()},
        "bubble_count": len(result.bubbles),
        "bubble_total_us": float(fmt(total_bubble_time(result) * 1e6)),
        "interior_bubble_count": len(result.interior_bubbles),
        "slo_violation": result.slo_violation,
    }
    if args.trials > 1:
        if kind is JitterKind.NONE:
            raise CliError("--trials > 1 needs --jitter uniform:MAG or lognormal:MAG")
        summary = jitter_sensitivity(spec, args.trials)
        doc["trials"] = summary.trials
        doc["p_violation"] = float(fmt(summary.p_violation))
        doc["mean_makespan_us"] = float(fmt(summary.mean_makespan * 1e6))
        doc["bubble_growth"] = float(fmt(summary.bubble_growth))
        doc["bubble_growth_is_absolute"] = summary.bubble_growth_is_absolute
    _write_text(args.out, json.dumps(doc, indent=2) + "\n", args.quiet,
                "simulation summary")
    if args.trace_csv:
        rows = [[item.resource, item.mb, item.layer, item.start * 1e6,
                 item.end * 1e6] for item in result.trace]
        _write_text(args.trace_csv, _csv_text(TRACE_HEADER, rows), args.quiet,
                    f"{len(rows)} trace rows")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    model = _resolve(args.model, ModelConfig, "--model")
    hw = _resolve(args.hardware, HardwareConfig, "--hardware")
    scenario = _scenario(args)
    budget = stage_budget(scenario, model)
    nf_range = _parse_nf_range(args.nf_range)
    points = hfu_sweep(model, hw, scenario, nf_range)
    feasible = [p for p in points if p.feasible]
    best = max(feasible, key=lambda p: p.hfu) if feasible else None
    cap = hfu_cap_closed_form(model, hw)
    cap_clamped = min(1.0, cap)
    comparison = compare_vs_ep(cap_clamped, scenario)
    warnings: list[str] = []
    infeasible_count = len(points) - len(feasible)
    if infeasible_count:
        warnings.append(f"{infeasible_count} of {len(points)} swept group sizes "
                        "are infeasible on this hardware")
    if not feasible:
        warnings.append("no feasible FFN group size in the swept range")
    if cap > 1.0:
        warnings.append(f"closed-form cap {fmt(cap)} exceeds 1; clamped for the verdict")
    doc = {
        "tool_version": __version__,
        "inputs": {
            "model": to_dict(model),
            "hardware": to_dict(hw),
            "scenario": to_dict(scenario),
        },
        "budget": {k: (float(fmt(v)) if isinstance(v, float) else v)
                   for k, v in _budget_fields(budget).items()},
        "hfu": {
            "cap_pct": float(fmt(cap * 100)),
            "cap_clamped_pct": float(fmt(cap_clamped * 100)),
            "max_hfu_pct": float(fmt(best.hfu * 100)) if best else None,
            "argmax_nf": best.n_f if best else None,
            "ep_reference_hfu_pct": float(fmt(scenario.ep_reference_hfu * 100)),
            "margin_ratio": float(fmt(comparison.margin)),
            "verdict": comparison.verdict.value,
        },
        "warnings": warnings,
    }
    _write_text(args.out, json.dumps(doc, indent=2) + "\n", args.quiet, "report")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; remap to 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afdplan",
                     description="Capacity planning for attention/FFN-"
                                 "disaggregated MoE decoding")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt_choices=("csv", "json")) -> None:
        p.add_argument("--format", choices=fmt_choices, default=fmt_choices[0])
        p.add_argument("--quiet", action="store_true",
                       help="suppress informational stderr output")
        p.add_argument("--out", default="-", help="output path ('-' = stdout)")

    p = sub.add_parser("budget", help="per-stage latency budget")
    p.add_argument("--model", required=True)
    p.add_argument("--hardware")  # accepted for symmetry; budget needs none
    _add_scenario_flags(p)
    common(p, fmt_choices=("text", "csv", "json"))
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("intensity", help="arithmetic-intensity trend vs FFN group size")
    p.add_argument("--model", required=True)
    p.add_argument("--hardware", required=True)
    p.add_argument("--nf-range", default="1:64", metavar="A:B")
    _add_scenario_flags(p)
    common(p)
    p.set_defaults(func=cmd_intensity)

    p = sub.add_parser("hfu", help="achievable utilization sweep and caps")
    p.add_argument("--model", required=True, action="append",
                   help="preset/path; repeat or comma-separate for several")
    p.add_argument("--hardware", required=True, action="append")
    p.add_argument("--nf-range", default="1:64", metavar="A:B")
    _add_scenario_flags(p)
    common(p)
    p.set_defaults(func=cmd_hfu)

    p = sub.add_parser("penalty", help="imbalance retention grid")
    p.add_argument("--nf", action="append",
                   default=None, help="FFN group sizes (default 2,4,6)")
    p.add_argument("--sigma", action="append", default=None,
                   help="occupancy values (default 0.7,0.75,0.8,0.85)")
    p.add_argument("--lambda-range", default=None, metavar="A:B:STEP",
                   help="attention/FFN rank ratio grid (default 1:5:0.05)")
    common(p)
    p.set_defaults(func=cmd_penalty)

    p = sub.add_parser("simulate", help="deterministic micro-batch pipeline run")
    p.add_argument("--mode", required=True, help="nbo | 2bo | 3bo")
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--ta-us", type=float, required=True)
    p.add_argument("--tf-us", type=float, required=True)
    p.add_argument("--tdispatch-us", type=float, required=True)
    p.add_argument("--tcombine-us", type=float, required=True)
    p.add_argument("--jitter", default="none", metavar="KIND[:MAG]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--trace-csv", default=None,
                   help="also write the schedule trace CSV here")
    p.add_argument("--slo-ms", type=float, default=None,
                   help="enable SLO checking against this target")
    p.add_argument("--l-accept", type=float, default=1.7)
    p.add_argument("--t-gap-ms", type=float, default=15.0)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate, format="json")

    p = sub.add_parser("report", help="aggregate planning report as JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--hardware", required=True)
    p.add_argument("--nf-range", default="1:64", metavar="A:B")
    _add_scenario_flags(p)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_report, format="json")

    return parser


def _apply_penalty_defaults(args: argparse.Namespace) -> None:
    if getattr(args, "command", None) != "penalty":
        return
    if args.nf is None:
        args.nf = [",".join(str(v) for v in DEFAULT_NF_VALUES)]
    if args.sigma is None:
        args.sigma = [",".join(str(v) for v in DEFAULT_SIGMA_VALUES)]
    if args.lambda_range is None:
        start, stop, step = DEFAULT_LAMBDA_RANGE
        args.lambda_range = f"{start}:{stop}:{step}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_penalty_defaults(args)
    try:
        return args.func(args)
    except NonPositiveBudget as exc:
        print(f"afdplan: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CliError, ConfigError, ValueError) as exc:
        print(f"afdplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IoFailure as exc:
        print(f"afdplan: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
