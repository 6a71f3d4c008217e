#!/usr/bin/env python3
"""Generate the full artifact set (CSV sweeps + JSON reports) into one folder.

Drives the installed CLI programmatically so the files here are byte-identical
to what `afdplan ...` would produce by hand.  Typical use:

    python3 scripts/run_sweeps.py --outdir results/
"""

import argparse
import sys
from pathlib import Path

from afdplan.cli import main as afdplan


def run(argv: list[str]) -> None:
    rc = afdplan(argv)
    if rc != 0:
        sys.exit(f"afdplan {' '.join(argv)} failed with exit code {rc}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--slo-ms", type=float, default=50.0)
    ap.add_argument("--models", default="deepseek-v3,kimi-k2,step3,glm-4.7")
    ap.add_argument("--hardware", default="h800,h20,gb200")
    args = ap.parse_args()

    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)
    slo = str(args.slo_ms)
    models = args.models.split(",")
    hardwares = args.hardware.split(",")

    for model in models:
        run(["budget", "--model", model, "--slo-ms", slo, "--format", "json",
             "--quiet", "--out", str(out / f"budget_{model}.json")])

    for model in models:
        for hw in hardwares:
            stem = f"intensity_{model}_{hw}"
            run(["intensity", "--model", model, "--hardware", hw,
                 "--slo-ms", slo, "--quiet", "--out", str(out / f"{stem}.csv")])

    for hw in hardwares:
        run(["hfu", "--model", args.models, "--hardware", hw, "--slo-ms", slo,
             "--quiet", "--out", str(out / f"hfu_{hw}.csv")])

    run(["penalty", "--quiet", "--out", str(out / "penalty_default.csv")])

    run(["simulate", "--mode", "3bo", "--layers", "58",
         "--ta-us", "402.3", "--tf-us", "402.3",
         "--tdispatch-us", "150", "--tcombine-us", "150",
         "--jitter", "uniform:0.08", "--seed", "0", "--trials", "100",
         "--slo-ms", slo, "--quiet",
         "--out", str(out / "simulate_3bo.json"),
         "--trace-csv", str(out / "trace_3bo.csv")])

    for model in models:
        for hw in hardwares:
            run(["report", "--model", model, "--hardware", hw, "--slo-ms", slo,
                 "--quiet", "--out", str(out / f"report_{model}_{hw}.json")])

    n = len(list(out.iterdir()))
    print(f"wrote {n} artifacts under {out}/")


if __name__ == "__main__":
    main()
