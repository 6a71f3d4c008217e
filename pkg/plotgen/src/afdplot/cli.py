"""`plotgen <kind> <input.csv> -o <out.png>` — planner CSVs to figures.

Kinds: intensity, hfu, penalty, timeline — one per published CSV schema.
For `hfu`, the cap/verdict sidecar JSON written by the planner (same stem,
`.json` suffix) is picked up automatically when present, or can be pointed
at explicitly with --cap-json; without one the cap line falls back to the
per-group data maximum.

Exit codes: 0 success, 1 usage error, 2 schema mismatch (column diff on
stderr), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .figures import build_hfu, build_intensity, build_penalty, build_timeline
from .schemas import KINDS, SchemaMismatch, read_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; keep 2 reserved for schema faults."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plotgen",
                     description="Render planner CSV sweeps as figures")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("input_csv")
    parser.add_argument("-o", "--out", required=True,
                        help="output image path (format from the extension)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--cap-json", default=None,
                        help="cap sidecar JSON for the hfu kind "
                             "(default: <input stem>.json when present)")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--quiet", action="store_true")
    return parser


def _load_caps(path: Path) -> dict[tuple[str, str], dict]:
    with open(path) as fh:
        doc = json.load(fh)
    return {(entry["model"], entry["hardware"]): entry
            for entry in doc.get("caps", [])}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows = read_table(args.input_csv, args.kind)
    except SchemaMismatch as exc:
        print(f"plotgen: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"plotgen: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"plotgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.kind == "intensity":
        fig = build_intensity(rows, title=args.title)
    elif args.kind == "hfu":
        caps = None
        sidecar = (Path(args.cap_json) if args.cap_json
                   else Path(args.input_csv).with_suffix(".json"))
        if args.cap_json or sidecar.exists():
            try:
                caps = _load_caps(sidecar)
            except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
                print(f"plotgen: I/O error: cap sidecar {sidecar}: {exc}",
                      file=sys.stderr)
                return EXIT_IO
        fig = build_hfu(rows, caps=caps, title=args.title)
    elif args.kind == "penalty":
        fig = build_penalty(rows, title=args.title)
    else:
        fig = build_timeline(rows, title=args.title)

    try:
        fig.savefig(args.out, dpi=args.dpi)
    except OSError as exc:
        print(f"plotgen: I/O error: cannot write {args.out}: {exc}",
              file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(f"wrote {args.kind} figure ({len(rows)} rows) to {args.out}",
              file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
