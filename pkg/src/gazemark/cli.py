"""Command line front end.

Subcommands:

  simulate        run the seeded experiment grid, write run artifacts
  analyze         recompute summary/dispersion tables from trials.jsonl
  distance-sweep  novice error rate across label-margin values
  validate-layout check a layout parameterization and report violations
  replay          decode a recorded gaze JSONL through a session
  serve           start the WebSocket session service

`simulate` and `distance-sweep` accept a TOML config file; command line
flags override it.  All runs are reproducible from (config, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import analysis
from .engine import Mode, SessionConfig, Technique, open_session
from .geometry import LayoutParams, validate_layout
from .harness import ExperimentConfig, run_experiment
from .menu import build_menu
from .synth import SampleStream


def _load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return ExperimentConfig.from_dict(raw)


def _parse_structure(text: str) -> tuple[int, int]:
    try:
        b, d = text.lower().split("x")
        return int(b), int(d)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"structure must look like 4x3, got {text!r}"
        ) from None


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates: dict = {}
    if getattr(args, "seed", None) is not None:
        updates["master_seed"] = args.seed
    if getattr(args, "trials_scale", None) is not None:
        updates["trials_scale"] = args.trials_scale
    if getattr(args, "repetitions", None) is not None:
        updates["repetitions"] = args.repetitions
    if getattr(args, "technique", None):
        updates["techniques"] = tuple(Technique(t) for t in args.technique)
    if getattr(args, "structure", None):
        updates["structures"] = tuple(args.structure)
    if getattr(args, "size", None):
        updates["radii"] = tuple(args.size)
    if updates:
        config = replace(config, **updates)
    if getattr(args, "noise_scale", None) is not None:
        config = config.with_noise_scale(args.noise_scale)
    return config


def _print_summary(records) -> None:
    rows = analysis.summarize(records)
    header = f"{'technique':<11} {'menu':<5} {'radius':>6} {'expertise':<12} {'n':>6} {'ER':>8} {'mean CT ms':>11}"
    print(header)
    print("-" * len(header))
    for r in rows:
        ct = f"{r.mean_ct_ms:11.1f}" if r.mean_ct_ms is not None else f"{'-':>11}"
        print(
            f"{r.technique:<11} {r.breadth}x{r.depth:<3} {r.radius:>6g} "
            f"{r.expertise:<12} {r.n_trials:>6} {r.error_rate:>8.4f} {ct}"
        )
    drows = analysis.dispersion(records)
    if drows:
        print()
        print(f"{'technique':<11} {'menu':<5} {'radius':>6} {'dispersion':>11} {'landings':>9}")
        for d in drows:
            print(
                f"{d.technique:<11} {d.breadth}x{d.depth:<3} {d.radius:>6g} "
                f"{d.dispersion:>11.4f} {d.n_landings:>9}"
            )


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    records = run_experiment(config, out_dir=args.out, config_source=args.config)
    _print_summary(records)
    if args.out:
        print(f"\nwrote artifacts to {args.out}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    from .harness import read_trials_jsonl

    records = read_trials_jsonl(args.trials)
    _print_summary(records)
    out_dir = Path(args.out) if args.out else Path(args.trials).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    analysis.write_summary_csv(records, out_dir / "summary.csv")
    analysis.write_dispersion_csv(records, out_dir / "dispersion.csv")
    print(f"\nwrote summary.csv and dispersion.csv to {out_dir}")
    return 0


def cmd_distance_sweep(args: argparse.Namespace) -> int:
    base = _apply_overrides(_load_config(args.config), args)
    technique = Technique(args.technique[0]) if args.technique else Technique.LATTICE
    structure = args.structure[0] if args.structure else (4, 3)
    radius = args.size[0] if args.size else 10.0
    margins = [float(m) for m in args.margins.split(",")]
    rows = []
    for margin in margins:
        cfg = replace(
            base,
            techniques=(technique,),
            structures=(structure,),
            radii=(radius,),
            repetitions=1,  # novice rep only: reading is what the margin stresses
            label_margin=margin,
        )
        records = run_experiment(cfg)
        summ = analysis.summarize(records)
        assert len(summ) == 1
        rows.append((margin, summ[0].n_trials, summ[0].error_rate))
    print(f"{'margin':>7} {'n':>6} {'ER':>8}")
    for margin, n, er in rows:
        print(f"{margin:>7g} {n:>6} {er:>8.4f}")
    if args.out:
        import csv

        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label_margin", "n_trials", "error_rate"])
            for margin, n, er in rows:
                w.writerow([margin, n, f"{er:.6f}"])
        print(f"wrote {args.out}")
    return 0


def cmd_validate_layout(args: argparse.Namespace) -> int:
    params = LayoutParams(
        anchor_width=args.anchor_width,
        zone_width=args.zone_width,
        radius=args.radius,
        label_margin=args.label_margin,
        crust_width=args.crust_width,
        pie_radius=args.pie_radius,
    )
    violations = validate_layout(params, args.breadth)
    if not violations:
        print(f"layout ok: breadth {args.breadth}, radius {args.radius:g}")
        return 0
    for v in violations:
        print(f"{v.code}: {v.message}")
    return 1


def cmd_replay(args: argparse.Namespace) -> int:
    menu = build_menu(args.breadth, args.depth, label_seed=args.label_seed)
    config = SessionConfig(
        technique=Technique(args.technique),
        menu=menu,
        params=LayoutParams(
            radius=args.radius,
            zone_width=args.zone_width,
            label_margin=args.label_margin,
            crust_width=args.crust_width,
        ),
        mode=Mode(args.mode),
        dwell_ms=args.dwell_ms,
    )
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text(encoding="utf-8")
    stream = SampleStream.from_jsonl(text)
    session = open_session(config, telemetry=args.telemetry)
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for event in session.feed(stream):
            out.write(json.dumps(event.to_json_dict(), separators=(",", ":")))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--trials-scale", type=int, dest="trials_scale")
    p.add_argument("--repetitions", type=int)
    p.add_argument(
        "--noise-scale", type=float, dest="noise_scale", help="noise multiplier k"
    )
    p.add_argument(
        "--technique",
        action="append",
        choices=[t.value for t in Technique],
        help="restrict to a technique (repeatable)",
    )
    p.add_argument(
        "--structure",
        action="append",
        type=_parse_structure,
        help="menu structure like 4x3 (repeatable)",
    )
    p.add_argument(
        "--size",
        action="append",
        type=float,
        help="ring radius in degrees (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazemark", description="gaze marking menu toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the seeded experiment grid")
    _add_grid_flags(p)
    p.add_argument("--out", help="directory for run artifacts")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="summarize an existing trials.jsonl")
    p.add_argument("--trials", required=True, help="path to trials.jsonl")
    p.add_argument("--out", help="directory for summary/dispersion CSVs")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser(
        "distance-sweep", help="novice error rate across label margins"
    )
    _add_grid_flags(p)
    p.add_argument("--margins", default="1,2,3,4,5", help="comma list of degrees")
    p.add_argument("--out", help="CSV file for the sweep table")
    p.set_defaults(fn=cmd_distance_sweep)

    p = sub.add_parser("validate-layout", help="check layout parameters")
    p.add_argument("--breadth", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--anchor-width", type=float, default=1.5, dest="anchor_width")
    p.add_argument("--zone-width", type=float, default=4.0, dest="zone_width")
    p.add_argument("--label-margin", type=float, default=3.0, dest="label_margin")
    p.add_argument("--crust-width", type=float, default=4.0, dest="crust_width")
    p.add_argument("--pie-radius", type=float, default=None, dest="pie_radius")
    p.set_defaults(fn=cmd_validate_layout)

    p = sub.add_parser("replay", help="decode recorded gaze samples")
    p.add_argument("--input", required=True, help="gaze JSONL file, or - for stdin")
    p.add_argument("--out", help="events JSONL file (default stdout)")
    p.add_argument(
        "--technique",
        default=Technique.LATTICE.value,
        choices=[t.value for t in Technique],
    )
    p.add_argument("--breadth", type=int, default=4)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--zone-width", type=float, default=4.0, dest="zone_width")
    p.add_argument("--label-margin", type=float, default=3.0, dest="label_margin")
    p.add_argument("--crust-width", type=float, default=4.0, dest="crust_width")
    p.add_argument("--dwell-ms", type=float, default=1000.0, dest="dwell_ms")
    p.add_argument("--label-seed", type=int, default=1, dest="label_seed")
    p.add_argument(
        "--mode", default=Mode.PROGRESSIVE.value, choices=[m.value for m in Mode]
    )
    p.add_argument("--telemetry", action="store_true")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("serve", help="start the WebSocket session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of static frontend files to serve")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
