"""Command-line interface.

    geomphase <eigen|evolve|sweep|twin|adiabatic> --config FILE --out-dir DIR
              [--workers N] [--dt X] [--frame lab|rotating] [--dim 3|4]
              [--method ode|eigenbasis|both]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, GeomphaseError
from .scenarios import (
    load_config,
    run_adiabatic_report,
    run_energy_diagram,
    run_evolution,
    run_twin_pulse,
    scenario_from_config,
)
from .sweep import run_sweep, sweep_from_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomphase",
        description="Geometric phase factors for two exchange-coupled driven qubits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("eigen", "energy diagram (adiabatic vs diabatic levels)"),
        ("evolve", "driven evolution: populations and phase factors"),
        ("sweep", "(Omega0, A) grid of endpoint phase factors"),
        ("twin", "twin-pulse three-state permutation run"),
        ("adiabatic", "drive amplitude, detuning and adiabaticity ratio"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=None, help="sweep worker count")
        p.add_argument("--dt", type=float, default=None, help="override time step")
        p.add_argument("--frame", choices=["lab", "rotating"], default=None)
        p.add_argument("--dim", type=int, choices=[3, 4], default=None)
        p.add_argument(
            "--method", choices=["ode", "eigenbasis", "both"], default=None
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "dt": args.dt,
        "frame": args.frame,
        "dim_mode": args.dim,
        "method": args.method,
    }
    try:
        raw = load_config(args.config)
        if args.command == "sweep":
            cfg = sweep_from_config(raw, {"dt": None, "frame": args.frame})
            if args.dt is not None:
                cfg = sweep_from_config(raw, {"sweep.dt": args.dt, "frame": args.frame})
            run_sweep(cfg, args.out_dir, workers=args.workers)
        else:
            cfg = scenario_from_config(raw, overrides)
            runner = {
                "eigen": run_energy_diagram,
                "evolve": run_evolution,
                "twin": run_twin_pulse,
                "adiabatic": run_adiabatic_report,
            }[args.command]
            runner(cfg, args.out_dir)
    except ConfigError as exc:
        print(f"geomphase: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeomphaseError as exc:
        print(f"geomphase: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
