"""Command-line interface: ``josephson-qrc {run,sweep,calibrate-drive,validate,gen-data}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import backend, config as cfgmod, datasets, experiments, validation
from .errors import InvalidSpecificationError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("josephson_qrc")


def _config_args(p):
    p.add_argument("-c", "--config", help="config file (key = value lines in [sections])")
    p.add_argument("-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value; repeatable")
    p.add_argument("-o", "--output", help="output directory (default: $%s/<task>_<reservoir>)"
                   % experiments.OUTPUT_ROOT_ENV)
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="josephson-qrc", description="Quantum reservoir computing with a driven, dissipative Josephson mixer.")
    parser.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    parser.add_argument("--backend", choices=("auto", "compiled", "python"), default=None,
                        help="kernel backend (default: $JQRC_BACKEND or auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment and write its result bundle")
    _config_args(p)

    p = sub.add_parser("sweep", help="run a parameter sweep and write sweep.csv")
    _config_args(p)
    p.add_argument("--axis", choices=cfgmod.SWEEP_AXES[1:], help="sweep axis (overrides [sweep] axis)")
    p.add_argument("--values", help="comma-separated sweep values (overrides [sweep] values)")
    p.add_argument("--workers", type=int, help="worker processes (default: available cores)")

    p = sub.add_parser("calibrate-drive", help="choose the drive scale for the configured task")
    _config_args(p)
    p.add_argument("--x-max", type=float, help="input amplitude to calibrate at (default: task maximum)")

    sub.add_parser("validate", help="run the physics invariant checks")

    p = sub.add_parser("gen-data", help="write the task dataset(s) as CSV")
    _config_args(p)
    return parser


def load_config(args):
    cfg = cfgmod.load(args.config) if args.config else cfgmod.defaults()
    overrides = list(args.set)
    if getattr(args, "axis", None):
        overrides.append(f"sweep.axis={args.axis}")
    if getattr(args, "values", None):
        overrides.append(f"sweep.values={args.values}")
    if getattr(args, "workers", None) is not None:
        overrides.append(f"sweep.workers={args.workers}")
    if args.output:
        overrides.append(f"experiment.output_dir={args.output}")
    return cfgmod.apply_overrides(cfg, overrides)


def cmd_run(cfg, args):
    result = experiments.run_experiment(cfg)
    for row in result.metrics[:5]:
        print(", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()
                        if v is not None))
    if len(result.metrics) > 5:
        print(f"... {len(result.metrics)} outputs; see metrics.csv")
    print(f"results written to {result.out_dir}")
    return EXIT_OK


def cmd_sweep(cfg, args):
    rows = experiments.run_sweep(cfg)
    failed = [r for r in rows if r.get("error")]
    for r in rows:
        if r.get("error"):
            print(f"value={r['value']:g} FAILED {r['error']}")
        else:
            acc = r["accuracy_mean"]
            acc_text = f"accuracy={acc:.4f}+-{r['accuracy_std']:.4f} " if acc is not None else ""
            print(f"value={r['value']:g} {acc_text}log_error={r['log_error_mean']:.4f}")
    print(f"sweep written to {experiments.default_output_dir(cfg)}")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_calibrate(cfg, args):
    train, test = experiments.load_task(cfg)
    inputs = np.concatenate([train.inputs, test.inputs])
    if args.x_max is not None:
        inputs = np.array([args.x_max])
    cfg["mixer"]["drive_scale"] = None
    mcfg, cal = experiments.resolve_drive(cfg, inputs)
    eps_a, eps_b = cfgmod.resolved_eps0(cfg)
    print(f"drive_scale = {cal.drive_scale!r}")
    print(f"eps0 (effective) = {cal.drive_scale * eps_a:.6g}, {cal.drive_scale * eps_b:.6g}")
    print(f"x_max = {cal.x_max:g}; stationary edge population = {cal.edge_population:.3g}; "
          f"mean photons = {cal.mean_photons[0]:.3f}, {cal.mean_photons[1]:.3f}")
    return EXIT_OK


def cmd_validate(cfg, args):
    checks = validation.invariant_suite()
    for check in checks:
        print(check.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def cmd_gen_data(cfg, args):
    out_dir = experiments.default_output_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    train, test = experiments.load_task(cfg)
    for name, ds in (("train", train), ("test", test)):
        path = os.path.join(out_dir, f"{ds.kind}_{name}.csv")
        experiments.atomic_write(path, ds.to_csv)
        print(path)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "calibrate-drive": cmd_calibrate,
            "validate": cmd_validate, "gen-data": cmd_gen_data}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.backend and args.backend != "auto":
            backend.use(args.backend)
        cfg = load_config(args) if args.command != "validate" else cfgmod.defaults()
        if getattr(args, "print_config", False):
            print(cfgmod.dumps(cfg), end="")
            return EXIT_OK
        return COMMANDS[args.command](cfg, args)
    except (InvalidSpecificationError, OSError, ImportError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
