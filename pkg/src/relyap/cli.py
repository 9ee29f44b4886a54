"""Command line interface: ``relyap {solve,lyapunov,diagram,converge}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InvalidArgument, RelyapError
from .experiments import (
    GAMMA_PRESETS,
    ConfigError,
    ExperimentConfig,
    loglog_slope,
    run_convergence,
    run_diagram,
    run_lyapunov,
    write_trajectory,
)
from .ivp import solve_re
from .model import quad_re

log = logging.getLogger("relyap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def parse_gamma(text):
    """``4.0``, ``start:stop:step`` or a JSON value."""
    text = text.strip()
    if text.count(":") == 2 and not text.startswith("{"):
        start, stop, step = (float(v) for v in text.split(":"))
        return {"start": start, "stop": stop, "step": step}
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse gamma {text!r}") from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--gamma", type=parse_gamma)
    common.add_argument("--M", type=int)
    common.add_argument("--N", type=int)
    common.add_argument("--tf", dest="t_f", type=float)
    common.add_argument("--r", type=int)
    common.add_argument("--phi0", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--quad-order", dest="quad_order", type=int)
    common.add_argument("--transient-skip", dest="transient_skip", type=float)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="relyap", description="Lyapunov exponents of renewal equations")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="integrate the quadratic RE, write trajectory.csv")
    ly = sub.add_parser("lyapunov", parents=[common], help="exponents for one gamma")
    ly.add_argument("--dump-matrices", type=int, default=0, metavar="K",
                    help="also write the first K evolution matrices as CSV")
    dg = sub.add_parser("diagram", parents=[common], help="exponents over a gamma sweep")
    dg.add_argument("--preset", choices=sorted(GAMMA_PRESETS))
    dg.add_argument("--workers", type=int)
    cv = sub.add_parser("converge", parents=[common], help="error against t_f or M = N")
    cv.add_argument("--mode", choices=["tf", "MN"], default="tf")
    return p


def make_config(args):
    overrides = {
        k: getattr(args, k)
        for k in ("gamma", "M", "N", "t_f", "r", "phi0", "seed", "quad_order", "transient_skip", "output_dir")
    }
    if getattr(args, "preset", None) and overrides["gamma"] is None:
        overrides["gamma"] = GAMMA_PRESETS[args.preset]
    if args.command == "diagram" and overrides["gamma"] is None and args.config is None:
        overrides["gamma"] = GAMMA_PRESETS["default"]
    if args.config is not None:
        return ExperimentConfig.from_json(args.config, **overrides)
    try:
        return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _run(args, cfg):
    out = Path(cfg.output_dir)
    if args.command == "solve":
        if cfg.is_sweep():
            raise ConfigError("solve expects a single gamma")
        traj = solve_re(quad_re(float(cfg.gamma)), cfg.phi0, cfg.transient_skip + cfg.t_f, cfg.r)
        print(write_trajectory(out / "trajectory.csv", traj))
    elif args.command == "lyapunov":
        est = run_lyapunov(cfg, dump_matrices=args.dump_matrices)
        print(f"gamma = {float(cfg.gamma):g}, t_f = {est.t_f:g}, M = {cfg.M}, N = {cfg.N}")
        for i, v in enumerate(est.sorted[: min(5, len(est.sorted))]):
            print(f"  lambda_{i + 1} = {v: .8f}")
    elif args.command == "diagram":
        gammas, les = run_diagram(cfg, workers=args.workers)
        print(f"{len(gammas)} gamma values -> {out / 'diagram.csv'}, {out / 'diagram.gp'}")
    elif args.command == "converge":
        rows = run_convergence(cfg, args.mode)
        for row in rows:
            print(f"  {args.mode} = {row['param']:>7g}  lambda = {row['lambda']: .8f}  error = {row['error']:.3e}")
        if args.mode == "tf" and all(r["error"] > 0 for r in rows):
            print(f"  log-log slope = {loglog_slope([r['param'] for r in rows], [r['error'] for r in rows]):.3f}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        _run(args, cfg)
    except InvalidArgument as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RelyapError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
