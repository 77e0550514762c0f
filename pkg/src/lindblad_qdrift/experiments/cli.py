"""Command-line entry point: ``lindblad-qdrift <experiment> [flags]``."""
from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

from .. import __version__
from ..errors import (ConfigError, DimensionError, InputError, NumericRangeError,
                      PreconditionError, StateInvariantError)
from .config import KINDS, load_config, load_tolerances
from .drivers import evaluate, run
from .output import plot_result, write_csv, write_json

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_RANGE = 0, 2, 3, 4

_HELP = {
    "scaling-average": "average-channel error versus step count",
    "scaling-random": "mean squared weighted error of random trajectories",
    "gibbs": "chi-square decay and plateaus of a random Davies Gibbs sampler",
    "davies-verify": "Monte Carlo mean generator versus the analytic Davies generator",
    "gap-cert": "Davies spectral gap against the alpha and chain bounds",
    "spectrum": "spectral CDF against the semicircle law",
    "step-order": "single-step truncation error of the split step algorithms",
}


def build_parser():
    p = argparse.ArgumentParser(prog="lindblad-qdrift", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        s = sub.add_parser(kind, help=_HELP[kind])
        s.add_argument("--config", type=Path, help="JSON experiment config")
        s.add_argument("--seed", type=int, help="master seed (overrides the config)")
        s.add_argument("--out", type=Path, help="output directory (default ./results)")
        s.add_argument("--workers", type=int, default=1, help="worker threads")
        s.add_argument("--tolerances", type=Path, help="JSON tolerance overrides")
    return p


def execute(args):
    cfg = load_config(args.config, kind=args.command, seed=args.seed)
    tol = load_tolerances(args.tolerances, cfg.kind)
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    out = Path(args.out or cfg.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        result = run(cfg, workers=args.workers)
    wall = time.perf_counter() - t0
    stem = cfg.kind.replace("-", "_")
    files = [write_csv(out / f"{stem}.csv", result.columns, result.rows).name]
    svg = plot_result(result, out / f"{stem}.svg")
    if svg is not None:
        files.append(svg.name)
    checks = evaluate(result, tol)
    files.append(write_json(out / f"{stem}_summary.json", {
        "summary": result.summary, "tolerances": tol,
        "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks]}).name)
    write_json(out / "manifest.json", {
        "experiment": cfg.kind, "config": cfg.to_dict(), "config_sha256": cfg.sha256(),
        "seed": cfg.seed, "version": __version__, "wall_time_s": wall,
        "workers": args.workers, "files": files})
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {cfg.kind}: {name} ({detail})")
    print(f"wrote {', '.join(files)} and manifest.json to {out}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return execute(args)
    except (ConfigError, InputError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericRangeError, StateInvariantError) as exc:
        print(f"numeric range error: {exc}", file=sys.stderr)
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
