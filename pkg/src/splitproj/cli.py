"""Command-line interface.

Subcommands::

    splitproj exp1        rate-bound sweep over a relaxation grid
    splitproj exp2        iterations-to-accuracy sweep
    splitproj exp3        error decay at tuned relaxation values
    splitproj three-lines rate bounds for three concurrent lines
    splitproj solve       project a point onto an intersection

Grid arguments use ``start:step:end`` (inclusive end).  A flat ``key=value``
config file can seed any option; explicit flags win.  Experiment commands
write a CSV via ``--out`` and, unless ``--no-figures`` is given, a PNG with
the same stem next to it.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import ExperimentConfig, run_exp1, run_exp2, run_exp3, run_solve, run_three_lines
from .linalg import load_matrix
from .schemes import KINDS, AffineSubspace, InconsistentAffineError
from .subspaces import load_subspace

_EXPERIMENT_RUNNERS = {
    "exp1": run_exp1,
    "exp2": run_exp2,
    "exp3": run_exp3,
    "three-lines": run_three_lines,
}


def parse_grid(spec: str) -> tuple[float, ...]:
    """Parse ``start:step:end`` into an inclusive, strictly increasing grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:step:end, got {spec!r}")
    start, step, end = (float(p) for p in parts)
    if step <= 0 or end < start:
        raise ValueError(f"grid must increase: {spec!r}")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(count))


def parse_config_file(path: str) -> dict[str, str]:
    """Read a flat key=value file; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


_CONFIG_PARSERS = {
    "seed": int,
    "dim": int,
    "subspace_dims": lambda s: tuple(int(x) for x in s.split(",")),
    "instances": int,
    "starts": int,
    "lambda_grid": parse_grid,
    "theta_grid": parse_grid,
    "epsilon": float,
    "max_iters": int,
    "algorithms": lambda s: tuple(x.strip() for x in s.split(",")),
    "out": str,
    "paper_scale": lambda s: s.lower() in ("1", "true", "yes", "on"),
}


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset CLI options from the --config file, if any."""
    if not getattr(args, "config", None):
        return
    raw = parse_config_file(args.config)
    for key, value in raw.items():
        if key == "experiment":
            continue
        if key not in _CONFIG_PARSERS:
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None or (key == "paper_scale" and not args.paper_scale):
            setattr(args, key, _CONFIG_PARSERS[key](value))


def _add_common(parser: argparse.ArgumentParser, with_theta: bool = False) -> None:
    parser.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    parser.add_argument("--dim", type=int, default=None, help="ambient dimension (default 6)")
    parser.add_argument("--subspace-dims", dest="subspace_dims", default=None,
                        type=lambda s: tuple(int(x) for x in s.split(",")),
                        help="comma-separated subspace dimensions (default from --dim)")
    parser.add_argument("--instances", type=int, default=None,
                        help="number of random instances (per-experiment default)")
    parser.add_argument("--starts", type=int, default=None,
                        help="number of starting points (per-experiment default)")
    parser.add_argument("--lambda-grid", dest="lambda_grid", type=parse_grid, default=None,
                        help="relaxation grid start:step:end")
    if with_theta:
        parser.add_argument("--theta-grid", dest="theta_grid", type=parse_grid, default=None,
                            help="line-angle grid start:step:end, radians in (0, pi/2)")
    parser.add_argument("--epsilon", type=float, default=None, help="target accuracy (1e-6)")
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None,
                        help="iteration cap (10000)")
    parser.add_argument("--algorithms", default=None,
                        type=lambda s: tuple(x.strip() for x in s.split(",")),
                        help=f"comma-separated subset of {','.join(KINDS)}")
    parser.add_argument("--out", default=None, help="output CSV path (default stdout)")
    parser.add_argument("--paper-scale", dest="paper_scale", action="store_true", default=False,
                        help="use full published instance/start counts")
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--no-figures", dest="figures", action="store_false", default=True,
                        help="skip PNG rendering next to the CSV")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.dim is not None:
        kwargs["d"] = args.dim
    if args.subspace_dims is not None:
        kwargs["subspace_dims"] = args.subspace_dims
    if args.instances is not None:
        kwargs["n_instances"] = args.instances
    if args.starts is not None:
        kwargs["n_starts"] = args.starts
    if args.lambda_grid is not None:
        kwargs["lambda_grid"] = args.lambda_grid
    if getattr(args, "theta_grid", None) is not None:
        kwargs["theta_grid"] = args.theta_grid
    if args.epsilon is not None:
        kwargs["epsilon"] = args.epsilon
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    if args.algorithms is not None:
        kwargs["algorithms"] = args.algorithms
    kwargs["paper_scale"] = bool(args.paper_scale)
    return ExperimentConfig(**kwargs)


def _run_experiment(name: str, args: argparse.Namespace) -> int:
    _merge_config(args)
    config = _config_from_args(args)
    table = _EXPERIMENT_RUNNERS[name](config)
    if args.out:
        table.save(args.out)
        print(f"wrote {args.out} ({len(table.rows)} rows)")
        if args.figures:
            from . import plots  # deferred: matplotlib import is slow

            figure_path = str(Path(args.out).with_suffix(".png"))
            plots.RENDERERS[name](table, figure_path)
            print(f"wrote {figure_path}")
    else:
        sys.stdout.write(table.to_text())
    return 0


def _add_solve(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("solve", help="project a point onto an intersection of subspaces")
    p.add_argument("--subspace", action="append", required=True, metavar="FILE",
                   help="matrix text file of basis columns (repeat 3+ times)")
    p.add_argument("--projector", action="store_true", default=False,
                   help="interpret subspace files as projector matrices")
    p.add_argument("--anchor", action="append", default=None, metavar="FILE",
                   help="per-subspace anchor point for affine problems (repeat)")
    p.add_argument("--start", required=True, metavar="FILE",
                   help="matrix text file holding the point to project (1 column or 1 row)")
    p.add_argument("--algorithm", default="ryu", choices=KINDS)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=10_000)
    p.add_argument("--out", default=None, help="optional CSV path for the result")


def _load_vector(path: str) -> np.ndarray:
    m = load_matrix(path)
    if 1 not in m.shape:
        raise ValueError(f"{path}: expected a single row or column, got {m.shape}")
    return m.reshape(-1)


def _run_solve(args: argparse.Namespace) -> int:
    x0 = _load_vector(args.start)
    subspaces = [load_subspace(f, ambient_dim=x0.shape[0], projector=args.projector)
                 for f in args.subspace]
    if args.anchor:
        if len(args.anchor) != len(subspaces):
            raise ValueError("need exactly one --anchor per --subspace")
        subspaces = [AffineSubspace(parallel=s, anchor=_load_vector(f))
                     for s, f in zip(subspaces, args.anchor)]
    result = run_solve(subspaces, x0, algorithm=args.algorithm, lam=args.lam,
                       epsilon=args.epsilon, max_iters=args.max_iters)
    print(f"projection ({result.algorithm}):", " ".join(f"{v:.12g}" for v in result.point))
    print("direct projection:        ", " ".join(f"{v:.12g}" for v in result.direct))
    print(f"distance: {result.distance:.6e}  iterations: {result.iterations}  "
          f"converged: {str(result.converged).lower()}")
    if args.out:
        result.to_table().save(args.out)
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitproj",
        description="Splitting schemes for projecting onto intersections of subspaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, runner_help in (
        ("exp1", "rate-bound sweep over a relaxation grid"),
        ("exp2", "iterations-to-accuracy sweep"),
        ("exp3", "error decay at tuned relaxation values"),
        ("three-lines", "rate bounds for three concurrent lines in the plane"),
    ):
        p = sub.add_parser(name, help=runner_help)
        _add_common(p, with_theta=(name == "three-lines"))
    _add_solve(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _run_solve(args)
        return _run_experiment(args.command, args)
    except (ValueError, InconsistentAffineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
