"""Experiment command line: assemble, solve, train, and benchmark grids.

Subcommands
-----------
reproduce  run a benchmark grid (t2 / t3 / t4 / helmholtz-sweep) to CSV
train      fit a weight-schedule network (or the hybrid model) and save it
solve      solve one problem instance with a chosen method
assemble   build an operator and export it in Matrix Market form

Configuration may come from an INI file with one section per subcommand;
command-line flags override file values. Exit codes: 0 success, 1 solver
divergence, 2 configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import sys
import time

import numpy as np

from .data import sample_dataset
from .fgmres import FgmresConfig, fgmres
from .metanet import MetaNet, meta_forward
from .multigrid import build_hierarchy, v_cycle
from .problems import (AnisotropicProblem, HelmholtzProblem,
                       assemble_anisotropic, assemble_helmholtz)
from .richardson import DivergenceError, solve_stationary
from .schedules import (WeightSchedule, chebyshev_schedule,
                        chebyshev_semi_schedule)
from .sparse import write_matrix_market
from .spectral import dense_spectral_bounds
from .training import TrainConfig, make_preconditioner, train_ns

CSV_COLUMNS = ["table", "eps", "theta", "n", "method", "m", "precond",
               "seed", "inner_iters", "outer_iters", "converged",
               "rel_residual", "wall_ms"]

THETA_GRID = [0.0, np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3,
              5 * np.pi / 6, np.pi]
N_GRID_FULL = [32, 64, 128, 256, 512]
EPS_GRID = [1.0, 1e-2, 1e-4, 1e-6]

DESK_N_LIMIT = 128
DESK_TRAIN_LIMIT = 500


class ConfigError(ValueError):
    pass


# -- configuration plumbing ---------------------------------------------

def _load_config(path, section):
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if section not in parser:
        return {}
    return dict(parser[section])


def _resolve(args, parser):
    """Fill argparse defaults from the config file, CLI flags winning."""
    file_values = _load_config(args.config, args.command)
    for key, raw in file_values.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ConfigError(f"unknown config key {key!r} in "
                              f"[{args.command}]")
        if parser.get_default(dest) == getattr(args, dest):
            current = getattr(args, dest)
            if isinstance(current, bool):
                setattr(args, dest, raw.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(args, dest, int(raw))
            elif isinstance(current, float):
                setattr(args, dest, float(raw))
            else:
                setattr(args, dest, raw)
    return args


def _print_config(args):
    print(f"[{args.command}]")
    for key in sorted(vars(args)):
        if key in ("command", "print_config", "func"):
            continue
        print(f"{key.replace('_', '-')} = {getattr(args, key)}")


# -- shared solve helpers ------------------------------------------------

def _schedule_for(args, A):
    """Resolve the weight source into a WeightSchedule."""
    source = args.weights
    if source == "chebyshev":
        b = dense_spectral_bounds(A)
        return chebyshev_schedule(b.lambda_max, b.lambda_min, args.m)
    if source == "semi":
        b = dense_spectral_bounds(A)
        return chebyshev_semi_schedule(b.lambda_max, args.m,
                                       alpha=args.semi_alpha)
    if source == "literal":
        omega = np.array([float(x) for x in args.omega.split(",")])
        return WeightSchedule(omega=omega)
    # checkpoint path
    net = MetaNet.load(source)
    prob = _make_problem(args)
    return meta_forward(net, prob.mu)


def _make_problem(args):
    if args.problem == "anisotropic":
        return AnisotropicProblem(epsilon=args.eps, theta=args.theta,
                                  n=args.n)
    return HelmholtzProblem(angular_frequency=2 * np.pi * args.frequency,
                            n=args.n)


def _assemble(prob):
    if isinstance(prob, AnisotropicProblem):
        return assemble_anisotropic(prob)
    return assemble_helmholtz(prob)


# -- reproduce ----------------------------------------------------------

def _grid_cells(table, args):
    """Deterministic cell list for a benchmark table."""
    cells = []
    seeds = list(range(args.seeds))
    n_fixed = args.n or 64
    if table == "t2":
        for eps in EPS_GRID:
            for method in ("cheb", "semi", "learned"):
                for seed in seeds:
                    cells.append(dict(table="t2", eps=eps, theta=0.0,
                                      n=n_fixed, method=method, seed=seed))
    elif table == "t3":
        for theta in THETA_GRID:
            for method in ("cheb", "learned"):
                for seed in seeds:
                    cells.append(dict(table="t3", eps=1e-2, theta=theta,
                                      n=n_fixed, method=method, seed=seed))
    elif table == "t4":
        ns = [n for n in N_GRID_FULL if args.full or n <= DESK_N_LIMIT]
        for n in ns:
            for method in ("cheb", "learned"):
                for seed in seeds:
                    cells.append(dict(table="t4", eps=1e-2, theta=0.0,
                                      n=n, method=method, seed=seed))
    elif table == "helmholtz-sweep":
        freqs = [3.0, 5.0] if not args.full else [3.0, 5.0, 10.0, 20.0]
        for freq in freqs:
            for method in ("fgmres-identity", "fgmres-vcycle"):
                for seed in seeds:
                    cells.append(dict(table="helmholtz-sweep", eps="",
                                      theta=freq, n=n_fixed, method=method,
                                      seed=seed))
    else:
        raise ConfigError(f"unknown table id {table!r}")
    return cells


def _run_cell(cell, args, cache):
    """One benchmark grid cell -> CSV row dict."""
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(table=cell["table"], eps=cell["eps"], theta=cell["theta"],
               n=cell["n"], method=cell["method"], m=args.m, precond="none",
               seed=cell["seed"])
    rng = np.random.default_rng(cell["seed"])
    t0 = time.perf_counter()
    if cell["table"] == "helmholtz-sweep":
        prob = HelmholtzProblem(angular_frequency=2 * np.pi * cell["theta"],
                                n=cell["n"])
        key = ("H", cell["n"], cell["theta"])
        if key not in cache:
            A = _assemble(prob)
            sched = WeightSchedule(
                omega=np.full(5, 0.8 / (8.0 * cell["n"] ** 2)),
                alpha=np.full(5, 0.3), variant="nag")
            h = build_hierarchy(A, cell["n"], coarsest=16, schedules=sched)
            cache[key] = (A, h)
        A, h = cache[key]
        f = rng.standard_normal(A.ncols) + 1j * rng.standard_normal(A.ncols)
        pre = (lambda r: v_cycle(h, r)) \
            if cell["method"] == "fgmres-vcycle" else None
        row["precond"] = "vcycle-nag5" \
            if cell["method"] == "fgmres-vcycle" else "identity"
        _, rep = fgmres(A, f, precond_apply=pre,
                        cfg=FgmresConfig(restart=20, tol=args.tol,
                                         max_outer=200))
    else:
        prob = AnisotropicProblem(epsilon=cell["eps"], theta=cell["theta"],
                                  n=cell["n"])
        key = ("A", cell["n"], cell["eps"], cell["theta"])
        if key not in cache:
            A = _assemble(prob)
            b = dense_spectral_bounds(A)
            cache[key] = (A, b)
        A, b = cache[key]
        if cell["method"] == "cheb":
            sched = chebyshev_schedule(b.lambda_max, b.lambda_min, args.m)
        elif cell["method"] == "semi":
            sched = chebyshev_semi_schedule(b.lambda_max, args.m)
        else:  # learned
            if not args.checkpoint:
                row["method"] = "skipped"
                return row
            net = cache.setdefault(("net", args.checkpoint),
                                   MetaNet.load(args.checkpoint))
            sched = meta_forward(net, prob.mu)
        f = rng.standard_normal(A.ncols)
        _, rep = solve_stationary(A, f, sched, tol=args.tol,
                                  max_outer=args.max_outer)
    row.update(inner_iters=rep.inner_iterations,
               outer_iters=rep.iterations, converged=rep.converged,
               rel_residual=f"{rep.final_relative_residual:.6e}",
               wall_ms=f"{1e3 * (time.perf_counter() - t0):.1f}")
    return row


def cmd_reproduce(args):
    if args.full:
        print("# --full grid requested; expect hours of CPU time at the "
              "largest sizes", file=sys.stderr)
    cells = _grid_cells(args.table, args)
    cache = {}
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS,
                                quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for cell in cells:
            writer.writerow(_run_cell(cell, args, cache))
    finally:
        if args.output:
            out.close()
    return 0


# -- train / solve / assemble -------------------------------------------

def cmd_train(args):
    if args.count > DESK_TRAIN_LIMIT and not args.full:
        raise ConfigError(
            f"training-set size {args.count} above the desk-scale limit "
            f"{DESK_TRAIN_LIMIT}; pass --full to proceed")
    ds = sample_dataset(args.problem, args.count, seed=args.seed, n=args.n)
    if args.model == "schedule":
        cfg = TrainConfig(m=args.m, unroll=args.unroll,
                          n_epochs=args.epochs, batch_size=args.batch_size,
                          learning_rate=args.lr, seed=args.seed,
                          variant=args.variant, precond=args.precond)
        net = train_ns(cfg, ds)
        net.save(args.output, extra_metadata={"epochs": args.epochs,
                                              "unroll": args.unroll})
        best = net.training_history["val"][net.best_epoch]
        print(f"saved {args.output} (best validation loss {best:.4g} at "
              f"epoch {net.best_epoch})")
    else:
        from .fns import FnsTrainConfig, train_fns_lite
        cfg = FnsTrainConfig(m=args.m, unroll=max(1, args.unroll // 10),
                             n_epochs=args.epochs,
                             batch_size=args.batch_size,
                             learning_rate=args.lr, seed=args.seed)
        model = train_fns_lite(cfg, ds)
        model.save(args.output)
        print(f"saved {args.output}.net and {args.output}.corr")
    return 0


def cmd_solve(args):
    prob = _make_problem(args)
    A = _assemble(prob)
    print(f"# stopping rule: relative residual < {args.tol:g}")
    sched = _schedule_for(args, A)
    P = make_preconditioner(args.precond, A)
    f = np.random.default_rng(args.seed).standard_normal(A.ncols)
    if A.is_complex:
        f = f + 1j * np.random.default_rng(args.seed + 1).standard_normal(A.ncols)
    u, rep = solve_stationary(A, f, sched, P=P, tol=args.tol,
                              max_outer=args.max_outer)
    print(f"converged={rep.converged} outer={rep.iterations} "
          f"inner={rep.inner_iterations} "
          f"rel_residual={rep.final_relative_residual:.3e} "
          f"wall={rep.wall_time:.3f}s")
    if args.output:
        np.save(args.output, u)
    return 0 if rep.converged else 1


def cmd_assemble(args):
    prob = _make_problem(args)
    A = _assemble(prob)
    print(f"assembled {args.problem} operator: {A.nrows}x{A.ncols}, "
          f"{A.nnz} nonzeros")
    if args.export:
        write_matrix_market(args.export, A)
        print(f"wrote {args.export}")
    return 0


# -- parser --------------------------------------------------------------

def _add_problem_flags(p):
    p.add_argument("--problem", choices=["anisotropic", "helmholtz"],
                   default="anisotropic")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--frequency", type=float, default=5.0,
                   help="Helmholtz frequency (angular frequency / 2 pi)")
    p.add_argument("--n", type=int, default=64)


def build_parser():
    subparsers = {}
    parser = argparse.ArgumentParser(
        prog="richlab", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=None,
                        help="INI file with one section per subcommand")
    parser.add_argument("--print-config", action="store_true",
                        help="dump the fully resolved configuration and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", help="run a benchmark grid to CSV")
    p.add_argument("table", choices=["t2", "t3", "t4", "helmholtz-sweep"])
    p.add_argument("--n", type=int, default=None,
                   help="grid-size override for fixed-size tables")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--max-outer", type=int, default=100_000)
    p.add_argument("--checkpoint", default=None,
                   help="schedule-network checkpoint for learned rows")
    p.add_argument("--output", default=None, help="CSV path (default stdout)")
    p.add_argument("--full", action="store_true",
                   help="full-scale grid instead of the desk-scale budget")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("train", help="fit and save a model")
    p.add_argument("--model", choices=["schedule", "fns"], default="schedule")
    p.add_argument("--problem", choices=["anisotropic", "helmholtz"],
                   default="anisotropic")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--variant",
                   choices=["plain", "mom", "nag", "nagex"], default="plain")
    p.add_argument("--precond", choices=["ssor", "jacobi", "gs"],
                   default=None)
    p.add_argument("--unroll", type=int, default=50)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full", action="store_true")
    p.add_argument("--output", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("solve", help="solve one instance")
    _add_problem_flags(p)
    p.add_argument("--weights", default="chebyshev",
                   help="chebyshev | semi | literal | <checkpoint path>")
    p.add_argument("--semi-alpha", type=float, default=1.0 / 30.0)
    p.add_argument("--omega", default="0.1",
                   help="comma list for --weights literal")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--precond", choices=["ssor", "jacobi", "gs"],
                   default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-outer", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="save the iterate (.npy)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("assemble", help="assemble and optionally export")
    _add_problem_flags(p)
    p.add_argument("--export", default=None, help="Matrix Market path")
    p.set_defaults(func=cmd_assemble)

    subparsers.update(sub.choices)
    return parser, subparsers


def main(argv=None):
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args, subparsers[args.command])
        if args.print_config:
            _print_config(args)
            return 0
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
