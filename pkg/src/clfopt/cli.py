"""Command-line harness.

Subcommands:

  run    execute one discrete algorithm or one flow, write its trace
  sweep  run the whole algorithm set over the problem catalog and write a
         comparison table plus one trace file per cell
  check  run the finite-difference and property suites

Every flag mirrors a config-file key (flat `key = value` lines); flags
override the file.  Exit codes: 0 success, 2 invalid configuration,
3 run-time degeneracy (trace up to the failure is still written).
The default output directory is $CLFOPT_OUTPUT_DIR, else the working
directory; `--plot` renders PNG figures next to the delimited output.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from dataclasses import replace

import numpy as np
import scipy

from . import __version__
from . import algorithms, plots
from .config import (
    FLOW_ALGOS,
    RUN_ALGOS,
    ConfigError,
    RunConfig,
    build_run_config,
    make_blocks,
    make_flow_config,
    make_problem,
    make_schedule,
    parse_config_file,
)
from . import clf as _clf
from .controller import (
    ControlSet,
    DegenerateDriveError,
    MaxPrincipleController,
    NewtonController,
    NonSPDMetricError,
    SingularMetricError,
    max_principle_control,
    verify_maximizer,
)
from .costate import costate_from_gradient
from .flow import FlowTrace, run_flow
from .objectives import CATALOG_NAMES, finite_difference_check, make_benchmark
from .trace import IterationTrace, export_trace

_RUNTIME_ERRORS = (DegenerateDriveError, NonSPDMetricError, SingularMetricError,
                   FloatingPointError)

DEFAULT_SWEEP_PROBLEMS = ("diagonal_quadratic", "random_spd_quadratic",
                          "logistic_l2", "rosenbrock")
DEFAULT_SWEEP_ALGOS = ("newton", "gradient", "cd", "block_cd", "sign_cd",
                       "reference_gs", "flow_newton", "flow_clf")

_SWEEP_TABLE_COLUMNS = ("problem", "algorithm", "status", "iterations",
                        "converged", "final_energy", "final_grad_inf", "trace_file")


def _versions() -> dict:
    return {
        "clfopt": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {"config": cfg.echo(), "versions": _versions(), "seed": cfg.seed}
    meta.update(extra)
    return meta


def _output_dir() -> str:
    return os.environ.get("CLFOPT_OUTPUT_DIR", ".")


def _flow_to_iteration_trace(flow_trace: FlowTrace, dimension: int, metadata: dict) -> IterationTrace:
    return IterationTrace(dimension=dimension, records=list(flow_trace.records),
                          metadata=metadata)


def execute_run(cfg: RunConfig):
    """Run one configured cell.  Returns (trace, summary dict); raises the
    run-time degeneracy errors with a partial trace attached."""
    problem = make_problem(cfg)
    x0 = np.asarray(cfg.x0, dtype=float) if cfg.x0 is not None else problem.default_start

    if cfg.algo in FLOW_ALGOS:
        flow_cfg = make_flow_config(cfg, problem.oracle.dimension)
        try:
            flow_trace = run_flow(flow_cfg, problem, x0)
        except FloatingPointError as err:
            partial = getattr(err, "partial_trace", None)
            if partial is not None:
                err.partial_trace = _flow_to_iteration_trace(
                    partial, problem.oracle.dimension, _metadata(cfg, terminated_reason="overflow"))
            raise
        meta = _metadata(cfg, terminated_reason=flow_trace.terminated_reason)
        trace = _flow_to_iteration_trace(flow_trace, problem.oracle.dimension, meta)
        last = trace.records[-1]
        summary = {
            "iterations": len(trace.records) - 1,
            "converged": flow_trace.terminated_reason == "grad_tol",
            "final_energy": last.energy,
            "final_grad_inf": last.grad_inf,
            "degenerate": flow_trace.terminated_reason == "degenerate",
        }
        return trace, summary

    schedule = make_schedule(cfg)
    kwargs = dict(schedule=schedule, eps_inf=cfg.eps_inf, max_iter=cfg.max_iter)
    try:
        if cfg.algo == "reference_gs":
            result = algorithms.reference_gauss_southwell(problem, x0, **kwargs)
        elif cfg.algo == "block_cd":
            result = algorithms.run("block_cd", problem, x0,
                                    blocks=make_blocks(cfg, problem.oracle.dimension),
                                    tie_tolerance=cfg.tie_tol, **kwargs)
        else:
            result = algorithms.run(cfg.algo, problem, x0,
                                    tie_tolerance=cfg.tie_tol, **kwargs)
    except _RUNTIME_ERRORS as err:
        partial = getattr(err, "partial_trace", None)
        if partial is not None:
            partial.metadata = _metadata(cfg, terminated_reason="error")
        raise
    result.trace.metadata = _metadata(cfg)
    last = result.trace.records[-1]
    summary = {
        "iterations": result.iterations,
        "converged": result.converged,
        "final_energy": last.energy,
        "final_grad_inf": last.grad_inf,
        "degenerate": False,
    }
    return result.trace, summary


def _trace_path(cfg: RunConfig) -> str:
    if cfg.output:
        return cfg.output
    return os.path.join(_output_dir(), f"run_{cfg.problem}_{cfg.algo}.{cfg.format}")


def cmd_run(args) -> int:
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_run_config(file_values, _flag_overrides(args))
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    try:
        trace, summary = execute_run(cfg)
    except _RUNTIME_ERRORS as err:
        print(f"error: run degenerated: {err}", file=sys.stderr)
        partial = getattr(err, "partial_trace", None)
        if partial is not None:
            path = _trace_path(cfg)
            export_trace(partial, cfg.format, path)
            print(f"partial trace written to {path}", file=sys.stderr)
        return 3

    path = _trace_path(cfg)
    export_trace(trace, cfg.format, path)
    if cfg.plot:
        figure_path = os.path.splitext(path)[0] + ".png"
        plots.plot_trace(trace, figure_path)
        print(f"figure={figure_path}")
    print(
        f"problem={cfg.problem} algo={cfg.algo} iterations={summary['iterations']} "
        f"final_energy={summary['final_energy']:.6e} "
        f"final_grad_inf={summary['final_grad_inf']:.6e} "
        f"converged={summary['converged']} trace={path}"
    )
    return 3 if summary["degenerate"] else 0


def _cell_config(problem: str, algo: str, seed: int, fmt: str,
                 eps_inf: float, max_iter: int) -> RunConfig:
    cfg = build_run_config(overrides={
        "problem": problem, "algo": algo, "seed": seed, "format": fmt,
        "eps_inf": eps_inf, "max_iter": max_iter,
    })
    if problem == "random_spd_quadratic":
        cfg.dim = 8
    elif problem == "logistic_l2":
        cfg.dim = 5
    elif problem == "rosenbrock":
        cfg.dim = 2
    if algo == "sign_cd":
        # documented stall case: constant steps cannot vanish; alpha chosen
        # incommensurate with the starts so the lattice never hits the minimizer
        cfg.schedule, cfg.alpha = "constant", 0.003
    if algo in FLOW_ALGOS:
        cfg.t_final, cfg.step = 15.0, 0.01
    return cfg


def run_sweep(out_dir, seed: int = 0, fmt: str = "csv", eps_inf: float = 1e-8,
              max_iter: int = 20_000, problems=None, algos=None,
              plot: bool = False) -> list:
    """Run the algorithm set over the catalog; one trace file per cell plus
    a machine-readable comparison table.  Failures are recorded per cell and
    the sweep continues."""
    os.makedirs(out_dir, exist_ok=True)
    problems = tuple(problems or DEFAULT_SWEEP_PROBLEMS)
    algos = tuple(algos or DEFAULT_SWEEP_ALGOS)
    rows = []
    cell_traces = {}
    for problem in problems:
        for algo in algos:
            cfg = _cell_config(problem, algo, seed, fmt, eps_inf, max_iter)
            trace_file = f"trace_{problem}_{algo}.{fmt}"
            # echo the relative name so sweeps into different directories
            # stay bit-identical
            cfg.output = trace_file
            cell_path = os.path.join(out_dir, trace_file)
            row = {"problem": problem, "algorithm": algo, "status": "ok",
                   "iterations": 0, "converged": False,
                   "final_energy": float("nan"), "final_grad_inf": float("nan"),
                   "trace_file": trace_file}
            try:
                trace, summary = execute_run(cfg)
                export_trace(trace, fmt, cell_path)
                cell_traces[(problem, algo)] = trace
                row.update(iterations=summary["iterations"],
                           converged=summary["converged"],
                           final_energy=summary["final_energy"],
                           final_grad_inf=summary["final_grad_inf"])
                if summary["degenerate"]:
                    row["status"] = "degenerate"
            except _RUNTIME_ERRORS as err:
                row["status"] = f"error: {type(err).__name__}"
                partial = getattr(err, "partial_trace", None)
                if partial is not None:
                    export_trace(partial, fmt, cell_path)
            rows.append(row)

    table_path = os.path.join(out_dir, f"sweep.{fmt}")
    _write_sweep_table(rows, table_path, fmt, seed)
    if plot:
        plots.plot_sweep(rows, os.path.join(out_dir, "sweep_iterations.png"))
        for problem in problems:
            traces = {a: t for (p, a), t in cell_traces.items() if p == problem}
            if traces:
                plots.plot_convergence(problem, traces,
                                       os.path.join(out_dir, f"convergence_{problem}.png"))
    return rows


def _write_sweep_table(rows, path, fmt: str, seed: int) -> None:
    if fmt == "json":
        payload = {"seed": seed, "versions": _versions(), "rows": rows}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps({"seed": seed, "versions": _versions()}) + "\n")
        fh.write(",".join(_SWEEP_TABLE_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in _SWEEP_TABLE_COLUMNS:
                v = row[col]
                cells.append(format(v, ".17g") if isinstance(v, float) else str(v))
            fh.write(",".join(cells) + "\n")


def cmd_sweep(args) -> int:
    out_dir = args.out_dir or os.path.join(_output_dir(), "sweep")
    try:
        problems = args.problems.split(",") if args.problems else None
        algos = args.algos.split(",") if args.algos else None
        rows = run_sweep(out_dir, seed=args.seed, fmt=args.format,
                         eps_inf=args.eps_inf, max_iter=args.max_iter,
                         problems=problems, algos=algos, plot=args.plot)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    header = f"{'problem':<22} {'algorithm':<14} {'status':<22} {'iters':>8} {'converged':>9} {'final_grad_inf':>15}"
    print(header)
    for row in rows:
        print(f"{row['problem']:<22} {row['algorithm']:<14} {row['status']:<22} "
              f"{row['iterations']:>8} {str(row['converged']):>9} "
              f"{row['final_grad_inf']:>15.3e}")
    print(f"table={os.path.join(out_dir, 'sweep.' + args.format)}")
    return 0


def cmd_check(args) -> int:
    rng_seed = args.seed
    failures = 0

    def report(ok: bool, label: str, detail: str) -> None:
        nonlocal failures
        if not ok:
            failures += 1
        print(f"{'ok  ' if ok else 'FAIL'} {label}: {detail}")

    for name in CATALOG_NAMES:
        problem = make_benchmark(name, **({"seed": rng_seed} if name in
                                          ("random_spd_quadratic", "logistic_l2") else {}))
        rng = np.random.default_rng(rng_seed)
        worst_g = worst_h = 0.0
        for _ in range(3):
            x = problem.default_start + 0.5 * rng.standard_normal(problem.oracle.dimension)
            rep = finite_difference_check(problem.oracle, x)
            worst_g = max(worst_g, rep.gradient_error)
            worst_h = max(worst_h, rep.hessian_error)
        report(worst_g < 1e-5 and worst_h < 1e-4, f"derivatives {name}",
               f"grad_err={worst_g:.2e} hess_err={worst_h:.2e}")

    rng = np.random.default_rng(rng_seed)
    all_member = True
    for kind in _clf.KINDS:
        for _ in range(50):
            lam = rng.standard_normal(6)
            blocks = _clf.BlockStructure(sizes=(2, 2, 2), matrices=tuple(np.eye(2) for _ in range(3)))
            lyap = _clf.LyapunovFunction(kind, blocks=blocks if kind == "block_max" else None)
            sub = _clf.unbiased_subgradient(lyap, lam)
            all_member &= _clf.subdifferential_membership(lyap, lam, sub.direction)
    report(all_member, "subgradients", "unbiased selections lie in the subdifferential")

    problem = make_benchmark("diagonal_quadratic", diag=(1.0, 4.0))
    worst = 0.0
    for kind in ("max_squares", "inf_norm", "smooth_quadratic"):
        controller = MaxPrincipleController(clf=_clf.LyapunovFunction(kind))
        x = np.array([0.3, -1.1])
        ev = controller.evaluate(problem.oracle, x)
        lam_u = np.linalg.norm(ev.lambda_x) * np.linalg.norm(ev.u)
        worst = max(worst, abs(ev.hamiltonian) / (1.0 + lam_u))
    report(worst <= 1e-12, "hamiltonian", f"max normalized |H| = {worst:.2e}")

    rng = np.random.default_rng(rng_seed)
    all_max = True
    for trial in range(10):
        prob = make_benchmark("random_spd_quadratic", dim=4, seed=rng_seed + trial)
        x = prob.default_start
        sub = _clf.unbiased_subgradient(
            _clf.LyapunovFunction("max_squares"),
            costate_from_gradient(prob.oracle, x).lambda_x)
        cset = ControlSet(metric_kind="hessian")
        out = max_principle_control(cset, prob.oracle, x, sub)
        all_max &= verify_maximizer(cset, prob.oracle, x, sub, out.u,
                                    samples=2000, seed=trial)
    report(all_max, "maximizer", "sampled controls never beat the computed control")

    return 0 if failures == 0 else 1


def _flag_overrides(args) -> dict:
    keys = ("problem", "dim", "seed", "diag", "n_samples", "reg", "algo",
            "clf_kind", "blocks", "metric", "delta", "ridge", "schedule",
            "alpha", "shrink", "sufficient_decrease", "eps_inf", "tie_tol",
            "max_iter", "x0", "t_final", "step", "integrator", "nu0",
            "output", "format")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.plot:
        overrides["plot"] = True
    return overrides


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", choices=CATALOG_NAMES)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--diag", help="comma-separated diagonal, e.g. 1,4")
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--reg", type=float)
    p.add_argument("--algo", choices=RUN_ALGOS)
    p.add_argument("--clf", dest="clf_kind", choices=_clf.KINDS)
    p.add_argument("--blocks", help="comma-separated block sizes, e.g. 2,2")
    p.add_argument("--metric", choices=("hessian", "identity"))
    p.add_argument("--delta", type=float)
    p.add_argument("--ridge", type=float)
    p.add_argument("--schedule", choices=("constant", "backtracking", "diminishing"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--shrink", type=float)
    p.add_argument("--sufficient-decrease", dest="sufficient_decrease", type=float)
    p.add_argument("--eps-inf", dest="eps_inf", type=float)
    p.add_argument("--tie-tol", dest="tie_tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--x0", help="comma-separated start point")
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--step", type=float, help="flow integrator step")
    p.add_argument("--integrator", choices=("rk4", "euler"))
    p.add_argument("--nu0", type=float)
    p.add_argument("--output", help="trace file path")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--plot", action="store_true", help="render a PNG next to the trace")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="clfopt",
        description="Derive and run optimization algorithms by dissipating "
                    "control Lyapunov functions of the costate.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one algorithm or flow and write its trace")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="compare the algorithm set on the catalog")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out-dir", dest="out_dir")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--eps-inf", dest="eps_inf", type=float, default=1e-8)
    p_sweep.add_argument("--max-iter", dest="max_iter", type=int, default=20_000)
    p_sweep.add_argument("--problems", help="comma-separated subset of the catalog")
    p_sweep.add_argument("--algos", help="comma-separated subset of the algorithms")
    p_sweep.add_argument("--plot", action="store_true")

    p_check = sub.add_parser("check", help="finite-difference and property suites")
    p_check.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_check(args)


if __name__ == "__main__":
    sys.exit(main())
