"""Command-line entry point: dualflow <command> [--config run.ini] [flags]."""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from dualflow.burgers_exact import dual_measures, entropy_solution, shock_free_substitute, verify_proposition
from dualflow.cli.config import COMMANDS, SUBSOLUTIONS, RunConfig, load_config
from dualflow.cli.io import profiles_frame, write_report, write_table, write_tensor_csv
from dualflow.config import LOG_LEVEL, VERIFY_STENCIL_ORDER
from dualflow.consistency import build_optimal_pair, verify_certificate
from dualflow.dafermos import compare
from dualflow.dual_solver import PrimalPair, SolverConfig, solve
from dualflow.errors import ConsistencyError, DualflowError, PreconditionError
from dualflow.framework import WeightProfile, adapt_weight, conservativity_residual
from dualflow.grid import DifferenceOperators, MatrixField, SpaceTimeGrid
from dualflow.models import Scenario, TrigSeries, get_model, lowner_convexity_defect, manufacture_strong_solution
from dualflow.models.manufacture import acoustic_initial

logger = logging.getLogger("dualflow.cli")

CONSERVATIVITY_TOLERANCE = 1e-5
CONVEXITY_TOLERANCE = 1e-10


def _version() -> str:
    from dualflow import __version__

    return __version__


def build_model(cfg: RunConfig):
    model = cfg["model"]
    return get_model(model["name"], model["pressure"], model["rho_min"], model["s"], **cfg.pressure_params())


def build_grid(cfg: RunConfig, scale: int = 1) -> SpaceTimeGrid:
    grid = cfg["grid"]
    return SpaceTimeGrid(grid["Nx"] * scale, grid["Nt"] * scale, grid["T"])


def build_scenario(cfg: RunConfig, model) -> Scenario:
    scenario = cfg["scenario"]
    kind = scenario["kind"] or ("burgers_characteristics" if model.name == "burgers" else "acoustic")
    return Scenario(
        kind,
        cfg["grid"]["T"],
        TrigSeries.parse(scenario["v0"]),
        scenario["amplitude"],
        scenario["rho_bar"],
        scenario["q_bar"],
    )


def initial_datum(cfg: RunConfig, model, grid: SpaceTimeGrid, ops: DifferenceOperators) -> np.ndarray:
    """v0 on the grid, consistent with the stencils of ops."""
    scenario = build_scenario(cfg, model)
    if scenario.kind == "stationary_state":
        if model.name == "burgers":
            return np.zeros((grid.Nx, 1))
        return model.from_primitive(np.full(grid.Nx, scenario.q_bar), np.full(grid.Nx, scenario.rho_bar), ops)
    if model.name == "burgers":
        v0 = scenario.v0 if scenario.kind == "burgers_characteristics" else TrigSeries.parse("sin:1").scaled(scenario.amplitude)
        return v0(grid.x)[:, None]
    return acoustic_initial(model, scenario, grid.x, ops)


def weight_for(cfg: RunConfig, model, grid: SpaceTimeGrid, order: int):
    """
    The configured weight, plus the strong solution when gamma is adapted.

    Returns:
        Tuple (WeightProfile, StrongSolutionRecord or None).
    """
    if not cfg.adapt:
        return WeightProfile.exponential(cfg.gamma, grid.T), None
    record = manufacture_strong_solution(model, build_scenario(cfg, model), grid.Nx, grid.Nt, order)
    return adapt_weight(model, record), record


def solver_config(cfg: RunConfig, progress: bool = None) -> SolverConfig:
    solver = cfg["solver"]
    return SolverConfig(
        tau=solver["tau"],
        sigma=solver["sigma"],
        max_iterations=solver["max_iterations"],
        gap_rel=solver["gap_rel"],
        feas_abs=solver["feas_abs"],
        power_iterations=solver["power_iterations"],
        check_every=solver["check_every"],
        order=solver["order"],
        progress=solver["progress"] if progress is None else progress,
    )


def _solve_on(cfg: RunConfig, model, grid: SpaceTimeGrid, progress: bool = None):
    config = solver_config(cfg, progress)
    weight, record = weight_for(cfg, model, grid, config.order)
    if record is not None:
        v0 = record.v.values[0]
    else:
        v0 = initial_datum(cfg, model, grid, DifferenceOperators.for_grid(grid, config.order))
    primal, dual, report = solve(model, grid, weight, v0, config)
    return weight, v0, primal, dual, report


def run_solve(cfg: RunConfig, out: Path, model) -> dict:
    grid = build_grid(cfg)
    weight, _, primal, dual, report = _solve_on(cfg, model, grid)
    write_tensor_csv(out / "v.csv", "v", grid.t, grid.x, primal.v.values, model.labels)
    write_tensor_csv(out / "M.csv", "M", grid.t, grid.x, primal.M.values)
    write_tensor_csv(out / "E.csv", "E", grid.t, grid.x, dual.E, model.labels)
    write_tensor_csv(out / "B.csv", "B", grid.t, grid.x, dual.B)
    write_table(out / "entropy.csv", report.entropy.to_frame())
    write_table(out / "history.csv", report.history)
    fields = {f"v_{label}": primal.v.values[..., i] for i, label in enumerate(model.labels)}
    write_table(out / "profiles.csv", profiles_frame(grid.x, grid.t, fields, cfg.times))
    return {"weight": weight.describe(), "solver": solver_config(cfg).describe(), "report": report.to_dict()}


def run_consistency(cfg: RunConfig, out: Path, model) -> dict:
    grid = build_grid(cfg)
    record = manufacture_strong_solution(model, build_scenario(cfg, model), grid.Nx, grid.Nt, VERIFY_STENCIL_ORDER)
    weight = adapt_weight(model, record) if cfg.adapt else WeightProfile.exponential(cfg.gamma, grid.T)
    pair = build_optimal_pair(model, record, weight)
    certificate = verify_certificate(model, record, weight, pair)
    write_tensor_csv(out / "E.csv", "E_plus", grid.t, grid.x, pair.E, model.labels)
    write_tensor_csv(out / "B.csv", "B_plus", grid.t, grid.x, pair.B)
    write_table(out / "entropy.csv", record.entropy(model).to_frame())
    fields = {f"v_{label}": record.v.values[..., i] for i, label in enumerate(model.labels)}
    write_table(out / "profiles.csv", profiles_frame(grid.x, grid.t, fields, cfg.times))
    return {"weight": weight.describe(), "scenario": record.meta, "certificate": certificate.to_dict()}


def run_substitute(cfg: RunConfig, out: Path, model) -> dict:
    if model.name != "burgers":
        raise PreconditionError(f"burgers-substitute needs the Burgers model, not {model.name}")
    grid = build_grid(cfg)
    v0 = TrigSeries.parse(cfg["scenario"]["v0"])
    sub = shock_free_substitute(v0, grid.T, cfg["scenario"]["samples"])
    residuals = verify_proposition(sub, grid)
    measures = dual_measures(sub, grid)
    trace = sub.evaluate(grid.T, grid.x)
    entropy_T = entropy_solution(v0, grid.T, grid.x, cfg["scenario"]["samples"])
    write_tensor_csv(out / "v.csv", "vT", grid.t, grid.x, measures.v)
    write_tensor_csv(out / "rho.csv", "rhoT", grid.t, grid.x, measures.rho)
    write_tensor_csv(out / "q.csv", "q", grid.t, grid.x, measures.q)
    write_table(out / "profiles.csv", profiles_frame(grid.x, grid.t, {"vT": measures.v, "rhoT": measures.rho}, cfg.times))
    write_table(out / "trace.csv", pd.DataFrame({"x": grid.x, "substitute": trace, "entropy": entropy_T}))
    return {
        "v0": str(v0),
        "gaps": [list(gap) for gap in sub.gaps],
        "residuals": residuals,
        "trace_l1": float(np.sum(np.abs(trace - entropy_T)) * grid.dx),
    }


def _subsolution(cfg: RunConfig, model, record, order: int):
    kind = cfg["scenario"]["subsolution"]
    v = record.v.values
    if kind == "solver":
        weight = adapt_weight(model, record, order=order)
        primal, _, report = solve(model, record.grid, weight, v[0], solver_config(cfg))
        return primal, {"solver": report.to_dict()}
    M = model.F(v)
    if kind == "inflated":
        M = M + cfg["scenario"]["inflate"] * np.eye(model.N)
    return PrimalPair(record.v, MatrixField(M)), {}


def run_dafermos(cfg: RunConfig, out: Path, model) -> dict:
    grid = build_grid(cfg)
    order = cfg["solver"]["order"]
    record = manufacture_strong_solution(model, build_scenario(cfg, model), grid.Nx, grid.Nt, order)
    sub, extra = _subsolution(cfg, model, record, order)
    scenario = cfg["scenario"]
    t1 = grid.T if scenario["t1"] is None else scenario["t1"]
    feas = cfg["solver"]["feas_abs"]
    verdict = compare(
        model, record, sub, scenario["t0"], t1, margin=scenario["margin"], feasibility_tol=feas, relaxation_tol=feas, order=order, T1=scenario["T1"]
    )
    K = record.entropy(model).K_samples
    write_table(out / "entropy.csv", pd.DataFrame({"t": grid.t, "K": K, "K_sub": sub.entropy(grid).K_samples}))
    write_table(out / "escalation.csv", verdict.to_frame())
    return {"subsolution": scenario["subsolution"], "verdict": verdict.to_dict(), **extra}


def _random_datum(model, rng: np.random.Generator, ops: DifferenceOperators, x: np.ndarray) -> np.ndarray:
    def series():
        total = np.zeros_like(x)
        for k in range(1, 4):
            a, b = rng.uniform(-1.0, 1.0, 2) / k**2
            total += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
        return total

    if model.name == "burgers":
        return series()[:, None]
    rho = 1.0 + 0.1 * series()
    q = 0.1 * series()
    return model.from_primitive(q, rho, ops)


def run_verify_model(cfg: RunConfig, out: Path, model) -> dict:
    Nx = cfg["grid"]["Nx"]
    scenario = cfg["scenario"]
    ops = DifferenceOperators.build(Nx, 1.0 / Nx, VERIFY_STENCIL_ORDER)
    x = np.arange(Nx) / Nx
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for trial in range(20):
        residual = conservativity_residual(model, _random_datum(model, rng, ops, x), VERIFY_STENCIL_ORDER)
        rows.append({"check": f"conservativity[{trial}]", "value": residual, "tolerance": CONSERVATIVITY_TOLERANCE})
    convexity = lowner_convexity_defect(model, scenario["trials"], cfg.seed)
    rows.append({"check": "lowner_convexity", "value": -min(convexity, 0.0), "tolerance": CONVEXITY_TOLERANCE})
    identity = float(np.max(np.abs(model.L_apply(model.identity_field(Nx), ops))))
    rows.append({"check": "L_identity", "value": identity, "tolerance": 1e-12})
    table = pd.DataFrame(rows)
    table["passed"] = table["value"] <= table["tolerance"]
    write_table(out / "checks.csv", table)
    result = {"checks": table.to_dict(orient="records"), "passed": bool(table["passed"].all())}
    if not result["passed"]:
        failed = ", ".join(table.loc[~table["passed"], "check"])
        write_report(out / "report.json", _report(cfg, model, result))
        raise ConsistencyError(f"{model.name}: checks out of tolerance: {failed}")
    return result


def _threads(cfg: RunConfig) -> int:
    if cfg["run"]["deterministic"]:
        return 1
    return cfg["run"]["threads"] or os.cpu_count() or 1


def run_gap_study(cfg: RunConfig, out: Path, model) -> dict:
    levels = cfg["scenario"]["levels"]

    def level(k):
        grid = build_grid(cfg, 2**k)
        weight, v0, _, _, report = _solve_on(cfg, model, grid, progress=False)
        target = weight.H0 * float(np.sum(model.K(v0)) * grid.dx)
        return {
            "Nx": grid.Nx,
            "Nt": grid.Nt,
            "primal": report.primal_value,
            "dual": report.dual_value,
            "gap": report.gap,
            "relative_gap": report.gap / max(1e-300, abs(report.primal_value)),
            "dual_defect": abs(report.dual_value - target),
            "iterations": report.iterations,
            "converged": report.converged,
        }

    with ThreadPoolExecutor(max_workers=_threads(cfg)) as pool:
        rows = list(pool.map(level, range(levels)))
    table = pd.DataFrame(rows)
    # successive gap reductions under refinement
    table["ratio"] = table["gap"].shift(1) / table["gap"].where(table["gap"] > 0)
    write_table(out / "gap_study.csv", table)
    return {"levels": table.to_dict(orient="records")}


PIPELINES = {
    "solve": run_solve,
    "consistency": run_consistency,
    "burgers-substitute": run_substitute,
    "dafermos": run_dafermos,
    "verify-model": run_verify_model,
    "gap-study": run_gap_study,
}


def _report(cfg: RunConfig, model, result: dict) -> dict:
    return {
        "command": cfg.command,
        "version": _version(),
        "seed": cfg.seed,
        "threads": _threads(cfg),
        "deterministic": cfg["run"]["deterministic"],
        "config": cfg.to_dict(),
        "model": model.describe(),
        "result": result,
    }


def run(cfg: RunConfig) -> int:
    """
    Execute the configured pipeline and write its artifacts.

    Returns:
        Exit status; 0 on success.

    Raises:
        DualflowError: Propagated from the pipeline, after logging.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    logger.info("running %s for %s into %s", cfg.command, model.name, out)
    result = PIPELINES[cfg.command](cfg, out, model)
    write_report(out / "report.json", _report(cfg, model, result))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualflow", description="Dual variational solutions of conservative PDE systems.")
    parser.add_argument("command", choices=COMMANDS, help="Pipeline to run")
    parser.add_argument("--config", help="INI run configuration; flags override its values")
    parser.add_argument("--log-level", default=None, help="Root log level (default from DUALFLOW_LOG_LEVEL)")
    parser.add_argument("--model", help="burgers, barotropic, qhd or korteweg")
    parser.add_argument("--pressure", help="Pressure law: log, adiabatic, capillary or power")
    parser.add_argument("--s", type=float, help="Korteweg capillarity exponent")
    parser.add_argument("--rho-min", dest="rho_min", type=float, help="Density floor")
    parser.add_argument("--gamma-ad", dest="gamma_ad", type=float, help="Adiabatic exponent")
    parser.add_argument("--Nx", type=int, help="Cells")
    parser.add_argument("--Nt", type=int, help="Time steps")
    parser.add_argument("--T", type=float, help="Horizon")
    parser.add_argument("--weight", help="'adapt' or a fixed gamma >= 0")
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--gap-rel", dest="gap_rel", type=float)
    parser.add_argument("--feas-abs", dest="feas_abs", type=float)
    parser.add_argument("--order", type=int, help="Solver stencil order (2 or 4)")
    parser.add_argument("--progress", action="store_true", default=None, help="Show a progress bar")
    parser.add_argument("--scenario", help="Strong solution scenario")
    parser.add_argument("--v0", help='Burgers datum, e.g. "sin:1" or "0.5*cos:2"')
    parser.add_argument("--amplitude", type=float)
    parser.add_argument("--samples", type=int, help="Envelope samples per period")
    parser.add_argument("--trials", type=int, help="Random pairs of the convexity check")
    parser.add_argument("--t0", type=float)
    parser.add_argument("--t1", type=float)
    parser.add_argument("--T1", type=float, help="Horizon of the escalated weights (default T)")
    parser.add_argument("--subsolution", choices=SUBSOLUTIONS)
    parser.add_argument("--inflate", type=float, help="Identity added to F(v) for inflated subsolutions")
    parser.add_argument("--levels", type=int, help="Refinement levels of gap-study")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int, help="Worker threads (0 = available parallelism)")
    parser.add_argument("--deterministic", action="store_true", default=None, help="Single-threaded reductions")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    overrides = {key: value for key, value in vars(args).items() if key not in ("config", "log_level")}
    try:
        cfg = load_config(args.config, overrides)
        return run(cfg)
    except DualflowError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"dualflow {args.command}: {exc.payload()}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
