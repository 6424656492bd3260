"""Command-line interface.

Subcommands: gen, feasibility, max-snr, plan, sweep, cdf.
Exit codes: 0 success, 2 infeasible mission, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import exhaustive_plan, straight_flight_max_snr, straight_flight_plan
from .conn_graph import bottleneck_max_snr, build_feasibility_graph, check_feasibility
from .errors import CellnavError, Infeasible
from .experiments import (ExperimentConfig, generate_scenario, run_cdf_experiment,
                          run_time_sweep)
from .method1 import plan_method1
from .method2 import plan_method2
from .plan import plan_to_json, save_plan
from .scenario import (coverage_radius, db_to_linear, linear_to_db, load_scenario,
                       save_scenario, scenario_to_json)
from .trajectory import write_trajectory_csv


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; code 2 is reserved for infeasible missions
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _km_pair(text: str):
    try:
        x, y = text.split(",")
        return float(x), float(y)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected X,Y in km, got {text!r}") from err


def _config_from_args(args, trials: int = 1) -> ExperimentConfig:
    return ExperimentConfig(
        region_km=args.region_km,
        gbs_density=None if args.gbs is not None else args.density,
        num_gbs=args.gbs,
        start_km=args.start,
        goal_km=args.goal,
        trial_count=trials,
        base_seed=args.seed,
    )


def _get_scenario(args):
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    return generate_scenario(_config_from_args(args), 0)


def _add_generation_flags(sp, start_default=(2.0, 2.0), goal_default=(8.0, 8.0)):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lambda", dest="density", type=float, default=0.25,
                    help="GBS density per km^2")
    sp.add_argument("--gbs", type=int, default=None, help="explicit GBS count")
    sp.add_argument("--region-km", type=float, default=10.0)
    sp.add_argument("--start", type=_km_pair, default=start_default, metavar="X,Y")
    sp.add_argument("--goal", type=_km_pair, default=goal_default, metavar="X,Y")


def _cmd_gen(args) -> int:
    scenario = generate_scenario(_config_from_args(args), args.trial)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "scenario.json"
        save_scenario(scenario, path)
        print(path)
    else:
        print(json.dumps(scenario_to_json(scenario), indent=2, sort_keys=True))
    return 0


def _cmd_feasibility(args) -> int:
    scenario = load_scenario(args.scenario)
    req = coverage_radius(scenario, db_to_linear(args.snr_db))
    feasible = check_feasibility(build_feasibility_graph(scenario, req))
    print(json.dumps({"snr_db": args.snr_db, "coverage_radius_m": req.radius,
                      "feasible": feasible}, sort_keys=True))
    return 0 if feasible else 2


def _cmd_max_snr(args) -> int:
    scenario = load_scenario(args.scenario)
    print(json.dumps({
        "max_snr_db": linear_to_db(bottleneck_max_snr(scenario)),
        "sf_max_snr_db": linear_to_db(straight_flight_max_snr(scenario)),
    }, sort_keys=True))
    return 0


def _cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario)
    target = db_to_linear(args.snr_db)
    if args.method == "sf":
        plan = straight_flight_plan(scenario, target)
    elif args.method == "m1":
        plan = plan_method1(scenario, target)
    elif args.method == "m2":
        plan = plan_method2(scenario, target, args.q)
    else:
        plan = exhaustive_plan(scenario, target, path_budget=args.budget)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        save_plan(scenario, plan, outdir / "plan.json")
        write_trajectory_csv(outdir / "trajectory.csv", scenario, plan.trajectory,
                             time_step=args.time_step)
        print(outdir / "plan.json")
    else:
        print(json.dumps(plan_to_json(scenario, plan), indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    scenario = _get_scenario(args)
    config = ExperimentConfig(
        region_km=args.region_km,
        gbs_density=None if args.gbs is not None else args.density,
        num_gbs=args.gbs,
        start_km=args.start,
        goal_km=args.goal,
        trial_count=1,
        base_seed=args.seed,
        quant_levels=tuple(args.q) if args.q else (8, 16),
        exhaustive_budget=args.exhaustive_budget,
    )
    result = run_time_sweep(scenario, config, workers=args.workers)
    result.write(args.out)
    print(Path(args.out) / "sweep.csv")
    return 0


def _cmd_cdf(args) -> int:
    config = ExperimentConfig(
        region_km=args.region_km,
        gbs_density=None if args.gbs is not None else args.density,
        num_gbs=args.gbs,
        start_km=args.start,
        goal_km=args.goal,
        trial_count=args.trials,
        base_seed=args.seed,
    )
    result = run_cdf_experiment(config, workers=args.workers)
    result.write(args.out)
    print(Path(args.out) / "summary.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cellnav",
                     description="Trajectory planning for cellular-connected UAV missions")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="emit a random scenario as JSON")
    _add_generation_flags(sp)
    sp.add_argument("--trial", type=int, default=0, help="trial index within the seed")
    sp.add_argument("--out", default=None, help="directory for scenario.json")
    sp.set_defaults(fn=_cmd_gen)

    sp = sub.add_parser("feasibility", help="check a mission against an SNR target")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--snr-db", type=float, required=True)
    sp.set_defaults(fn=_cmd_feasibility)

    sp = sub.add_parser("max-snr", help="maximum sustainable SNR targets")
    sp.add_argument("--scenario", required=True)
    sp.set_defaults(fn=_cmd_max_snr)

    sp = sub.add_parser("plan", help="plan a mission with one method")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--method", choices=["sf", "m1", "m2", "exhaustive"], required=True)
    sp.add_argument("--snr-db", type=float, required=True)
    sp.add_argument("--q", type=int, default=16, help="quantization levels for m2")
    sp.add_argument("--budget", type=int, default=1_000_000,
                    help="path budget for the exhaustive method")
    sp.add_argument("--time-step", type=float, default=1.0,
                    help="trajectory CSV sampling step in seconds")
    sp.add_argument("--out", default=None, help="directory for plan.json + trajectory.csv")
    sp.set_defaults(fn=_cmd_plan)

    sp = sub.add_parser("sweep", help="completion time vs SNR target table")
    sp.add_argument("--scenario", default=None)
    _add_generation_flags(sp)
    sp.add_argument("--q", type=int, action="append", default=None,
                    help="m2 quantization level (repeatable)")
    sp.add_argument("--exhaustive-budget", type=int, default=0,
                    help="enable the exhaustive column with this path budget")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_sweep)

    sp = sub.add_parser("cdf", help="CDF of the maximum sustainable SNR target")
    _add_generation_flags(sp)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_cdf)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except Infeasible as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 2
    except CellnavError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
