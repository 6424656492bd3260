"""Random scenario generation and the two experiment protocols:
a CDF study of the maximum sustainable SNR target over random GBS layouts,
and a completion-time-versus-SNR-target sweep on one scenario.

Reproducibility: every trial draws from its own counter-based substream
(Philox keyed by (base_seed, trial_index)), so results are byte-identical
regardless of how many worker processes run the trials.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import exhaustive_plan, straight_flight_max_snr, straight_flight_plan
from .conn_graph import bottleneck_max_snr
from .errors import Infeasible
from .method1 import plan_method1
from .method2 import plan_method2
from .scenario import Scenario, db_to_linear, linear_to_db, scenario_to_json

RNG_ALGORITHM = "philox4x64"  # pinned; recorded in every experiment output

_SWEEP_COLUMNS = ["rho_db", "method", "q", "status", "completion_time_s", "length_m"]
_TRIALS_COLUMNS = ["trial", "max_snr_db", "sf_max_snr_db"]
_CDF_COLUMNS = ["metric", "value_db", "cdf"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for both experiment protocols.

    The GBS count follows round(density * region^2) unless ``num_gbs``
    pins it explicitly.  Coordinates here are kilometers (the scale the
    protocols are stated in); scenarios themselves are meters.
    """

    region_km: float = 10.0
    gbs_density: float | None = 0.25  # GBS per km^2
    num_gbs: int | None = None
    start_km: tuple = (2.0, 2.0)
    goal_km: tuple = (8.0, 8.0)
    trial_count: int = 1000
    base_seed: int = 0
    snr_grid_db: tuple | None = None
    quant_levels: tuple = (8, 16)
    uav_altitude_m: float = 90.0
    gbs_altitude_m: float = 12.5
    max_speed_mps: float = 50.0
    ref_snr_db: float = 80.0
    exhaustive_budget: int = 0  # 0 disables the exhaustive column in sweeps

    def __post_init__(self):
        object.__setattr__(self, "start_km", tuple(float(v) for v in self.start_km))
        object.__setattr__(self, "goal_km", tuple(float(v) for v in self.goal_km))
        object.__setattr__(self, "quant_levels", tuple(int(q) for q in self.quant_levels))
        if self.snr_grid_db is not None:
            object.__setattr__(self, "snr_grid_db",
                               tuple(float(v) for v in self.snr_grid_db))
        if self.region_km <= 0:
            raise ValueError("region_km must be positive")
        if self.trial_count < 1:
            raise ValueError("trial_count must be at least 1")
        if self.gbs_density is None and self.num_gbs is None:
            raise ValueError("set gbs_density or num_gbs")
        if any(q < 2 for q in self.quant_levels):
            raise ValueError("quantization levels must be at least 2")
        if self.resolved_num_gbs < 1:
            raise ValueError("configuration yields zero GBSs")

    @property
    def resolved_num_gbs(self) -> int:
        if self.num_gbs is not None:
            return int(self.num_gbs)
        return int(round(self.gbs_density * self.region_km ** 2))

    def to_json_dict(self) -> dict:
        return {
            "region_km": self.region_km,
            "gbs_density": self.gbs_density,
            "num_gbs": self.num_gbs,
            "resolved_num_gbs": self.resolved_num_gbs,
            "start_km": list(self.start_km),
            "goal_km": list(self.goal_km),
            "trial_count": self.trial_count,
            "base_seed": self.base_seed,
            "snr_grid_db": None if self.snr_grid_db is None else list(self.snr_grid_db),
            "quant_levels": list(self.quant_levels),
            "uav_altitude_m": self.uav_altitude_m,
            "gbs_altitude_m": self.gbs_altitude_m,
            "max_speed_mps": self.max_speed_mps,
            "ref_snr_db": self.ref_snr_db,
            "exhaustive_budget": self.exhaustive_budget,
            "rng": RNG_ALGORITHM,
        }


def generate_scenario(config: ExperimentConfig, trial_index: int) -> Scenario:
    """GBS positions i.i.d. uniform over the region; deterministic in
    (base_seed, trial_index)."""
    seed = np.random.SeedSequence([int(config.base_seed), int(trial_index)])
    rng = np.random.Generator(np.random.Philox(seed))
    side = config.region_km * 1000.0
    xy = rng.uniform(0.0, side, size=(config.resolved_num_gbs, 2))
    return Scenario(
        gbs=tuple((float(x), float(y)) for x, y in xy),
        start=(config.start_km[0] * 1000.0, config.start_km[1] * 1000.0),
        goal=(config.goal_km[0] * 1000.0, config.goal_km[1] * 1000.0),
        uav_altitude=config.uav_altitude_m,
        gbs_altitude=config.gbs_altitude_m,
        max_speed=config.max_speed_mps,
        ref_snr=db_to_linear(config.ref_snr_db),
    )


# --- CDF of the maximum sustainable SNR target -----------------------------

def _cdf_trial(args):
    config, index = args
    scenario = generate_scenario(config, index)
    return (index,
            linear_to_db(bottleneck_max_snr(scenario)),
            linear_to_db(straight_flight_max_snr(scenario)))


def _run_jobs(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(job) for job in jobs]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        return pool.map(fn, jobs)


@dataclass
class CdfResult:
    config: ExperimentConfig
    records: list  # (trial, max_snr_db, sf_max_snr_db), sorted by trial

    def values(self, metric: str) -> np.ndarray:
        col = {"bottleneck": 1, "straight_flight": 2}[metric]
        return np.array([r[col] for r in self.records])

    def cdf_table(self, metric: str):
        """Empirical CDF at the sorted sample points: F(x_(k)) = (k+1)/n."""
        vals = np.sort(self.values(metric))
        n = len(vals)
        return [(float(v), (k + 1) / n) for k, v in enumerate(vals)]

    def medians_db(self) -> dict:
        return {m: float(np.median(self.values(m)))
                for m in ("bottleneck", "straight_flight")}

    def median_gain_db(self) -> float:
        med = self.medians_db()
        return med["bottleneck"] - med["straight_flight"]

    def write(self, outdir) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "trials.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_TRIALS_COLUMNS)
            for trial, md, sd in self.records:
                w.writerow([trial, f"{md:.9f}", f"{sd:.9f}"])
        with open(outdir / "cdf.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_CDF_COLUMNS)
            for metric in ("bottleneck", "straight_flight"):
                for value, prob in self.cdf_table(metric):
                    w.writerow([metric, f"{value:.9f}", f"{prob:.9f}"])
        summary = {
            "schema": "cdf-v1",
            "config": self.config.to_json_dict(),
            "medians_db": {k: round(v, 9) for k, v in self.medians_db().items()},
            "median_gain_db": round(self.median_gain_db(), 9),
        }
        (outdir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run_cdf_experiment(config: ExperimentConfig, workers: int = 1) -> CdfResult:
    """Per-trial maximum sustainable SNR target for the planned and the
    straight-flight trajectory, over seeded random GBS layouts."""
    jobs = [(config, i) for i in range(config.trial_count)]
    records = _run_jobs(_cdf_trial, jobs, workers)
    records.sort(key=lambda r: r[0])
    return CdfResult(config=config, records=records)


# --- completion time versus SNR target --------------------------------------

def default_snr_grid_db(scenario: Scenario) -> list:
    """0.25 dB steps from 5 dB below the straight-flight limit up to the
    overall maximum sustainable target (included as the final point)."""
    sf_db = linear_to_db(straight_flight_max_snr(scenario))
    max_db = linear_to_db(bottleneck_max_snr(scenario))
    grid = []
    k = 0
    while True:
        v = sf_db - 5.0 + 0.25 * k
        if v >= max_db - 1e-9:
            break
        grid.append(v)
        k += 1
    grid.append(max_db)
    return grid


def _plan_row(rho_db: float, method: str, q, plan_fn):
    try:
        plan = plan_fn()
    except Infeasible:
        return {"rho_db": rho_db, "method": method, "q": q, "status": "infeasible",
                "completion_time_s": None, "length_m": None}
    status = "budget_exhausted" if plan.budget_exhausted else "ok"
    return {"rho_db": rho_db, "method": method, "q": q, "status": status,
            "completion_time_s": plan.completion_time, "length_m": plan.length}


def _sweep_point(args):
    scenario, config, rho_db = args
    rho = db_to_linear(rho_db)
    rows = [
        _plan_row(rho_db, "sf", None, lambda: straight_flight_plan(scenario, rho)),
        _plan_row(rho_db, "m1", None, lambda: plan_method1(scenario, rho)),
    ]
    for q in config.quant_levels:
        rows.append(_plan_row(rho_db, "m2", q,
                              lambda q=q: plan_method2(scenario, rho, q)))
    if config.exhaustive_budget > 0:
        rows.append(_plan_row(rho_db, "exhaustive", None,
                              lambda: exhaustive_plan(scenario, rho,
                                                      path_budget=config.exhaustive_budget)))
    return rows


@dataclass
class SweepResult:
    config: ExperimentConfig
    scenario: Scenario
    grid_db: list
    rows: list  # dicts in grid-then-method order

    def write(self, outdir) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_SWEEP_COLUMNS)
            for r in self.rows:
                w.writerow([
                    f"{r['rho_db']:.9f}",
                    r["method"],
                    "" if r["q"] is None else r["q"],
                    r["status"],
                    "" if r["completion_time_s"] is None else f"{r['completion_time_s']:.9f}",
                    "" if r["length_m"] is None else f"{r['length_m']:.9f}",
                ])
        payload = {
            "schema": "sweep-v1",
            "config": self.config.to_json_dict(),
            "scenario": scenario_to_json(self.scenario),
            "grid_db": [round(v, 12) for v in self.grid_db],
        }
        (outdir / "config.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_time_sweep(scenario: Scenario, config: ExperimentConfig,
                   workers: int = 1) -> SweepResult:
    """Evaluate every planner across the SNR grid; infeasibility is data,
    recorded per row rather than raised."""
    grid = (list(config.snr_grid_db) if config.snr_grid_db is not None
            else default_snr_grid_db(scenario))
    jobs = [(scenario, config, rho_db) for rho_db in grid]
    row_blocks = _run_jobs(_sweep_point, jobs, workers)
    rows = [row for block in row_blocks for row in block]
    return SweepResult(config=config, scenario=scenario, grid_db=grid, rows=rows)
