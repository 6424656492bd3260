"""Plan record shared by all planners, plus its JSON export."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import Scenario, linear_to_db, snr_at_xy
from .trajectory import (AssociationSequence, HandoverPoints, Trajectory,
                         assemble_trajectory, path_length)


@dataclass(frozen=True)
class Plan:
    """A planned mission: association sequence, handovers, motion, and cost."""

    sequence: AssociationSequence
    handovers: HandoverPoints
    trajectory: Trajectory
    length: float
    completion_time: float
    method_tag: str
    snr_target: float
    radius: float
    budget_exhausted: bool = False


def make_plan(scenario: Scenario, sequence: AssociationSequence,
              handovers: HandoverPoints, snr_target: float, radius: float,
              method_tag: str, budget_exhausted: bool = False) -> Plan:
    length = path_length(handovers)
    traj = assemble_trajectory(handovers, scenario.max_speed)
    return Plan(
        sequence=sequence,
        handovers=handovers,
        trajectory=traj,
        length=length,
        completion_time=length / scenario.max_speed,
        method_tag=method_tag,
        snr_target=snr_target,
        radius=radius,
        budget_exhausted=budget_exhausted,
    )


def plan_to_json(scenario: Scenario, plan: Plan, sample_spacing: float = 1.0) -> dict:
    """JSON-ready dict: sequence, handover coordinates, per-segment times,
    total time, method tag, and the worst SNR sampled along the trajectory."""
    xy = plan.handovers.as_array()
    samples = [xy[0]]
    for i in range(len(xy) - 1):
        seg_len = math.hypot(*(xy[i + 1] - xy[i]))
        k = max(1, int(math.ceil(seg_len / sample_spacing)))
        for j in range(1, k + 1):
            samples.append(xy[i] + (j / k) * (xy[i + 1] - xy[i]))
    worst = float(np.min(snr_at_xy(scenario, np.array(samples))))
    out = {
        "method": plan.method_tag,
        "snr_target_db": linear_to_db(plan.snr_target),
        "coverage_radius_m": plan.radius,
        "sequence": list(plan.sequence.indices),
        "handovers_m": [[p.x, p.y] for p in plan.handovers.points],
        "segment_durations_s": list(plan.trajectory.segment_durations),
        "total_time_s": plan.trajectory.total_time,
        "length_m": plan.length,
        "worst_sampled_snr_db": linear_to_db(worst),
    }
    if plan.budget_exhausted:
        out["budget_exhausted"] = True
    return out


def save_plan(scenario: Scenario, plan: Plan, path, sample_spacing: float = 1.0) -> None:
    payload = plan_to_json(scenario, plan, sample_spacing)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
