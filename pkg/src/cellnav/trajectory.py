"""Handover-point representations, trajectory assembly, boundary snapping,
and trajectory validation.

A mission plan is a GBS association sequence [I_1..I_N] plus handover points
u^0..u^N with u^0 the mission start and u^N the goal.  While flying segment i
(from u^{i-1} to u^i) the UAV is served by GBS I_i, so both segment endpoints
must lie inside that GBS's coverage disk; the segment then stays inside by
convexity.  The time-optimal motion on a fixed set of waypoints is piecewise
linear at maximum speed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DegenerateSequence, NoBoundaryCrossing
from .scenario import Point, Scenario, closest_gbs_xy, linear_to_db, snr_at_xy


@dataclass(frozen=True)
class AssociationSequence:
    """Ordered GBS indices the UAV associates with, one per trajectory segment.

    Optimal sequences never revisit a GBS; construction rejects repeats
    unless ``allow_repeats`` is set (used for baseline trajectories and for
    surfacing violations instead of hiding them).
    """

    indices: tuple
    allow_repeats: bool = False

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError("GBS indices must be non-negative")
        if not self.allow_repeats and len(set(idx)) != len(idx):
            raise ValueError(f"association sequence repeats a GBS: {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def is_simple(self) -> bool:
        return len(set(self.indices)) == len(self.indices)


@dataclass(frozen=True)
class HandoverPoints:
    """Waypoints u^0..u^N; u^0 is the mission start and u^N the goal."""

    points: tuple

    def __post_init__(self):
        pts = tuple(p if isinstance(p, Point) else Point(float(p[0]), float(p[1]))
                    for p in self.points)
        if len(pts) < 2:
            raise ValueError("need at least start and goal")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=float)


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear motion at constant (maximum) speed on each segment."""

    waypoints: tuple
    segment_durations: tuple
    total_time: float

    def position_at(self, t: float) -> Point:
        """Position at mission time t (clamped to [0, total_time])."""
        if t <= 0:
            return self.waypoints[0]
        elapsed = 0.0
        for i, dur in enumerate(self.segment_durations):
            if t <= elapsed + dur and dur > 0:
                frac = (t - elapsed) / dur
                a, b = self.waypoints[i], self.waypoints[i + 1]
                return Point(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))
            elapsed += dur
        return self.waypoints[-1]

    def sample_times(self, time_step: float) -> np.ndarray:
        """Times 0, step, 2*step, ..., total_time (last point always included)."""
        if time_step <= 0:
            raise ValueError("time_step must be positive")
        n = int(math.floor(self.total_time / time_step + 1e-12))
        ts = np.arange(n + 1) * time_step
        if ts[-1] < self.total_time:
            ts = np.append(ts, self.total_time)
        else:
            ts[-1] = self.total_time
        return ts


def path_length(handovers: HandoverPoints) -> float:
    """Total length of the polyline through the handover points."""
    xy = handovers.as_array()
    seg = np.diff(xy, axis=0)
    return float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))


def candidate_handovers(scenario: Scenario, seq: AssociationSequence,
                        radius: float) -> HandoverPoints:
    """Cheap feasible handovers: walk out of each coverage disk toward the
    next tower and hand over where the segment between the two tower
    positions crosses the current tower's coverage circle."""
    pts = [scenario.start]
    gxy = scenario.gbs_xy
    idx = seq.indices
    for i in range(len(idx) - 1):
        a = gxy[idx[i]]
        b = gxy[idx[i + 1]]
        d = b - a
        norm = math.hypot(d[0], d[1])
        if norm == 0.0:
            raise DegenerateSequence(
                f"consecutive GBSs {idx[i]} and {idx[i + 1]} share a position")
        p = a + (radius / norm) * d
        pts.append(Point(float(p[0]), float(p[1])))
    pts.append(scenario.goal)
    return HandoverPoints(points=tuple(pts))


def association_upper_bound(scenario: Scenario, seq: AssociationSequence) -> float:
    """Flying distance when traversing the associated towers themselves:
    start -> g_{I_1} -> ... -> g_{I_N} -> goal.  Equals the weight of the
    corresponding path in the coverage graph and upper-bounds every refined
    plan for the same sequence."""
    if len(seq) == 0:
        raise ValueError("sequence must be non-empty")
    gxy = scenario.gbs_xy
    idx = seq.indices
    total = math.hypot(*(gxy[idx[0]] - scenario.start_xy))
    for i in range(len(idx) - 1):
        total += math.hypot(*(gxy[idx[i + 1]] - gxy[idx[i]]))
    total += math.hypot(*(scenario.goal_xy - gxy[idx[-1]]))
    return total


def assemble_trajectory(handovers: HandoverPoints, max_speed: float) -> Trajectory:
    """Max-speed piecewise-linear trajectory through the handover points."""
    if not max_speed > 0:
        raise ValueError("max_speed must be positive")
    xy = handovers.as_array()
    seg = np.diff(xy, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    durations = lengths / max_speed
    return Trajectory(
        waypoints=handovers.points,
        segment_durations=tuple(float(d) for d in durations),
        total_time=float(np.sum(durations)),
    )


def check_handover_feasibility(scenario: Scenario, seq: AssociationSequence,
                               handovers: HandoverPoints, radius: float,
                               dist_tol: float = tol.DIST_TOL_M) -> bool:
    """Both endpoints of every segment i inside the disk of GBS I_i, and the
    trajectory endpoints at the mission start/goal."""
    if len(handovers) != len(seq) + 1:
        return False
    xy = handovers.as_array()
    if math.hypot(*(xy[0] - scenario.start_xy)) > dist_tol:
        return False
    if math.hypot(*(xy[-1] - scenario.goal_xy)) > dist_tol:
        return False
    gxy = scenario.gbs_xy
    for i, m in enumerate(seq.indices):
        for p in (xy[i], xy[i + 1]):
            if math.hypot(*(p - gxy[m])) > radius + dist_tol:
                return False
    return True


def snap_to_boundary(scenario: Scenario, seq: AssociationSequence,
                     handovers: HandoverPoints, radius: float,
                     strict: bool = False) -> HandoverPoints:
    """Move each interior handover point along the segment toward its
    successor until it sits on the coverage circle of the GBS it leaves.

    All snapped points are computed from the original points, so the snapped
    polyline is never longer than the original.  When the segment from u^i
    toward u^{i+1} never reaches the circle, the input was not shaped like an
    optimal solution: with ``strict`` a NoBoundaryCrossing is raised,
    otherwise the original point is kept (that is the zero-movement snap).
    """
    xy = handovers.as_array()
    gxy = scenario.gbs_xy
    out = [handovers.points[0]]
    n = len(seq)
    for i in range(1, n):
        u = xy[i]
        v = xy[i + 1]
        g = gxy[seq.indices[i - 1]]  # the tower whose coverage segment i leaves
        alpha = _boundary_crossing(u, v, g, radius)
        if alpha is None:
            if strict:
                raise NoBoundaryCrossing(i)
            out.append(handovers.points[i])
        else:
            p = u + alpha * (v - u)
            out.append(Point(float(p[0]), float(p[1])))
    out.append(handovers.points[-1])
    return HandoverPoints(points=tuple(out))


def _boundary_crossing(u, v, center, radius):
    """Smallest alpha in [0, 1] with |u + alpha (v - u) - center| = radius,
    or None.  The start point is assumed inside the disk (feasible input),
    so the quadratic has a real root at or after 0 whenever one exists."""
    d = v - u
    w = u - center
    a = float(d @ d)
    b = 2.0 * float(w @ d)
    c = float(w @ w) - radius * radius
    # |dist - radius| <= DIST_TOL_M translates to this band on c
    band = tol.DIST_TOL_M * (2.0 * radius + tol.DIST_TOL_M)
    if abs(c) <= band:
        return 0.0  # already on the circle (up to feasibility tolerance)
    if a == 0.0:
        return None  # zero-length step strictly off the circle
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    if c < 0.0:
        # roots straddle zero; the non-negative one is the first crossing
        root = (-b + sq) / (2.0 * a) if b <= 0.0 else (-2.0 * c) / (b + sq)
    else:
        # infeasible start point (outside the disk); take the first entry
        r1 = (-b - sq) / (2.0 * a)
        root = r1 if r1 >= 0.0 else (-b + sq) / (2.0 * a)
    if root < 0.0 or root > 1.0:
        return None
    return root


def remove_loops(seq: AssociationSequence, handovers: HandoverPoints):
    """Cut every revisit loop out of a sequence with repeated GBSs.

    Between two visits of the same GBS the in-between handovers can be
    dropped: the bridging segment is covered by that GBS (both bridge
    endpoints are inside its disk) and by the triangle inequality the result
    is never longer.  Returns (simple sequence, reduced handovers).
    """
    idx = list(seq.indices)
    pts = list(handovers.points)
    if len(pts) != len(idx) + 1:
        raise ValueError("handover count must be sequence length + 1")
    changed = True
    while changed:
        changed = False
        seen = {}
        for i, m in enumerate(idx):
            if m in seen:
                k, q = seen[m], i  # 0-based segment positions with idx[k] == idx[q]
                # keep segments 1..k and q+1..N: drop handovers between u^k and u^q
                idx = idx[: k + 1] + idx[q + 1:]
                pts = pts[: k + 1] + pts[q + 1:]
                changed = True
                break
            seen[m] = i
    return (AssociationSequence(indices=tuple(idx)),
            HandoverPoints(points=tuple(pts)))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of sampling a trajectory against the mission constraints."""

    passed: bool
    snr_ok: bool
    speed_ok: bool
    endpoints_ok: bool
    worst_snr: float
    worst_position: Point
    worst_time: float
    max_speed: float
    start_error_m: float
    end_error_m: float
    snr_target: float

    @property
    def worst_snr_db(self) -> float:
        return linear_to_db(self.worst_snr)


def validate_trajectory(scenario: Scenario, trajectory: Trajectory,
                        snr_target: float, sample_spacing: float) -> ValidationReport:
    """Sample the trajectory at most ``sample_spacing`` meters apart and check
    the SNR floor, the speed limit, and the endpoint positions."""
    if not sample_spacing > 0:
        raise ValueError("sample_spacing must be positive")
    wp = np.array([[p.x, p.y] for p in trajectory.waypoints])
    durations = np.array(trajectory.segment_durations)

    samples = [wp[0]]
    times = [0.0]
    elapsed = 0.0
    for i in range(len(wp) - 1):
        a, b = wp[i], wp[i + 1]
        seg_len = math.hypot(*(b - a))
        if seg_len > 0:
            k = max(1, int(math.ceil(seg_len / sample_spacing)))
            fr = np.arange(1, k + 1) / k
            samples.extend(a + fr[:, None] * (b - a))
            times.extend(elapsed + fr * durations[i])
        elapsed += durations[i]
    xy = np.array(samples)
    ts = np.array(times)

    snr = snr_at_xy(scenario, xy)
    worst = int(np.argmin(snr))
    snr_ok = bool(snr[worst] >= snr_target * (1.0 - tol.SNR_REL_TOL))

    seg = np.diff(wp, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    speeds = [lengths[i] / durations[i] if durations[i] > 0 else math.inf
              for i in range(len(lengths)) if lengths[i] > 0]
    max_speed = max(speeds) if speeds else 0.0
    speed_ok = max_speed <= scenario.max_speed * (1.0 + tol.SPEED_REL_TOL)

    start_err = math.hypot(*(wp[0] - scenario.start_xy))
    end_err = math.hypot(*(wp[-1] - scenario.goal_xy))
    endpoints_ok = start_err <= tol.ENDPOINT_TOL_M and end_err <= tol.ENDPOINT_TOL_M

    return ValidationReport(
        passed=snr_ok and speed_ok and endpoints_ok,
        snr_ok=snr_ok,
        speed_ok=speed_ok,
        endpoints_ok=endpoints_ok,
        worst_snr=float(snr[worst]),
        worst_position=Point(float(xy[worst, 0]), float(xy[worst, 1])),
        worst_time=float(ts[worst]),
        max_speed=float(max_speed),
        start_error_m=start_err,
        end_error_m=end_err,
        snr_target=snr_target,
    )


def write_trajectory_csv(path, scenario: Scenario, trajectory: Trajectory,
                         time_step: float = 1.0) -> None:
    """Sampled trajectory as CSV: t_s,x_m,y_m,snr_db,associated_gbs."""
    ts = trajectory.sample_times(time_step)
    xy = np.array([[p.x, p.y] for p in (trajectory.position_at(float(t)) for t in ts)])
    snr_db = 10.0 * np.log10(snr_at_xy(scenario, xy))
    assoc = closest_gbs_xy(scenario, xy)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "x_m", "y_m", "snr_db", "associated_gbs"])
        for t, (x, y), s, m in zip(ts, xy, snr_db, assoc):
            writer.writerow([f"{t:.6f}", f"{x:.6f}", f"{y:.6f}", f"{s:.6f}", int(m)])
