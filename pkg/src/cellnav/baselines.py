"""Straight-flight baseline and the exhaustive ground-truth planner.

The straight-flight limit needs the maximum over the segment of the
distance to the nearest GBS.  Squared distance to each GBS is a quadratic
in the segment parameter and all quadratics share the same leading
coefficient, so their pointwise minimum switches active GBS at breakpoints
that are exact (pairwise differences are linear).  The segment maximum of
that lower envelope sits at an interval end, never inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conn_graph import build_feasibility_graph, check_feasibility
from .errors import Infeasible, NonConvergence
from .method1 import refine_handovers
from .plan import Plan, make_plan
from .scenario import Scenario, coverage_radius, max_target_for_radius
from .trajectory import AssociationSequence, HandoverPoints, path_length

_ORACLE_REFINE_TOL = 1e-6
_ORACLE_POLISH_TOL = 1e-9


@dataclass(frozen=True)
class EnvelopeInterval:
    """One stretch of the segment where a single GBS is the closest.

    ``coeffs`` are (a, b, c) of the squared distance a t^2 + b t + c to that
    GBS, with t the fraction traveled from the segment start.
    """

    t_lo: float
    t_hi: float
    gbs: int
    coeffs: tuple


@dataclass(frozen=True)
class EnvelopeBreakpoints:
    """Closest-GBS intervals partitioning a segment (t from 0 to 1)."""

    intervals: tuple

    def active_gbs(self):
        return [iv.gbs for iv in self.intervals]

    def boundaries(self):
        ts = [self.intervals[0].t_lo]
        ts.extend(iv.t_hi for iv in self.intervals)
        return ts


def line_envelope(scenario: Scenario, a_xy=None, b_xy=None) -> EnvelopeBreakpoints:
    """Exact closest-GBS decomposition of the segment a->b (default
    start->goal)."""
    a = scenario.start_xy if a_xy is None else np.asarray(a_xy, dtype=float)
    b = scenario.goal_xy if b_xy is None else np.asarray(b_xy, dtype=float)
    d = b - a
    lead = float(d @ d)
    gxy = scenario.gbs_xy
    w = a - gxy
    slope = 2.0 * (w @ d)                    # linear coefficient per GBS
    offset = w[:, 0] ** 2 + w[:, 1] ** 2     # constant coefficient per GBS

    if lead == 0.0:
        m = int(np.lexsort((np.arange(len(offset)), offset))[0])
        return EnvelopeBreakpoints(intervals=(EnvelopeInterval(
            0.0, 1.0, m, (lead, float(slope[m]), float(offset[m]))),))

    order = np.lexsort((np.arange(len(offset)), slope, offset))
    active = int(order[0])
    t_cur = 0.0
    intervals = []
    for _ in range(scenario.num_gbs):
        bs, cs = float(slope[active]), float(offset[active])
        t_next, nxt = 1.0, None
        for n in range(scenario.num_gbs):
            if n == active or not slope[n] < bs:
                continue  # only strictly flatter lines can take over later
            t_x = (float(offset[n]) - cs) / (bs - float(slope[n]))
            if t_cur < t_x < t_next or (t_x == t_next and nxt is not None
                                        and (slope[n], n) < (slope[nxt], nxt)):
                t_next, nxt = t_x, n
        intervals.append(EnvelopeInterval(t_cur, t_next, active, (lead, bs, cs)))
        if nxt is None:
            break
        t_cur, active = t_next, nxt
    return EnvelopeBreakpoints(intervals=tuple(intervals))


def straight_flight_max_snr(scenario: Scenario) -> float:
    """Largest SNR target sustainable on the direct start->goal flight."""
    env = line_envelope(scenario)
    a = scenario.start_xy
    d = scenario.goal_xy - a
    ts = np.array(env.boundaries())
    pts = a + ts[:, None] * d
    diff = pts[:, None, :] - scenario.gbs_xy[None, :, :]
    worst_sq = float(np.max(np.min(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2, axis=1)))
    return max_target_for_radius(scenario, math.sqrt(worst_sq))


def straight_flight_plan(scenario: Scenario, snr_target: float) -> Plan:
    """The direct flight as a plan.  Its association sequence follows the
    closest GBS along the segment and may revisit a GBS; that is fine for a
    baseline, which carries no optimality structure."""
    req = coverage_radius(scenario, snr_target)
    if snr_target > straight_flight_max_snr(scenario):
        raise Infeasible("straight flight drops below the SNR target")
    env = line_envelope(scenario)
    a = scenario.start_xy
    d = scenario.goal_xy - a
    indices = tuple(env.active_gbs())
    seq = AssociationSequence(indices=indices,
                              allow_repeats=len(set(indices)) != len(indices))
    pts = [scenario.start]
    for iv in env.intervals[:-1]:
        p = a + iv.t_hi * d
        pts.append((float(p[0]), float(p[1])))
    pts.append(scenario.goal)
    return make_plan(scenario, seq, HandoverPoints(points=tuple(pts)),
                     snr_target, req.radius, "sf")


def _simple_paths(graph):
    """Every simple start->goal association sequence, in lexicographic
    order (depth-first with ascending neighbors)."""
    def rec(m, visited, path):
        if graph.end_cov[m]:
            yield tuple(path)
        for n in graph.neighbors[m]:
            if n not in visited:
                visited.add(n)
                path.append(n)
                yield from rec(n, visited, path)
                path.pop()
                visited.remove(n)

    for s in (int(m) for m in np.flatnonzero(graph.start_cov)):
        yield from rec(s, {s}, [s])


def exhaustive_plan(scenario: Scenario, snr_target: float,
                    path_budget: int = 1_000_000) -> Plan:
    """Optimal plan by refining every simple association sequence.

    Exact up to the refinement tolerance while the enumeration stays within
    ``path_budget`` sequences; beyond that the best plan found so far is
    returned with ``budget_exhausted`` set rather than silently passing off
    a non-optimum.  Ties go to the lexicographically smallest sequence.
    """
    if path_budget <= 0:
        raise ValueError("path_budget must be positive")
    req = coverage_radius(scenario, snr_target)
    graph = build_feasibility_graph(scenario, req)
    if not check_feasibility(graph):
        raise Infeasible(
            f"no GBS association chain connects start and goal at radius {req.radius:.1f} m")

    best_len, best_seq, best_pts = math.inf, None, None
    exhausted = False
    count = 0
    for indices in _simple_paths(graph):
        count += 1
        if count > path_budget:
            exhausted = True
            break
        seq = AssociationSequence(indices=indices)
        try:
            pts = refine_handovers(scenario, seq, req.radius,
                                   tolerance=_ORACLE_REFINE_TOL, fallback=False)
        except NonConvergence as err:
            pts = err.best_points  # still an upper bound for this sequence
        length = path_length(pts)
        if length < best_len or (length == best_len and indices < best_seq):
            best_len, best_seq, best_pts = length, indices, pts

    seq = AssociationSequence(indices=best_seq)
    try:
        polished = refine_handovers(scenario, seq, req.radius,
                                    tolerance=_ORACLE_POLISH_TOL, init=best_pts,
                                    verify=True)
    except NonConvergence as err:
        polished = err.best_points
    if path_length(polished) < best_len:
        best_pts = polished
    return make_plan(scenario, seq, best_pts, snr_target, req.radius,
                     "exhaustive", budget_exhausted=exhausted)
