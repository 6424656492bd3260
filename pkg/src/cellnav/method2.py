"""Planner over quantized coverage-boundary points.

Optimal handovers can be assumed to lie on the arc where the current GBS's
coverage circle passes through the next GBS's disk.  Quantizing every such
arc into Q points turns the joint association/handover problem into a
shortest-path problem on a directed graph: start -> boundary points ->
goal.  The gap to the true optimum shrinks like sin(pi / (4(Q-1))).

The search runs A*-style with the straight-line distance to the goal as the
heuristic (admissible and consistent here because edge weights are the
Euclidean distances between embedded points), with an optional incumbent
upper bound used to prune; both keep the result exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .conn_graph import FeasibilityGraph, build_feasibility_graph, check_feasibility
from .errors import Infeasible, InvalidQuantLevels, NoOverlap
from .plan import Plan, make_plan
from .scenario import ConnectivityRequirement, Point, Scenario, as_point, coverage_radius
from .trajectory import AssociationSequence, HandoverPoints

_PRESOLVE_LEVELS = 16  # coarse pass that seeds the pruning bound for large Q


def subtending_angle(center_dist: float, radius: float) -> float:
    """Angle subtended by the arc of one coverage circle inside the other
    disk.  Equals pi for coincident centers and 0 for tangent circles."""
    if center_dist == 0.0:
        return math.pi
    ratio = center_dist / (2.0 * radius)
    return 2.0 * math.acos(min(1.0, max(-1.0, ratio)))


def _arc_points_xy(gm_xy, gn_xy, radius: float, quant_levels: int) -> np.ndarray:
    """(Q, 2) points uniformly spread over the arc of circle(gm, radius)
    inside the disk of gn.  Index 0 sits at the arc end rotated -theta/2
    from the direction gm->gn, index Q-1 at +theta/2."""
    theta = subtending_angle(math.hypot(gn_xy[0] - gm_xy[0], gn_xy[1] - gm_xy[1]), radius)
    phi = math.atan2(gn_xy[1] - gm_xy[1], gn_xy[0] - gm_xy[0])
    fractions = np.arange(quant_levels) / (quant_levels - 1)
    ang = phi + (fractions - 0.5) * theta
    return np.stack([gm_xy[0] + radius * np.cos(ang),
                     gm_xy[1] + radius * np.sin(ang)], axis=1)


def quantize_boundary(g_m, g_n, radius: float, quant_levels: int):
    """Quantize the arc of g_m's coverage circle inside g_n's disk into
    ``quant_levels`` points (list of Point)."""
    if quant_levels < 2:
        raise InvalidQuantLevels(f"need at least 2 quantization levels, got {quant_levels}")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    pm, pn = as_point(g_m), as_point(g_n)
    dist = pm.distance_to(pn)
    if dist > 2.0 * radius:
        raise NoOverlap(
            f"coverage disks {dist:.3f} m apart do not intersect at radius {radius:.3f} m")
    if dist == 0.0:
        warnings.warn("coincident GBS positions: quantizing the full half-turn arc",
                      stacklevel=2)
    pts = _arc_points_xy(pm.as_array(), pn.as_array(), radius, quant_levels)
    return [Point(float(x), float(y)) for x, y in pts]


@dataclass
class QuantizedGraph:
    """Directed graph over quantized boundary points.

    Vertices: the mission start ("U0"), the goal ("UF"), and one point
    (m, n, q) per ordered overlapping GBS pair (m, n) and quantization index
    q in [0, Q).  Stored pair-wise (adjacency at the pair level plus a dense
    point table per pair), so memory follows the realized overlap structure.
    A start->goal edge is added when one GBS covers both endpoints, which is
    the single-association mission that needs no boundary point at all.
    """

    radius: float
    quant_levels: int
    n_gbs: int
    pair_gbs: np.ndarray      # (P, 2) ordered pairs (m, n)
    points: np.ndarray        # (P * Q, 2) boundary points, pair-major
    succ_indptr: np.ndarray   # pair-level successor CSR
    succ_idx: np.ndarray
    start_pids: np.ndarray    # pairs whose first GBS covers the start
    end_flags: np.ndarray     # (P,) second GBS covers the goal
    direct_gbs: int           # smallest GBS covering both endpoints, else -1
    start_xy: np.ndarray
    goal_xy: np.ndarray
    base: FeasibilityGraph = field(repr=False)

    @property
    def num_pairs(self) -> int:
        return len(self.pair_gbs)

    @property
    def vertex_count(self) -> int:
        return 2 + self.num_pairs * self.quant_levels

    @property
    def max_vertex_count(self) -> int:
        return 2 + self.n_gbs * (self.n_gbs - 1) * self.quant_levels

    def point_of(self, m: int, n: int, q: int) -> Point:
        pid = self._pid(m, n)
        xy = self.points[pid * self.quant_levels + q]
        return Point(float(xy[0]), float(xy[1]))

    def _pid(self, m: int, n: int) -> int:
        hits = np.flatnonzero((self.pair_gbs[:, 0] == m) & (self.pair_gbs[:, 1] == n))
        if len(hits) == 0:
            raise KeyError(f"no overlap pair ({m}, {n})")
        return int(hits[0])

    def vertices(self):
        out = ["U0", "UF"]
        for pid, (m, n) in enumerate(self.pair_gbs):
            out.extend((int(m), int(n), q) for q in range(self.quant_levels))
        return out

    def edges(self):
        """All directed edges as (u, v, weight).  Enumerates every chained
        q pair, so only sensible for small graphs (tests, debugging)."""
        qn = self.quant_levels
        if self.direct_gbs >= 0:
            yield "U0", "UF", float(math.hypot(*(self.goal_xy - self.start_xy)))
        for pid in self.start_pids:
            m, n = map(int, self.pair_gbs[pid])
            for q in range(qn):
                xy = self.points[pid * qn + q]
                yield "U0", (m, n, q), float(math.hypot(*(xy - self.start_xy)))
        for pid in range(self.num_pairs):
            m, n = map(int, self.pair_gbs[pid])
            for k in range(self.succ_indptr[pid], self.succ_indptr[pid + 1]):
                pid2 = int(self.succ_idx[k])
                n2, l = map(int, self.pair_gbs[pid2])
                for q in range(qn):
                    a = self.points[pid * qn + q]
                    for q2 in range(qn):
                        b = self.points[pid2 * qn + q2]
                        yield (m, n, q), (n2, l, q2), float(math.hypot(*(b - a)))
        for pid in np.flatnonzero(self.end_flags):
            m, n = map(int, self.pair_gbs[pid])
            for q in range(qn):
                xy = self.points[int(pid) * qn + q]
                yield (m, n, q), "UF", float(math.hypot(*(self.goal_xy - xy)))


def build_quantized_graph(scenario: Scenario, req: ConnectivityRequirement,
                          quant_levels: int) -> QuantizedGraph:
    """Assemble the quantized boundary graph for the given coverage radius."""
    if quant_levels < 2:
        raise InvalidQuantLevels(f"need at least 2 quantization levels, got {quant_levels}")
    g = build_feasibility_graph(scenario, req)
    m_count = scenario.num_gbs
    pairs = [(m, n) for m in range(m_count) for n in g.neighbors[m]]
    pid_of = {pair: k for k, pair in enumerate(pairs)}
    qn = quant_levels
    points = np.empty((len(pairs) * qn, 2), dtype=float)
    gxy = scenario.gbs_xy
    coincident = False
    for k, (m, n) in enumerate(pairs):
        if g.pair_dist[m, n] == 0.0:
            coincident = True
        points[k * qn:(k + 1) * qn] = _arc_points_xy(gxy[m], gxy[n], req.radius, qn)
    if coincident:
        warnings.warn("scenario contains coincident GBS positions; their shared "
                      "boundary arcs span a half turn", stacklevel=2)

    indptr = np.zeros(len(pairs) + 1, dtype=np.int64)
    succ = []
    for k, (m, n) in enumerate(pairs):
        nxt = [pid_of[(n, l)] for l in g.neighbors[n] if l != m]
        succ.extend(nxt)
        indptr[k + 1] = len(succ)

    start_pids = np.array([k for k, (m, n) in enumerate(pairs) if g.start_cov[m]],
                          dtype=np.int64)
    end_flags = np.array([bool(g.end_cov[n]) for m, n in pairs], dtype=bool)
    both = np.flatnonzero(g.start_cov & g.end_cov)
    return QuantizedGraph(
        radius=req.radius,
        quant_levels=qn,
        n_gbs=m_count,
        pair_gbs=np.array(pairs, dtype=np.int64).reshape(len(pairs), 2),
        points=points,
        succ_indptr=indptr,
        succ_idx=np.array(succ, dtype=np.int64),
        start_pids=start_pids,
        end_flags=end_flags,
        direct_gbs=int(both[0]) if len(both) else -1,
        start_xy=scenario.start_xy,
        goal_xy=scenario.goal_xy,
        base=g,
    )


def method2_gap_bound(num_gbs: int, radius: float, quant_levels: int) -> float:
    """Worst-case extra flying distance of the quantized planner relative to
    the optimum: 4 (M - 1) radius sin(pi / (4 (Q - 1)))."""
    if quant_levels < 2:
        raise InvalidQuantLevels(f"need at least 2 quantization levels, got {quant_levels}")
    return 4.0 * (num_gbs - 1) * radius * math.sin(math.pi / (4.0 * (quant_levels - 1)))


@njit(cache=True)
def _heap_push(hf, hv, n, f, v):
    hf[n] = f
    hv[n] = v
    i = n
    while i > 0:
        p = (i - 1) >> 1
        if hf[p] > hf[i] or (hf[p] == hf[i] and hv[p] > hv[i]):
            hf[p], hf[i] = hf[i], hf[p]
            hv[p], hv[i] = hv[i], hv[p]
            i = p
        else:
            break
    return n + 1


@njit(cache=True)
def _heap_pop(hf, hv, n):
    f = hf[0]
    v = hv[0]
    n -= 1
    hf[0] = hf[n]
    hv[0] = hv[n]
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        s = i
        if left < n and (hf[left] < hf[s] or (hf[left] == hf[s] and hv[left] < hv[s])):
            s = left
        if right < n and (hf[right] < hf[s] or (hf[right] == hf[s] and hv[right] < hv[s])):
            s = right
        if s == i:
            break
        hf[s], hf[i] = hf[i], hf[s]
        hv[s], hv[i] = hv[i], hv[s]
        i = s
    return f, v, n


@njit(cache=True)
def _gq_search(qn, points, h, succ_indptr, succ_idx, start_pids, end_flags,
               u0x, u0y, ufx, ufy, ub, direct_w):
    """Exact shortest path start->goal over the quantized graph.

    Best-first search ordered by (label + straight-line-to-goal); entries
    whose optimistic total exceeds the incumbent bound are pruned.  Returns
    (best_length, end_pred, pred) where end_pred is the final boundary
    vertex, -2 for the direct start->goal edge, -3 if unreachable.
    """
    nv = points.shape[0]
    dist = np.full(nv, np.inf)
    pred = np.full(nv, -9, dtype=np.int64)
    best = direct_w
    end_pred = -2 if np.isfinite(direct_w) else -3
    bound = ub if ub < best else best

    cap = 1024
    hf = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    hn = 0

    for si in range(start_pids.shape[0]):
        base = start_pids[si] * qn
        for q in range(qn):
            vid = base + q
            dx = points[vid, 0] - u0x
            dy = points[vid, 1] - u0y
            d0 = math.sqrt(dx * dx + dy * dy)
            f0 = d0 + h[vid]
            if f0 <= bound and d0 < dist[vid]:
                dist[vid] = d0
                pred[vid] = -1
                if hn == cap:
                    cap *= 2
                    nhf = np.empty(cap, dtype=np.float64)
                    nhv = np.empty(cap, dtype=np.int64)
                    nhf[:hn] = hf[:hn]
                    nhv[:hn] = hv[:hn]
                    hf, hv = nhf, nhv
                hn = _heap_push(hf, hv, hn, f0, vid)

    while hn > 0:
        f, vid, hn = _heap_pop(hf, hv, hn)
        if f >= best:
            break
        d = dist[vid]
        if f > d + h[vid]:
            continue  # stale entry, label improved since push
        pid = vid // qn
        x = points[vid, 0]
        y = points[vid, 1]
        if end_flags[pid]:
            dx = ufx - x
            dy = ufy - y
            cand = d + math.sqrt(dx * dx + dy * dy)
            if cand < best:
                best = cand
                end_pred = vid
                if best < bound:
                    bound = best
        for k in range(succ_indptr[pid], succ_indptr[pid + 1]):
            base = succ_idx[k] * qn
            for q in range(qn):
                t = base + q
                dx = points[t, 0] - x
                dy = points[t, 1] - y
                nd = d + math.sqrt(dx * dx + dy * dy)
                if nd < dist[t]:
                    ft = nd + h[t]
                    if ft <= bound:
                        dist[t] = nd
                        pred[t] = vid
                        if hn == cap:
                            cap *= 2
                            nhf = np.empty(cap, dtype=np.float64)
                            nhv = np.empty(cap, dtype=np.int64)
                            nhf[:hn] = hf[:hn]
                            nhv[:hn] = hv[:hn]
                            hf, hv = nhf, nhv
                        hn = _heap_push(hf, hv, hn, ft, t)

    return best, end_pred, pred


def _solve_graph(gq: QuantizedGraph, upper_bound: float = math.inf):
    h = np.hypot(gq.points[:, 0] - gq.goal_xy[0], gq.points[:, 1] - gq.goal_xy[1])
    direct_w = (float(math.hypot(*(gq.goal_xy - gq.start_xy)))
                if gq.direct_gbs >= 0 else math.inf)
    return _gq_search(
        gq.quant_levels, gq.points, h, gq.succ_indptr, gq.succ_idx,
        gq.start_pids, gq.end_flags,
        float(gq.start_xy[0]), float(gq.start_xy[1]),
        float(gq.goal_xy[0]), float(gq.goal_xy[1]),
        float(upper_bound), direct_w,
    )


def _walk_back(end_pred: int, pred: np.ndarray):
    vids = []
    cur = end_pred
    while cur != -1:
        vids.append(int(cur))
        cur = int(pred[cur])
    vids.reverse()
    return vids


def _incumbent_bound(gq: QuantizedGraph, coarse: QuantizedGraph,
                     end_pred: int, pred: np.ndarray) -> float:
    """Re-express a coarse solution on the fine quantization grid; its length
    plus a safety margin upper-bounds the fine optimum."""
    if end_pred == -2:
        return float(math.hypot(*(gq.goal_xy - gq.start_xy))) + 1e-6
    qc = coarse.quant_levels
    qf = gq.quant_levels
    length = 0.0
    prev = gq.start_xy
    for vid in _walk_back(end_pred, pred):
        pid, q = divmod(vid, qc)
        qfine = int(round(q / (qc - 1) * (qf - 1)))
        xy = gq.points[pid * qf + qfine]
        length += math.hypot(*(xy - prev))
        prev = xy
    length += math.hypot(*(gq.goal_xy - prev))
    return length + 1e-6


def plan_method2(scenario: Scenario, snr_target: float, quant_levels: int) -> Plan:
    """Plan via shortest path over quantized coverage-boundary points."""
    if quant_levels < 2:
        raise InvalidQuantLevels(f"need at least 2 quantization levels, got {quant_levels}")
    req = coverage_radius(scenario, snr_target)
    gq = build_quantized_graph(scenario, req, quant_levels)
    if not check_feasibility(gq.base):
        raise Infeasible(
            f"no GBS association chain connects start and goal at radius {req.radius:.1f} m")

    upper = math.inf
    if quant_levels > 2 * _PRESOLVE_LEVELS and gq.num_pairs > 0:
        coarse = build_quantized_graph(scenario, req, _PRESOLVE_LEVELS)
        _, c_end, c_pred = _solve_graph(coarse)
        if c_end != -3:
            upper = _incumbent_bound(gq, coarse, c_end, c_pred)

    best, end_pred, pred = _solve_graph(gq, upper)
    if end_pred == -3:
        raise AssertionError("quantized graph disagreed with the feasibility check")

    if end_pred == -2:
        seq = AssociationSequence(indices=(gq.direct_gbs,))
        handovers = HandoverPoints(points=(scenario.start, scenario.goal))
    else:
        vids = _walk_back(end_pred, pred)
        pids = [vid // quant_levels for vid in vids]
        indices = [int(gq.pair_gbs[pids[0], 0])]
        for pid in pids:
            indices.append(int(gq.pair_gbs[pid, 1]))
        simple = len(set(indices)) == len(indices)
        if not simple:
            warnings.warn(
                f"quantized shortest path revisits a GBS: {indices}; "
                "returning the plan unmodified", stacklevel=2)
        seq = AssociationSequence(indices=tuple(indices), allow_repeats=not simple)
        pts = [scenario.start]
        pts.extend(Point(float(gq.points[v, 0]), float(gq.points[v, 1])) for v in vids)
        pts.append(scenario.goal)
        handovers = HandoverPoints(points=tuple(pts))

    return make_plan(scenario, seq, handovers, snr_target, req.radius,
                     f"m2-Q{quant_levels}")
