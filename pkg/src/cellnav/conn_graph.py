"""Coverage-overlap graph over {start, towers, goal}: feasibility, bottleneck SNR,
shortest association sequences.

Vertices are the mission start, each GBS, and the mission goal.  An edge
start-GBS or goal-GBS exists when the endpoint lies inside that GBS's
coverage disk; a GBS-GBS edge exists when the two coverage disks overlap.
Closed disks throughout: a point exactly on the boundary counts as covered.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible
from .scenario import ConnectivityRequirement, Scenario, max_target_for_radius
from .trajectory import AssociationSequence

# Integer vertex encoding used internally: START < all GBS indices < END.
_START = -1


@dataclass(frozen=True)
class VertexId:
    """One of: mission start, GBS m, mission goal."""

    kind: str  # "start" | "gbs" | "end"
    index: int = -1

    def __post_init__(self):
        if self.kind not in ("start", "gbs", "end"):
            raise ValueError(f"bad vertex kind {self.kind!r}")
        if self.kind == "gbs" and self.index < 0:
            raise ValueError("gbs vertex needs a non-negative index")

    def sort_key(self):
        return {"start": 0, "gbs": 1, "end": 2}[self.kind], self.index

    def __str__(self):
        if self.kind == "start":
            return "U0"
        if self.kind == "end":
            return "UF"
        return f"G{self.index}"


START = VertexId("start")
END = VertexId("end")


def gbs_vertex(index: int) -> VertexId:
    return VertexId("gbs", index)


class FeasibilityGraph:
    """Undirected weighted graph encoding coverage overlaps at one radius."""

    def __init__(self, scenario: Scenario, radius: float):
        self.radius = float(radius)
        self.n_gbs = scenario.num_gbs
        xy = scenario.gbs_xy
        # One shared distance computation so every consumer sees identical floats.
        self.start_dist = np.hypot(xy[:, 0] - scenario.start.x, xy[:, 1] - scenario.start.y)
        self.end_dist = np.hypot(xy[:, 0] - scenario.goal.x, xy[:, 1] - scenario.goal.y)
        diff = xy[:, None, :] - xy[None, :, :]
        self.pair_dist = np.hypot(diff[:, :, 0], diff[:, :, 1])
        self.start_cov = self.start_dist <= radius
        self.end_cov = self.end_dist <= radius
        overlap = self.pair_dist <= 2.0 * radius
        np.fill_diagonal(overlap, False)
        self.overlap = overlap
        self.neighbors = [np.flatnonzero(overlap[m]).tolist() for m in range(self.n_gbs)]

    # -- vertex/edge views ------------------------------------------------

    def vertices(self):
        return [START] + [gbs_vertex(m) for m in range(self.n_gbs)] + [END]

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        u, v = sorted((u, v), key=VertexId.sort_key)
        if u.kind == "start" and v.kind == "gbs":
            return bool(self.start_cov[v.index])
        if u.kind == "gbs" and v.kind == "end":
            return bool(self.end_cov[u.index])
        if u.kind == "gbs" and v.kind == "gbs" and u.index != v.index:
            return bool(self.overlap[u.index, v.index])
        return False

    def weight(self, u: VertexId, v: VertexId) -> float:
        if not self.has_edge(u, v):
            raise KeyError(f"no edge {u}-{v}")
        u, v = sorted((u, v), key=VertexId.sort_key)
        if u.kind == "start":
            return float(self.start_dist[v.index])
        if v.kind == "end":
            return float(self.end_dist[u.index])
        return float(self.pair_dist[u.index, v.index])

    def edges(self):
        """All edges as (u, v, weight), deterministically ordered."""
        out = []
        for m in np.flatnonzero(self.start_cov):
            out.append((START, gbs_vertex(int(m)), float(self.start_dist[m])))
        for m in range(self.n_gbs):
            for n in self.neighbors[m]:
                if n > m:
                    out.append((gbs_vertex(m), gbs_vertex(n), float(self.pair_dist[m, n])))
        for m in np.flatnonzero(self.end_cov):
            out.append((gbs_vertex(int(m)), END, float(self.end_dist[m])))
        return out

    def edge_count(self) -> int:
        return len(self.edges())

    def to_edge_list(self) -> str:
        """Debug dump, one line per edge: "u v weight_m"."""
        lines = [f"{u} {v} {w:.6f}" for u, v, w in self.edges()]
        return "\n".join(lines) + ("\n" if lines else "")


def build_feasibility_graph(scenario: Scenario, req: ConnectivityRequirement) -> FeasibilityGraph:
    """O(M^2) construction of the coverage-overlap graph for ``req.radius``."""
    return FeasibilityGraph(scenario, req.radius)


def check_feasibility(graph: FeasibilityGraph) -> bool:
    """True iff the goal is reachable from the start (breadth-first search)."""
    seen = np.zeros(graph.n_gbs, dtype=bool)
    queue = deque(int(m) for m in np.flatnonzero(graph.start_cov))
    for m in queue:
        seen[m] = True
    while queue:
        m = queue.popleft()
        if graph.end_cov[m]:
            return True
        for n in graph.neighbors[m]:
            if not seen[n]:
                seen[n] = True
                queue.append(n)
    return False


def bottleneck_max_snr(scenario: Scenario) -> float:
    """Largest SNR target for which the mission stays feasible.

    Every start/goal edge needs a coverage radius of at least its length and
    every GBS-GBS edge half its length, so the tightest usable radius is the
    minimax of those requirements over start-to-goal paths.  Computed exactly
    with a bottleneck variant of Dijkstra on the complete requirement graph,
    then mapped to an SNR with the shared ~1e-9 radius safety margin so the
    returned target is itself feasible after float round-trips.
    """
    g = FeasibilityGraph(scenario, 0.0)  # radius irrelevant; reuses distances
    pair_req = g.pair_dist / 2.0
    labels = g.start_dist.copy()
    done = np.zeros(scenario.num_gbs, dtype=bool)
    best_end = np.inf
    for _ in range(scenario.num_gbs):
        masked = np.where(done, np.inf, labels)
        m = int(np.argmin(masked))
        if masked[m] >= best_end:
            break
        done[m] = True
        best_end = min(best_end, max(labels[m], float(g.end_dist[m])))
        cand = np.maximum(labels[m], pair_req[m])
        improve = (~done) & (cand < labels)
        labels[improve] = cand[improve]
    return max_target_for_radius(scenario, best_end)


def shortest_association(graph: FeasibilityGraph) -> AssociationSequence:
    """GBS sequence of the minimum-weight start-to-goal path.

    Dijkstra with (distance, path) labels: among equal-weight shortest paths
    the lexicographically smallest vertex sequence wins, so equal inputs give
    identical outputs.  Raises Infeasible when no path exists.
    """
    end_code = graph.n_gbs
    best = {}  # vertex code -> (dist, path tuple)
    start_label = (0.0, (_START,))
    heap = [(0.0, (_START,))]
    best[_START] = start_label
    settled = set()
    while heap:
        dist, path = heapq.heappop(heap)
        v = path[-1]
        if v in settled:
            continue
        settled.add(v)
        if v == end_code:
            return AssociationSequence(indices=path[1:-1])
        if v == _START:
            nbrs = [(int(m), float(graph.start_dist[m])) for m in np.flatnonzero(graph.start_cov)]
        else:
            nbrs = [(n, float(graph.pair_dist[v, n])) for n in graph.neighbors[v]]
            if graph.end_cov[v]:
                nbrs.append((end_code, float(graph.end_dist[v])))
        for n, w in nbrs:
            if n in settled or n in path:
                continue
            label = (dist + w, path + (n,))
            if n not in best or label < best[n]:
                best[n] = label
                heapq.heappush(heap, label)
    raise Infeasible("start and goal are not connected in the coverage graph")
