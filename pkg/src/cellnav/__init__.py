"""Trajectory planning for cellular-connected UAV missions.

Verify that a mission can keep a minimum link SNR to at least one ground
base station at all times, and compute minimum-completion-time trajectories
under that constraint via coverage graphs, quantized boundary search, and
convex handover refinement.
"""

from .baselines import (EnvelopeBreakpoints, EnvelopeInterval, exhaustive_plan,
                        line_envelope, straight_flight_max_snr, straight_flight_plan)
from .conn_graph import (END, START, FeasibilityGraph, VertexId, bottleneck_max_snr,
                         build_feasibility_graph, check_feasibility, gbs_vertex,
                         shortest_association)
from .errors import (CellnavError, DegenerateSequence, Infeasible, InvalidQuantLevels,
                     NoBoundaryCrossing, NonConvergence, NoOverlap, UnachievableSnr)
from .experiments import (ExperimentConfig, default_snr_grid_db, generate_scenario,
                          run_cdf_experiment, run_time_sweep)
from .method1 import plan_method1, refine_handovers
from .method2 import (QuantizedGraph, build_quantized_graph, method2_gap_bound,
                      plan_method2, quantize_boundary)
from .plan import Plan, make_plan, plan_to_json, save_plan
from .scenario import (ConnectivityRequirement, Point, Scenario, closest_gbs,
                       coverage_radius, db_to_linear, linear_to_db, load_scenario,
                       save_scenario, scenario_from_json, scenario_to_json, snr_at)
from .trajectory import (AssociationSequence, HandoverPoints, Trajectory,
                         ValidationReport, assemble_trajectory, association_upper_bound,
                         candidate_handovers, path_length, remove_loops,
                         snap_to_boundary, validate_trajectory, write_trajectory_csv)

__version__ = "0.1.0"
