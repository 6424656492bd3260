"""Numerical tolerances used across the package.

====================  =========  ==================================================
constant              value      used for
====================  =========  ==================================================
DIST_TOL_M            1e-6       absolute slack on distance feasibility checks (m)
ENDPOINT_TOL_M        1e-6       start/goal position match in validation (m)
SNR_REL_TOL           1e-6       relative slack on sampled SNR vs. the target
SPEED_REL_TOL         1e-9       relative slack on the speed limit
BOUNDARY_REL_TOL      1e-9       points that must sit exactly on a coverage circle
PROJECTION_TOL_M      1e-9       stopping rule of the alternating disk projection (m)
REFINE_TOL_M          1e-3       default refinement tolerance on path length (m)
REFINE_MAX_SWEEPS     10000      iteration budget of the handover refinement
====================  =========  ==================================================
"""

DIST_TOL_M = 1e-6
ENDPOINT_TOL_M = 1e-6
SNR_REL_TOL = 1e-6
SPEED_REL_TOL = 1e-9
BOUNDARY_REL_TOL = 1e-9
PROJECTION_TOL_M = 1e-9
REFINE_TOL_M = 1e-3
REFINE_MAX_SWEEPS = 10_000
