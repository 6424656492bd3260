"""World geometry, line-of-sight channel model, and SNR arithmetic.

All SNR values are linear ratios inside the package; decibel conversion
happens only at file and CLI boundaries.  GBS indices are 0-based
everywhere.  Distances are meters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import UnachievableSnr


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class Point:
    """Horizontal position in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def as_point(value) -> Point:
    if isinstance(value, Point):
        return value
    x, y = value
    return Point(float(x), float(y))


@dataclass(frozen=True)
class Scenario:
    """A mission: GBS layout, endpoints, altitudes, speed limit, reference SNR.

    ``ref_snr`` is the linear SNR the link would have at 1 m distance; the
    received SNR at horizontal distance r from the serving GBS is
    ``ref_snr / (altitude_gap^2 + r^2)``.  Instances are immutable (frozen,
    with read-only coordinate arrays) and safe to share across workers.
    """

    gbs: tuple
    start: Point
    goal: Point
    uav_altitude: float
    gbs_altitude: float
    max_speed: float
    ref_snr: float

    def __post_init__(self):
        towers = tuple(as_point(g) for g in self.gbs)
        if len(towers) < 1:
            raise ValueError("a scenario needs at least one GBS")
        object.__setattr__(self, "gbs", towers)
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "goal", as_point(self.goal))
        if not self.max_speed > 0:
            raise ValueError("max_speed must be positive")
        if not self.ref_snr > 0:
            raise ValueError("ref_snr must be positive")
        for name in ("uav_altitude", "gbs_altitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        xy = np.array([[p.x, p.y] for p in towers], dtype=float)
        xy.setflags(write=False)
        object.__setattr__(self, "_gbs_xy", xy)

    @property
    def num_gbs(self) -> int:
        return len(self.gbs)

    @property
    def gbs_xy(self) -> np.ndarray:
        """Read-only (M, 2) array of GBS positions."""
        return self._gbs_xy

    @property
    def start_xy(self) -> np.ndarray:
        return self.start.as_array()

    @property
    def goal_xy(self) -> np.ndarray:
        return self.goal.as_array()

    @property
    def altitude_gap_sq(self) -> float:
        return (self.uav_altitude - self.gbs_altitude) ** 2


@dataclass(frozen=True)
class ConnectivityRequirement:
    """An SNR target and the horizontal coverage radius it induces."""

    snr_target: float
    radius: float


def coverage_radius(scenario: Scenario, snr_target: float) -> ConnectivityRequirement:
    """Horizontal radius within which a GBS sustains ``snr_target``.

    Raises UnachievableSnr when the target cannot be met even directly
    above a GBS.
    """
    if not snr_target > 0:
        raise ValueError("snr_target must be positive")
    radicand = scenario.ref_snr / snr_target - scenario.altitude_gap_sq
    if radicand < 0.0:
        raise UnachievableSnr(
            f"SNR target {linear_to_db(snr_target):.2f} dB unreachable: even at zero "
            f"horizontal distance the link gives at most "
            f"{linear_to_db(scenario.ref_snr / scenario.altitude_gap_sq):.2f} dB"
        )
    return ConnectivityRequirement(snr_target=snr_target, radius=math.sqrt(radicand))


def max_target_for_radius(scenario: Scenario, radius: float) -> float:
    """Largest SNR target whose coverage radius still reaches ``radius``.

    Inverse of coverage_radius with a ~1e-9 relative safety margin on the
    radius, so missions remain feasible at the returned target after it
    round-trips through the coverage formula in floating point.
    """
    d_eff = radius * (1.0 + 1e-9) + 1e-12
    return scenario.ref_snr / (d_eff * d_eff + scenario.altitude_gap_sq)


def snr_at(scenario: Scenario, position) -> float:
    """Received SNR (linear) when served by the closest GBS."""
    p = as_point(position)
    d = scenario.gbs_xy - np.array([p.x, p.y])
    min_sq = float(np.min(d[:, 0] ** 2 + d[:, 1] ** 2))
    return scenario.ref_snr / (scenario.altitude_gap_sq + min_sq)


def snr_at_xy(scenario: Scenario, xy: np.ndarray) -> np.ndarray:
    """Vectorized snr_at over an (K, 2) array of positions."""
    diff = xy[:, None, :] - scenario.gbs_xy[None, :, :]
    min_sq = np.min(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2, axis=1)
    return scenario.ref_snr / (scenario.altitude_gap_sq + min_sq)


def closest_gbs(scenario: Scenario, position) -> int:
    """Index of the nearest GBS; ties go to the smallest index."""
    p = as_point(position)
    d = scenario.gbs_xy - np.array([p.x, p.y])
    return int(np.argmin(d[:, 0] ** 2 + d[:, 1] ** 2))


def closest_gbs_xy(scenario: Scenario, xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - scenario.gbs_xy[None, :, :]
    return np.argmin(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2, axis=1)


# --- scenario files -------------------------------------------------------
#
# {"gbs": [[x, y], ...], "start": [x, y], "goal": [x, y],
#  "uav_altitude_m": H, "gbs_altitude_m": HG,
#  "max_speed_mps": V, "ref_snr_db": G}
#
# Coordinates in meters, SNR in dB (files only).

def scenario_to_json(scenario: Scenario) -> dict:
    return {
        "gbs": [[p.x, p.y] for p in scenario.gbs],
        "start": [scenario.start.x, scenario.start.y],
        "goal": [scenario.goal.x, scenario.goal.y],
        "uav_altitude_m": scenario.uav_altitude,
        "gbs_altitude_m": scenario.gbs_altitude,
        "max_speed_mps": scenario.max_speed,
        "ref_snr_db": linear_to_db(scenario.ref_snr),
    }


def scenario_from_json(data: dict) -> Scenario:
    required = {"gbs", "start", "goal", "uav_altitude_m", "gbs_altitude_m",
                "max_speed_mps", "ref_snr_db"}
    missing = required - set(data)
    if missing:
        raise ValueError(f"scenario JSON missing keys: {sorted(missing)}")
    return Scenario(
        gbs=tuple(as_point(g) for g in data["gbs"]),
        start=as_point(data["start"]),
        goal=as_point(data["goal"]),
        uav_altitude=float(data["uav_altitude_m"]),
        gbs_altitude=float(data["gbs_altitude_m"]),
        max_speed=float(data["max_speed_mps"]),
        ref_snr=db_to_linear(float(data["ref_snr_db"])),
    )


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_json(scenario), indent=2, sort_keys=True) + "\n")


def load_scenario(path) -> Scenario:
    return scenario_from_json(json.loads(Path(path).read_text()))
