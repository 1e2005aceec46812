"""Feasibility of a measurement configuration.

A configuration is feasible when every constraint value is <= 0:
joint limits, applied-force magnitude vs. payload, tool clearance above
the floor, clearance between the applied-load line of action and the
robot body, a workspace box, and (optionally) a minimum angle between
the tool axis and the base vertical.

For purely geometric calibration no load is applied, so the payload,
floor and load-clearance entries are identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError, InvalidInputError
from .model import MeasurementConfig, RobotModel, chain_frames, link_segments
from .regression import CalibrationMode

REJECTION_CAP = 1_000_000


@dataclass(frozen=True)
class ConstraintSet:
    """Work-cell feasibility limits. Lengths in mm, angles in rad,
    forces in N. Optional members disable the matching constraint."""

    joint_limits: tuple[tuple[float, float], ...]
    payload_limit: float  # N, max applied-force magnitude
    floor_z: float | None = None  # min tool height above the cell floor
    clearance_radius: float | None = None  # min distance load line <-> robot body
    box_min: tuple[float, float, float] | None = None
    box_max: tuple[float, float, float] | None = None
    min_tool_angle: float | None = None  # rad, tool axis vs. base z

    def __post_init__(self):
        if (self.box_min is None) != (self.box_max is None):
            raise InvalidInputError("workspace box needs both corners")
        if self.box_min is not None:
            lo, hi = np.asarray(self.box_min), np.asarray(self.box_max)
            if not np.all(lo < hi):
                raise InvalidInputError("workspace box corners must satisfy min < max")
            if self.floor_z is not None and not (lo[2] <= self.floor_z <= hi[2]):
                raise InvalidInputError("floor_z must lie inside the workspace box")
        if self.clearance_radius is not None and self.clearance_radius < 0:
            raise InvalidInputError("clearance_radius must be >= 0")


def constraint_labels(cs: ConstraintSet) -> list[str]:
    """Names of the entries returned by constraint_values, in order."""
    n = len(cs.joint_limits)
    labels = [f"q{i + 1}_above_max" for i in range(n)]
    labels += [f"q{i + 1}_below_min" for i in range(n)]
    labels += ["force_over_payload"]
    if cs.floor_z is not None:
        labels += ["tool_below_floor"]
    if cs.clearance_radius is not None:
        labels += ["load_line_too_close"]
    if cs.box_min is not None:
        labels += [f"p{ax}_above_box" for ax in "xyz"]
        labels += [f"p{ax}_below_box" for ax in "xyz"]
    if cs.min_tool_angle is not None:
        labels += ["tool_axis_too_vertical"]
    return labels


def _ray_segment_distance(origin: np.ndarray, direction: np.ndarray,
                          a: np.ndarray, b: np.ndarray) -> float:
    """Minimum distance between the ray origin + t*direction (t >= 0,
    |direction| = 1) and the segment [a, b]."""
    d2 = b - a
    r = a - origin
    e = float(d2 @ d2)
    c = float(direction @ r)
    if e < 1e-12:  # degenerate segment
        t = max(c, 0.0)
        return float(np.linalg.norm(r - t * direction))
    bdot = float(direction @ d2)
    f = float(d2 @ r)
    denom = e - bdot * bdot
    if denom > 1e-12:
        u = np.clip((bdot * c - f) / denom, 0.0, 1.0)
    else:  # parallel
        u = 0.0
    t = bdot * u + c
    if t < 0.0:  # closest ray point clamps to the origin
        t = 0.0
        u = np.clip(f / e, 0.0, 1.0)
    pr = origin + t * direction
    ps = a + u * d2
    return float(np.linalg.norm(pr - ps))


def load_line_clearance(model: RobotModel, config: MeasurementConfig) -> float:
    """Distance between the applied-load line of action (ray from the
    tool point along the force direction) and the robot link segments.
    The tool segment itself is excluded: the line is anchored there.
    With no applied force the distance from the tool point is used."""
    fr = chain_frames(model, config.q_array())
    segs = link_segments(model, config.q_array())
    force = config.wrench_array()[:3]
    norm = np.linalg.norm(force)
    direction = force / norm if norm > 1e-12 else np.zeros(3)
    return min(
        _ray_segment_distance(fr.p, direction, seg[0], seg[1]) for seg in segs
    )


def constraint_values(model: RobotModel, config: MeasurementConfig,
                      cs: ConstraintSet, mode: CalibrationMode) -> np.ndarray:
    """All constraint values for one configuration; feasible iff every
    entry is <= 0. Infeasibility is a value, never an error."""
    q = model.check_q(config.q_array())
    if len(cs.joint_limits) != model.n_joints:
        raise InvalidInputError("constraint set sized for a different joint count")
    lo = np.array([l for l, _ in cs.joint_limits])
    hi = np.array([h for _, h in cs.joint_limits])
    p = chain_frames(model, q).p
    loaded = mode is not CalibrationMode.GEOMETRIC

    values = [q - hi, lo - q]
    force = config.wrench_array()[:3]
    values.append([np.linalg.norm(force) - cs.payload_limit if loaded else 0.0])
    if cs.floor_z is not None:
        values.append([cs.floor_z - p[2] if loaded else 0.0])
    if cs.clearance_radius is not None:
        values.append(
            [cs.clearance_radius - load_line_clearance(model, config) if loaded else 0.0]
        )
    if cs.box_min is not None:
        values.append(p - np.asarray(cs.box_max))
        values.append(np.asarray(cs.box_min) - p)
    if cs.min_tool_angle is not None:
        tool_axis = chain_frames(model, q).rotations[-1][:, 2]
        cos_angle = float(tool_axis @ np.array([0.0, 0.0, 1.0]))
        values.append([cos_angle - np.cos(cs.min_tool_angle)])
    return np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in values])


def max_violation(model: RobotModel, config: MeasurementConfig,
                  cs: ConstraintSet, mode: CalibrationMode) -> float:
    return float(np.max(constraint_values(model, config, cs, mode)))


def is_feasible(model: RobotModel, config: MeasurementConfig,
                cs: ConstraintSet, mode: CalibrationMode, tol: float = 0.0) -> bool:
    return max_violation(model, config, cs, mode) <= tol


def random_direction(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
    return v / n


def sample_config(model: RobotModel, cs: ConstraintSet, mode: CalibrationMode,
                  rng: np.random.Generator) -> MeasurementConfig:
    """Rejection-sample one feasible configuration: joints uniform within
    their limits; in loaded modes the force direction is uniform on the
    sphere at payload magnitude, torque zero. Deterministic given the
    generator state."""
    lo = np.array([l for l, _ in cs.joint_limits])
    hi = np.array([h for _, h in cs.joint_limits])
    loaded = mode is not CalibrationMode.GEOMETRIC
    for _ in range(REJECTION_CAP):
        q = rng.uniform(lo, hi)
        wrench = None
        if loaded:
            force = cs.payload_limit * random_direction(rng)
            wrench = tuple(force) + (0.0, 0.0, 0.0)
        config = MeasurementConfig(q=tuple(q), wrench=wrench)
        if max_violation(model, config, cs, mode) <= 0.0:
            return config
    raise InfeasibleProblemError(
        f"no feasible configuration found in {REJECTION_CAP} draws; "
        "the constraint set appears infeasible"
    )
