"""Built-in example models and constraint sets.

The 6R "desk" robot is a generic articulated-arm stand-in with a
~2.8 m reach, invented for benchmarking this package.  It is NOT the
geometry of any commercial manipulator; all numbers below are
documented example values, chosen so that the benchmark problems are
well conditioned at desk-scale compute budgets.
"""

from __future__ import annotations

import numpy as np

from .constraints import ConstraintSet
from .model import Link, MeasurementConfig, RobotModel

DEG = np.pi / 180.0


def desk_6r() -> RobotModel:
    """Six-revolute benchmark arm: vertical base axis, shoulder/elbow
    pair, roll-pitch-roll wrist, off-axis tool so that the last joint
    stays observable in position measurements."""
    links = (
        Link(length=0.0, twist=0.0, offset=0.0, lift=400.0),
        Link(length=1150.0, twist=90 * DEG, offset=0.0, lift=0.0),
        Link(length=200.0, twist=0.0, offset=90 * DEG, lift=0.0),
        Link(length=0.0, twist=90 * DEG, offset=0.0, lift=900.0),
        Link(length=0.0, twist=-90 * DEG, offset=0.0, lift=0.0),
        Link(length=0.0, twist=90 * DEG, offset=0.0, lift=180.0),
    )
    limits = tuple(
        (-lim * DEG, lim * DEG) for lim in (185.0, 140.0, 155.0, 350.0, 122.0, 350.0)
    )
    return RobotModel(
        links=links,
        joint_limits=limits,
        payload_limit=2700.0,
        tool=(85.0, 0.0, 120.0),
        name="desk-6r",
    )


def desk_6r_constraints() -> ConstraintSet:
    model = desk_6r()
    return ConstraintSet(
        joint_limits=model.joint_limits,
        payload_limit=model.payload_limit,
        floor_z=150.0,
        clearance_radius=50.0,
        box_min=(-3200.0, -3200.0, 150.0),
        box_max=(3200.0, 3200.0, 3600.0),
    )


def desk_6r_test_pose() -> MeasurementConfig:
    """Reference working pose for the benchmark: arm reaching forward
    and down, wrist articulated, away from singularities."""
    q0 = (10.0, 35.0, -40.0, 15.0, -50.0, 20.0)
    return MeasurementConfig(q=tuple(v * DEG for v in q0))


def planar_2r(l1: float = 1000.0, l2: float = 1000.0) -> RobotModel:
    """Planar two-link arm used by the toy problems and the enumeration
    oracle; motion stays in the base xy plane."""
    links = (Link(length=l1), Link(length=l2))
    limits = ((-90 * DEG, 90 * DEG), (-90 * DEG, 90 * DEG))
    return RobotModel(links=links, joint_limits=limits, payload_limit=100.0, name="planar-2r")


def planar_2r_constraints(model: RobotModel | None = None) -> ConstraintSet:
    model = model or planar_2r()
    reach = sum(link.length for link in model.links) + 1.0
    return ConstraintSet(
        joint_limits=model.joint_limits,
        payload_limit=model.payload_limit,
        floor_z=None,
        clearance_radius=None,
        box_min=(-reach, -reach, -reach),
        box_max=(reach, reach, reach),
    )
