"""Serial-manipulator geometry and elasticity.

Forward kinematics, the identification Jacobian (derivatives of the
end-effector position with respect to the calibrated geometry), the
kinematic Jacobian, and the wrench regressor that maps joint compliances
to load-induced end-effector deflections.

Conventions
-----------
Units are millimetres, radians, newtons and newton-millimetres
throughout.  Each revolute joint i contributes the transform

    Rot_x(twist_i) @ Rot_z(q_i + offset_i) @ Trans_x(length_i) @ Trans_z(lift_i)

i.e. a modified-DH style row in its distal variant: the joint rotates
first, then the link extends along its own x axis (`length`, the
calibrated link length) and along the joint axis (`lift`, fixed
geometry).  A fixed `tool` translation maps the last link frame to the
measured end-effector point.

The calibrated parameters are, per joint, the link-length deviation and
the joint-angle offset (2n geometric values) plus the joint compliance
(n elastostatic values).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


def _rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Link:
    """One revolute-joint row of the chain.

    `length` [mm] is the calibrated link length (along the link x axis,
    after the joint rotation); `twist` [rad] reorients the joint axis
    relative to the previous link; `offset` [rad] is a fixed addition to
    the joint variable; `lift` [mm] is a fixed translation along the
    joint axis.
    """

    length: float
    twist: float = 0.0
    offset: float = 0.0
    lift: float = 0.0


@dataclass(frozen=True)
class RobotModel:
    """Immutable nominal description of a serial chain of revolute joints.

    Safe to share across concurrent evaluators; all operations in this
    module are pure functions of (model, arguments).
    """

    links: tuple[Link, ...]
    joint_limits: tuple[tuple[float, float], ...]  # rad, per joint
    payload_limit: float  # N
    tool: tuple[float, float, float] = (0.0, 0.0, 0.0)  # mm, in last link frame
    name: str = ""

    def __post_init__(self):
        if len(self.links) < 1:
            raise InvalidInputError("a robot needs at least one joint")
        if len(self.joint_limits) != len(self.links):
            raise InvalidInputError(
                f"{len(self.joint_limits)} joint limit pairs for "
                f"{len(self.links)} joints"
            )
        for j, (lo, hi) in enumerate(self.joint_limits):
            if not lo < hi:
                raise InvalidInputError(f"joint {j + 1}: limits ({lo}, {hi}) need lo < hi")
        if not self.payload_limit > 0:
            raise InvalidInputError("payload_limit must be positive")
        for j, link in enumerate(self.links):
            if link.length < 0:
                raise InvalidInputError(f"link {j + 1}: negative nominal length")

    @property
    def n_joints(self) -> int:
        return len(self.links)

    @property
    def n_params(self) -> int:
        """Total parameter count before masking: 2n geometric + n compliance."""
        return 3 * len(self.links)

    def check_q(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n_joints,):
            raise InvalidInputError(
                f"joint vector has shape {q.shape}, expected ({self.n_joints},)"
            )
        return q


def param_names(n: int) -> list[str]:
    """Canonical parameter layout: dl1..dln, dq1..dqn, k1..kn."""
    return (
        [f"dl{i + 1}" for i in range(n)]
        + [f"dq{i + 1}" for i in range(n)]
        + [f"k{i + 1}" for i in range(n)]
    )


@dataclass
class ParamVector:
    """Deviations of the calibrated parameters plus an active-parameter mask.

    Layout (length 3n before masking): link-length deviations [mm],
    joint-angle offsets [rad], joint compliances [rad/(N*mm)].
    Reconstruction from masked values zero-fills the inactive entries.
    """

    geometric: np.ndarray  # 2n
    elastostatic: np.ndarray  # n
    mask: np.ndarray  # bool, 3n

    def __post_init__(self):
        self.geometric = np.asarray(self.geometric, dtype=float)
        self.elastostatic = np.asarray(self.elastostatic, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        n = self.elastostatic.shape[0]
        if self.geometric.shape != (2 * n,) or self.mask.shape != (3 * n,):
            raise InvalidInputError(
                "parameter vector blocks are inconsistent: "
                f"geometric {self.geometric.shape}, elastostatic "
                f"{self.elastostatic.shape}, mask {self.mask.shape}"
            )

    @classmethod
    def zeros(cls, n: int, mask: np.ndarray | None = None) -> "ParamVector":
        if mask is None:
            mask = np.ones(3 * n, dtype=bool)
        return cls(np.zeros(2 * n), np.zeros(n), mask)

    @classmethod
    def from_full(cls, values: np.ndarray, mask: np.ndarray | None = None) -> "ParamVector":
        values = np.asarray(values, dtype=float)
        if values.shape[0] % 3 != 0:
            raise InvalidInputError("full parameter vector length must be 3n")
        n = values.shape[0] // 3
        if mask is None:
            mask = np.ones(3 * n, dtype=bool)
        return cls(values[: 2 * n].copy(), values[2 * n :].copy(), mask)

    @classmethod
    def from_masked(cls, values: np.ndarray, mask: np.ndarray) -> "ParamVector":
        """Rebuild a full vector from its active entries; inactive entries
        are exactly zero."""
        mask = np.asarray(mask, dtype=bool)
        values = np.asarray(values, dtype=float)
        if mask.shape[0] % 3 != 0:
            raise InvalidInputError("mask length must be 3n")
        if values.shape[0] != int(mask.sum()):
            raise InvalidInputError(
                f"{values.shape[0]} values for {int(mask.sum())} active parameters"
            )
        full = np.zeros(mask.shape[0])
        full[mask] = values
        return cls.from_full(full, mask)

    @property
    def n(self) -> int:
        return self.elastostatic.shape[0]

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    def full(self) -> np.ndarray:
        return np.concatenate([self.geometric, self.elastostatic])

    def masked(self) -> np.ndarray:
        return self.full()[self.mask]

    def active_names(self) -> list[str]:
        names = param_names(self.n)
        return [nm for nm, on in zip(names, self.mask) if on]

    def length_deviations(self) -> np.ndarray:
        return self.geometric[: self.n]

    def angle_offsets(self) -> np.ndarray:
        return self.geometric[self.n :]


@dataclass(frozen=True)
class MeasurementConfig:
    """One experiment setting: a joint vector and, for loaded experiments,
    the external wrench [Fx, Fy, Fz, Tx, Ty, Tz] in the base frame."""

    q: tuple[float, ...]
    wrench: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.wrench is not None and len(self.wrench) != 6:
            raise InvalidInputError(f"wrench has {len(self.wrench)} entries, expected 6")

    def q_array(self) -> np.ndarray:
        return np.asarray(self.q, dtype=float)

    def wrench_array(self) -> np.ndarray:
        if self.wrench is None:
            return np.zeros(6)
        return np.asarray(self.wrench, dtype=float)


@dataclass
class ChainFrames:
    """Intermediate kinematics of one configuration: joint-axis origins
    and directions, link-frame rotations and the end-effector point."""

    origins: np.ndarray  # (n, 3) joint-axis origins
    axes: np.ndarray  # (n, 3) joint-axis directions (unit)
    x_axes: np.ndarray  # (n, 3) link x axes after the joint rotation
    rotations: np.ndarray  # (n, 3, 3) cumulative rotations after each row
    p: np.ndarray  # (3,) end-effector position


def chain_frames(model: RobotModel, q: np.ndarray, delta: ParamVector | None = None) -> ChainFrames:
    """Walk the chain once, collecting everything the Jacobians and the
    collision geometry need.  Exact nonlinear kinematics, no
    linearization."""
    q = model.check_q(q)
    n = model.n_joints
    if delta is not None and delta.n != n:
        raise InvalidInputError(f"parameter vector sized for {delta.n} joints, model has {n}")
    dl = delta.length_deviations() if delta is not None else np.zeros(n)
    dq = delta.angle_offsets() if delta is not None else np.zeros(n)

    R = np.eye(3)
    p = np.zeros(3)
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    x_axes = np.empty((n, 3))
    rotations = np.empty((n, 3, 3))
    for i, link in enumerate(model.links):
        R = R @ _rot_x(link.twist)
        origins[i] = p
        axes[i] = R[:, 2]
        R = R @ _rot_z(q[i] + link.offset + dq[i])
        x_axes[i] = R[:, 0]
        p = p + R @ np.array([link.length + dl[i], 0.0, link.lift])
        rotations[i] = R
    p = p + R @ np.asarray(model.tool, dtype=float)
    return ChainFrames(origins, axes, x_axes, rotations, p)


def forward_kinematics(model: RobotModel, q: np.ndarray, delta: ParamVector | None = None) -> np.ndarray:
    """End-effector position [mm] for the perturbed geometry.

    Joint angles are q plus the offset deviations in `delta`; link
    lengths are the nominals plus the length deviations.  Compliances in
    `delta` do not enter (no load is applied here).
    """
    return chain_frames(model, q, delta).p


def param_jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Derivative of the end-effector position w.r.t. the 2n geometric
    parameters at the nominal geometry.

    Columns are ordered (dl1..dln, dq1..dqn): length-deviation columns
    are the link x axes, offset columns are the revolute-joint rule
    axis x (p - origin).
    """
    fr = chain_frames(model, q)
    n = model.n_joints
    J = np.empty((3, 2 * n))
    J[:, :n] = fr.x_axes.T
    J[:, n:] = np.cross(fr.axes, fr.p - fr.origins).T
    return J


def kinematic_jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Standard 6xn Jacobian mapping joint rates to the end-effector
    twist: position rows first, orientation rows below."""
    fr = chain_frames(model, q)
    J = np.empty((6, model.n_joints))
    J[:3] = np.cross(fr.axes, fr.p - fr.origins).T
    J[3:] = fr.axes.T
    return J


def wrench_regressor(model: RobotModel, q: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    """Columns mapping each joint compliance to the load-induced
    end-effector displacement: column j is posrows(J_j) * (J_j . w),
    with J_j the full 6-row column of the kinematic Jacobian.

    For any compliance vector k, the product with k equals the position
    rows of J diag(k) J^T w.
    """
    wrench = np.asarray(wrench, dtype=float)
    if wrench.shape != (6,):
        raise InvalidInputError(f"wrench has shape {wrench.shape}, expected (6,)")
    J = kinematic_jacobian(model, q)
    torques = J.T @ wrench  # generalized load seen by each joint
    return J[:3] * torques[np.newaxis, :]


def link_segments(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Joint-to-joint line segments approximating the robot body,
    shape (n, 2, 3): base->joint2, ..., joint(n-1)->jointn, jointn->wrist.

    The final tool segment is intentionally excluded; the applied-load
    line of action is anchored at the tool point, so including it would
    always report zero clearance.
    """
    fr = chain_frames(model, q)
    pts = np.vstack([fr.origins, fr.origins[-1] + fr.rotations[-1] @ np.array(
        [model.links[-1].length, 0.0, model.links[-1].lift])])
    return np.stack([pts[:-1], pts[1:]], axis=1)


def top_sensitivity_mask(model: RobotModel, q0: np.ndarray, count: int) -> np.ndarray:
    """Boolean mask (length 3n) activating the `count` geometric columns
    with the largest sensitivity (column norm) at the reference pose.
    Compliance entries stay inactive."""
    n = model.n_joints
    if not 1 <= count <= 2 * n:
        raise InvalidInputError(f"count must be in 1..{2 * n}")
    norms = np.linalg.norm(param_jacobian(model, q0), axis=0)
    order = np.argsort(norms)[::-1][:count]
    mask = np.zeros(3 * n, dtype=bool)
    mask[order] = True
    return mask
