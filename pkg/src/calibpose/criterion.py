"""Test-pose accuracy criterion.

The quality of a calibration plan is measured by the predicted RMS
end-effector position error at one or more *test poses* after the
identified parameters have been used for compensation:

    accuracy^2 = sigma^2 * mean over test poses of
                 trace(B0 @ inverse(information matrix) @ B0^T)

where B0 is the test-pose observation block and the information matrix
sums B^T B over the plan.  Reports expose this quantity as `rho0` [mm].

Aggregation over a test-pose set is the arithmetic mean of the squared
accuracy, which preserves the mean-square-error meaning of the
criterion.  The matrix inverse is never formed explicitly: the trace is
evaluated through an orthogonal factorization of the column-equilibrated
stacked observation matrix (see `regression`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnidentifiablePlanError
from .model import MeasurementConfig, RobotModel
from .regression import (
    CONDITION_LIMIT,
    CalibrationMode,
    ExperimentPlan,
    full_observation,
    plan_blocks,
)


@dataclass(frozen=True)
class TestPoseSet:
    """Configurations (and loadings) where post-calibration accuracy
    matters most; they weight the covariance trace."""

    poses: tuple[MeasurementConfig, ...]

    def __post_init__(self):
        if not self.poses:
            raise InvalidInputError("test-pose set must not be empty")

    @classmethod
    def single(cls, config: MeasurementConfig) -> "TestPoseSet":
        return cls(poses=(config,))

    def stack(self, model: RobotModel, mode: CalibrationMode,
              mask: np.ndarray | None = None) -> np.ndarray:
        """Stacked 3t x d test blocks, masked like the plan blocks."""
        n = model.n_joints
        if mask is None:
            mask = np.ones(3 * n, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        rows = []
        for i, pose in enumerate(self.poses):
            if mode.needs_wrench and pose.wrench is None:
                raise InvalidInputError(
                    f"test pose {i + 1} lacks a wrench, required in {mode.value} mode"
                )
            rows.append(full_observation(model, pose, mode)[:, mask])
        return np.vstack(rows)


@dataclass
class InfoMatrix:
    """Sum of B^T B over the plan plus the measurement count."""

    matrix: np.ndarray
    m: int

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def information_matrix(model: RobotModel, plan: ExperimentPlan,
                       mask: np.ndarray | None = None) -> InfoMatrix:
    """Exact information matrix of a plan (pairwise-summed for
    reproducible floating-point additivity)."""
    if plan.m == 0:
        raise InvalidInputError("plan must contain at least one configuration")
    blocks = plan_blocks(model, plan, mask)
    products = np.stack([b.matrix.T @ b.matrix for b in blocks])
    return InfoMatrix(matrix=np.sum(products, axis=0), m=plan.m)


def accuracy_from_stacks(plan_stack: np.ndarray, test_stack: np.ndarray,
                         sigma: float, n_test_poses: int) -> float:
    """Core evaluation shared by the public criterion and the optimizer:
    sigma * sqrt(mean trace), on column-equilibrated factorizations."""
    if sigma < 0:
        raise InvalidInputError("sigma must be >= 0")
    col_norms = np.linalg.norm(plan_stack, axis=0)
    if np.any(col_norms == 0.0):
        dead = np.flatnonzero(col_norms == 0.0)
        raise UnidentifiablePlanError(
            f"plan has zero sensitivity in parameter columns {dead.tolist()}",
            null_directions=[f"col{j}" for j in dead],
        )
    scaled = plan_stack / col_norms
    u, s, vt = np.linalg.svd(scaled, full_matrices=False)
    if s[-1] == 0.0 or (s[0] / s[-1]) ** 2 >= CONDITION_LIMIT:
        cond = np.inf if s[-1] == 0.0 else float((s[0] / s[-1]) ** 2)
        raise UnidentifiablePlanError(
            f"information matrix numerically singular (condition {cond:.3e})"
        )
    weighted = (test_stack / col_norms) @ (vt.T / s)
    mean_trace = float(np.sum(weighted**2)) / n_test_poses
    return float(sigma * np.sqrt(mean_trace))


def compensation_accuracy(model: RobotModel, plan: ExperimentPlan, test: TestPoseSet,
                          sigma: float, mask: np.ndarray | None = None) -> float:
    """Predicted RMS end-effector error [mm] at the test poses after
    compensation with parameters identified from `plan`.

    Raises UnidentifiablePlanError when the plan's information matrix is
    singular for the mask (the measure is +infinity conceptually; a
    number is never returned in that case).
    """
    if plan.m == 0:
        raise InvalidInputError("plan must contain at least one configuration")
    blocks = plan_blocks(model, plan, mask)
    plan_stack = np.vstack([b.matrix for b in blocks])
    test_stack = test.stack(model, plan.mode, mask)
    return accuracy_from_stacks(plan_stack, test_stack, sigma, len(test.poses))


def repeated_plan_accuracy(base_accuracy: float, repeats: int) -> float:
    """Accuracy of a plan repeated `repeats` times: base / sqrt(repeats).
    Exactly equals evaluating the repeated plan directly."""
    if not isinstance(repeats, (int, np.integer)) or repeats < 1:
        raise InvalidInputError(f"repetition count must be an integer >= 1, got {repeats!r}")
    if not base_accuracy > 0:
        raise InvalidInputError("base accuracy must be positive")
    return float(base_accuracy / np.sqrt(repeats))


def plan_condition(model: RobotModel, plan: ExperimentPlan,
                   mask: np.ndarray | None = None) -> float:
    """Condition number of the equilibrated information matrix (the
    quantity gated against the identifiability limit)."""
    blocks = plan_blocks(model, plan, mask)
    stacked = np.vstack([b.matrix for b in blocks])
    col_norms = np.linalg.norm(stacked, axis=0)
    if np.any(col_norms == 0.0):
        return float("inf")
    s = np.linalg.svd(stacked / col_norms, compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float((s[0] / s[-1]) ** 2)
