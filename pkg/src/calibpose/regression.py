"""Observation blocks and least-squares identification.

Each measurement contributes a 3-row block that maps the unknown
parameter deviations to the observed end-effector displacement: the
geometric columns hold the identification Jacobian, the elastostatic
columns the wrench regressor, and the calibration mode decides which
group is structurally active.  Identification solves the stacked
system in the least-squares sense; the estimator covariance is
sigma^2 times the inverse information matrix.

Mixed engineering units (mm columns vs. rad columns vs. compliance
columns) make the raw normal matrix astronomically ill-scaled, so all
solves and conditioning checks run on a column-equilibrated copy.  The
returned estimates, covariances and traces are identical in exact
arithmetic to the un-scaled formulas and far more accurate in floating
point; reports expose the per-column norms so conditioning sources
stay visible.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, UnidentifiablePlanError
from .model import (
    MeasurementConfig,
    ParamVector,
    RobotModel,
    param_jacobian,
    param_names,
    wrench_regressor,
)

CONDITION_LIMIT = 1e12


class CalibrationMode(enum.Enum):
    GEOMETRIC = "geometric"
    ELASTOSTATIC = "elastostatic"
    COMBINED = "combined"

    @property
    def needs_wrench(self) -> bool:
        return self is not CalibrationMode.GEOMETRIC


@dataclass(frozen=True)
class ExperimentPlan:
    """Ordered list of measurement configurations plus the calibration
    mode they are meant for; the decision variable of the pose-selection
    problem."""

    configs: tuple[MeasurementConfig, ...]
    mode: CalibrationMode

    def __post_init__(self):
        if self.mode.needs_wrench:
            for i, c in enumerate(self.configs):
                if c.wrench is None:
                    raise InvalidInputError(
                        f"configuration {i + 1} lacks a wrench, required in "
                        f"{self.mode.value} mode"
                    )

    @property
    def m(self) -> int:
        return len(self.configs)

    def repeated(self, k: int) -> "ExperimentPlan":
        if k < 1:
            raise InvalidInputError("repetition count must be >= 1")
        return ExperimentPlan(configs=self.configs * k, mode=self.mode)


@dataclass
class ObservationBlock:
    """One measurement's 3 x d sensitivity block (d = active parameters)."""

    matrix: np.ndarray
    q: tuple[float, ...]
    wrench: tuple[float, ...] | None = None
    mask: np.ndarray | None = None  # bool 3n mask the columns were selected by

    def active_names(self) -> list[str] | None:
        if self.mask is None:
            return None
        n = self.mask.shape[0] // 3
        return [nm for nm, on in zip(param_names(n), self.mask) if on]


@dataclass
class MeasurementRecord:
    """One experiment outcome: the configuration and the observed
    end-effector displacement [mm]."""

    config: MeasurementConfig
    dp: np.ndarray

    def __post_init__(self):
        self.dp = np.asarray(self.dp, dtype=float)
        if self.dp.shape != (3,):
            raise InvalidInputError(f"displacement has shape {self.dp.shape}, expected (3,)")
        if not np.all(np.isfinite(self.dp)):
            raise InvalidInputError("displacement contains non-finite values")


def full_observation(model: RobotModel, config: MeasurementConfig,
                     mode: CalibrationMode) -> np.ndarray:
    """Unmasked 3 x 3n block: [geometric | compliance] columns with the
    group not used by `mode` structurally zero."""
    n = model.n_joints
    q = config.q_array()
    out = np.zeros((3, 3 * n))
    if mode in (CalibrationMode.GEOMETRIC, CalibrationMode.COMBINED):
        out[:, : 2 * n] = param_jacobian(model, q)
    if mode in (CalibrationMode.ELASTOSTATIC, CalibrationMode.COMBINED):
        if config.wrench is None:
            raise InvalidInputError(f"{mode.value} mode requires a wrench")
        out[:, 2 * n :] = wrench_regressor(model, q, config.wrench_array())
    return out


def observation_block(model: RobotModel, config: MeasurementConfig,
                      mode: CalibrationMode, mask: np.ndarray | None = None) -> ObservationBlock:
    """Masked observation block for one configuration."""
    n = model.n_joints
    if mask is None:
        mask = np.ones(3 * n, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (3 * n,):
        raise InvalidInputError(f"mask has shape {mask.shape}, expected ({3 * n},)")
    full = full_observation(model, config, mode)
    return ObservationBlock(matrix=full[:, mask], q=config.q, wrench=config.wrench, mask=mask.copy())


def plan_blocks(model: RobotModel, plan: ExperimentPlan,
                mask: np.ndarray | None = None) -> list[ObservationBlock]:
    return [observation_block(model, c, plan.mode, mask) for c in plan.configs]


def stack_blocks(blocks: list[ObservationBlock]) -> np.ndarray:
    if not blocks:
        raise InvalidInputError("no observation blocks given")
    widths = {b.matrix.shape[1] for b in blocks}
    if len(widths) != 1:
        raise InvalidInputError(f"blocks have inconsistent widths {sorted(widths)}")
    return np.vstack([b.matrix for b in blocks])


def _name_directions(vectors: np.ndarray, names: list[str] | None) -> list[str]:
    """Describe near-null-space directions by their dominant parameters."""
    out = []
    for v in vectors.T:
        idx = np.argsort(np.abs(v))[::-1][:3]
        if names is None:
            out.append(" + ".join(f"col{j}*{v[j]:+.2f}" for j in idx if abs(v[j]) > 1e-3))
        else:
            out.append(" + ".join(f"{names[j]}*{v[j]:+.2f}" for j in idx if abs(v[j]) > 1e-3))
    return out


@dataclass
class EquilibratedSystem:
    """Column-equilibrated stacked observation matrix and its SVD."""

    scaled: np.ndarray  # stacked matrix with unit column norms
    col_norms: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray  # V from scaled = U S V^T

    @property
    def condition(self) -> float:
        """Condition number of the equilibrated information matrix."""
        s = self.singular_values
        if s[-1] == 0.0:
            return np.inf
        return float((s[0] / s[-1]) ** 2)


def equilibrate(blocks: list[ObservationBlock]) -> EquilibratedSystem:
    stacked = stack_blocks(blocks)
    col_norms = np.linalg.norm(stacked, axis=0)
    names = blocks[0].active_names()
    dead = np.flatnonzero(col_norms == 0.0)
    if dead.size:
        which = [names[j] if names else f"col{j}" for j in dead]
        raise UnidentifiablePlanError(
            f"parameters with zero sensitivity over the whole plan: {', '.join(which)}",
            null_directions=which,
        )
    scaled = stacked / col_norms
    u, s, vt = np.linalg.svd(scaled, full_matrices=False)
    return EquilibratedSystem(scaled, col_norms, s, vt.T)


def check_identifiable(system: EquilibratedSystem, names: list[str] | None) -> None:
    if system.condition >= CONDITION_LIMIT:
        small = system.singular_values <= system.singular_values[0] * CONDITION_LIMIT ** -0.5
        directions = _name_directions(system.right_vectors[:, small], names)
        raise UnidentifiablePlanError(
            "information matrix numerically singular "
            f"(condition {system.condition:.3e} >= {CONDITION_LIMIT:.0e}); "
            f"unobservable directions: {'; '.join(directions)}",
            null_directions=directions,
        )


@dataclass
class IdentificationResult:
    values: np.ndarray  # estimated active parameters, block order
    estimate: ParamVector | None  # full reconstruction when the mask is known
    residuals: np.ndarray  # stacked dp - B @ estimate, length 3m
    condition: float  # equilibrated information-matrix condition
    column_norms: np.ndarray

    @property
    def residual_rms(self) -> float:
        return float(np.sqrt(np.mean(self.residuals**2)))


def identify(blocks: list[ObservationBlock],
             records: list[MeasurementRecord]) -> IdentificationResult:
    """Least-squares estimate of the active parameters from observed
    displacements, solved orthogonally on the equilibrated system."""
    if len(blocks) != len(records):
        raise InvalidInputError(
            f"{len(blocks)} blocks but {len(records)} measurement records"
        )
    system = equilibrate(blocks)
    names = blocks[0].active_names()
    check_identifiable(system, names)
    rhs = np.concatenate([r.dp for r in records])
    scaled_solution, *_ = np.linalg.lstsq(system.scaled, rhs, rcond=None)
    values = scaled_solution / system.col_norms
    stacked = stack_blocks(blocks)
    residuals = rhs - stacked @ values
    estimate = None
    if blocks[0].mask is not None:
        estimate = ParamVector.from_masked(values, blocks[0].mask)
    return IdentificationResult(
        values=values,
        estimate=estimate,
        residuals=residuals,
        condition=system.condition,
        column_norms=system.col_norms,
    )


def covariance(blocks: list[ObservationBlock], sigma: float) -> np.ndarray:
    """Estimator covariance sigma^2 * inverse(information matrix),
    symmetric positive definite for identifiable plans."""
    if sigma < 0:
        raise InvalidInputError("sigma must be >= 0")
    system = equilibrate(blocks)
    check_identifiable(system, blocks[0].active_names())
    # inv(M) = V diag(s^-2) V^T in equilibrated coordinates, unscaled by D^-1
    v_over_s = system.right_vectors / system.singular_values
    inv_scaled = v_over_s @ v_over_s.T
    inv_full = inv_scaled / np.outer(system.col_norms, system.col_norms)
    cov = sigma**2 * inv_full
    return 0.5 * (cov + cov.T)


# CSV interchange: header q1..qn[, w1..w6], dpx, dpy, dpz.
# Joint angles in degrees (file convention), forces N, torques N*mm,
# displacements mm.

def load_records_csv(path: str | Path, n_joints: int) -> list[MeasurementRecord]:
    path = Path(path)
    records: list[MeasurementRecord] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InvalidInputError(f"{path}: empty CSV")
        q_cols = [f"q{i + 1}" for i in range(n_joints)]
        w_cols = [f"w{i + 1}" for i in range(6)]
        dp_cols = ["dpx", "dpy", "dpz"]
        missing = [c for c in q_cols + dp_cols if c not in reader.fieldnames]
        if missing:
            raise InvalidInputError(f"{path}: missing columns {missing}")
        has_wrench = all(c in reader.fieldnames for c in w_cols)
        for line, row in enumerate(reader, start=2):
            try:
                q = tuple(np.deg2rad(float(row[c])) for c in q_cols)
                wrench = tuple(float(row[c]) for c in w_cols) if has_wrench else None
                dp = np.array([float(row[c]) for c in dp_cols])
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"{path}:{line}: {exc}") from exc
            records.append(MeasurementRecord(MeasurementConfig(q=q, wrench=wrench), dp))
    if not records:
        raise InvalidInputError(f"{path}: no data rows")
    return records
