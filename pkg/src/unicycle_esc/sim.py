"""Closed-loop run engine.

Each measurement window ``[t1, t2]`` of length ``dt``:

1. integrate the plant with RK4 substeps, the field read continuously
   along the path plus the noise sample taken at ``t1``;
2. re-anchor and predict the estimator over the window;
3. sample the sensor at ``t2`` and run the measurement update, unless
   the heading sits too close to an axis;
4. refresh the amplitude target ``J`` and apply the stop/resume rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .controller import EscParams, JSmoother, PlantState, amplitude_rate, commanded_velocity, compute_J, heading, washout_rate
from .errors import ConfigError, DivergenceError
from .field import FieldModel, NoiseModel, sample_field
from .gekf import GekfEstimate, MeasurementContext, anchor_window, predict, update

SCHEMA = "unicycle-esc/trajectory/1"
TRAJECTORY_COLUMNS = (
    "t", "x", "y", "theta", "e", "a", "v", "f_true", "f_meas", "J",
    "xbar1", "xbar2", "xbar3", "xbar4", "xbar5",
    "P11", "P22", "P33", "P44", "P55",
    "innovation", "update_skipped", "stopped", "source_x", "source_y",
)  # fmt: skip
_COL = {name: i for i, name in enumerate(TRAJECTORY_COLUMNS)}
ESTIMATOR_COLUMNS = ("J", "xbar1", "xbar2", "xbar3", "xbar4", "xbar5", "P11", "P22", "P33", "P44", "P55", "innovation", "update_skipped")
VARIANTS = ("gekf", "baseline", "lbs-reference")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    field: FieldModel
    noise: NoiseModel
    params: EscParams
    initial_position: tuple
    horizon: float
    variant: str = "gekf"
    seed: int = 0
    initial_washout: float | None = None
    min_substeps: int = 1
    steps_per_period: int = 40
    workspace: float = 1e3

    def __post_init__(self):
        pos = tuple(float(v) for v in self.initial_position)
        object.__setattr__(self, "initial_position", pos)
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive")
        if len(pos) != 2 or not all(math.isfinite(v) and abs(v) < self.workspace for v in pos):
            raise ConfigError("initial_position must be two finite numbers inside the workspace")
        n = self.horizon / self.params.dt_meas
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise ConfigError("horizon must be a whole number of measurement intervals (dt)")
        if self.min_substeps < 1 or self.steps_per_period < 1:
            raise ConfigError("integrator substep counts must be >= 1")
        if self.initial_washout is not None and not math.isfinite(self.initial_washout):
            raise ConfigError("initial_washout must be finite")

    @property
    def n_windows(self) -> int:
        return int(round(self.horizon / self.params.dt_meas))

    @property
    def n_inner(self) -> int:
        """RK4 steps per measurement window."""
        p = self.params
        per_period = p.excitation_period / self.steps_per_period
        return max(self.min_substeps, math.ceil(p.dt_meas / per_period - 1e-9))

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def with_params(self, **changes) -> "ScenarioConfig":
        return replace(self, params=replace(self.params, **changes))


def _fmt(value: float) -> str:
    if math.isnan(value):
        return ""
    return f"{value:.9g}"


class Trajectory:
    """Table of sampled run records, one row per measurement time."""

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(TRAJECTORY_COLUMNS):
            raise ValueError(f"expected (n, {len(TRAJECTORY_COLUMNS)}) array, got {data.shape}")
        self.data = data

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, _COL[name]]

    @property
    def positions(self) -> np.ndarray:
        return self.data[:, [_COL["x"], _COL["y"]]]

    @property
    def sources(self) -> np.ndarray:
        return self.data[:, [_COL["source_x"], _COL["source_y"]]]

    def rows_as_text(self) -> list[list[str]]:
        return [[_fmt(v) for v in row] for row in self.data.tolist()]

    def rounded(self) -> "Trajectory":
        """Values exactly as they read back from the CSV file."""
        return Trajectory(np.array([[float(s) if s else math.nan for s in row] for row in self.rows_as_text()]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {SCHEMA}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRAJECTORY_COLUMNS)
            w.writerows(self.rows_as_text())

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            first = fh.readline().strip()
            if first != f"# {SCHEMA}":
                raise ValueError(f"{path}: unsupported trajectory schema line {first!r}")
            rows = list(csv.reader(fh))
        if tuple(rows[0]) != TRAJECTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected column header")
        return cls(np.array([[float(s) if s else math.nan for s in r] for r in rows[1:]], dtype=float).reshape(-1, len(TRAJECTORY_COLUMNS)))


def plant_rates(state: PlantState, f_meas: float, J: float, p: EscParams) -> np.ndarray:
    """``(x', y', e', a')``; the velocity is zero while stopped."""
    v = commanded_velocity(f_meas, state, p)
    th = p.Omega * state.t
    return np.array([v * math.cos(th), v * math.sin(th), washout_rate(state.e, f_meas, p.h), amplitude_rate(state.a, J, p.lam)])


def stop_resume(state: PlantState, p: EscParams) -> PlantState:
    """Halt at ``a <= epsilon``; resume once ``a >= 2 epsilon``."""
    if not state.stopped and state.a <= p.epsilon:
        return replace(state, stopped=True)
    if state.stopped and state.a >= 2.0 * p.epsilon:
        return replace(state, stopped=False)
    return state


class Simulation:
    """One closed-loop run. Owns all mutable state of that run."""

    def __init__(self, config: ScenarioConfig):
        if config.variant == "lbs-reference":
            raise ConfigError("use lbs.reference_for(config) for the lbs-reference variant")
        self.config = config
        p = config.params
        self.use_filter = config.variant == "gekf"
        self.noise = NoiseModel(config.noise.sigma, config.seed).stream()
        x0, y0 = config.initial_position
        f_true = sample_field(config.field, (x0, y0), 0.0)
        self._nu = self.noise.draw()
        f_meas = f_true + self._nu
        if config.initial_washout is not None:
            e0 = config.initial_washout
        else:
            e0 = f_meas / p.h if p.h > 0 else 0.0
        self.state = PlantState(x0, y0, e0, p.a0, 0.0, False)
        self.y_prev = f_meas - e0 * p.h
        self.est = GekfEstimate.initial(p, self.y_prev) if self.use_filter else None
        # Amplitude target starts at a0: no adaptation before the first update.
        self.smoother = JSmoother(p.rotation_period, initial=p.a0)
        self.J = p.a0
        self.k = 0
        self.n_inner = config.n_inner
        self._buf = np.empty(4)
        self.last_record = self._record(f_true, f_meas)

    def _record(self, f_true: float, f_meas: float) -> np.ndarray:
        s, p = self.state, self.config.params
        row = np.full(len(TRAJECTORY_COLUMNS), math.nan)
        sx, sy = self.config.field.center(s.t)
        row[[0, 1, 2, 3, 4, 5, 6, 7, 8]] = [s.t, s.x, s.y, heading(p.Omega, s.t), s.e, s.a, commanded_velocity(f_meas, s, p), f_true, f_meas]
        row[_COL["stopped"]] = float(s.stopped)
        row[_COL["source_x"]] = sx
        row[_COL["source_y"]] = sy
        if self.use_filter:
            est = self.est
            row[_COL["J"]] = self.J
            row[10:15] = est.xbar
            row[15:20] = np.diag(est.P)
            row[_COL["innovation"]] = est.innovation
            row[_COL["update_skipped"]] = float(est.skipped)
        return row

    @property
    def done(self) -> bool:
        return self.k >= self.config.n_windows

    def step(self) -> np.ndarray:
        cfg, p = self.config, self.config.params
        if self.done:
            raise RuntimeError("horizon reached")
        t1 = self.k * p.dt_meas
        t2 = (self.k + 1) * p.dt_meas
        s = self.state
        buf = self._buf
        buf[0], buf[1], buf[2], buf[3] = s.x, s.y, s.e, s.a
        lam = p.lam if self.use_filter else 0.0
        kernels.integrate_window(
            buf, t1, self.n_inner, p.dt_meas / self.n_inner, p.omega, p.c, p.Omega, lam, p.h,
            self.J, s.stopped, self._nu, *cfg.field.kernel_args(t1),
        )
        x, y, e, a = (float(v) for v in buf)
        if not all(math.isfinite(v) for v in (x, y, e, a)) or abs(x) > cfg.workspace or abs(y) > cfg.workspace:
            raise DivergenceError(f"state left the workspace at t = {t2:.6g}: x={x}, y={y}, e={e}, a={a}", self.last_record)
        a = max(a, 0.0)

        self._nu = self.noise.draw()
        f_true = sample_field(cfg.field, (x, y), t2)
        f_meas = f_true + self._nu
        y_meas = f_meas - e * p.h

        if self.use_filter:
            ctx = MeasurementContext.for_window(t1, s.a, p)
            est = anchor_window(self.est, self.y_prev) if p.anchor else self.est
            est = predict(est, p.dt_meas, p.n_substeps, p.covariance_step)
            if ctx.singular(p.singular_guard):
                est.skipped = True
                est.innovation = math.nan
            else:
                est = update(est, y_meas, ctx, p)
            self.est = est
            self.J = self.smoother.update(compute_J(est.xbar, a, p), p.dt_meas)

        self.y_prev = y_meas
        self.state = stop_resume(PlantState(x, y, e, a, t2, s.stopped), p)
        self.k += 1
        self.last_record = self._record(f_true, f_meas)
        return self.last_record

    def run(self) -> Trajectory:
        rows = [self.last_record]
        while not self.done:
            rows.append(self.step())
        return Trajectory(np.array(rows))


@dataclass
class RunResult:
    config: ScenarioConfig
    trajectory: Trajectory
    metrics: "RunMetrics"


def run(config: ScenarioConfig, radius: float | None = None) -> RunResult:
    """Run a scenario to its horizon and score it.

    Metrics are computed from the trajectory as serialised, so rescoring
    the CSV file gives identical numbers.
    """
    from .lbs import reference_for
    from .metrics import compute_metrics

    if config.variant == "lbs-reference":
        traj = reference_for(config)
    else:
        traj = Simulation(config).run()
    traj = traj.rounded()
    return RunResult(config, traj, compute_metrics(traj, config, radius=radius))
