"""Scalar field models, moving-source schedules and sensor noise.

The field is the unknown objective the robot climbs. Three families are
supported:

``quadratic``
    ``peak - k1/2 * dx**2 - k2/2 * dy**2`` with ``shape = (k1, k2)``.
``gaussian``
    ``peak * exp(-(dx**2 / (2 s1**2) + dy**2 / (2 s2**2)))`` with
    ``shape = (s1, s2)``.
``custom-polynomial``
    ``peak + sum(coef * dx**i * dy**j)`` over ``terms``. No analytic
    gradient is offered for this kind.

``dx, dy`` are offsets from the source position, which may move over
time according to a :class:`SourceSchedule`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import RejectedInputError, UnsupportedOracleError

FIELD_KINDS = ("quadratic", "gaussian", "custom-polynomial")
KIND_CODES = {kind: code for code, kind in enumerate(FIELD_KINDS)}


@dataclass(frozen=True)
class SourceSchedule:
    """Piecewise-constant source position.

    ``waypoints`` is a sequence of ``(time, (x, y))`` pairs. The source
    jumps to each new position at the waypoint time and stays there.
    """

    waypoints: tuple

    def __post_init__(self):
        wps = tuple((float(t), (float(p[0]), float(p[1]))) for t, p in self.waypoints)
        if not wps:
            raise RejectedInputError("schedule needs at least one waypoint")
        if wps[0][0] != 0.0:
            raise RejectedInputError("first waypoint must be at t = 0")
        times = [t for t, _ in wps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise RejectedInputError("waypoint times must be strictly increasing")
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "_times", times)

    @classmethod
    def fixed(cls, center) -> "SourceSchedule":
        return cls(((0.0, tuple(center)),))

    @property
    def times(self) -> list[float]:
        return list(self._times)

    @property
    def relocation_times(self) -> list[float]:
        return self._times[1:]

    def position(self, t: float) -> tuple[float, float]:
        return source_position(self, t)


def source_position(schedule: SourceSchedule, t: float) -> tuple[float, float]:
    """Position of the last waypoint whose time is <= ``t``."""
    if not t >= 0.0:
        raise RejectedInputError(f"time must be non-negative, got {t}")
    i = bisect.bisect_right(schedule._times, t) - 1
    return schedule.waypoints[i][1]


@dataclass(frozen=True)
class FieldModel:
    kind: str
    peak_value: float
    schedule: SourceSchedule
    shape: tuple = (1.0, 1.0)
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise RejectedInputError(f"unknown field kind {self.kind!r}; expected one of {FIELD_KINDS}")
        shape = tuple(float(s) for s in self.shape)
        if len(shape) != 2 or not all(s > 0 for s in shape):
            raise RejectedInputError("field shape must be two positive numbers")
        object.__setattr__(self, "shape", shape)
        terms = tuple((int(i), int(j), float(c)) for i, j, c in self.terms)
        if self.kind == "custom-polynomial" and not terms:
            raise RejectedInputError("custom-polynomial field needs at least one term")
        if any(i < 0 or j < 0 for i, j, _ in terms):
            raise RejectedInputError("polynomial exponents must be non-negative")
        object.__setattr__(self, "terms", terms)

    @property
    def analytic(self) -> bool:
        return self.kind != "custom-polynomial"

    def center(self, t: float) -> tuple[float, float]:
        return source_position(self.schedule, t)

    def kernel_args(self, t: float) -> tuple:
        """Flat parameters for the compiled integration kernel at time ``t``."""
        cx, cy = self.center(t)
        poly = np.array(self.terms, dtype=np.float64).reshape(-1, 3)
        return (KIND_CODES[self.kind], float(self.peak_value), cx, cy, self.shape[0], self.shape[1], poly)


def field_value(kind: int, peak: float, cx: float, cy: float, s1: float, s2: float, poly, x: float, y: float) -> float:
    # Arithmetic order here is mirrored exactly by the compiled kernel.
    dx = x - cx
    dy = y - cy
    if kind == 0:
        return peak - 0.5 * s1 * dx * dx - 0.5 * s2 * dy * dy
    if kind == 1:
        return peak * math.exp(-(dx * dx / (2.0 * s1 * s1) + dy * dy / (2.0 * s2 * s2)))
    total = peak
    for i, j, coef in poly:
        total = total + coef * dx ** float(i) * dy ** float(j)
    return total


def _check_pos(pos) -> tuple[float, float]:
    x, y = float(pos[0]), float(pos[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise RejectedInputError(f"position must be finite, got {pos!r}")
    return x, y


def sample_field(field: FieldModel, pos, t: float = 0.0) -> float:
    """Noise-free value of ``field`` at ``pos`` with the source placed as of time ``t``."""
    x, y = _check_pos(pos)
    kind, peak, cx, cy, s1, s2, _ = field.kernel_args(t)
    return field_value(kind, peak, cx, cy, s1, s2, field.terms, x, y)


def oracle_gradient(field: FieldModel, pos, t: float = 0.0) -> np.ndarray:
    """Exact gradient, for tests and reference systems only.

    The controller never sees this.
    """
    if not field.analytic:
        raise UnsupportedOracleError(f"no analytic gradient for {field.kind!r} fields")
    x, y = _check_pos(pos)
    cx, cy = field.center(t)
    dx, dy = x - cx, y - cy
    s1, s2 = field.shape
    if field.kind == "quadratic":
        return np.array([-s1 * dx, -s2 * dy])
    value = sample_field(field, (x, y), t)
    return np.array([-dx / (s1 * s1) * value, -dy / (s2 * s2) * value])


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise RejectedInputError("noise sigma must be finite and >= 0")

    def stream(self) -> "NoiseStream":
        return NoiseStream(self)


@dataclass
class NoiseStream:
    """The per-run sequence of measurement-noise draws."""

    model: NoiseModel
    _rng: np.random.Generator = dc_field(init=False, repr=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.model.seed)

    def draw(self) -> float:
        if self.model.sigma == 0.0:
            return 0.0
        return float(self.model.sigma * self._rng.standard_normal())


def measure(field: FieldModel, noise: NoiseStream, pos, t: float = 0.0) -> float:
    """One noisy sensor reading; consumes one draw from ``noise``."""
    return sample_field(field, pos, t) + noise.draw()
