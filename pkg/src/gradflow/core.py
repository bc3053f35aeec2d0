"""Shared scalar helpers, trajectories, audit records and curve estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

CONTINUOUS = "continuous-samples"
PIECEWISE_CONSTANT = "piecewise-constant"

_SERIES_THRESHOLD = 1e-8


def exp_primitive(lam: float, t: float) -> float:
    r"""Return :math:`\int_0^t e^{\lambda r}\,dr`.

    Equals ``(exp(lam*t) - 1)/lam`` and ``t`` for ``lam == 0``. A series
    branch is used when ``|lam*t|`` is tiny to avoid cancellation.
    """
    if t < 0:
        raise ValueError(f"exp_primitive needs t >= 0, got {t}")
    x = lam * t
    if abs(x) < _SERIES_THRESHOLD:
        return t * (1.0 + x / 2.0 + x * x / 6.0)
    return math.expm1(x) / lam


def as_point(x: Any) -> np.ndarray:
    """Coerce scalars and sequences to a 1-d float array."""
    return np.atleast_1d(np.asarray(x, dtype=float)).copy()


@dataclass(frozen=True)
class EnergySystem:
    """A metric space, an energy on it and a convexity modulus."""

    space: Any
    functional: Any
    lam: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValueError("lambda must be finite")


class Trajectory:
    """Time-stamped samples of a curve in one metric space.

    ``kind`` is either ``"continuous-samples"`` (a sampled continuous curve)
    or ``"piecewise-constant"`` (the output of a discrete scheme, constant
    on each interval ``((n-1)tau, n tau]``).
    """

    def __init__(self, times, points, space, kind: str = CONTINUOUS):
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if times.ndim != 1 or len(times) < 1:
            raise ValueError("times must be a nonempty 1-d sequence")
        if len(times) != len(points):
            raise ValueError(f"{len(times)} times but {len(points)} points")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if times[0] < 0:
            raise ValueError("times must be nonnegative")
        if kind not in (CONTINUOUS, PIECEWISE_CONSTANT):
            raise ValueError(f"unknown trajectory kind {kind!r}")
        self.times = times
        self.points = points
        self.space = space
        self.kind = kind
        self.times.setflags(write=False)
        self.points.setflags(write=False)

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return self.points[i]

    def dist(self, i: int, j: int) -> float:
        return self.space.dist(self.points[i], self.points[j])

    def reversed_time(self) -> "Trajectory":
        """Same samples traversed backwards on the same time grid."""
        return Trajectory(self.times, self.points[::-1], self.space, self.kind)

    @classmethod
    def from_flow(cls, flow, u0, times, space) -> "Trajectory":
        """Sample ``flow(t, u0)`` at the given times."""
        u0 = as_point(u0)
        pts = [as_point(flow(t, u0)) for t in times]
        return cls(times, np.array(pts), space)


def metric_derivative(traj: Trajectory, index: int) -> float:
    """Finite-difference estimate of the metric speed at a sample.

    Central difference in the interior, one-sided at the two ends.
    """
    if traj.kind != CONTINUOUS:
        raise ValueError("metric derivative needs continuous samples")
    n = len(traj)
    if n < 2:
        raise ValueError("need at least two samples")
    if index < 0:
        index += n
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for {n} samples")
    lo = max(index - 1, 0)
    hi = min(index + 1, n - 1)
    return traj.dist(lo, hi) / (traj.times[hi] - traj.times[lo])


def metric_derivatives(traj: Trajectory) -> np.ndarray:
    return np.array([metric_derivative(traj, i) for i in range(len(traj))])


def curve_length(traj: Trajectory) -> float:
    """Chordal length: sum of distances between consecutive samples."""
    if traj.kind != CONTINUOUS:
        raise ValueError("curve length needs continuous samples")
    return float(sum(traj.dist(i, i + 1) for i in range(len(traj) - 1)))


@dataclass
class AuditSample:
    params: dict
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs


@dataclass
class AuditReport:
    """Pass/fail record for one inequality checked on a set of samples.

    The inequality is ``lhs <= rhs``; a sample passes when
    ``lhs - rhs <= tolerance``. Reports whose hypotheses do not hold are
    marked ``applicable=False`` and count as passed.
    """

    tag: str
    tolerance: float
    samples: list = field(default_factory=list)
    applicable: bool = True
    note: str = ""

    def add(self, lhs: float, rhs: float, **params) -> None:
        self.samples.append(AuditSample(params, float(lhs), float(rhs)))

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s.residual for s in self.samples], dtype=float)

    @property
    def max_residual(self) -> float:
        if not self.samples:
            return -math.inf
        r = self.residuals
        if np.any(np.isnan(r)):
            return math.nan
        return float(np.max(r))

    @property
    def passed(self) -> bool:
        if not self.applicable:
            return True
        r = self.residuals
        return not np.any(np.isnan(r)) and bool(np.all(r <= self.tolerance))

    def __bool__(self):
        return self.passed

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if not self.applicable:
            status = "N/A"
        lines = [
            f"tag: {self.tag}",
            f"pass: {status}",
            f"max_residual: {self.max_residual:.6e}",
            f"tolerance: {self.tolerance:.6e}",
            f"samples: {len(self.samples)}",
        ]
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines) + "\n"


class AuditSuite(list):
    """A list of reports that passes when every member passes."""

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self)

    def __bool__(self):
        return self.passed

    def by_tag(self, tag: str) -> AuditReport:
        for r in self:
            if r.tag == tag:
                return r
        raise KeyError(tag)

    def to_text(self) -> str:
        return "\n".join(r.to_text() for r in self)


def pairs(n: int, max_pairs: int | None = None) -> list[tuple[int, int]]:
    """Index pairs ``i < j`` over ``n`` samples, thinned to about ``max_pairs``."""
    idx = list(range(n))
    if max_pairs is not None and n * (n - 1) // 2 > max_pairs:
        m = max(2, int(math.sqrt(2 * max_pairs)))
        idx = sorted(set(np.linspace(0, n - 1, m).round().astype(int).tolist()))
    return [(a, b) for k, a in enumerate(idx) for b in idx[k + 1:]]


def ceil_index(t: float, tau: float) -> int:
    """Smallest integer ``k`` with ``k * tau >= t`` (robust to round-off)."""
    r = t / tau
    k = math.ceil(r - 1e-9 * max(1.0, abs(r)))
    return max(k, 0)


def gauss_legendre(fn, a: float, b: float, nodes: int = 32) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * sum(wi * fn(mid + half * xi) for xi, wi in zip(x, w)))


def trapezoid(y: Sequence[float], x: Sequence[float]) -> float:
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
