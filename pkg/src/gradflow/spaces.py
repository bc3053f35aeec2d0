"""Concrete metric spaces: Euclidean R^d and 1-d Wasserstein via quantiles.

A probability measure on the line with finite second moment is stored as
the values ``q_i`` of its quantile function on the midpoint grid
``s_i = (i - 1/2)/M``. The map to quantiles is an isometry onto monotone
functions in L^2(0, 1), so W2 geodesics become straight segments.
"""

from __future__ import annotations

import io
import math

import numpy as np
from scipy.special import ndtri

from .core import as_point

MONOTONE_TOL = 1e-12


class EuclideanSpace:
    """R^d with the Euclidean norm."""

    kind = "euclidean"
    # squared distance = weight * squared coordinate norm
    weight = 1.0

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(dim)

    def __repr__(self):
        return f"EuclideanSpace(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, EuclideanSpace) and other.dim == self.dim

    def __hash__(self):
        return hash(("euclidean", self.dim))

    def point(self, x) -> np.ndarray:
        x = as_point(x)
        self._check(x)
        return x

    def _check(self, x):
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("point has non-finite entries")

    def dist(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
        return float(np.linalg.norm(x - y))

    def dists(self, x, ys) -> np.ndarray:
        """Distances from ``x`` to each row of ``ys``."""
        return np.linalg.norm(np.asarray(ys) - np.asarray(x), axis=-1)

    def norm(self, v) -> float:
        return float(np.linalg.norm(v))

    def inner(self, u, v) -> float:
        return float(np.dot(u, v))

    def intermediate(self, x0, x1, theta: float) -> np.ndarray:
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        if x0.shape != x1.shape:
            raise ValueError("dimension mismatch")
        if theta == 0.0:
            return x0.copy()
        if theta == 1.0:
            return x1.copy()
        return (1.0 - theta) * x0 + theta * x1

    def project(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def format_point(self, x) -> str:
        return ";".join(repr(float(v)) for v in x)


class QuantileSpace:
    """P2(R) represented by quantile values on ``M`` midpoint nodes.

    The distance is the discrete L^2(0, 1) norm
    ``sqrt(mean((q - p)**2))``, which equals W2 between the represented
    empirical-quantile measures. Points are nondecreasing vectors.
    """

    kind = "quantile"

    def __init__(self, M: int):
        if M < 2:
            raise ValueError("quantile grid needs M >= 2")
        self.M = int(M)
        self.dim = self.M
        self.weight = 1.0 / self.M
        self.nodes = (np.arange(1, self.M + 1) - 0.5) / self.M

    def __repr__(self):
        return f"QuantileSpace(M={self.M})"

    def __eq__(self, other):
        return isinstance(other, QuantileSpace) and other.M == self.M

    def __hash__(self):
        return hash(("quantile", self.M))

    def point(self, q) -> np.ndarray:
        q = as_point(q)
        if q.shape != (self.M,):
            raise ValueError(f"expected {self.M} quantile values, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("quantile vector has non-finite entries")
        return self.project(q)

    def project(self, q) -> np.ndarray:
        """Validate monotonicity; clamp violations below ``MONOTONE_TOL``.

        Larger violations raise ``ValueError``.
        """
        q = np.asarray(q, dtype=float)
        drops = np.diff(q)
        worst = -float(drops.min()) if drops.size else 0.0
        if worst <= 0.0:
            return q
        if worst >= MONOTONE_TOL:
            raise ValueError(f"quantile vector decreases by {worst:.3e}")
        return isotonic_projection(q)

    def dist(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.shape[-1] != self.M:
            raise ValueError(f"grid mismatch: {x.shape} vs {y.shape}")
        return float(np.sqrt(np.mean((x - y) ** 2)))

    def dists(self, x, ys) -> np.ndarray:
        return np.sqrt(np.mean((np.asarray(ys) - np.asarray(x)) ** 2, axis=-1))

    def norm(self, v) -> float:
        return float(np.sqrt(np.mean(np.asarray(v) ** 2)))

    def inner(self, u, v) -> float:
        return float(np.dot(u, v) / self.M)

    def intermediate(self, x0, x1, theta: float) -> np.ndarray:
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        if x0.shape != x1.shape:
            raise ValueError("grid mismatch")
        if theta == 0.0:
            return x0.copy()
        if theta == 1.0:
            return x1.copy()
        return (1.0 - theta) * x0 + theta * x1

    def to_euclidean(self, q) -> np.ndarray:
        """Isometric image in R^M (scaling by ``1/sqrt(M)``)."""
        return np.asarray(q, dtype=float) / math.sqrt(self.M)

    def mean(self, q) -> float:
        return float(np.mean(q))

    def variance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return float(np.mean((q - q.mean()) ** 2))

    def format_point(self, x) -> str:
        return ";".join(repr(float(v)) for v in x)


def isotonic_projection(q) -> np.ndarray:
    """L^2 projection onto nondecreasing vectors (pool adjacent violators)."""
    q = np.asarray(q, dtype=float)
    values: list[float] = []
    weights: list[int] = []
    for v in q:
        values.append(float(v))
        weights.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            w = weights[-2] + weights[-1]
            values[-2] = (values[-2] * weights[-2] + values[-1] * weights[-1]) / w
            weights[-2] = w
            values.pop()
            weights.pop()
    return np.repeat(values, weights)


def standard_normal_quantile(s) -> np.ndarray:
    """Inverse of the standard normal CDF (Cephes rational approximation)."""
    return ndtri(np.asarray(s, dtype=float))


def gaussian_quantile(mean: float, variance: float, M: int) -> np.ndarray:
    """Quantile vector of N(mean, variance) on the ``M``-point midpoint grid."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if M < 2:
        raise ValueError("quantile grid needs M >= 2")
    s = (np.arange(1, M + 1) - 0.5) / M
    return mean + math.sqrt(variance) * standard_normal_quantile(s)


def fit_gaussian(q) -> tuple[float, float]:
    """Least-squares ``(mean, variance)`` with ``q ~ mean + sd * z``.

    Exact for vectors built by :func:`gaussian_quantile`.
    """
    q = np.asarray(q, dtype=float)
    z = gaussian_quantile(0.0, 1.0, len(q))
    m = float(q.mean())
    sd = float(np.dot(q - m, z) / np.dot(z, z))
    return m, sd * sd


def dump_quantile(q, fh=None) -> str:
    """Serialize: header ``M=<int>`` then one value per line."""
    q = np.asarray(q, dtype=float)
    text = f"M={len(q)}\n" + "".join(f"{v!r}\n" for v in q.tolist())
    if fh is not None:
        fh.write(text)
    return text


def load_quantile(source) -> np.ndarray:
    """Inverse of :func:`dump_quantile`; accepts text or a file object."""
    fh = io.StringIO(source) if isinstance(source, str) else source
    header = fh.readline().strip()
    if not header.startswith("M="):
        raise ValueError(f"bad quantile header {header!r}")
    M = int(header[2:])
    values = [float(line) for line in fh if line.strip()]
    if len(values) != M:
        raise ValueError(f"header says M={M} but found {len(values)} values")
    return QuantileSpace(M).point(values)
