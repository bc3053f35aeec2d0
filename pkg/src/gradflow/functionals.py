"""Energy functionals, slopes and Moreau-Yosida values.

Every functional works in coordinates: ``partial`` is the coordinate
gradient and ``hessian`` the coordinate Hessian. The metric gradient in a
space with ``dist**2 = weight * |.|**2`` is ``partial / weight``; the
resolvent solver does that conversion.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .core import AuditReport, as_point

INF = math.inf


class Functional:
    """Base class. Subclasses override what they can compute exactly."""

    name = "functional"
    lambda_hint = 0.0
    # Hessian layout: "dense" (d x d) or "banded" (3 x M tridiagonal, solve_banded order)
    hessian_layout = "dense"
    convex = True

    def value(self, x) -> float:
        raise NotImplementedError

    def values(self, X) -> np.ndarray:
        return np.array([self.value(x) for x in np.asarray(X, dtype=float)])

    def __call__(self, x) -> float:
        return self.value(x)

    def in_domain(self, x) -> bool:
        return self.value(x) < INF

    def partial(self, x) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no gradient oracle")

    def hessian(self, x):
        raise NotImplementedError(f"{self.name} has no Hessian oracle")

    def prox(self, tau: float, x, weight: float = 1.0):
        """Closed-form minimizer of ``weight|y-x|^2/(2 tau) + phi(y)`` or None."""
        return None

    def analytic_slope(self, x, space) -> float | None:
        """Exact metric slope, or None when no formula is available."""
        return None

    def minimizer(self):
        return None

    @property
    def tau_max(self) -> float:
        """Largest admissible proximal step (10% margin under ``-1/lambda``)."""
        if self.lambda_hint < 0:
            return 0.9 / (-self.lambda_hint)
        return INF


def _gradient_slope(f: Functional, x, space) -> float:
    g = f.partial(x) / space.weight
    return space.norm(g)


class Quadratic(Functional):
    """``phi(x) = x.A.x/2 - b.x`` with ``A`` symmetric positive semidefinite."""

    name = "quadratic"

    def __init__(self, A=1.0, b=0.0, dim: int | None = None):
        A = np.asarray(A, dtype=float)
        if A.ndim == 0:
            d = dim or (np.atleast_1d(b).size)
            A = A * np.eye(d)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be a square matrix or a scalar")
        if not np.allclose(A, A.T):
            raise ValueError("A must be symmetric")
        eig = np.linalg.eigvalsh(A)
        if eig.min() < -1e-12:
            raise ValueError("A must be positive semidefinite")
        self.A = A
        self.b = np.broadcast_to(np.asarray(b, dtype=float), (A.shape[0],)).copy()
        self.lambda_hint = float(max(eig.min(), 0.0))
        self.dim = A.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.A @ x - self.b @ x)

    def values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) - X @ self.b

    def partial(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) - self.b

    def hessian(self, x):
        return self.A

    def prox(self, tau, x, weight=1.0):
        x = np.asarray(x, dtype=float)
        lhs = weight * np.eye(self.dim) + tau * self.A
        return np.linalg.solve(lhs, weight * x + tau * self.b)

    def analytic_slope(self, x, space) -> float:
        return _gradient_slope(self, x, space)

    def minimizer(self):
        if self.lambda_hint > 0:
            return np.linalg.solve(self.A, self.b)
        return None


class AbsNorm(Functional):
    """``phi(x) = w * |x|_1``."""

    name = "abs"

    def __init__(self, w: float = 1.0):
        if not w > 0:
            raise ValueError("weight must be positive")
        self.w = float(w)
        self.lambda_hint = 0.0

    def value(self, x) -> float:
        return self.w * float(np.sum(np.abs(x)))

    def values(self, X) -> np.ndarray:
        return self.w * np.sum(np.abs(np.asarray(X, dtype=float)), axis=-1)

    def partial(self, x) -> np.ndarray:
        return self.w * np.sign(np.asarray(x, dtype=float))

    def prox(self, tau, x, weight=1.0):
        x = np.asarray(x, dtype=float)
        thr = self.w * tau / weight
        return np.sign(x) * np.maximum(np.abs(x) - thr, 0.0)

    def analytic_slope(self, x, space) -> float:
        # minimal-norm subgradient: zero on vanishing coordinates
        g = self.w * np.sign(np.asarray(x, dtype=float)) / space.weight
        return space.norm(g)

    def minimizer(self):
        return 0.0


class NegSqrt(Functional):
    """``phi(x) = -sqrt(x)`` on ``[0, inf)`` (1-d), ``+inf`` elsewhere.

    Convex, unbounded below, infinite slope at the origin.
    """

    name = "neg-sqrt"
    lambda_hint = 0.0

    def value(self, x) -> float:
        v = float(np.asarray(x, dtype=float).reshape(-1)[0])
        if v < 0:
            return INF
        return -math.sqrt(v)

    def values(self, X) -> np.ndarray:
        v = np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0]
        out = np.full(v.shape, INF)
        ok = v >= 0
        out[ok] = -np.sqrt(v[ok])
        return out

    def partial(self, x) -> np.ndarray:
        v = float(np.asarray(x).reshape(-1)[0])
        if v <= 0:
            raise ValueError("gradient undefined at or below 0")
        return np.array([-0.5 / math.sqrt(v)])

    def hessian(self, x):
        v = float(np.asarray(x).reshape(-1)[0])
        return np.array([[0.25 * v ** -1.5]])

    def prox(self, tau, x, weight=1.0):
        # y = s^2 with 2 s^3 - 2 x s - tau/weight = 0, unique positive root
        x0 = float(np.asarray(x).reshape(-1)[0])
        c = tau / weight
        roots = np.roots([2.0, 0.0, -2.0 * x0, -c])
        s = max(r.real for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r)))
        s = max(s, 1e-300)
        for _ in range(3):
            g = 2 * s ** 3 - 2 * x0 * s - c
            dg = 6 * s * s - 2 * x0
            if dg <= 0:
                break
            s -= g / dg
        return np.array([s * s])

    def analytic_slope(self, x, space) -> float:
        v = float(np.asarray(x).reshape(-1)[0])
        if v <= 0:
            return INF
        return 0.5 / math.sqrt(v)


class CallableFunctional(Functional):
    """Wrap a plain function; no closed forms, no convexity claim."""

    name = "callable"
    convex = False

    def __init__(self, fn: Callable, lambda_hint: float = -INF, partial: Callable | None = None):
        self.fn = fn
        self.lambda_hint = lambda_hint
        self._partial = partial

    def value(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def partial(self, x):
        if self._partial is None:
            return super().partial(x)
        return np.asarray(self._partial(np.asarray(x, dtype=float)), dtype=float)

    @property
    def tau_max(self):
        # an unknown modulus (-inf) puts no a priori limit on the step
        return INF if self.lambda_hint == -INF else super().tau_max


class QuantileEntropy(Functional):
    """Logarithmic entropy in quantile coordinates.

    ``phi(q) = -(1/M) sum_i log((q_{i+1} - q_i) M)`` over the ``M - 1``
    forward increments; ``+inf`` unless ``q`` is strictly increasing.
    Convex (lambda = 0) along the linear geodesics.
    """

    name = "entropy"
    lambda_hint = 0.0
    hessian_layout = "banded"

    def value(self, q) -> float:
        q = np.asarray(q, dtype=float)
        M = q.size
        inc = np.diff(q)
        if np.any(inc <= 0):
            return INF
        return float(-np.sum(np.log(inc * M)) / M)

    def values(self, Q) -> np.ndarray:
        Q = np.asarray(Q, dtype=float)
        M = Q.shape[1]
        inc = np.diff(Q, axis=1)
        out = np.full(len(Q), INF)
        ok = np.all(inc > 0, axis=1)
        out[ok] = -np.sum(np.log(inc[ok] * M), axis=1) / M
        return out

    def partial(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        M = q.size
        w = np.zeros(M + 1)
        w[1:M] = 1.0 / np.diff(q)
        return (w[1:] - w[:-1]) / M

    def hessian(self, q):
        q = np.asarray(q, dtype=float)
        M = q.size
        w2 = np.zeros(M + 1)
        w2[1:M] = np.diff(q) ** -2.0
        ab = np.zeros((3, M))
        ab[1] = (w2[:-1] + w2[1:]) / M
        ab[0, 1:] = -w2[1:M] / M
        ab[2, :-1] = -w2[1:M] / M
        return ab

    def analytic_slope(self, q, space) -> float:
        if not self.in_domain(q):
            return INF
        return _gradient_slope(self, q, space)


class HarmonicPotential:
    """``V(x) = kappa (x - center)^2 / 2``."""

    def __init__(self, kappa: float = 1.0, center: float = 0.0):
        if kappa < 0:
            raise ValueError("kappa must be nonnegative")
        self.kappa = float(kappa)
        self.center = float(center)

    def __call__(self, x):
        return 0.5 * self.kappa * (np.asarray(x) - self.center) ** 2

    def d1(self, x):
        return self.kappa * (np.asarray(x) - self.center)

    def d2(self, x):
        return np.full(np.shape(x), self.kappa)

    @property
    def convexity(self):
        return self.kappa


class QuantilePotential(Functional):
    """Potential energy ``phi(q) = (1/M) sum_i V(q_i)`` of a convex ``V``."""

    name = "potential"
    hessian_layout = "banded"

    def __init__(self, potential):
        self.V = potential
        self.lambda_hint = float(getattr(potential, "convexity", 0.0))

    def value(self, q) -> float:
        return float(np.mean(self.V(np.asarray(q, dtype=float))))

    def values(self, Q) -> np.ndarray:
        return np.mean(self.V(np.asarray(Q, dtype=float)), axis=1)

    def partial(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return self.V.d1(q) / q.size

    def hessian(self, q):
        q = np.asarray(q, dtype=float)
        ab = np.zeros((3, q.size))
        ab[1] = self.V.d2(q) / q.size
        return ab

    def analytic_slope(self, q, space) -> float:
        return _gradient_slope(self, q, space)


class FunctionalSum(Functional):
    """Sum of functionals sharing one Hessian layout."""

    def __init__(self, *parts: Functional):
        if not parts:
            raise ValueError("need at least one part")
        layouts = {p.hessian_layout for p in parts}
        if len(layouts) != 1:
            raise ValueError("parts must share a Hessian layout")
        self.parts = parts
        self.hessian_layout = layouts.pop()
        self.lambda_hint = float(sum(p.lambda_hint for p in parts))
        self.convex = all(p.convex for p in parts)
        self.name = "+".join(p.name for p in parts)

    def value(self, x) -> float:
        total = 0.0
        for p in self.parts:
            total += p.value(x)
            if total == INF:
                return INF
        return total

    def values(self, X) -> np.ndarray:
        return sum(p.values(X) for p in self.parts)

    def partial(self, x):
        return sum(p.partial(x) for p in self.parts)

    def hessian(self, x):
        return sum(p.hessian(x) for p in self.parts)

    def analytic_slope(self, x, space):
        if not self.in_domain(x):
            return INF
        try:
            return _gradient_slope(self, x, space)
        except NotImplementedError:
            return None


def fokker_planck_energy(kappa: float = 1.0) -> FunctionalSum:
    """Entropy plus harmonic potential (Ornstein-Uhlenbeck flow)."""
    return FunctionalSum(QuantileEntropy(), QuantilePotential(HarmonicPotential(kappa)))


# ---------------------------------------------------------------------------
# operations


def value(f: Functional, x) -> float:
    return f.value(x)


def moreau_yosida_value(f: Functional, space, tau: float, x, solver_cfg=None) -> float:
    """``inf_y phi(y) + d(x, y)^2 / (2 tau)`` evaluated at the resolvent point."""
    from .resolvent import solve_resolvent

    res = solve_resolvent(f, space, tau, 0.0, x, solver_cfg)
    return res.objective


SLOPE_RADII = (1e-2, 5e-3, 2.5e-3)


def _slope_directions(space, x, rng, n_random: int = 8) -> np.ndarray:
    d = len(x)
    dirs = []
    for k in np.unique(np.linspace(0, d - 1, min(d, 16)).round().astype(int)):
        e = np.zeros(d)
        e[k] = 1.0
        dirs.extend([e, -e])
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(n_random if d > 1 else 0):
        v = rng.standard_normal(d)
        dirs.extend([v, -v])
    if space.kind == "quantile":
        # monotone-preserving directions
        ramp = np.linspace(-1.0, 1.0, d)
        dirs.extend([ramp, -ramp, np.ones(d), -np.ones(d)])
    return np.array([v / space.norm(v) for v in dirs])


def metric_slope(f: Functional, space, x, rng=None, radii: Sequence[float] = SLOPE_RADII,
                 use_analytic: bool = True) -> float:
    """Metric slope of ``f`` at ``x``.

    Uses the catalog formula when available. Otherwise returns the largest
    difference quotient ``(phi(x) - phi(y))^+ / d(x, y)`` over points at
    radii ``r * (1 + |x|)``, a lower bound of the slope.
    """
    x = np.asarray(x, dtype=float)
    fx = f.value(x)
    if fx == INF:
        return INF
    if use_analytic:
        s = f.analytic_slope(x, space)
        if s is not None:
            return float(s)
    scale = 1.0 + space.norm(x)
    dirs = _slope_directions(space, x, rng)
    best = 0.0
    for r in radii:
        Y = x + (r * scale) * dirs
        fy = f.values(Y)
        d = space.dists(x, Y)
        q = np.where(np.isfinite(fy), (fx - fy) / d, 0.0)
        best = max(best, float(np.max(q, initial=0.0)))
    return best


def global_slope(f: Functional, space, lam: float, x, probes) -> float:
    """Largest ``(phi(x) - phi(y) + lam d^2/2)^+ / d`` over the probes.

    A certified lower bound of the global lambda-slope.
    """
    x = np.asarray(x, dtype=float)
    fx = f.value(x)
    if fx == INF:
        return INF
    Y = np.asarray(probes, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if len(Y) == 0:
        raise ValueError("need at least one probe")
    d = space.dists(x, Y)
    keep = d > 0
    fy = f.values(Y[keep])
    d = d[keep]
    q = np.where(np.isfinite(fy), (fx - fy + 0.5 * lam * d * d) / d, 0.0)
    return float(max(np.max(q, initial=0.0), 0.0))


def mccann_check(F: Callable[[float], float], s_grid, slack: float = 1e-10) -> bool:
    """Sampled test that ``s -> e^s F(e^-s)`` is nonincreasing and convex."""
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or len(s) < 3 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be increasing with at least 3 points")
    g = np.array([math.exp(si) * F(math.exp(-si)) for si in s])
    if not np.all(np.isfinite(g)):
        raise ValueError("F is not finite on the grid")
    if np.any(np.diff(g) > slack):
        return False
    slopes = np.diff(g) / np.diff(s)
    return bool(np.all(np.diff(slopes) >= -slack * (1 + np.abs(slopes[1:]))))


def duality_slope_check(f: Functional, space, x, tau_grid, lam: float | None = None,
                        tol: float = 1e-8, limit_tol: float | None = None, solver_cfg=None) -> AuditReport:
    """Compare ``(1 + lam tau)(phi - phi_tau)/tau`` with ``|slope|^2 / 2``.

    Every grid value must stay below half the squared slope and the value at
    the smallest step must be within ``limit_tol`` of it.
    """
    lam = f.lambda_hint if lam is None else lam
    taus = np.sort(np.asarray(tau_grid, dtype=float))
    if np.any(taus <= 0) or np.any(1 + lam * taus <= 0):
        raise ValueError("tau grid must be positive with lam*tau > -1")
    x = np.asarray(x, dtype=float)
    half_sq = 0.5 * metric_slope(f, space, x) ** 2
    fx = f.value(x)
    rep = AuditReport("slope-duality", tol)
    vals = []
    for tau in taus:
        lhs = (1 + lam * tau) * (fx - moreau_yosida_value(f, space, tau, x, solver_cfg)) / tau
        vals.append(lhs)
        rep.add(lhs, half_sq, tau=float(tau))
    limit_tol = tol if limit_tol is None else limit_tol
    # limit at the smallest step, as a two-sided check
    rep.add(abs(vals[0] - half_sq), limit_tol - tol, tau=float(taus[0]), check="limit")
    return rep
