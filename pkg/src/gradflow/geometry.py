"""Intermediate points, dyadic chains, convexity audits and lower bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import AuditReport, exp_primitive
from .functionals import INF, Functional

INTERMEDIATE_SLACK = 1e-12


def check_intermediate(space, x0, x1, x, theta: float, eps: float) -> bool:
    """Whether ``x`` is a (theta, eps)-intermediate point between ``x0`` and ``x1``.

    Tests ``d(x0,x)^2/theta + d(x,x1)^2/(1-theta) <= d(x0,x1)^2 (1 + eps^2 theta (1-theta))``.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    d2 = space.dist(x0, x1) ** 2
    lhs = space.dist(x0, x) ** 2 / theta + space.dist(x, x1) ** 2 / (1.0 - theta)
    return bool(lhs <= d2 * (1.0 + eps * eps * theta * (1.0 - theta)) + INTERMEDIATE_SLACK * (1.0 + d2))


def intermediate_consequences(space, x0, x1, x, theta: float, eps: float) -> tuple[float, float]:
    """Residuals of the two consequences of being an intermediate point.

    Returns ``(|d0/theta - d1/(1-theta)| - d eps, d0 + d1 - d sqrt(1 + eps^2 theta(1-theta)))``;
    both are nonpositive (up to round-off) for accepted points.
    """
    d = space.dist(x0, x1)
    d0 = space.dist(x0, x)
    d1 = space.dist(x, x1)
    gap = abs(d0 / theta - d1 / (1.0 - theta)) - d * eps
    length = d0 + d1 - d * math.sqrt(1.0 + eps * eps * theta * (1.0 - theta))
    return gap, length


def perpendicular_midpoint(x0, x1, delta: float, sign: float = 1.0) -> np.ndarray:
    """Euclidean midpoint shifted by ``delta`` orthogonally to the segment.

    This is an (1/2, eps)-intermediate point exactly when ``delta <= d eps / 4``.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if x0.size < 2:
        raise ValueError("need dimension >= 2 for a perpendicular offset")
    u = x1 - x0
    # any unit vector orthogonal to u
    e = np.zeros_like(u)
    e[int(np.argmin(np.abs(u)))] = 1.0
    n = e - (e @ u) / max(u @ u, 1e-300) * u
    n /= np.linalg.norm(n)
    return 0.5 * (x0 + x1) + sign * delta * n


@dataclass
class ChainResult:
    points: dict
    levels: int
    lipschitz_bound: float

    def keys(self):
        return sorted(self.points)

    def max_ratio(self, space) -> float:
        """Largest ``d(x_a, x_b) / |a - b|`` over all pairs of chain points."""
        ks = self.keys()
        worst = 0.0
        for i, a in enumerate(ks):
            for b in ks[i + 1:]:
                worst = max(worst, space.dist(self.points[a], self.points[b]) / float(b - a))
        return worst


def dyadic_chain(space, x0, x1, levels: int, eps_schedule, midpoint: Callable | None = None) -> ChainResult:
    """Fill dyadic parameters ``k / 2^levels`` by repeated approximate midpoints.

    ``eps_schedule`` is a sequence or a callable ``n -> eps_n`` (levels start
    at 1). ``midpoint(a, b, eps)`` must return an (1/2, eps)-intermediate
    point; the space's exact midpoint is used when it is omitted.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    eps = [float(eps_schedule(n) if callable(eps_schedule) else eps_schedule[n - 1]) for n in range(1, levels + 1)]
    if any(e < 0 for e in eps):
        raise ValueError("eps_schedule must be nonnegative")
    pts = {Fraction(0): np.asarray(x0, dtype=float), Fraction(1): np.asarray(x1, dtype=float)}
    for n in range(1, levels + 1):
        step = Fraction(1, 2 ** (n - 1))
        k = Fraction(0)
        while k < 1:
            a, b = pts[k], pts[k + step]
            if midpoint is None:
                m = space.intermediate(a, b, 0.5)
            else:
                m = np.asarray(midpoint(a, b, eps[n - 1]), dtype=float)
                if not check_intermediate(space, a, b, m, 0.5, eps[n - 1]):
                    raise ValueError(f"midpoint oracle failed at level {n}, parameter {k + step / 2}")
            pts[k + step / 2] = m
            k += step
    bound = space.dist(x0, x1) * math.exp(sum(eps))
    return ChainResult(pts, levels, bound)


def _convexity_tol(f0: float, f1: float) -> float:
    return 1e-9 * (1.0 + abs(f0) + abs(f1))


def lambda_convexity_check(f: Functional, space, x0, x1, theta_grid, lam: float) -> AuditReport:
    """Audit ``phi(x_theta) <= (1-theta) phi(x0) + theta phi(x1) - lam/2 theta(1-theta) d^2``."""
    f0, f1 = f.value(x0), f.value(x1)
    if not (f0 < INF and f1 < INF):
        raise ValueError("endpoints must lie in the domain")
    d2 = space.dist(x0, x1) ** 2
    rep = AuditReport("geodesic-convexity", _convexity_tol(f0, f1))
    for th in theta_grid:
        if not 0.0 < th < 1.0:
            raise ValueError("theta grid must lie in (0, 1)")
        rhs = (1 - th) * f0 + th * f1 - 0.5 * lam * th * (1 - th) * d2
        rep.add(f.value(space.intermediate(x0, x1, th)), rhs, theta=float(th))
    return rep


def unit_ball_probes(space, o, rng=None, n_dirs: int = 64, n_radii: int = 8, max_radius: float = 1.0
                     ) -> np.ndarray:
    """Probe points ``o + r v`` with unit directions ``v`` and radii up to ``max_radius``.

    In the quantile space directions are sorted Gaussian vectors, so every
    probe stays monotone.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    o = np.asarray(o, dtype=float)
    dim = len(o)
    V = rng.standard_normal((n_dirs, dim))
    if space.kind == "quantile":
        V = np.sort(V, axis=1)
        V[0], V[1] = 1.0, -1.0
    norms = np.array([space.norm(v) for v in V])
    V = V / norms[:, None]
    radii = max_radius * np.arange(1, n_radii + 1) / n_radii
    P = (o[None, None, :] + radii[None, :, None] * V[:, None, :]).reshape(-1, dim)
    if space.kind == "quantile":
        P = P[np.all(np.diff(P, axis=1) >= 0, axis=1)]
    return P


@dataclass
class LowerBounds:
    m_o: float
    phi_o: float
    ell_o: float
    phi_o_lin: float
    report: AuditReport

    def __iter__(self):
        return iter((self.m_o, self.phi_o, self.ell_o, self.report))


def lower_bound_constants(f: Functional, space, o, lam: float, kappa: float, probes=None, rng=None,
                          m_o: float | None = None) -> LowerBounds:
    """Constants of the quadratic and linear lower bounds around ``o``.

    ``m_o`` is the minimum of ``phi`` over unit-ball probes unless given. The
    audit checks ``phi(x) + kappa/2 d^2(x,o) >= phi_o`` and
    ``phi(x) - lam/2 d^2(x,o) + ell_o d(x,o) >= phi_o_lin`` on probes reaching
    well outside the unit ball. For the quantile space only the discretized
    ball is sampled.
    """
    if not kappa > -lam:
        raise ValueError("need kappa > -lambda")
    o = np.asarray(o, dtype=float)
    fo = f.value(o)
    if fo == INF:
        raise ValueError("o must lie in the domain")
    rng = np.random.default_rng(0) if rng is None else rng
    if m_o is None:
        ball = unit_ball_probes(space, o, rng)
        vals = f.values(ball)
        m_o = float(min(fo, np.min(vals)))
    lp, lm = max(lam, 0.0), max(-lam, 0.0)
    phi_o = fo - (fo - m_o + 0.5 * lp) ** 2 / (2.0 * (lam + kappa)) - 0.5 * (lam + kappa)
    ell_o = fo - m_o + 0.5 * lam
    phi_o_lin = m_o - 0.5 * lm
    if probes is None:
        probes = np.concatenate([unit_ball_probes(space, o, rng, 32, 10, r) for r in (1.0, 10.0)])
    P = np.asarray(probes, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    vals = f.values(P)
    d = space.dists(o, P)
    ok = np.isfinite(vals)
    tol = 1e-9 * (1.0 + abs(fo) + abs(m_o))
    rep = AuditReport("quadratic-lower-bound", tol, note="unit-ball infimum sampled on probes")
    for v, r in zip(vals[ok], d[ok]):
        rep.add(phi_o, v + 0.5 * kappa * r * r, bound="quadratic", radius=float(r))
        rep.add(phi_o_lin, v - 0.5 * lam * r * r + ell_o * r, bound="linear", radius=float(r))
    return LowerBounds(m_o, phi_o, ell_o, phi_o_lin, rep)


def flowed_convexity_check(flow: Callable, f: Functional, space, x0, x1, theta: float, eps: float, t_grid,
                           lam: float, x_theta=None) -> AuditReport:
    """Audit ``phi(S_t x) <= (1-theta) phi(x0) + theta phi(x1) - (lam - eps^2/E_lam(t))/2 theta(1-theta) d^2``.

    ``x`` is ``x_theta`` when given (it must be a (theta, eps)-intermediate
    point), else the exact geodesic point. ``flow(t, x)`` is the gradient
    flow of ``f``.
    """
    if x_theta is None:
        x_theta = space.intermediate(x0, x1, theta)
    elif not check_intermediate(space, x0, x1, x_theta, theta, eps):
        raise ValueError("x_theta is not a (theta, eps)-intermediate point")
    f0, f1 = f.value(x0), f.value(x1)
    d2 = space.dist(x0, x1) ** 2
    rep = AuditReport("flowed-convexity", _convexity_tol(f0, f1))
    for t in t_grid:
        if not t > 0:
            raise ValueError("flow times must be positive")
        mod = lam - eps * eps / exp_primitive(lam, t)
        rhs = (1 - theta) * f0 + theta * f1 - 0.5 * mod * theta * (1 - theta) * d2
        rep.add(f.value(flow(t, x_theta)), rhs, t=float(t))
    return rep
