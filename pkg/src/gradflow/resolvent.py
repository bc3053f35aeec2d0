"""One proximal step with Ekeland relaxation.

``solve_resolvent`` returns a candidate ``y`` for
``min_y Psi(y) = d(x, y)^2 / (2 tau) + phi(y)``. A candidate is accepted
when it beats the starting point, ``Psi(y) <= phi(x)``, and satisfies the
relaxed optimality inequality

    Psi(y) <= Psi(z) + (eta/2) d(x, y) d(z, y)   for every z,

which is checked on a finite probe set. For convex smooth energies a small
inner residual certifies the inequality for all ``z`` (see ``_certified``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize, minimize_scalar

from .core import AuditReport
from .functionals import INF, Functional, global_slope, metric_slope


@dataclass(frozen=True)
class SolverConfig:
    """Inner-solver settings.

    ``method`` is ``"auto"`` (closed form when available, else Newton),
    ``"newton"``, ``"gradient"`` or ``"direct"`` (derivative free).
    """

    method: str = "auto"
    tol: float = 1e-10
    max_iter: int = 200
    probe_count: int = 16
    check: bool = True

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = SolverConfig()


@dataclass
class ResolventResult:
    point: np.ndarray
    objective: float
    base_objective_phi: float
    inner_residual: float
    accepted_90bis: bool
    accepted_90: bool
    worst_violation: float = -INF
    iterations: int = 0
    converged: bool = True
    certified_90bis: bool = False
    method: str = ""
    notes: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.accepted_90bis and self.accepted_90


def penalized(f: Functional, space, tau: float, x, y) -> float:
    fy = f.value(y)
    if fy == INF:
        return INF
    return space.dist(x, y) ** 2 / (2.0 * tau) + fy


def _penalized_batch(f, space, tau, x, Y) -> np.ndarray:
    fy = f.values(Y)
    d = space.dists(x, Y)
    out = d * d / (2.0 * tau) + fy
    out[~np.isfinite(fy)] = INF
    return out


def _grad(f, space, tau, x, y):
    return space.weight * (y - x) / tau + f.partial(y)


def _residual(space, g) -> float:
    # metric norm of the metric gradient g / weight
    return float(np.linalg.norm(g) / math.sqrt(space.weight))


def _roundoff(psi: float) -> float:
    return 1e-14 * (1.0 + abs(psi))


def _newton(f, space, tau, x, cfg, stop):
    y = np.array(x, dtype=float)
    w = space.weight
    psi = penalized(f, space, tau, x, y)
    it = 0
    g = _grad(f, space, tau, x, y)
    r = _residual(space, g)
    while it < cfg.max_iter and not stop(y, r):
        it += 1
        H = f.hessian(y)
        if f.hessian_layout == "banded":
            ab = np.array(H, dtype=float)
            ab[1] += w / tau
            p = -solve_banded((1, 1), ab, g)
        else:
            p = -np.linalg.solve(np.atleast_2d(H) + (w / tau) * np.eye(len(y)), g)
        slope = float(g @ p)
        step = 1.0
        while True:
            z = y + step * p
            pz = penalized(f, space, tau, x, z)
            # near the solution the decrease drops below round-off; accept it
            if pz <= psi + 1e-4 * step * slope + _roundoff(psi) or step < 1e-12:
                break
            step *= 0.5
        if not pz < INF or pz > psi + _roundoff(psi):
            break
        y, psi = z, pz
        g = _grad(f, space, tau, x, y)
        r = _residual(space, g)
    return y, r, it


def _gradient(f, space, tau, x, cfg, stop):
    y = np.array(x, dtype=float)
    w = space.weight
    psi = penalized(f, space, tau, x, y)
    g = _grad(f, space, tau, x, y)
    r = _residual(space, g)
    it = 0
    s0 = tau
    while it < cfg.max_iter and not stop(y, r):
        it += 1
        G = g / w
        step = s0
        while True:
            z = y - step * G
            pz = penalized(f, space, tau, x, z)
            if pz <= psi - 1e-4 * step * w * float(G @ G) + _roundoff(psi) or step < 1e-14 * tau:
                break
            step *= 0.5
        if not pz < INF or pz > psi + _roundoff(psi):
            break
        y, psi = z, pz
        g = _grad(f, space, tau, x, y)
        r = _residual(space, g)
    return y, r, it


def _direct(f, space, tau, x, cfg):
    obj = lambda y: penalized(f, space, tau, x, y)
    if len(x) == 1:
        x0 = float(x[0])
        span = 10.0 * (1.0 + abs(x0) + tau)
        res = minimize_scalar(lambda v: min(obj(np.array([v])), 1e300),
                              bounds=(x0 - span, x0 + span), method="bounded",
                              options={"xatol": max(cfg.tol, 1e-12), "maxiter": 10 * cfg.max_iter})
        return np.array([res.x]), math.nan, int(res.nfev)
    res = minimize(lambda v: min(obj(v), 1e300), np.array(x, dtype=float), method="Powell",
                   options={"xtol": max(cfg.tol, 1e-12), "ftol": 1e-14, "maxiter": 50 * cfg.max_iter})
    return np.asarray(res.x, dtype=float), math.nan, int(res.nfev)


def make_probes(space, x, candidate, count: int = 16, grad=None) -> np.ndarray:
    """Falsification net for the relaxed optimality inequality.

    The candidate moved along evenly spaced coordinates at three radii,
    along the descent direction of the penalized objective, the starting
    point itself and, in one dimension, a uniform grid around ``x``.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(candidate, dtype=float)
    d = space.dist(x, c)
    scale = max(d, 1e-6 * (1.0 + space.norm(c)))
    n = len(c)
    coords = np.unique(np.linspace(0, n - 1, min(n, max(count, 1))).round().astype(int))
    unit = 1.0 / math.sqrt(space.weight)
    probes = [x]
    for r in (0.01, 0.1, 1.0):
        for k in coords:
            for sgn in (1.0, -1.0):
                y = c.copy()
                y[k] += sgn * r * scale * unit
                probes.append(y)
    if grad is not None and np.any(grad):
        G = grad / space.weight
        gn = space.norm(G)
        for r in () if gn == 0 else (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0):
            probes.append(c - (r * scale / gn) * G)
    if n == 1:
        half = 3.0 * max(d, scale)
        for v in np.linspace(x[0] - half, x[0] + half, 61):
            probes.append(np.array([v]))
    return np.array(probes)


def check_ekeland_conditions(f: Functional, space, tau: float, eta: float, x, candidate, probes):
    """Return ``(holds_relaxed_optimality, beats_start, worst_violation)``.

    ``worst_violation`` is the largest ``Psi(c) - Psi(z) - (eta/2) d(x,c) d(z,c)``
    over the probes (nonpositive when the inequality holds everywhere).
    """
    P = np.asarray(probes, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if len(P) == 0:
        raise ValueError("need at least one probe")
    x = np.asarray(x, dtype=float)
    c = np.asarray(candidate, dtype=float)
    pc = penalized(f, space, tau, x, c)
    fx = f.value(x)
    beats = pc <= fx + 1e-12 * (1.0 + abs(fx)) if math.isfinite(pc) else False
    if not math.isfinite(pc):
        return False, bool(beats), INF
    pz = _penalized_batch(f, space, tau, x, P)
    dxc = space.dist(x, c)
    dzc = space.dists(c, P)
    viol = pc - pz - 0.5 * eta * dxc * dzc
    viol = np.where(np.isfinite(pz), viol, -INF)
    worst = float(np.max(viol))
    slack = 1e-11 * (1.0 + abs(pc))
    return bool(worst <= slack), bool(beats), worst


def _certified(f, eta, r, d) -> bool:
    # Psi is convex with metric gradient of norm r at y, so
    # Psi(z) >= Psi(y) - r d(z, y); the relaxed inequality follows when r <= eta d / 2.
    return bool(f.convex and eta > 0 and math.isfinite(r) and r <= 0.5 * eta * d)


def solve_resolvent(f: Functional, space, tau: float, eta: float, x, solver_cfg: SolverConfig | None = None
                    ) -> ResolventResult:
    """Compute a Moreau-Yosida-Ekeland resolvent point of ``x``."""
    cfg = solver_cfg or DEFAULT_CONFIG
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    if tau >= f.tau_max:
        raise ValueError(f"tau={tau} exceeds the admissible step {f.tau_max:.6g} for lambda={f.lambda_hint}")
    x = np.asarray(x, dtype=float)
    fx = f.value(x)
    if fx == INF:
        raise ValueError("starting point is outside the domain")

    method = cfg.method
    y = None
    r = math.nan
    it = 0
    notes = []
    if method == "auto":
        y = f.prox(tau, x, space.weight)
        if y is not None:
            method = "closed-form"
            r = 0.0
        else:
            try:
                f.partial(x)
                method = "newton"
            except NotImplementedError:
                method = "direct"
    if y is None:
        def stop(z, res):
            if res > cfg.tol:
                return False
            if eta > 0 and f.convex:
                return res <= 0.5 * eta * space.dist(x, z) or res == 0.0
            return True

        if method == "newton":
            try:
                f.hessian(x)
            except NotImplementedError:
                method = "gradient"
        if method == "newton":
            y, r, it = _newton(f, space, tau, x, cfg, stop)
        elif method == "gradient":
            y, r, it = _gradient(f, space, tau, x, cfg, stop)
        elif method == "direct":
            y, r, it = _direct(f, space, tau, x, cfg)
        else:
            raise ValueError(f"unknown solver method {method!r}")
    if space.kind == "quantile":
        y = space.project(y)
    converged = method == "closed-form" or (math.isfinite(r) and r <= cfg.tol)
    if not converged and method != "direct":
        notes.append(f"inner solver stopped at residual {r:.3e} after {it} iterations")

    obj = penalized(f, space, tau, x, y)
    if not obj <= fx:
        notes.append("candidate does not beat the starting point; returning x")
        y, obj = x.copy(), fx

    d = space.dist(x, y)
    certified = method == "closed-form" or _certified(f, eta, r, d)
    ok_bis, ok_90, worst = True, obj <= fx + 1e-12 * (1 + abs(fx)), -INF
    if cfg.check:
        g = None
        if method != "direct":
            try:
                g = _grad(f, space, tau, x, y)
            except (NotImplementedError, ValueError):
                g = None
        probes = make_probes(space, x, y, cfg.probe_count, g)
        ok_bis, ok_90, worst = check_ekeland_conditions(f, space, tau, eta, x, y, probes)
    return ResolventResult(
        point=y,
        objective=float(obj),
        base_objective_phi=float(f.value(y)),
        inner_residual=float(r),
        accepted_90bis=ok_bis,
        accepted_90=ok_90,
        worst_violation=worst,
        iterations=it,
        converged=converged,
        certified_90bis=certified,
        method=method,
        notes=notes,
    )


def slope_bound_check(f: Functional, space, tau: float, eta: float, x, result: ResolventResult,
                      tol: float = 1e-9, probes=None) -> AuditReport:
    """Check ``|slope|(y) <= l_{-1/tau}(y) <= (1 + eta tau/2) d(x, y)/tau``.

    The global slope is a probe-based lower bound, so its comparison with
    the right-hand side can only refute, never spuriously pass.
    """
    rep = AuditReport("resolvent-slope-bound", tol)
    if not (result.accepted_90 and result.accepted_90bis):
        rep.applicable = False
        rep.note = "result not accepted"
        return rep
    y = result.point
    d = space.dist(x, y)
    rhs = (1.0 + 0.5 * eta * tau) * d / tau
    scale = 1.0 + rhs
    rep.tolerance = tol * scale
    rep.add(metric_slope(f, space, y), rhs, quantity="metric-slope")
    if probes is None:
        probes = make_probes(space, x, y, 16)
    P = np.asarray(probes, dtype=float)
    P = P[space.dists(y, P) > 0]
    if len(P):
        rep.add(global_slope(f, space, -1.0 / tau, y, P), rhs, quantity="global-slope")
    return rep
