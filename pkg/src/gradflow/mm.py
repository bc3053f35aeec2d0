"""Minimizing Movement scheme with Ekeland relaxation and its stability audits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import PIECEWISE_CONSTANT, AuditReport, EnergySystem, Trajectory, ceil_index, exp_primitive
from .functionals import Functional, metric_slope, moreau_yosida_value
from .resolvent import DEFAULT_CONFIG, ResolventResult, SolverConfig, solve_resolvent


def t_ceil(t: float, tau: float) -> float:
    """Smallest multiple of ``tau`` that is ``>= t``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return ceil_index(t, tau) * tau


def gamma_of(eta: float, lam: float) -> float:
    """Exponential growth rate ``2 eta - 3 lam`` of the regular-data bound."""
    return 2.0 * eta - 3.0 * lam


def t_tau_beta(t: float, tau: float, beta: float) -> float:
    """Stretched grid time ``(1 + 4 beta tau) t_tau``."""
    return (1.0 + 4.0 * beta * tau) * t_ceil(t, tau)


class SchemeAbort(RuntimeError):
    """A step failed the acceptance conditions."""

    def __init__(self, step: int, worst_violation: float, result: ResolventResult | None = None):
        self.step = step
        self.worst_violation = worst_violation
        self.result = result
        super().__init__(f"step {step} rejected (worst violation {worst_violation:.3e})")


@dataclass(frozen=True)
class SchemeParams:
    tau: float
    N: int
    eta: float = 0.0
    solver_cfg: SolverConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.N < 0:
            raise ValueError("N must be nonnegative")

    def guard(self, lam: float) -> bool:
        """Step-size condition ``4 gamma tau <= 1``."""
        return 4.0 * gamma_of(self.eta, lam) * self.tau <= 1.0 + 1e-12


@dataclass
class DiscreteTrajectory:
    tau: float
    eta: float
    points: np.ndarray
    space: object
    functional: Functional
    per_step: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.points) - 1

    @property
    def horizon(self) -> float:
        return self.N * self.tau

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.N + 1)

    @cached_property
    def energies(self) -> np.ndarray:
        return self.functional.values(self.points)

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.array([metric_slope(self.functional, self.space, u) for u in self.points])

    @cached_property
    def step_distances(self) -> np.ndarray:
        d = self.space.dists(self.points[:-1], self.points[1:]) if self.N else np.zeros(0)
        return np.concatenate([[0.0], d])

    def as_trajectory(self) -> Trajectory:
        return Trajectory(self.times, self.points, self.space, PIECEWISE_CONSTANT)

    def eps_per_step(self, lam: float) -> np.ndarray:
        """Smallest per-step slack making both one-step estimates hold.

        The estimates are ``tau (1 - eta tau/2)^2 |slope|^2(U^n) <= d^2/tau + eps`` and
        ``(1 - (eta - lam) tau/2) d^2/tau <= phi(U^{n-1}) - phi(U^n) + eps``.
        """
        tau, eta = self.tau, self.eta
        d2 = self.step_distances[1:] ** 2
        s2 = self.slopes[1:] ** 2
        drop = self.energies[:-1] - self.energies[1:]
        e1 = tau * (1 - 0.5 * eta * tau) ** 2 * s2 - d2 / tau
        e2 = (1 - 0.5 * (eta - lam) * tau) * d2 / tau - drop
        return np.maximum(np.maximum(e1, e2), 0.0)

    def measured_eps(self, lam: float) -> float:
        e = self.eps_per_step(lam)
        return float(e.max()) if e.size else 0.0

    def to_table(self) -> str:
        return format_table(self.times, self.points, self.space, self.functional,
                            self.energies, self.slopes)


def format_table(times, points, space, functional: Functional, energies=None, slopes=None) -> str:
    """Serialize a sampled curve with columns ``n, t, point, phi, slope, step_distance``."""
    points = np.asarray(points, dtype=float)
    if energies is None:
        energies = functional.values(points)
    if slopes is None:
        slopes = [metric_slope(functional, space, u) for u in points]
    steps = np.concatenate([[0.0], space.dists(points[:-1], points[1:])]) if len(points) > 1 else [0.0]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t", "point", "phi", "slope", "step_distance"])
    for n, t in enumerate(times):
        w.writerow([n, repr(float(t)), space.format_point(points[n]), repr(float(energies[n])),
                    repr(float(slopes[n])), repr(float(steps[n]))])
    return buf.getvalue()


def read_table(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse :meth:`DiscreteTrajectory.to_table` output into ``(times, points)``."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty trajectory table")
    times = np.array([float(r["t"]) for r in rows])
    points = np.array([[float(v) for v in r["point"].split(";")] for r in rows])
    return times, points


def run_minimizing_movement(system: EnergySystem, params: SchemeParams, u0) -> DiscreteTrajectory:
    """Iterate accepted resolvent steps ``U^n`` from ``U^0 = u0``.

    Raises :class:`SchemeAbort` when a step fails either acceptance check.
    """
    f, space = system.functional, system.space
    u0 = space.point(u0)
    if f.value(u0) == math.inf:
        raise ValueError("initial datum outside the domain")
    if not params.guard(min(system.lam, 0.0)):
        raise ValueError(f"step guard 4 gamma tau <= 1 fails for tau={params.tau}, eta={params.eta}")
    pts = np.empty((params.N + 1, len(u0)))
    pts[0] = u0
    steps = []
    u = u0
    for n in range(1, params.N + 1):
        res = solve_resolvent(f, space, params.tau, params.eta, u, params.solver_cfg)
        if not res.accepted:
            raise SchemeAbort(n, res.worst_violation, res)
        u = res.point
        pts[n] = u
        steps.append(res)
    return DiscreteTrajectory(params.tau, params.eta, pts, space, f, steps)


def interpolant_eval(traj: DiscreteTrajectory, t: float) -> np.ndarray:
    """Piecewise constant interpolant: ``U^n`` on ``((n-1) tau, n tau]``, ``U^0`` at 0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = ceil_index(t, traj.tau)
    if n > traj.N:
        raise ValueError(f"t={t} beyond the horizon {traj.horizon}")
    return traj.points[n]


def _scale(traj) -> float:
    return 1.0 + float(np.max(np.abs(traj.energies))) + float(np.max(traj.slopes)) ** 2


def discrete_stability_report(traj: DiscreteTrajectory, lam: float, tol: float = 1e-9) -> AuditReport:
    """Audit the one-step estimates at every step.

    slope-step:   (1 - eta tau/2) |slope|(U^n) <= d/tau
    energy-drop:  (1 + (lam - eta) tau/2) d^2/tau <= phi(U^{n-1}) - phi(U^n)
    step-slope:   (1 + (lam - eta) tau) d/tau <= |slope|(U^{n-1})
    slope-decay:  (1 - lam' tau) |slope|(U^n) <= |slope|(U^{n-1})
    with lam' = eta (1 + tau lam^+/2) - lam, or -lam when eta = 0.
    """
    if traj.functional.lambda_hint < lam - 1e-12:
        raise ValueError(f"functional is only {traj.functional.lambda_hint}-convex, asked for {lam}")
    tau, eta = traj.tau, traj.eta
    lam_p = -lam if eta == 0 else eta * (1 + 0.5 * tau * max(lam, 0.0)) - lam
    rep = AuditReport("discrete-stability", tol * _scale(traj))
    d = traj.step_distances
    s = traj.slopes
    e = traj.energies
    for n in range(1, traj.N + 1):
        rep.add((1 - 0.5 * eta * tau) * s[n], d[n] / tau, n=n, check="slope-step")
        rep.add((1 + 0.5 * (lam - eta) * tau) * d[n] ** 2 / tau, e[n - 1] - e[n], n=n, check="energy-drop")
        rep.add((1 + (lam - eta) * tau) * d[n] / tau, s[n - 1], n=n, check="step-slope")
        rep.add((1 - lam_p * tau) * s[n], s[n - 1], n=n, check="slope-decay")
    return rep


def continuous_stability_report(traj: DiscreteTrajectory, lam: float, t_samples=None, s_samples=None,
                                solver_cfg: SolverConfig | None = None, tol: float = 1e-9) -> AuditReport:
    """Audit the refined stability bounds with Moreau-Yosida remainders.

    With ``beta = eta - lam``, ``T = t_{tau,beta}`` and
    ``R(sigma) = phi(U^0) - phi_sigma(U^0)``:

    distance:  d^2(Pc(t), U^0)/2 <= e^{2 beta T} E_{-beta}(T) R(E_{-beta}(T))
    restart:   d^2(Pc^{+s}(t), Pc(t))/2 <= e^{2 beta (T + S) + eta T} E_{-beta}(S) R(E_{-beta}(S))
    slope:     |slope|^2(Pc(t))/2 <= (1 + 2 eta tau) e^{2 beta T} / E_{-beta}(t_tau) R(E_{-beta}(T))

    ``Pc^{+s}`` is a fresh scheme restarted from ``Pc(s)``; ``s`` samples are
    grid multiples.
    """
    if lam > 0:
        raise ValueError("refined stability bounds need lam <= 0")
    tau, eta = traj.tau, traj.eta
    beta = eta - lam
    rep = AuditReport("refined-stability", tol * _scale(traj))
    if 4 * beta * tau > 1:
        rep.applicable = False
        rep.note = "step guard 4 beta tau <= 1 fails"
        return rep
    f, space = traj.functional, traj.space
    u0 = traj.points[0]
    f0 = f.value(u0)
    N = traj.N
    if t_samples is None:
        t_samples = [tau * k for k in sorted({1, max(1, N // 4), max(1, N // 2), N})] if N else []
    if s_samples is None:
        s_samples = [tau * k for k in sorted({max(1, N // 4), max(1, N // 2)})] if N >= 2 else []
    cfg = solver_cfg or DEFAULT_CONFIG
    cache: dict = {}

    def remainder(sigma: float) -> float:
        if sigma not in cache:
            cache[sigma] = f0 - moreau_yosida_value(f, space, sigma, u0, cfg)
        return cache[sigma]

    for t in t_samples:
        if not 0 < t <= traj.horizon + 1e-12:
            raise ValueError(f"sample time {t} outside (0, {traj.horizon}]")
        tt = t_ceil(t, tau)
        T = t_tau_beta(t, tau, beta)
        sig = exp_primitive(-beta, T)
        R = remainder(sig)
        u = interpolant_eval(traj, t)
        g = math.exp(2 * beta * T)
        rep.add(0.5 * space.dist(u, u0) ** 2, g * sig * R, t=float(t), check="distance")
        slope = metric_slope(f, space, u)
        rep.add(0.5 * slope ** 2, (1 + 2 * eta * tau) * g / exp_primitive(-beta, tt) * R, t=float(t), check="slope")
        for s in s_samples:
            h = ceil_index(s, tau)
            k = ceil_index(t, tau)
            if h + k > N:
                continue
            restart = run_minimizing_movement(EnergySystem(space, f, lam), SchemeParams(tau, k, eta, cfg),
                                              traj.points[h])
            S = t_tau_beta(s, tau, beta)
            sig_s = exp_primitive(-beta, S)
            rhs = math.exp(2 * beta * (T + S) + eta * T) * sig_s * remainder(sig_s)
            rep.add(0.5 * space.dist(restart.points[-1], u) ** 2, rhs, t=float(t), s=float(s), check="restart")
    return rep
