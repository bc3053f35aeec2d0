"""Reference flows, convergence studies and uniform error-bound audits."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import AuditReport, EnergySystem, as_point, exp_primitive
from .functionals import (AbsNorm, HarmonicPotential, NegSqrt, Quadratic, QuantileEntropy, QuantilePotential,
                          FunctionalSum, metric_slope, moreau_yosida_value)
from .mm import (DiscreteTrajectory, SchemeParams, gamma_of, interpolant_eval, run_minimizing_movement, t_ceil)
from .resolvent import DEFAULT_CONFIG, SolverConfig, solve_resolvent
from .spaces import EuclideanSpace, QuantileSpace, fit_gaussian, gaussian_quantile

# ---------------------------------------------------------------------------
# reference flows


class ReferenceFlow:
    """Exact gradient flow ``S_t`` of one catalog system."""

    system_id = "reference"

    def __init__(self, system: EnergySystem):
        self.system = system

    def eval(self, t: float, u0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t, u0):
        return self.eval(t, u0)

    def sample(self, u0, times) -> np.ndarray:
        u0 = as_point(u0)
        return np.array([self.eval(float(t), u0) for t in times])

    def slope_at(self, u0) -> float:
        return metric_slope(self.system.functional, self.system.space, u0)


class QuadraticFlow(ReferenceFlow):
    """``S_t u0 = e^{-At} u0 + (I - e^{-At}) A^{-1} b`` (pseudo-inverse on the kernel)."""

    system_id = "quadratic"

    def __init__(self, system):
        super().__init__(system)
        f = system.functional
        mu, V = np.linalg.eigh(f.A)
        self._mu, self._V = mu, V
        self._bv = V.T @ f.b

    def sample(self, u0, times) -> np.ndarray:
        u0v = self._V.T @ as_point(u0)
        t = np.asarray(times, dtype=float)[:, None]
        mu = self._mu[None, :]
        decay = np.exp(-mu * t)
        # (1 - e^{-mu t}) / mu, equal to t on the kernel
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(mu > 0, -np.expm1(-mu * t) / np.where(mu > 0, mu, 1.0), t)
        return (decay * u0v[None, :] + gain * self._bv[None, :]) @ self._V.T

    def eval(self, t, u0):
        return self.sample(u0, [t])[0]


class AbsFlow(ReferenceFlow):
    """Coordinatewise shrinkage ``sign(u0) max(|u0| - w t, 0)``."""

    system_id = "abs"

    def sample(self, u0, times):
        u0 = as_point(u0)
        t = np.asarray(times, dtype=float)[:, None]
        w = self.system.functional.w
        return np.sign(u0)[None, :] * np.maximum(np.abs(u0)[None, :] - w * t, 0.0)

    def eval(self, t, u0):
        return self.sample(u0, [t])[0]


class NegSqrtFlow(ReferenceFlow):
    """``S_t u0 = (u0^{3/2} + 3t/4)^{2/3}``."""

    system_id = "neg-sqrt"

    def sample(self, u0, times):
        x = float(as_point(u0)[0])
        if x < 0:
            raise ValueError("initial datum outside the domain")
        t = np.asarray(times, dtype=float)
        return ((x ** 1.5 + 0.75 * t) ** (2.0 / 3.0))[:, None]

    def eval(self, t, u0):
        return self.sample(u0, [t])[0]


class GaussianFlow(ReferenceFlow):
    """Fokker-Planck flow of a Gaussian on the quantile grid.

    With potential ``kappa x^2/2`` (``kappa = 0`` is the heat flow) the law
    stays Gaussian with ``m_t = m_0 e^{-kappa t}`` and
    ``var_t = var_0 e^{-2 kappa t} + (1 - e^{-2 kappa t})/kappa``.
    The initial mean and variance are fitted from the quantile vector.
    """

    def __init__(self, system, kappa: float = 0.0):
        super().__init__(system)
        self.kappa = float(kappa)
        self.system_id = "heat" if kappa == 0 else "ou"

    def moments(self, t, m0, v0):
        k = self.kappa
        if k == 0:
            return m0, v0 + 2.0 * t
        return m0 * math.exp(-k * t), v0 * math.exp(-2 * k * t) + exp_primitive(-2 * k, t) * 2.0

    def eval(self, t, u0):
        m0, v0 = fit_gaussian(u0)
        m, v = self.moments(t, m0, v0)
        return gaussian_quantile(m, v, len(u0))


class SemiDiscreteFlow(ReferenceFlow):
    """Exact flow of the discretized energy: ``u' = -grad phi(u) / weight``.

    Integrated with an implicit Runge-Kutta method at tight tolerances; this
    is the flow the scheme converges to on a fixed grid.
    """

    def __init__(self, system, rtol: float = 1e-11, atol: float = 1e-12):
        super().__init__(system)
        self.system_id = "semi-discrete"
        self.rtol, self.atol = rtol, atol

    def sample(self, u0, times):
        f, w = self.system.functional, self.system.space.weight
        u0 = as_point(u0)
        times = np.asarray(times, dtype=float)
        if times.size == 0:
            return np.zeros((0, len(u0)))
        T = float(times.max())
        if T == 0:
            return np.repeat(u0[None, :], len(times), axis=0)

        def rhs(_, u):
            return -f.partial(u) / w

        def jac(_, u):
            H = f.hessian(u)
            if f.hessian_layout == "banded":
                n = len(u)
                J = np.diag(H[1]) + np.diag(H[0, 1:], 1) + np.diag(H[2, :-1], -1)
                return -J / w
            return -np.atleast_2d(H) / w

        order = np.argsort(times)
        sol = solve_ivp(rhs, (0.0, T), u0, method="Radau", jac=jac, t_eval=times[order],
                        rtol=self.rtol, atol=self.atol)
        if not sol.success:
            raise RuntimeError(f"reference integration failed: {sol.message}")
        out = np.empty((len(times), len(u0)))
        out[order] = sol.y.T
        return out

    def eval(self, t, u0):
        return self.sample(u0, [t])[0]


# ---------------------------------------------------------------------------
# catalog

SYSTEM_IDS = ("quadratic", "abs", "neg-sqrt", "heat", "ou")


def build_system(system_id: str, **params) -> tuple[EnergySystem, ReferenceFlow]:
    """Energy system and exact flow for a catalog entry.

    quadratic: ``a`` (scalar or matrix), ``b``, ``dim``; abs: ``w``, ``dim``;
    neg-sqrt: none; heat: ``M``; ou: ``M``, ``kappa``.
    """
    if system_id == "quadratic":
        A = params.get("a", 1.0)
        f = Quadratic(A, params.get("b", 0.0), params.get("dim"))
        space = EuclideanSpace(f.dim)
        sys_ = EnergySystem(space, f, f.lambda_hint)
        return sys_, QuadraticFlow(sys_)
    if system_id == "abs":
        space = EuclideanSpace(int(params.get("dim", 1)))
        sys_ = EnergySystem(space, AbsNorm(params.get("w", 1.0)), 0.0)
        return sys_, AbsFlow(sys_)
    if system_id == "neg-sqrt":
        sys_ = EnergySystem(EuclideanSpace(1), NegSqrt(), 0.0)
        return sys_, NegSqrtFlow(sys_)
    if system_id == "heat":
        sys_ = EnergySystem(QuantileSpace(int(params.get("M", 256))), QuantileEntropy(), 0.0)
        return sys_, GaussianFlow(sys_)
    if system_id == "ou":
        kappa = float(params.get("kappa", 1.0))
        f = FunctionalSum(QuantileEntropy(), QuantilePotential(HarmonicPotential(kappa)))
        sys_ = EnergySystem(QuantileSpace(int(params.get("M", 256))), f, kappa)
        return sys_, GaussianFlow(sys_, kappa)
    raise KeyError(f"unknown system {system_id!r}; known: {', '.join(SYSTEM_IDS)}")


def reference_flow(system_id: str, u0, t: float, **params) -> np.ndarray:
    """Closed-form ``S_t u0`` for a catalog system."""
    _, flow = build_system(system_id, **params)
    return flow.eval(t, as_point(u0))


# ---------------------------------------------------------------------------
# convergence studies


@dataclass
class RateRow:
    n: int
    tau: float
    sup_error: float
    bound_rhs: float
    eps_measured: float
    times: np.ndarray = field(repr=False, default=None)
    errors: np.ndarray = field(repr=False, default=None)
    traj: DiscreteTrajectory = field(repr=False, default=None)


@dataclass
class RateTable:
    rows: list
    horizon: float
    eta: float
    lam: float
    u0: np.ndarray
    reference: str = ""
    bound_kind: str = "regular-data"
    reference_bias: float = 0.0

    @property
    def fitted_order(self) -> float:
        return fit_order([r.tau for r in self.rows], [r.sup_error for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "tau", "sup_error", "bound_rhs", "eps_measured", "fitted_order"])
        order = repr(float(self.fitted_order))
        for r in self.rows:
            w.writerow([r.n, repr(float(r.tau)), repr(float(r.sup_error)), repr(float(r.bound_rhs)),
                        repr(float(r.eps_measured)), order])
        return buf.getvalue()


def fit_order(taus, errors) -> float:
    """Least-squares slope of ``log error`` against ``log tau`` (positive errors only)."""
    t = np.asarray(taus, dtype=float)
    e = np.asarray(errors, dtype=float)
    ok = e > 0
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(t[ok]), np.log(e[ok]), 1)[0])


def error_times(n: int, tau: float) -> np.ndarray:
    """Grid times ``k tau`` and interval midpoints ``(k - 1/2) tau``."""
    k = np.arange(1, n + 1)
    return np.sort(np.concatenate([k * tau, (k - 0.5) * tau]))


def regular_bound(t, tau, lam, eta, eps, d0, slope0) -> float:
    """Uniform error bound for initial data with finite slope."""
    tt = t_ceil(t, tau)
    g = gamma_of(eta, lam)
    rhs = math.exp(-lam * t) * d0 + (math.sqrt(tau * tt) + tt - t) * math.exp(g * tt) * slope0
    if eps > 0:
        rhs += 2.0 * math.sqrt(eps / tau * tt * exp_primitive(2 * g, tt))
    return rhs


def certified_moreau_yosida_1d(f, space, sigma: float, x, tol: float = 1e-13) -> float:
    """Golden-section value of ``min_y phi(y) + d(x,y)^2/(2 sigma)`` in one dimension.

    The returned value is attained at a feasible point, so it bounds the
    true infimum from above.
    """
    x0 = float(as_point(x)[0])

    def obj(y):
        v = f.value(np.array([y]))
        return math.inf if v == math.inf else (y - x0) ** 2 / (2 * sigma) + v

    # bracket: the minimizer moves at most by sigma times the slope scale
    lo, hi = x0 - 10.0 * (1 + sigma), x0 + 10.0 * (1 + sigma)
    grid = np.linspace(lo, hi, 4001)
    vals = f.values(grid[:, None]) + (grid - x0) ** 2 / (2 * sigma)
    vals[~np.isfinite(vals)] = math.inf
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = obj(c), obj(d)
    while b - a > tol * (1 + abs(a)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = obj(d)
    return float(min(fc, fd, vals[k], obj(x0)))


def domain_bound(t, tau, lam, eta, d0, phi0, my_value) -> float:
    """Order-1/4 error bound for initial data in the domain only.

    ``my_value(sigma)`` returns the Moreau-Yosida value at ``U^0``.
    """
    tt = t_ceil(t, tau)
    g = gamma_of(eta, lam)
    sigma = exp_primitive(lam - eta, 3.0 * math.sqrt(tau * tt))
    gap = max(phi0 - my_value(sigma), 0.0)
    return math.exp(-lam * t) * d0 + 10.0 * (tau * tt) ** 0.25 * math.exp(2 * g * tt) * math.sqrt(gap)


def _study_row(args):
    system, flow, u0, horizon, n, eta, cfg, lam = args
    tau = horizon / n
    traj = run_minimizing_movement(system, SchemeParams(tau, n, eta, cfg), u0)
    times = error_times(n, tau)
    exact = flow.sample(u0, times)
    approx = np.array([interpolant_eval(traj, t) for t in times])
    errors = system.space.dists(exact, approx)
    eps = traj.measured_eps(lam)
    slope0 = traj.slopes[0]
    if math.isfinite(slope0):
        rhs = max(regular_bound(t, tau, lam, eta, eps, 0.0, slope0) for t in times)
    else:
        rhs = math.nan
    return RateRow(n, tau, float(errors.max()), float(rhs), eps, times, errors, traj)


def convergence_study(system: EnergySystem, flow: ReferenceFlow, u0, horizon: float, n_list, eta: float = 0.0,
                      solver_cfg: SolverConfig | None = None, lam: float | None = None, jobs: int = 1,
                      keep_trajectories: bool = True) -> RateTable:
    """Run the scheme for each ``n`` with ``tau = horizon / n`` and measure the sup error.

    The error is sampled at grid times and interval midpoints. ``lam`` is
    the modulus used for the measured slack and the bound column (default
    ``min(system.lam, 0)``).
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise ValueError("n_list must be a nonempty increasing list of positive integers")
    u0 = system.space.point(u0)
    lam = min(system.lam, 0.0) if lam is None else lam
    cfg = solver_cfg or DEFAULT_CONFIG
    tasks = [(system, flow, u0, horizon, n, eta, cfg, lam) for n in n_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_study_row, tasks))
    else:
        rows = [_study_row(t) for t in tasks]
    if not keep_trajectories:
        for r in rows:
            r.traj = None
    kind = "regular-data" if all(math.isfinite(r.bound_rhs) for r in rows) else "none"
    return RateTable(rows, horizon, eta, lam, u0, flow.system_id, kind)


def grid_bias(system: EnergySystem, u0, times) -> float:
    """Largest distance between the closed-form Gaussian flow and the semi-discrete flow."""
    kappa = system.lam if system.space.kind == "quantile" else 0.0
    g = GaussianFlow(system, kappa).sample(u0, times)
    s = SemiDiscreteFlow(system).sample(u0, times)
    return float(np.max(system.space.dists(g, s)))


# ---------------------------------------------------------------------------
# bound audits


def crandall_liggett_audit(table: RateTable, slope0: float, margin: float = 10.0) -> AuditReport:
    """Error at the horizon against ``t |slope|(u0) / sqrt(n)``, with a safety margin.

    Each row passes when ``margin * error <= bound``.
    """
    rep = AuditReport("crandall-liggett", 0.0, note=f"required margin {margin:g}x")
    t = table.horizon
    for r in table.rows:
        err = float(r.errors[np.argmin(np.abs(r.times - t))])
        rep.add(margin * err, t / math.sqrt(r.n) * slope0, n=r.n, error=err)
    return rep


def bound_audit_regular(table: RateTable, u0, lam: float, eta: float, tol: float = 1e-12) -> AuditReport:
    """Audit every sampled error against the regular-data bound with measured slack.

    Needs ``lam <= 0``; rows failing ``4 gamma tau <= 1`` are skipped.
    """
    rep = AuditReport("regular-data-bound", tol)
    if lam > 0:
        rep.applicable = False
        rep.note = "bound requires lam <= 0; audit with lam = 0"
        return rep
    skipped = []
    for r in table.rows:
        if 4 * gamma_of(eta, lam) * r.tau > 1:
            skipped.append(r.n)
            continue
        U0 = r.traj.points[0] if r.traj is not None else as_point(u0)
        slope0 = r.traj.slopes[0] if r.traj is not None else math.nan
        eps = r.traj.measured_eps(lam) if r.traj is not None else r.eps_measured
        d0 = r.traj.space.dist(as_point(u0), U0) if r.traj is not None else 0.0
        if not math.isfinite(slope0):
            skipped.append(r.n)
            continue
        for t, e in zip(r.times, r.errors):
            rep.add(e, regular_bound(t, r.tau, lam, eta, eps, d0, slope0), n=r.n, t=float(t), eps=eps)
    if skipped:
        rep.note = f"skipped n={skipped} (step guard or infinite slope)"
    if not rep.samples:
        rep.applicable = False
    return rep


def bound_audit_domain(table: RateTable, u0, lam: float, eta: float, solver_cfg=None,
                       tol: float = 1e-12) -> AuditReport:
    """Audit every sampled error against the order-1/4 bound for data in the domain.

    The Moreau-Yosida term uses a golden-section minimization in one
    dimension and the resolvent solver otherwise.
    """
    rep = AuditReport("domain-data-bound", tol)
    if lam > 0:
        rep.applicable = False
        rep.note = "bound requires lam <= 0; audit with lam = 0"
        return rep
    skipped = []
    for r in table.rows:
        if r.tau >= 1 or 4 * gamma_of(eta, lam) * r.tau > 1:
            skipped.append(r.n)
            continue
        traj = r.traj
        f, space = traj.functional, traj.space
        U0 = traj.points[0]
        phi0 = f.value(U0)
        cache = {}

        def my_value(sigma, f=f, space=space, U0=U0, cache=cache):
            if sigma not in cache:
                if len(U0) == 1:
                    cache[sigma] = certified_moreau_yosida_1d(f, space, sigma, U0)
                else:
                    cache[sigma] = moreau_yosida_value(f, space, sigma, U0, solver_cfg)
            return cache[sigma]

        d0 = space.dist(as_point(u0), U0)
        for t, e in zip(r.times, r.errors):
            rep.add(e, domain_bound(t, r.tau, lam, eta, d0, phi0, my_value), n=r.n, t=float(t))
    if skipped:
        rep.note = f"skipped n={skipped} (tau >= 1 or step guard)"
    return rep


def local_error_check(system: EnergySystem, flow: ReferenceFlow, u0, tau: float, eta: float = 0.0,
                      eps_budget: float | None = None, lam: float | None = None, solver_cfg=None,
                      tol: float = 1e-12) -> AuditReport:
    """One-step error ``e^{2 lam tau} d^2(U, u_tau) <= tau^2 (|slope|^2(u0) - e^{2 alpha tau} |slope|^2(U)) + 3 eps tau``.

    ``U`` is one resolvent step, ``u_tau`` the exact flow, ``beta = eta - lam``
    and ``alpha = min(0, log(1 - (eta + beta - 2 lam) tau) / (2 tau))``. The
    slack ``eps`` is measured from the one-step hypotheses unless a budget
    is given, in which case the hypotheses are also audited against it.
    """
    lam = min(system.lam, 0.0) if lam is None else lam
    f, space = system.functional, system.space
    u0 = space.point(u0)
    beta = eta - lam
    c = (eta + beta - 2 * lam) * tau
    rep = AuditReport("local-error", tol)
    if lam > 0 or c >= 1:
        rep.applicable = False
        rep.note = "needs lam <= 0 and (eta + beta - 2 lam) tau < 1"
        return rep
    res = solve_resolvent(f, space, tau, eta, u0, solver_cfg)
    U = res.point
    s0 = metric_slope(f, space, u0)
    sU = metric_slope(f, space, U)
    d2 = space.dist(U, u0) ** 2
    drop = f.value(u0) - f.value(U)
    need = max(tau * (1 - 0.5 * eta * tau) ** 2 * sU ** 2 - d2 / tau,
               (1 - 0.5 * beta * tau) * d2 / tau - drop, 0.0)
    eps = need if eps_budget is None else float(eps_budget)
    if eps_budget is not None:
        rep.add(need, eps, check="hypotheses")
    alpha = min(0.0, math.log1p(-c) / (2 * tau))
    u_tau = flow.eval(tau, u0)
    scale = 1.0 + tau * tau * s0 * s0
    rep.tolerance = tol * scale
    lhs = math.exp(2 * lam * tau) * space.dist(U, u_tau) ** 2
    rhs = tau * tau * (s0 ** 2 - math.exp(2 * alpha * tau) * sU ** 2) + 3 * eps * tau
    rep.add(lhs, rhs, tau=tau, eps=eps)
    return rep
