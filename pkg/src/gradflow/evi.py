"""Auditors for curves that should solve the evolution variational inequality.

Every auditor takes sampled curves and returns :class:`AuditReport` records.
Inequalities whose hypotheses fail are reported as not applicable.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (CONTINUOUS, PIECEWISE_CONSTANT, AuditReport, AuditSuite, Trajectory, exp_primitive,
                   gauss_legendre, metric_derivatives, pairs, trapezoid)
from .functionals import INF, Functional, global_slope, metric_slope, moreau_yosida_value

CLOSED_FORM_TOL = 1e-8


def _as_list(v):
    v = np.asarray(v, dtype=float)
    return [v] if v.ndim == 1 else list(v)


def _values(traj, f):
    return f.values(traj.points)


def _slopes(traj, f):
    return np.array([metric_slope(f, traj.space, u) for u in traj.points])


def _richardson_tol(fine: float, coarse: float, floor: float) -> float:
    # trapezoid error ~ C h^2: the fine error is about |fine - coarse| / 3
    return floor + 2.0 * abs(fine - coarse)


def evi_integral_check(traj: Trajectory, f: Functional, lam: float, v_probes, max_pairs: int = 200,
                       tol: float = CLOSED_FORM_TOL) -> AuditSuite:
    """Audit both integrated forms of the variational inequality.

    exponential form: e^{lam(t-s)}/2 d^2(u_t,v) - d^2(u_s,v)/2 <= E_lam(t-s) (phi(v) - phi(u_t))
    integral form:    d^2(u_t,v)/2 - d^2(u_s,v)/2 + int_s^t (phi(u_r) + lam/2 d^2(u_r,v)) dr <= (t-s) phi(v)

    The integral is a trapezoid sum; its tolerance adds a Richardson
    estimate from the stride-2 sum.
    """
    if traj.kind != CONTINUOUS:
        raise ValueError("integral checks need continuous samples")
    space = traj.space
    times = traj.times
    phi = _values(traj, f)
    exp_rep = AuditReport("evi-exponential-form", tol)
    int_rep = AuditReport("evi-integral-form", tol)
    quad_err = 0.0
    prs = pairs(len(traj), max_pairs)
    for k, v in enumerate(_as_list(v_probes)):
        fv = f.value(v)
        if fv == INF:
            raise ValueError("probe outside the domain")
        d2 = space.dists(v, traj.points) ** 2
        g = phi + 0.5 * lam * d2
        if len(times) >= 5:
            m = (len(times) - 1) // 2 * 2
            fine = trapezoid(g[:m + 1], times[:m + 1])
            coarse = trapezoid(g[:m + 1:2], times[:m + 1:2])
            quad_err = max(quad_err, abs(fine - coarse))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(times))])
        for i, j in prs:
            s, t = times[i], times[j]
            lhs = 0.5 * math.exp(lam * (t - s)) * d2[j] - 0.5 * d2[i]
            exp_rep.add(lhs, exp_primitive(lam, t - s) * (fv - phi[j]), s=float(s), t=float(t), v=k)
            int_rep.add(0.5 * d2[j] - 0.5 * d2[i] + (cum[j] - cum[i]), (t - s) * fv, s=float(s), t=float(t), v=k)
    int_rep.tolerance = _richardson_tol(0.0, quad_err, tol)
    return AuditSuite([exp_rep, int_rep])


def contraction_check(traj1: Trajectory, traj2: Trajectory, lam: float, tol: float = 1e-10,
                      max_pairs: int = 400) -> AuditReport:
    """Audit ``d(u1_t, u2_t) <= e^{-lam (t-s)} d(u1_s, u2_s)`` on sampled ``s < t``."""
    if len(traj1) != len(traj2) or not np.allclose(traj1.times, traj2.times, rtol=0, atol=1e-12):
        raise ValueError("trajectories must share one time grid")
    space = traj1.space
    gap = np.array([space.dist(a, b) for a, b in zip(traj1.points, traj2.points)])
    rep = AuditReport("contraction", tol * (1.0 + float(np.max(gap))))
    t = traj1.times
    for i, j in pairs(len(t), max_pairs):
        rep.add(gap[j], math.exp(-lam * (t[j] - t[i])) * gap[i], s=float(t[i]), t=float(t[j]))
    return rep


def _lambda_slope(f, space, lam, v, probes):
    s = metric_slope(f, space, v)
    if f.convex and lam <= f.lambda_hint:
        # slope identity for lambda-convex energies
        return s
    return max(s, global_slope(f, space, lam, v, probes))


def estimate_suite(traj: Trajectory, f: Functional, lam: float, v, nodes: int = 32, solver_cfg=None,
                   max_times: int = 64, tol: float = CLOSED_FORM_TOL) -> AuditSuite:
    """A priori estimates and short-time expansions at sampled times.

    a-priori:           e^{lam t}/2 d^2(u_t,v) + E(phi(u_t) - phi(v)) + E^2/2 |slope|^2(u_t) <= d^2(u_0,v)/2
    a-priori-slope:     |slope|^2(u_t) <= l_lam(v)^2 / (2 e^{lam t} - 1) + d^2(u_0,v) / E^2, when -lam t < log 2
    expansion:          e^{2 lam t}/2 d^2(u_t,v) - d^2(u_0,v)/2 <= E_{2lam}(t)(phi(v) - phi(u_0)) + t^2/2 |slope|^2(u_0),
                        when lam <= 0
    expansion-moreau-yosida:
                        e^{lam t}/2 d^2(u_t,v) - d^2(u_0,v)/2 <= E(phi(v) - phi(u_0))
                        + 2 e^{-lam t} int_0^t e^{2 lam s}(phi(u_0) - phi_{E_lam(s)}(u_0)) ds

    with ``E = E_lam(t)``. The last integral uses ``nodes`` Gauss-Legendre
    nodes; Moreau-Yosida values come from feasible points, so the computed
    remainder never exceeds the true one.
    """
    if traj.kind != CONTINUOUS:
        raise ValueError("estimates need continuous samples")
    if abs(traj.times[0]) > 0:
        raise ValueError("trajectory must start at t = 0")
    space = traj.space
    u0 = traj.points[0]
    phi = _values(traj, f)
    slopes = _slopes(traj, f)
    idx = np.unique(np.linspace(1, len(traj) - 1, min(max_times, len(traj) - 1)).round().astype(int))
    rep_a = AuditReport("a-priori", tol)
    rep_b = AuditReport("a-priori-slope", tol)
    rep_c = AuditReport("short-time-expansion", tol)
    rep_d = AuditReport("short-time-expansion-moreau-yosida", tol, note=f"{nodes} Gauss nodes")
    f0 = phi[0]
    my_cache: dict = {}

    def remainder(s: float) -> float:
        sig = exp_primitive(lam, s)
        if sig not in my_cache:
            my_cache[sig] = f0 - moreau_yosida_value(f, space, sig, u0, solver_cfg)
        return my_cache[sig]

    for k, vv in enumerate(_as_list(v)):
        fv = f.value(vv)
        d2 = space.dists(vv, traj.points) ** 2
        lv = _lambda_slope(f, space, lam, vv, traj.points[space.dists(vv, traj.points) > 0])
        for i in idx:
            t = float(traj.times[i])
            E = exp_primitive(lam, t)
            lhs = 0.5 * math.exp(lam * t) * d2[i] + E * (phi[i] - fv) + 0.5 * E * E * slopes[i] ** 2
            rep_a.add(lhs, 0.5 * d2[0], t=t, v=k)
            if -lam * t < math.log(2.0) and lv < INF:
                rep_b.add(slopes[i] ** 2, lv ** 2 / (2 * math.exp(lam * t) - 1) + d2[0] / E ** 2, t=t, v=k)
            if lam <= 0 and slopes[0] < INF:
                rep_c.add(0.5 * math.exp(2 * lam * t) * d2[i] - 0.5 * d2[0],
                          exp_primitive(2 * lam, t) * (fv - f0) + 0.5 * t * t * slopes[0] ** 2, t=t, v=k)
            if exp_primitive(lam, t) < f.tau_max:
                integral = gauss_legendre(lambda s: math.exp(2 * lam * s) * remainder(s), 0.0, t, nodes)
                rep_d.add(0.5 * math.exp(lam * t) * d2[i] - 0.5 * d2[0],
                          E * (fv - f0) + 2 * math.exp(-lam * t) * integral, t=t, v=k)
    for rep, why in ((rep_b, "needs -lam t < log 2"), (rep_c, "needs lam <= 0 and finite initial slope"),
                     (rep_d, "Moreau-Yosida step beyond the admissible range")):
        if not rep.samples:
            rep.applicable = False
            rep.note = why
    return AuditSuite([rep_a, rep_b, rep_c, rep_d])


def ede_edi_residual(traj: Trajectory, f: Functional, s_index: int = 0, t_index: int = -1,
                     tol: float = 1e-10) -> AuditSuite:
    """Energy-dissipation residual ``R = int (|u'|^2/2 + |slope|^2/2) + phi(u_t) - phi(u_s)``.

    Continuous samples use metric-derivative finite differences and a
    trapezoid rule; the tolerance adds a Richardson estimate from the
    stride-2 sampling. Piecewise constant scheme output uses the discrete
    sum ``sum_n d^2/(2 tau) + tau/2 |slope|^2(U^n)``; there the equality is
    not expected and is recorded without being asserted.
    """
    n = len(traj)
    s_index %= n
    t_index %= n
    if s_index >= t_index:
        raise ValueError("need s_index < t_index")
    phi = _values(traj, f)
    sl = _slopes(traj, f)
    drop = phi[t_index] - phi[s_index]
    sl_ = slice(s_index, t_index + 1)
    if traj.kind == PIECEWISE_CONSTANT:
        tau = np.diff(traj.times[sl_])
        d = traj.space.dists(traj.points[s_index:t_index], traj.points[s_index + 1:t_index + 1])
        R = float(np.sum(d * d / (2 * tau) + 0.5 * tau * sl[s_index + 1:t_index + 1] ** 2) + drop)
        edi = AuditReport("energy-dissipation-inequality", tol)
        edi.add(R, 0.0, s=float(traj.times[s_index]), t=float(traj.times[t_index]))
        ede = AuditReport("energy-dissipation-equality", tol, applicable=False,
                          note="piecewise-constant input: equality not expected")
        ede.add(abs(R), 0.0)
        return AuditSuite([edi, ede])
    speed = metric_derivatives(traj)
    g = 0.5 * speed ** 2 + 0.5 * sl ** 2
    x = traj.times
    R = trapezoid(g[sl_], x[sl_]) + drop
    rtol = tol
    if t_index - s_index >= 4 and (t_index - s_index) % 2 == 0:
        coarse_sub = Trajectory(x[s_index:t_index + 1:2], traj.points[s_index:t_index + 1:2], traj.space)
        gc = 0.5 * metric_derivatives(coarse_sub) ** 2 + 0.5 * sl[s_index:t_index + 1:2] ** 2
        Rc = trapezoid(gc, coarse_sub.times) + drop
        rtol = _richardson_tol(R, Rc, tol)
    edi = AuditReport("energy-dissipation-inequality", rtol)
    edi.add(R, 0.0, s=float(x[s_index]), t=float(x[t_index]))
    ede = AuditReport("energy-dissipation-equality", rtol)
    ede.add(abs(R), 0.0, s=float(x[s_index]), t=float(x[t_index]))
    return AuditSuite([edi, ede])


def energy_identity_check(traj: Trajectory, f: Functional, t_min: float = 0.0, tol: float = 1e-4) -> AuditReport:
    """Pairwise agreement of ``-d phi/dt``, ``|u'|^2`` and ``|slope|^2`` at interior samples.

    The energy derivative and the speed are central differences.
    """
    if traj.kind != CONTINUOUS:
        raise ValueError("needs continuous samples")
    x = traj.times
    phi = _values(traj, f)
    sl = _slopes(traj, f)
    speed = metric_derivatives(traj)
    rep = AuditReport("energy-identity", tol)
    for i in range(1, len(x) - 1):
        if x[i] < t_min - 1e-12:
            continue
        dphi = -(phi[i + 1] - phi[i - 1]) / (x[i + 1] - x[i - 1])
        a, b, c = dphi, speed[i] ** 2, sl[i] ** 2
        t = float(x[i])
        rep.add(abs(a - b), 0.0, t=t, pair="energy-speed")
        rep.add(abs(a - c), 0.0, t=t, pair="energy-slope")
        rep.add(abs(b - c), 0.0, t=t, pair="speed-slope")
    return rep


def slope_monotonicity_check(traj: Trajectory, f: Functional, lam: float, tol: float = 1e-10) -> AuditReport:
    """Audit that ``t -> e^{lam t} |slope|(u_t)`` is nonincreasing."""
    g = np.exp(lam * traj.times) * _slopes(traj, f)
    finite = g[np.isfinite(g)]
    rep = AuditReport("slope-monotonicity", tol * (1.0 + (float(np.max(finite)) if finite.size else 0.0)))
    for i in range(len(g) - 1):
        rep.add(g[i + 1], g[i], t=float(traj.times[i + 1]))
    return rep


def asymptotic_behaviour_check(traj: Trajectory, f: Functional, lam: float, u_bar, t0_index: int = 0,
                               tol: float = CLOSED_FORM_TOL) -> AuditReport:
    """Long-time bounds relative to the minimizer ``u_bar``.

    For ``lam > 0``: energy sandwich, exponential decay of distance, energy
    gap and slope, and the ``1/E_lam`` bounds. For ``lam = 0``: the
    ``1/t`` bounds and monotone distance to ``u_bar``.
    """
    space = traj.space
    phi = _values(traj, f)
    sl = _slopes(traj, f)
    fbar = f.value(u_bar)
    dist = space.dists(u_bar, traj.points)
    rep = AuditReport("long-time-behaviour", tol)
    x = traj.times
    t0 = x[t0_index]
    i0 = t0_index % len(x)
    if lam > 0:
        for i in range(i0 + 1, len(x)):
            t = float(x[i])
            h = t - t0
            gap = phi[i] - fbar
            E = exp_primitive(lam, h)
            rep.add(0.5 * lam * dist[i] ** 2, gap, t=t, check="energy-lower")
            rep.add(gap, sl[i] ** 2 / (2 * lam), t=t, check="energy-upper")
            rep.add(dist[i], dist[i0] * math.exp(-lam * h), t=t, check="distance-decay")
            rep.add(gap, (phi[i0] - fbar) * math.exp(-2 * lam * h), t=t, check="energy-decay")
            rep.add(gap, dist[i0] ** 2 / (2 * E), t=t, check="energy-rate")
            rep.add(sl[i], sl[i0] * math.exp(-lam * h), t=t, check="slope-decay")
            rep.add(sl[i], dist[i0] / E, t=t, check="slope-rate")
    elif lam == 0:
        for i in range(1, len(x)):
            t = float(x[i])
            rep.add(sl[i], dist[0] / t, t=t, check="slope-rate")
            rep.add(phi[i] - fbar, dist[0] ** 2 / (2 * t), t=t, check="energy-rate")
            rep.add(dist[i], dist[i - 1], t=t, check="distance-monotone")
    else:
        rep.applicable = False
        rep.note = "no long-time bounds for lam < 0"
    return rep


def local_evi_check(traj: Trajectory, f: Functional, t0_index: int, v_endpoints, s_grid=(1.0, 0.5, 0.25, 0.125),
                    fd_step: float = 1e-4, tol: float = 1e-4) -> AuditReport:
    """Compare the upper distance derivative along geodesics with the energy's directional derivative.

    LHS: sup over ``s`` of ``d/dt^+ d^2(u_t, g_s) / (2 s)`` at ``t0``, with
    ``g`` the geodesic from ``u_{t0}`` to ``v``, from forward differences of
    the samples (steps of one and two samples, extrapolated).
    RHS: one-sided derivative of ``phi`` along ``g`` at 0, extrapolated from
    steps ``fd_step`` and ``2 fd_step``.
    """
    if traj.kind != CONTINUOUS:
        raise ValueError("needs continuous samples")
    space = traj.space
    i = t0_index % len(traj)
    if i + 2 >= len(traj):
        raise ValueError("need two samples after t0")
    u = traj.points[i]
    h1 = traj.times[i + 1] - traj.times[i]
    h2 = traj.times[i + 2] - traj.times[i]
    fu = f.value(u)
    rep = AuditReport("local-evi", tol)
    for k, v in enumerate(_as_list(v_endpoints)):
        if space.dist(u, v) == 0:
            rep.add(0.0, 0.0, v=k)
            continue
        best = -INF
        for s in s_grid:
            gs = space.intermediate(u, v, s)
            base = space.dist(u, gs) ** 2

            def q(j, h):
                return (space.dist(traj.points[i + j], gs) ** 2 - base) / (2 * s * h)

            d1, d2 = q(1, h1), q(2, h2)
            est = 2 * d1 - d2 if abs(h2 - 2 * h1) <= 1e-9 * h2 else d1
            best = max(best, est)
        r1 = (f.value(space.intermediate(u, v, fd_step)) - fu) / fd_step
        r2 = (f.value(space.intermediate(u, v, 2 * fd_step)) - fu) / (2 * fd_step)
        rep.add(best, 2 * r1 - r2, v=k, t0=float(traj.times[i]))
    return rep


def stability_experiment(flows, reference: Trajectory, f: Functional, lam: float, exclude_times=(),
                         tol: float = 1e-9) -> AuditSuite:
    """Convergence of perturbed solutions to a reference solution.

    positions: d(u^n_t, u_t) <= e^{-lam t} d(u^n_0, u_0) at every sample
    energies, slopes: sup over t > 0 (minus ``exclude_times``) of the gaps
    shrink as the initial gap shrinks, and vanish with it.
    """
    space = reference.space
    for tr in flows:
        if len(tr) != len(reference) or not np.allclose(tr.times, reference.times, atol=1e-12, rtol=0):
            raise ValueError("all flows must share the reference time grid")
    x = reference.times
    keep = (x > 0) & ~np.isin(np.round(x, 12), np.round(np.asarray(exclude_times, dtype=float), 12))
    phi_ref = _values(reference, f)
    sl_ref = _slopes(reference, f)
    pos = AuditReport("stability-positions", tol)
    en = AuditReport("stability-energies", tol)
    sl = AuditReport("stability-slopes", tol)
    rows = []
    for k, tr in enumerate(flows):
        d = np.array([space.dist(a, b) for a, b in zip(tr.points, reference.points)])
        for i in range(len(x)):
            pos.add(d[i], math.exp(-lam * x[i]) * d[0], flow=k, t=float(x[i]))
        eg = float(np.max(np.abs(_values(tr, f) - phi_ref)[keep], initial=0.0))
        sg = float(np.max(np.abs(_slopes(tr, f) - sl_ref)[keep], initial=0.0))
        rows.append((d[0], eg, sg, k))
    rows.sort(reverse=True)
    for (d_prev, e_prev, s_prev, _), (d0, e, s, k) in zip(rows, rows[1:]):
        en.add(e, e_prev, flow=k, initial_gap=float(d0))
        sl.add(s, s_prev, flow=k, initial_gap=float(d0))
    for d0, e, s, k in rows:
        if d0 == 0:
            en.add(e, 0.0, flow=k, initial_gap=0.0)
            sl.add(s, 0.0, flow=k, initial_gap=0.0)
    return AuditSuite([pos, en, sl])
