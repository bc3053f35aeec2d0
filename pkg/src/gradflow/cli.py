"""Config-driven command line entry point.

A scenario is a TOML file::

    seed = 0
    horizon = 1.0
    n_list = [1, 2, 4, 8]
    eta = 0.0
    audits = ["crandall-liggett", "regular-data-bound"]

    [space]
    kind = "euclidean"          # or "quantile" with M = 256
    dim = 1

    [functional]
    kind = "quadratic"          # quadratic, abs, neg-sqrt, entropy, fokker-planck
    a = 1.0

    [u0]
    value = [1.0]               # or kind = "gaussian" / "file"

Subcommands: ``run`` (study plus audits), ``rates`` (study only),
``verify`` (audits of a serialized trajectory), ``sample`` (write the
reference curve as a trajectory table) and ``list`` (catalogs).
Exit code 0 means every requested audit passed, 2 means an audit failed
or the scheme aborted, 1 means a usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import CONTINUOUS, AuditReport, AuditSuite, Trajectory
from .evi import (contraction_check, ede_edi_residual, energy_identity_check, estimate_suite, evi_integral_check,
                  slope_monotonicity_check)
from .harness import (SemiDiscreteFlow, bound_audit_domain, bound_audit_regular, build_system, convergence_study,
                      crandall_liggett_audit, local_error_check)
from .mm import (DiscreteTrajectory, SchemeAbort, continuous_stability_report, discrete_stability_report,
                 format_table, read_table)
from .resolvent import SolverConfig
from .spaces import gaussian_quantile, load_quantile

EXIT_OK, EXIT_CONFIG, EXIT_AUDIT = 0, 1, 2

# functional kind -> (catalog system, space kind, accepted parameters)
FUNCTIONALS = {
    "quadratic": ("quadratic", "euclidean", {"a", "b"}),
    "abs": ("abs", "euclidean", {"w"}),
    "neg-sqrt": ("neg-sqrt", "euclidean", set()),
    "entropy": ("heat", "quantile", set()),
    "fokker-planck": ("ou", "quantile", {"kappa"}),
}
SPACES = {"euclidean": {"dim"}, "quantile": {"M"}}

STUDY_AUDITS = {
    "crandall-liggett": "error at the horizon against t |slope|(u0)/sqrt(n)",
    "regular-data-bound": "uniform error bound for data with finite slope, measured slack",
    "domain-data-bound": "order-1/4 error bound for data in the domain",
    "fitted-order": "log-log slope of the sup error lies in order_range",
    "discrete-stability": "one-step slope, energy and step estimates for every n",
    "refined-stability": "Moreau-Yosida stability bounds on the coarsest run",
    "local-error": "one-step error against the exact flow",
}
CURVE_AUDITS = {
    "evi": "integrated variational inequality on sampled exact curves",
    "energy-dissipation": "energy-dissipation equality and inequality",
    "energy-identity": "pointwise agreement of energy rate, squared speed and squared slope",
    "slope-monotonicity": "e^{lam t} |slope|(u_t) nonincreasing",
    "a-priori": "a priori estimates and short-time expansions",
    "contraction": "lambda-contraction between curves from u0 and u1",
}
AUDITS = {**STUDY_AUDITS, **CURVE_AUDITS}


class ConfigError(ValueError):
    """Invalid scenario; the message starts with the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class Scenario:
    space_kind: str
    space_size: int
    functional_kind: str
    functional_params: dict
    lam: float | None
    u0: np.ndarray
    horizon: float
    n_list: list
    eta: float = 0.0
    eps_target: float | None = None
    audits: list = field(default_factory=list)
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    reference: str = "exact"
    reverse_time: bool = False
    sample_dt: float | None = None
    u1: np.ndarray | None = None
    order_range: tuple = (0.0, math.inf)
    margin: float = 1.0
    tolerances: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    trajectory_path: str | None = None
    base_dir: Path = Path(".")

    def build(self):
        system_id = FUNCTIONALS[self.functional_kind][0]
        params = dict(self.functional_params)
        if self.space_kind == "quantile":
            params["M"] = self.space_size
        else:
            params["dim"] = self.space_size
        system, flow = build_system(system_id, **params)
        if self.reference == "semi-discrete":
            flow = SemiDiscreteFlow(system)
        return system, flow

    def audit_lam(self, system) -> float:
        return system.lam if self.lam is None else self.lam


# ---------------------------------------------------------------------------
# config parsing


def _get(table, key, field_name, kind, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(field_name, "missing")
        return default
    v = table[key]
    try:
        if kind is float:
            if isinstance(v, bool):
                raise TypeError
            return float(v)
        if kind is int:
            if isinstance(v, bool) or float(v) != int(v):
                raise TypeError
            return int(v)
        if kind is bool:
            if not isinstance(v, bool):
                raise TypeError
            return v
        if kind is str:
            if not isinstance(v, str):
                raise TypeError
            return v
    except (TypeError, ValueError):
        raise ConfigError(field_name, f"expected {kind.__name__}, got {v!r}") from None
    return v


def _table(cfg, key, required=True) -> dict:
    t = cfg.get(key)
    if t is None:
        if required:
            raise ConfigError(key, "missing section")
        return {}
    if not isinstance(t, dict):
        raise ConfigError(key, "expected a table")
    return t


def _point(spec, field_name, space_kind, size, base_dir):
    if isinstance(spec, (int, float, list)) and not isinstance(spec, bool):
        spec = {"value": spec}
    if not isinstance(spec, dict):
        raise ConfigError(field_name, "expected a number, list or table")
    kind = spec.get("kind", "file" if "file" in spec else "gaussian" if "mean" in spec else "point")
    if kind == "point":
        raw = spec.get("value")
        if raw is None:
            raise ConfigError(f"{field_name}.value", "missing")
        try:
            x = np.atleast_1d(np.asarray(raw, dtype=float))
        except (TypeError, ValueError):
            raise ConfigError(f"{field_name}.value", "not numeric") from None
        if space_kind == "euclidean" and len(x) == 1 and size > 1:
            x = np.full(size, x[0])
    elif kind == "gaussian":
        if space_kind != "quantile":
            raise ConfigError(f"{field_name}.kind", "gaussian data needs a quantile space")
        mean = _get(spec, "mean", f"{field_name}.mean", float, 0.0)
        var = _get(spec, "variance", f"{field_name}.variance", float, 1.0)
        if not var > 0:
            raise ConfigError(f"{field_name}.variance", "must be positive")
        x = gaussian_quantile(mean, var, size)
    elif kind == "file":
        path = base_dir / _get(spec, "file", f"{field_name}.file", str, required=True)
        try:
            x = load_quantile(path.read_text())
        except OSError as e:
            raise ConfigError(f"{field_name}.file", f"cannot read {path}: {e.strerror}") from None
        except ValueError as e:
            raise ConfigError(f"{field_name}.file", str(e)) from None
    else:
        raise ConfigError(f"{field_name}.kind", f"unknown kind {kind!r} (known: point, gaussian, file)")
    if len(x) != size:
        raise ConfigError(field_name, f"has {len(x)} entries, space needs {size}")
    if space_kind == "quantile" and np.any(np.diff(x) < 0):
        raise ConfigError(field_name, "quantile data must be nondecreasing")
    return x


def parse_config(data: dict, base_dir: Path = Path("."), need_u0: bool = True) -> Scenario:
    """Validate a decoded TOML document and build a :class:`Scenario`."""
    space = _table(data, "space")
    space_kind = _get(space, "kind", "space.kind", str, required=True)
    if space_kind not in SPACES:
        raise ConfigError("space.kind", f"unknown kind {space_kind!r} (known: {', '.join(SPACES)})")
    size_key = "M" if space_kind == "quantile" else "dim"
    size = _get(space, size_key, f"space.{size_key}", int, 1 if space_kind == "euclidean" else None,
                required=space_kind == "quantile")
    if size < (2 if space_kind == "quantile" else 1):
        raise ConfigError(f"space.{size_key}", "too small")
    for k in space:
        if k not in SPACES[space_kind] | {"kind"}:
            raise ConfigError(f"space.{k}", f"unknown key for a {space_kind} space")

    func = _table(data, "functional")
    fkind = _get(func, "kind", "functional.kind", str, required=True)
    if fkind not in FUNCTIONALS:
        raise ConfigError("functional.kind", f"unknown kind {fkind!r} (known: {', '.join(FUNCTIONALS)})")
    _, needs_space, allowed = FUNCTIONALS[fkind]
    if needs_space != space_kind:
        raise ConfigError("functional.kind", f"{fkind!r} lives on a {needs_space} space, not {space_kind}")
    fparams = {}
    for k, v in func.items():
        if k == "kind":
            continue
        if k not in allowed:
            raise ConfigError(f"functional.{k}", f"unknown parameter for {fkind!r}")
        if k == "kappa":
            v = _get(func, k, f"functional.{k}", float)
        fparams[k] = v
    if fkind == "neg-sqrt" and size != 1:
        raise ConfigError("space.dim", "neg-sqrt is one-dimensional")

    horizon = _get(data, "horizon", "horizon", float, required=True)
    if not horizon > 0:
        raise ConfigError("horizon", "must be positive")
    n_list = data.get("n_list")
    if not isinstance(n_list, list) or not n_list:
        raise ConfigError("n_list", "expected a nonempty list of integers")
    if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in n_list):
        raise ConfigError("n_list", "entries must be positive integers")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list", "must be strictly increasing")
    eta = _get(data, "eta", "eta", float, 0.0)
    if eta < 0:
        raise ConfigError("eta", "must be nonnegative")
    eps_target = _get(data, "eps_target", "eps_target", float)
    lam = _get(data, "lambda", "lambda", float)
    seed = _get(data, "seed", "seed", int, 0)

    audits = data.get("audits", [])
    if not isinstance(audits, list) or not all(isinstance(a, str) for a in audits):
        raise ConfigError("audits", "expected a list of names")
    for a in audits:
        if a not in AUDITS:
            raise ConfigError("audits", f"unknown audit {a!r} (known: {', '.join(AUDITS)})")

    solver = _table(data, "solver", required=False)
    method = _get(solver, "method", "solver.method", str, "auto")
    if method not in ("auto", "newton", "gradient", "direct"):
        raise ConfigError("solver.method", f"unknown method {method!r}")
    scfg = SolverConfig(method=method, tol=_get(solver, "tol", "solver.tol", float, 1e-10),
                        max_iter=_get(solver, "max_iter", "solver.max_iter", int, 200),
                        probe_count=_get(solver, "probe_count", "solver.probe_count", int, 16),
                        check=_get(solver, "check", "solver.check", bool, True))

    ref = _table(data, "reference", required=False)
    reference = _get(ref, "kind", "reference.kind", str, "exact")
    if reference not in ("exact", "semi-discrete"):
        raise ConfigError("reference.kind", f"unknown kind {reference!r} (known: exact, semi-discrete)")
    if reference == "semi-discrete" and space_kind != "quantile":
        raise ConfigError("reference.kind", "semi-discrete reference needs a quantile space")
    reverse = _get(ref, "reverse_time", "reference.reverse_time", bool, False)
    dt = _get(ref, "dt", "reference.dt", float)
    if dt is not None and not 0 < dt <= horizon:
        raise ConfigError("reference.dt", "must lie in (0, horizon]")

    order_range = data.get("order_range", [0.0, math.inf])
    if (not isinstance(order_range, list) or len(order_range) != 2
            or not all(isinstance(v, (int, float)) for v in order_range)):
        raise ConfigError("order_range", "expected [low, high]")
    margin = _get(data, "margin", "margin", float, 1.0)
    if not margin > 0:
        raise ConfigError("margin", "must be positive")

    tol = _table(data, "tolerances", required=False)
    for k in tol:
        if k not in AUDITS:
            raise ConfigError(f"tolerances.{k}", "unknown audit name")
    tolerances = {k: _get(tol, k, f"tolerances.{k}", float) for k in tol}

    out = _table(data, "output", required=False)
    outputs = {"rates": "rates.csv", "report": "audits.txt", "trajectory": None}
    for k in out:
        if k not in outputs:
            raise ConfigError(f"output.{k}", "unknown output (known: rates, report, trajectory)")
        outputs[k] = _get(out, k, f"output.{k}", str)

    ver = _table(data, "verify", required=False)
    traj_path = _get(ver, "trajectory", "verify.trajectory", str)

    u0 = None
    if "u0" in data:
        u0 = _point(data["u0"], "u0", space_kind, size, base_dir)
    elif need_u0:
        raise ConfigError("u0", "missing")
    u1 = _point(data["u1"], "u1", space_kind, size, base_dir) if "u1" in data else None
    if "contraction" in audits and u1 is None:
        raise ConfigError("u1", "the contraction audit needs a second initial datum")

    return Scenario(space_kind, size, fkind, fparams, lam, u0, horizon, list(n_list), eta, eps_target, audits,
                    seed, scfg, reference, reverse, dt, u1, tuple(float(v) for v in order_range), margin,
                    tolerances, outputs, traj_path, base_dir)


def load_config(path, need_u0: bool = True) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError("--config", f"cannot read {path}: {e.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("--config", f"malformed TOML: {e}") from None
    return parse_config(data, path.parent, need_u0)


# ---------------------------------------------------------------------------
# audits


def _with_tol(rep, sc: Scenario, name: str):
    if name in sc.tolerances:
        for r in (rep if isinstance(rep, list) else [rep]):
            r.tolerance = sc.tolerances[name]
    return rep


def run_study_audits(sc: Scenario, system, flow, table) -> AuditSuite:
    suite = AuditSuite()
    lam = sc.audit_lam(system)
    lam_nonpos = min(lam, 0.0)
    for name in sc.audits:
        if name == "crandall-liggett":
            slope0 = table.rows[0].traj.slopes[0]
            rep = crandall_liggett_audit(table, slope0, sc.margin)
        elif name == "regular-data-bound":
            rep = bound_audit_regular(table, sc.u0, lam_nonpos, sc.eta)
            if sc.eps_target is not None:
                worst = max(r.eps_measured for r in table.rows)
                rep.add(worst, sc.eps_target, check="eps-target")
        elif name == "domain-data-bound":
            rep = bound_audit_domain(table, sc.u0, lam_nonpos, sc.eta, sc.solver)
        elif name == "fitted-order":
            lo, hi = sc.order_range
            rep = AuditReport("fitted-order", 0.0, note=f"required range [{lo:g}, {hi:g}]")
            order = table.fitted_order
            rep.add(lo, order, bound="low")
            rep.add(order, hi, bound="high")
        elif name == "discrete-stability":
            rep = AuditSuite(discrete_stability_report(r.traj, lam_nonpos) for r in table.rows)
        elif name == "refined-stability":
            rep = continuous_stability_report(table.rows[0].traj, lam_nonpos, solver_cfg=sc.solver)
        elif name == "local-error":
            rep = local_error_check(system, flow, sc.u0, sc.horizon / sc.n_list[0], sc.eta,
                                    sc.eps_target, lam_nonpos, sc.solver)
        else:
            continue
        _with_tol(rep, sc, name)
        suite.extend(rep if isinstance(rep, list) else [rep])
    return suite


def _curve_probes(sc: Scenario, system, traj: Trajectory) -> np.ndarray:
    rng = np.random.default_rng(sc.seed)
    space = system.space
    picks = rng.choice(len(traj), size=min(4, len(traj)), replace=False)
    probes = [traj.points[0]]
    for i in sorted(picks):
        v = traj.points[i] + 0.5 * rng.standard_normal(len(traj.points[i]))
        v = np.sort(v) if space.kind == "quantile" else v
        if np.isfinite(system.functional.value(v)):
            probes.append(v)
    return np.array(probes)


def run_curve_audits(sc: Scenario, system, traj: Trajectory, traj1: Trajectory | None = None) -> AuditSuite:
    suite = AuditSuite()
    f = system.functional
    lam = sc.audit_lam(system)
    for name in sc.audits:
        if name == "evi":
            rep = evi_integral_check(traj, f, lam, _curve_probes(sc, system, traj))
        elif name == "energy-dissipation":
            rep = ede_edi_residual(traj, f)
        elif name == "energy-identity":
            rep = energy_identity_check(traj, f, t_min=0.1 * traj.times[-1])
        elif name == "slope-monotonicity":
            rep = slope_monotonicity_check(traj, f, lam)
        elif name == "a-priori":
            rep = estimate_suite(traj, f, lam, _curve_probes(sc, system, traj)[-1], solver_cfg=sc.solver)
        elif name == "contraction":
            if traj1 is None:
                continue
            rep = contraction_check(traj, traj1, lam)
        else:
            continue
        _with_tol(rep, sc, name)
        suite.extend(rep if isinstance(rep, list) else [rep])
    return suite


def _sample_times(sc: Scenario) -> np.ndarray:
    dt = sc.sample_dt or sc.horizon / 200
    n = max(2, int(round(sc.horizon / dt)))
    return np.linspace(0.0, sc.horizon, n + 1)


def _reference_curve(sc: Scenario, system, flow, u0) -> Trajectory:
    times = _sample_times(sc)
    traj = Trajectory(times, flow.sample(u0, times), system.space)
    return traj.reversed_time() if sc.reverse_time else traj


# ---------------------------------------------------------------------------
# subcommands


def _write(out_dir: Path, name: str | None, text: str) -> None:
    if name:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(text)


def _summary(suite: AuditSuite) -> str:
    lines = []
    for r in suite:
        status = "N/A" if not r.applicable else ("PASS" if r.passed else "FAIL")
        lines.append(f"{status:4s} {r.tag} (max residual {r.max_residual:.3e}, {len(r.samples)} samples)")
    return "\n".join(lines)


def cmd_run(args, rates_only: bool = False) -> int:
    sc = load_config(args.config)
    if args.seed is not None:
        sc.seed = args.seed
    system, flow = sc.build()
    out = Path(args.out)
    try:
        table = convergence_study(system, flow, sc.u0, sc.horizon, sc.n_list, sc.eta, sc.solver,
                                  lam=min(sc.audit_lam(system), 0.0), jobs=args.jobs)
    except SchemeAbort as e:
        print(f"scheme aborted: {e}", file=sys.stderr)
        return EXIT_AUDIT
    _write(out, sc.outputs["rates"], table.to_csv())
    if sc.outputs["trajectory"]:
        _write(out, sc.outputs["trajectory"], table.rows[-1].traj.to_table())
    print(f"fitted order {table.fitted_order:.4f} over n = {sc.n_list[0]}..{sc.n_list[-1]}")
    if rates_only:
        return EXIT_OK
    suite = run_study_audits(sc, system, flow, table)
    if any(a in CURVE_AUDITS for a in sc.audits):
        ref = _reference_curve(sc, system, flow, sc.u0)
        ref1 = _reference_curve(sc, system, flow, sc.u1) if sc.u1 is not None else None
        suite.extend(run_curve_audits(sc, system, ref, ref1))
    _write(out, sc.outputs["report"], suite.to_text())
    if len(suite):
        print(_summary(suite))
    return EXIT_OK if suite.passed else EXIT_AUDIT


def cmd_verify(args) -> int:
    sc = load_config(args.config, need_u0=False)
    path = args.trajectory or sc.trajectory_path
    if not path:
        raise ConfigError("verify.trajectory", "no trajectory given (use --trajectory or [verify] trajectory)")
    path = Path(path) if args.trajectory else sc.base_dir / path
    try:
        times, points = read_table(path.read_text())
    except OSError as e:
        raise ConfigError("verify.trajectory", f"cannot read {path}: {e.strerror}") from None
    except (KeyError, ValueError) as e:
        raise ConfigError("verify.trajectory", f"malformed table: {e}") from None
    system, _ = sc.build()
    if points.shape[1] != sc.space_size:
        raise ConfigError("verify.trajectory", f"points have {points.shape[1]} entries, space needs {sc.space_size}")
    suite = AuditSuite()
    lam = min(sc.audit_lam(system), 0.0)
    if args.scheme:
        tau = float(times[1] - times[0])
        if not np.allclose(times, tau * np.arange(len(times)), rtol=1e-9, atol=1e-12):
            raise ConfigError("verify.trajectory", "scheme output must sit on a uniform grid from 0")
        dtraj = DiscreteTrajectory(tau, sc.eta, points, system.space, system.functional)
        for name in sc.audits:
            if name == "discrete-stability":
                suite.append(_with_tol(discrete_stability_report(dtraj, lam), sc, name))
            elif name == "refined-stability":
                suite.append(_with_tol(continuous_stability_report(dtraj, lam, solver_cfg=sc.solver), sc, name))
            elif name == "energy-dissipation":
                suite.extend(_with_tol(ede_edi_residual(dtraj.as_trajectory(), system.functional), sc, name))
    else:
        traj = Trajectory(times, points, system.space, CONTINUOUS)
        if sc.reverse_time:
            traj = traj.reversed_time()
        suite.extend(run_curve_audits(sc, system, traj))
    if not len(suite):
        print("no applicable audits requested", file=sys.stderr)
    _write(Path(args.out), sc.outputs["report"], suite.to_text())
    if len(suite):
        print(_summary(suite))
    return EXIT_OK if suite.passed else EXIT_AUDIT


def cmd_sample(args) -> int:
    sc = load_config(args.config)
    system, flow = sc.build()
    traj = _reference_curve(sc, system, flow, sc.u0)
    _write(Path(args.out), args.name, format_table(traj.times, traj.points, system.space, system.functional))
    return EXIT_OK


def cmd_list(args) -> int:
    print("spaces:")
    for k, v in SPACES.items():
        print(f"  {k} (parameters: {', '.join(sorted(v))})")
    print("functionals:")
    for k, (_, space, params) in FUNCTIONALS.items():
        extra = f"; parameters: {', '.join(sorted(params))}" if params else ""
        print(f"  {k} (space: {space}{extra})")
    print("audits on convergence studies:")
    for k, v in STUDY_AUDITS.items():
        print(f"  {k}: {v}")
    print("audits on sampled curves:")
    for k, v in CURVE_AUDITS.items():
        print(f"  {k}: {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradflow", description="Minimizing movement schemes and their error audits.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_config=True):
        sp.add_argument("--config", required=need_config, help="scenario TOML file")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for convergence studies")

    common(sub.add_parser("run", help="convergence study plus requested audits"))
    common(sub.add_parser("rates", help="convergence study only"))
    v = sub.add_parser("verify", help="audit a serialized trajectory table")
    common(v)
    v.add_argument("--trajectory", help="trajectory table (overrides [verify] trajectory)")
    v.add_argument("--scheme", action="store_true", help="treat the table as piecewise-constant scheme output")
    s = sub.add_parser("sample", help="write the reference curve as a trajectory table")
    common(s)
    s.add_argument("--name", default="reference.csv", help="output file name")
    common(sub.add_parser("list", help="print catalog contents"), need_config=False)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.jobs < 1:
        print("config error: --jobs: must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    handlers = {"run": cmd_run, "rates": lambda a: cmd_run(a, rates_only=True), "verify": cmd_verify,
                "sample": cmd_sample, "list": cmd_list}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemeAbort as e:
        print(f"scheme aborted: {e}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
