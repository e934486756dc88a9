"""Command-line entry point: ``powerge {steady,path,calibrate,political,regions}``.

Exit codes:
  0  success
  2  usage error (bad flags)
  3  invalid parameters or config
  4  a solver did not converge
  5  the economy has no admissible steady state (mu_min is reported)
  6  a transition path blew up
  7  input data or schema error
  8  any other model error
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, fields

import numpy as np

from . import __version__
from .bargaining import gamma_na
from .calibration import SCENARIO_FLAGS, SERIES_FIELDS, TARGETS, ScenarioSpec, row_record, run_scenario
from .dynamics import INSTITUTION_FIELDS, PATH_FIELDS, SHOCK_KINDS, ShockSpec, integrate_path
from .equilibrium import EquilibriumDiagnostics, SteadyState, automation_region, harrod_diagnostics, \
    region_bounds, solve_steady
from .errors import (
    BlowUpError,
    ModelError,
    NoCrossingError,
    NonConvergenceError,
    NoSolutionError,
    ParameterError,
    ScenarioAbortError,
    SchemaError,
    UnattainableTargetError,
)
from .fileio import atomic_write, load_config, read_timeseries, render_csv
from .params import ModelParams
from .political import JOINT_FIELDS, solve_qre

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NONCONVERGENCE = 4
EXIT_INFEASIBLE = 5
EXIT_BLOWUP = 6
EXIT_DATA = 7
EXIT_MODEL = 8

STEADY_FIELDS = tuple(f.name for f in fields(SteadyState)) + ("k_over_qy_annual", "gamma_na")
DIAG_FIELDS = tuple(f.name for f in fields(EquilibriumDiagnostics) if f.name != "r_profit")
REGION_FIELDS = ("q", "m_bar", "m_tilde", "q_bar", "q_min", "q_max", "region", "configured")
POLITICAL_FIELDS = ("phi", "p_union", "p_support") + JOINT_FIELDS + ("residual", "status")


class Infeasible(ModelError):
    def __init__(self, diag: EquilibriumDiagnostics):
        self.diag = diag
        super().__init__(f"no balanced growth path: {diag.reason}; mu_min={diag.mu_min!r}")


def _solver_opts(run: dict) -> dict:
    opts = {}
    for key, cast in (("tol", float), ("max_iter", int), ("damping", float)):
        if key in run:
            try:
                opts[key] = cast(run[key])
            except ValueError:
                raise ParameterError(f"run.{key}", run[key], "has the wrong type") from None
    return opts


def _steady(params: ModelParams, run: dict) -> tuple[SteadyState, EquilibriumDiagnostics]:
    ss = solve_steady(params, **_solver_opts(run))
    diag = harrod_diagnostics(ss, params)
    if not diag.feasible:
        raise Infeasible(diag)
    return ss, diag


def cmd_steady(args) -> int:
    cfg = load_config(args.config, args.set)
    ss, diag = _steady(cfg.params, cfg.run)
    rec = asdict(ss)
    rec["k_over_qy_annual"] = ss.k_over_qy_annual(cfg.params.tech.q_rel)
    rec["gamma_na"] = gamma_na(cfg.params.pref.gamma_f)
    rec.update(asdict(diag))
    atomic_write(args.out, render_csv(STEADY_FIELDS + DIAG_FIELDS, [rec]))
    return EXIT_OK


def _shock_from(args, shock_cfg: dict) -> tuple[ShockSpec, dict]:
    def pick(name: str, cast, default):
        v = getattr(args, name)
        if v is None:
            v = shock_cfg.get(name, default)
        try:
            return cast(v)
        except (TypeError, ValueError):
            raise ParameterError(f"shock.{name}", v, "has the wrong type") from None

    spec = ShockSpec(
        kind=pick("kind", str, "institutions"),
        magnitude=pick("magnitude", float, 0.0),
        t_shock=pick("t_shock", float, 0.0),
        ramp_months=pick("ramp_months", float, 24.0),
        field=pick("field", str, "t_w"),
    )
    opts = {
        "horizon": pick("horizon", float, 600.0),
        "dt": pick("dt", float, 0.25),
        "stride": pick("stride", int, 1),
    }
    return spec, opts


def cmd_path(args) -> int:
    cfg = load_config(args.config, args.set)
    try:
        spec, opts = _shock_from(args, cfg.shock)
    except ValueError as exc:
        raise ParameterError("shock", "", str(exc)) from None
    ss, _ = _steady(cfg.params, cfg.run)
    pts = integrate_path(ss, spec, cfg.params, **opts)
    atomic_write(args.out, render_csv(PATH_FIELDS, [asdict(p) for p in pts]))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config, args.set)
    if args.data is None:
        raise SchemaError("calibrate needs --data")
    data = read_timeseries(args.data)
    flags = list(SCENARIO_FLAGS) if args.scenario == "all" else [args.scenario]
    records = []
    for flag in flags:
        path = run_scenario(data, ScenarioSpec.from_flag(flag), cfg.params, args.target, args.workers)
        for row in path.rows:
            rec = row_record(row)
            rec["scenario"] = path.label
            records.append(rec)
        years = ", ".join(str(y) for y, _ in path.failures) or "none"
        print(f"{path.label}: {len(path.rows)} years solved; failed years: {years}", file=sys.stderr)
        for year, why in path.failures:
            print(f"  {year}: {why}", file=sys.stderr)
    atomic_write(args.out, render_csv(("scenario", "year") + SERIES_FIELDS, records))
    return EXIT_OK


def parse_grid(text: str) -> list[float]:
    """``a:b:n`` for an evenly spaced grid, or a comma list; empty means no points."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 0:
                raise ValueError
            return [float(x) for x in np.linspace(float(a), float(b), n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError("--phi-grid", text, "must be 'start:stop:count' or a comma list") from None


def cmd_political(args) -> int:
    cfg = load_config(args.config, args.set)
    if cfg.game is None:
        raise ParameterError("game", "", "section is required for the political command")
    records = []
    for phi in parse_grid(args.phi_grid):
        rec = {"phi": phi}
        try:
            sol = solve_qre(cfg.game.at(phi))
        except NonConvergenceError as exc:
            rec.update(residual=exc.residual, status=f"nonconvergence: {exc}")
            print(f"phi={phi!r}: {exc}", file=sys.stderr)
        else:
            pu, ps = sol.p_union, sol.p_support
            joint = (pu * ps, pu * (1 - ps), (1 - pu) * ps, (1 - pu) * (1 - ps))
            rec.update(p_union=pu, p_support=ps, residual=sol.residual, status="ok")
            rec.update(zip(JOINT_FIELDS, joint))
        records.append(rec)
    atomic_write(args.out, render_csv(POLITICAL_FIELDS, records))
    return EXIT_OK


def cmd_regions(args) -> int:
    cfg = load_config(args.config, args.set)
    tech = cfg.params.tech
    mu = solve_steady(cfg.params, **_solver_opts(cfg.run)).mu if args.mu is None else args.mu
    q_min, q_bar, q_max = region_bounds(mu, tech)
    lo, hi = min(q_min, q_max), max(q_min, q_max)
    grid = {float(q) for q in np.linspace(lo, hi, args.points)} | {q_bar}
    if lo <= tech.q_rel <= hi:
        grid.add(tech.q_rel)
    records = []
    for q in sorted(grid):
        r = automation_region(q, tech.m, mu, tech, exact=args.exact)
        records.append({"q": q, "m_bar": r.m_bar, "m_tilde": r.m_tilde, "q_bar": r.q_bar,
                        "q_min": r.q_min, "q_max": r.q_max, "region": r.region,
                        "configured": q == tech.q_rel})
    atomic_write(args.out, render_csv(REGION_FIELDS, records))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="powerge", description="Worker power and automation in a growth model with search frictions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI config file (default: bundled baseline)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set t_w=2.5 --set g_annual=0.02")
        sp.add_argument("--out", default="-", help="output CSV path (default: stdout)")
        return sp

    s = common(sub.add_parser("steady", help="solve the steady state and feasibility diagnostics"))
    s.set_defaults(func=cmd_steady)

    s = common(sub.add_parser("path", help="transition path after a permanent shock"))
    s.add_argument("--kind", choices=SHOCK_KINDS)
    s.add_argument("--magnitude", type=float)
    s.add_argument("--field", choices=INSTITUTION_FIELDS)
    s.add_argument("--t-shock", dest="t_shock", type=float)
    s.add_argument("--ramp-months", dest="ramp_months", type=float)
    s.add_argument("--horizon", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--stride", type=int)
    s.set_defaults(func=cmd_path)

    s = common(sub.add_parser("calibrate", help="per-year steady states from a data CSV"))
    s.add_argument("--data", help="time-series CSV")
    s.add_argument("--scenario", choices=(*SCENARIO_FLAGS, "all"), default="both")
    s.add_argument("--target", choices=TARGETS, default="efficient")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_calibrate)

    s = common(sub.add_parser("political", help="logit equilibrium sweep over the threat covariate"))
    s.add_argument("--phi-grid", dest="phi_grid", default="-0.16:0.21:38",
                   help="'start:stop:count' or comma list (default %(default)s)")
    s.set_defaults(func=cmd_political)

    s = common(sub.add_parser("regions", help="automation region boundaries over a q grid"))
    s.add_argument("--points", type=int, default=41)
    s.add_argument("--mu", type=float, help="rate of return (default: solved steady state)")
    s.add_argument("--exact", action="store_true", help="exact boundary curves instead of the quadratic expansion")
    s.set_defaults(func=cmd_regions)
    return p


def _fail(code: int, msg: str) -> int:
    print(f"powerge: error: {msg}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        return _fail(EXIT_USAGE, "--workers must be at least 1")
    try:
        return args.func(args)
    except Infeasible as exc:
        d = exc.diag
        return _fail(EXIT_INFEASIBLE, f"{d.reason}\nmu_min={d.mu_min!r} g/delta={d.g_over_delta!r}")
    except (NoCrossingError, UnattainableTargetError, NoSolutionError) as exc:
        return _fail(EXIT_INFEASIBLE, str(exc))
    except BlowUpError as exc:
        return _fail(EXIT_BLOWUP, f"{exc} (step index {exc.step})")
    except NonConvergenceError as exc:
        return _fail(EXIT_NONCONVERGENCE, str(exc))
    except (SchemaError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail(EXIT_DATA, str(exc))
    except ScenarioAbortError as exc:
        return _fail(EXIT_MODEL, str(exc))
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except ModelError as exc:
        return _fail(EXIT_MODEL, str(exc))


if __name__ == "__main__":
    sys.exit(main())
