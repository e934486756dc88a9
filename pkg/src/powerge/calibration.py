"""Data-driven recovery of automation and worker mobility, and counterfactuals."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from statistics import fmean

from scipy.optimize import brentq

from .equilibrium import SteadyState, solve_steady
from .errors import (
    ModelError,
    OutOfRangeError,
    ScenarioAbortError,
    UnattainableTargetError,
    UnknownFieldError,
)
from .params import ModelParams, TechnologyParams, replace_fields

SCENARIOS = {
    "technical-change-alone": frozenset({"g", "m"}),
    "institutions-alone": frozenset({"t_w", "b", "p_union"}),
    "both": frozenset({"g", "m", "t_w", "b", "p_union"}),
}
SCENARIO_FLAGS = {"tech": "technical-change-alone", "inst": "institutions-alone", "both": "both"}
TARGETS = ("efficient", "nairu")
MAX_FAIL_SHARE = 0.2


@dataclass(frozen=True)
class TimeSeriesRow:
    """One calendar year; ``None`` marks a missing observation."""

    year: int
    p_union: float | None
    g: float | None
    b: float | None
    k_over_qy_annual: float | None
    mu_data: float | None
    delta_data: float | None
    u_data: float | None
    v_data: float | None

    def target_u(self, target: str = "efficient") -> float:
        if self.u_data is None:
            raise ValueError(f"{self.year}: u_data missing")
        if target == "nairu":
            return self.u_data
        if self.v_data is None:
            raise ValueError(f"{self.year}: v_data missing")
        return math.sqrt(self.u_data * self.v_data)


@dataclass(frozen=True)
class ScenarioSpec:
    label: str
    varying: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.label not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.label!r}; expected one of {sorted(SCENARIOS)}")
        if not self.varying:
            object.__setattr__(self, "varying", SCENARIOS[self.label])

    @classmethod
    def from_flag(cls, flag: str) -> ScenarioSpec:
        return cls(SCENARIO_FLAGS.get(flag, flag))


@dataclass(frozen=True)
class CalibratedRow:
    year: int
    m: float
    t_w: float
    g: float
    b: float
    p_union: float
    target_u: float
    k_over_qy_annual: float
    steady: SteadyState


@dataclass(frozen=True)
class CalibratedPath:
    label: str
    rows: tuple[CalibratedRow, ...]
    failures: tuple[tuple[int, str], ...]


def estimate_automation(row: TimeSeriesRow, tech: TechnologyParams) -> float:
    """Automation measure implied by the capital-output ratio and the return."""
    for name in ("k_over_qy_annual", "mu_data", "delta_data"):
        v = getattr(row, name)
        if v is None:
            raise ValueError(f"{row.year}: {name} missing")
        if not v > 0:
            raise OutOfRangeError(f"{row.year}: {name} must be positive (got {v!r})")
    ky = 12.0 * row.k_over_qy_annual
    s = tech.sigma
    one_minus_m = ky * (tech.a_k * tech.q_rel) ** (1.0 - s) * (row.delta_data * (1.0 + row.mu_data)) ** s
    if not 0.0 < one_minus_m < 1.0:
        raise OutOfRangeError(
            f"{row.year}: implied 1-m = {one_minus_m:.6g} outside (0,1); check that the capital-output ratio is annual"
        )
    return 1.0 - one_minus_m


def _u_at(t_w: float, params: ModelParams, mu0: float) -> SteadyState:
    return solve_steady(replace_fields(params, t_w=t_w), mu0=mu0)


def invert_t_w(target_u: float, params: ModelParams, lo: float = 1e-3, hi: float = 50.0,
               tol: float = 1e-10) -> float:
    """Mobility whose steady-state unemployment equals ``target_u``."""
    if not 0.0 < target_u < 1.0:
        raise ValueError(f"target_u must lie in (0,1) (got {target_u!r})")
    mu0 = [solve_steady(replace_fields(params, t_w=lo)).mu]

    def resid(log_t: float) -> float:
        ss = _u_at(math.exp(log_t), params, mu0[0])
        mu0[0] = ss.mu
        return ss.u_rate - target_u

    u_lo = resid(math.log(lo)) + target_u
    while u_lo < target_u and lo > 1e-10:
        lo /= 10.0
        u_lo = resid(math.log(lo)) + target_u
    u_hi = resid(math.log(hi)) + target_u
    while u_hi > target_u and hi < 1e8:
        hi *= 10.0
        u_hi = resid(math.log(hi)) + target_u
    if not u_hi <= target_u <= u_lo:
        raise UnattainableTargetError(target_u, min(u_lo, u_hi), max(u_lo, u_hi))
    if u_lo == target_u:
        return lo
    if u_hi == target_u:
        return hi
    lt = brentq(resid, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-15, maxiter=200)
    t_w = math.exp(lt)
    ss = _u_at(t_w, params, mu0[0])
    if abs(ss.u_rate - target_u) > tol:
        raise ModelError(f"mobility inversion stalled at |U - target| = {abs(ss.u_rate - target_u):.3g}")
    return t_w


@dataclass(frozen=True)
class _Frozen:
    g: float
    m: float
    b: float
    p_union: float
    t_w: float | None


def _require(row: TimeSeriesRow, names: tuple[str, ...]) -> None:
    for n in names:
        if getattr(row, n) is None:
            raise ValueError(f"{row.year}: {n} missing")


def _try(fn, *args) -> float | None:
    try:
        return fn(*args)
    except (ModelError, ValueError):
        return None


def _mean(name: str, values) -> float:
    vals = [v for v in values if v is not None]
    if not vals:
        raise ValueError(f"no usable observations of {name}")
    return fmean(vals)


def sample_means(data: list[TimeSeriesRow], base: ModelParams, target: str = "efficient",
                 with_t_w: bool = True) -> _Frozen:
    """Full-sample means of the drivers and the mobility matching the mean target."""
    g = _mean("g", (r.g for r in data))
    b = _mean("b", (r.b for r in data))
    p = _mean("p_union", (r.p_union for r in data))
    m = _mean("m", (_try(estimate_automation, r, base.tech) for r in data))
    t_w = None
    if with_t_w:
        u = _mean("target_u", (_try(TimeSeriesRow.target_u, r, target) for r in data))
        t_w = invert_t_w(u, replace_fields(base, g=g, m=m, b=b, p_union=p))
    return _Frozen(g, m, b, p, t_w)


def _solve_row(args) -> CalibratedRow | tuple[int, str]:
    row, varying, frozen, base, target = args
    try:
        tech_moves = "m" in varying
        inst_moves = "t_w" in varying
        if tech_moves:
            _require(row, ("g",))
        if inst_moves:
            _require(row, ("b", "p_union"))
        m = estimate_automation(row, base.tech) if tech_moves else frozen.m
        g = row.g if "g" in varying else frozen.g
        b = row.b if "b" in varying else frozen.b
        p = row.p_union if "p_union" in varying else frozen.p_union
        params = replace_fields(base, m=m, g=g, b=b, p_union=p)
        tu = row.target_u(target)
        t_w = invert_t_w(tu, params) if inst_moves else frozen.t_w
        ss = solve_steady(replace_fields(params, t_w=t_w))
        return CalibratedRow(row.year, m, t_w, g, b, p, tu, ss.k_over_qy_annual(base.tech.q_rel), ss)
    except (ModelError, ValueError) as exc:
        return (row.year, str(exc))


def run_scenario(data: list[TimeSeriesRow], spec: ScenarioSpec, base: ModelParams,
                 target: str = "efficient", workers: int = 1) -> CalibratedPath:
    """Solve every year as an independent steady state under ``spec``."""
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    if not data:
        return CalibratedPath(spec.label, (), ())
    frozen = sample_means(list(data), base, target, with_t_w="t_w" not in spec.varying)
    jobs = [(row, spec.varying, frozen, base, target) for row in data]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_row, jobs))
    else:
        results = [_solve_row(j) for j in jobs]
    rows = tuple(r for r in results if isinstance(r, CalibratedRow))
    failures = tuple(r for r in results if not isinstance(r, CalibratedRow))
    if len(failures) > MAX_FAIL_SHARE * len(data):
        raise ScenarioAbortError(spec.label, list(failures), len(data))
    return CalibratedPath(spec.label, rows, failures)


_ROW_FIELDS = tuple(f.name for f in fields(CalibratedRow) if f.name not in ("year", "steady"))
_STEADY_FIELDS = tuple(f.name for f in fields(SteadyState) if f.name not in ("m", "iterations", "residual"))
SERIES_FIELDS = _ROW_FIELDS + _STEADY_FIELDS


def row_record(row: CalibratedRow) -> dict[str, float]:
    rec: dict[str, float] = {"year": row.year}
    rec.update({k: getattr(row, k) for k in _ROW_FIELDS})
    ss = asdict(row.steady)
    rec.update({k: ss[k] for k in _STEADY_FIELDS})
    return rec


def predicted_series(path: CalibratedPath, which: str) -> list[tuple[int, float]]:
    if which not in SERIES_FIELDS:
        raise UnknownFieldError(f"unknown field {which!r}; choose from {', '.join(SERIES_FIELDS)}")
    return [(r.year, row_record(r)[which]) for r in path.rows]
