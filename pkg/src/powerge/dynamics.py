"""Transition paths after unanticipated permanent shocks.

Unemployment, capital and capitalist consumption are integrated with
classical RK4; tightness is a jump variable re-solved at every stage.
The initial consumption jump is chosen by shooting so that the path has no
component along the unstable eigenvector of the post-shock steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import BlowUpError, ModelError, NonConvergenceError
from .equilibrium import Market, SteadyState, harrod_diagnostics, solve_steady
from .params import ModelParams, replace_fields, validate_params
from .production import effective_separation, y_hat

SHOCK_KINDS = ("automation", "growth", "institutions")
INSTITUTION_FIELDS = ("t_w", "b", "p_union", "tau")
REGIMES = ("capitalization-dominant", "displacement-dominant")


@dataclass(frozen=True)
class ShockSpec:
    kind: str
    magnitude: float
    t_shock: float = 0.0
    ramp_months: float = 24.0
    field: str = "t_w"

    def __post_init__(self) -> None:
        if self.kind not in SHOCK_KINDS:
            raise ValueError(f"shock kind must be one of {SHOCK_KINDS} (got {self.kind!r})")
        if not math.isfinite(self.magnitude):
            raise ValueError("shock magnitude must be finite")
        if self.t_shock < 0:
            raise ValueError(f"t_shock must be non-negative (got {self.t_shock!r})")
        if self.kind == "automation" and not self.ramp_months >= 1.0:
            raise ValueError(f"automation ramp must last at least 1 month (got {self.ramp_months!r})")
        if self.kind == "institutions" and self.field not in INSTITUTION_FIELDS:
            raise ValueError(f"institution field must be one of {INSTITUTION_FIELDS}")

    @property
    def m_dot(self) -> float:
        return self.magnitude / self.ramp_months if self.kind == "automation" else 0.0


@dataclass(frozen=True)
class PathPoint:
    t: float
    L: float
    U: float
    V: float
    theta: float
    k_hat: float
    c_hat: float
    mu: float
    wage: float
    labor_share: float
    m: float
    m_dot: float
    y_hat: float


PATH_FIELDS = tuple(PathPoint.__dataclass_fields__)


def post_shock_params(params: ModelParams, shock: ShockSpec) -> ModelParams:
    if shock.kind == "automation":
        new = replace_fields(params, m=params.tech.m + shock.magnitude, m_dot=0.0)
    elif shock.kind == "growth":
        new = replace_fields(params, g=params.tech.g + shock.magnitude)
    else:
        cur = getattr(params.inst, shock.field)
        new = replace_fields(params, **{shock.field: cur + shock.magnitude})
    return validate_params(new)


def separation_slope(params: ModelParams, m_dot: float, h: float = 1e-6) -> float:
    """Central difference of the effective separation rate in m_dot."""
    up = replace(params.tech, m_dot=m_dot + h)
    dn = replace(params.tech, m_dot=m_dot - h)
    return (effective_separation(params.match, up) - effective_separation(params.match, dn)) / (2 * h)


def classify_automation_regime(params: ModelParams, shock: ShockSpec) -> str:
    if shock.kind != "automation":
        raise ValueError("regime classification applies to automation shocks")
    slope = abs(separation_slope(params, shock.m_dot))
    return REGIMES[1] if slope > params.tech.alpha else REGIMES[0]


class _Regime:
    """Right-hand side of the ODE under one parameter vector."""

    __slots__ = ("tech", "mk", "q", "iota", "xi", "tau", "eps", "delta_t", "g_base")

    def __init__(self, params: ModelParams, m: float, m_dot: float):
        tech = replace(params.tech, m=m, m_dot=m_dot)
        self.tech = tech
        self.mk = Market(params, tech)
        self.q = tech.q_rel
        self.iota = params.match.iota
        self.xi = params.match.xi
        self.tau = params.inst.tau
        self.eps = params.pref.epsilon
        self.delta_t = tech.delta + m_dot / (1.0 - m)
        self.g_base = tech.g - tech.alpha * m_dot

    def rates(self, U: float, k: float, c: float, hint: float | None):
        pt = y_hat(k, self.tech)
        theta, w = self.mk.clear(pt.y_l, pt.y_hat, hint)
        iota = self.iota
        f = theta * (1.0 + theta**iota) ** (-1.0 / iota)
        L = 1.0 - U
        dU = self.mk.lam * L - f * U
        v = theta * U
        g_t = self.g_base - dU / L
        q = self.q
        dk = q * (pt.y_hat - c - w - self.xi * v / L - self.tau / L) - (self.delta_t + g_t) * k
        mu = pt.y_l / w - 1.0
        dc = c / self.eps * (pt.y_k * q - self.delta_t * (1.0 + mu))
        return dU, dk, dc, theta, w, mu, pt.y_hat


class _Schedule:
    """Parameter path after the shock: a linear ramp in m, then constant."""

    def __init__(self, pre: ModelParams, post: ModelParams, shock: ShockSpec):
        self.pre = pre
        self.post = post
        self.final = _Regime(post, post.tech.m, 0.0)
        self.ramp = shock.ramp_months if shock.kind == "automation" else 0.0
        self.rate = shock.m_dot
        self.m0 = pre.tech.m

    def breakpoints(self) -> list[float]:
        return [self.ramp] if self.ramp > 0 else []

    def at(self, t: float, in_ramp: bool) -> _Regime:
        if in_ramp:
            return _Regime(self.pre, self.m0 + self.rate * t, self.rate)
        return self.final

    def m_state(self, t: float) -> tuple[float, float]:
        if t < self.ramp:
            return self.m0 + self.rate * t, self.rate
        return self.post.tech.m, 0.0


def _blow(step: int, t: float, exc: Exception | str) -> BlowUpError:
    return BlowUpError(step, t, str(exc))


class _Integrator:
    def __init__(self, sched: _Schedule, dt: float, horizon: float):
        self.sched = sched
        self.dt = dt
        self.horizon = horizon
        n = horizon / dt
        self.n_steps = int(round(n))
        if abs(n - self.n_steps) > 1e-9 * max(1.0, n):
            raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")

    def _step(self, t0: float, h: float, x: tuple[float, float, float], in_ramp: bool,
              hint: float | None):
        sched = self.sched
        U, k, c = x
        r1 = sched.at(t0, in_ramp).rates(U, k, c, hint)
        th = r1[3]
        mid = sched.at(t0 + h / 2, in_ramp)
        r2 = mid.rates(U + h / 2 * r1[0], k + h / 2 * r1[1], c + h / 2 * r1[2], th)
        r3 = mid.rates(U + h / 2 * r2[0], k + h / 2 * r2[1], c + h / 2 * r2[2], th)
        r4 = sched.at(t0 + h, in_ramp).rates(U + h * r3[0], k + h * r3[1], c + h * r3[2], th)
        return (
            U + h / 6 * (r1[0] + 2 * r2[0] + 2 * r3[0] + r4[0]),
            k + h / 6 * (r1[1] + 2 * r2[1] + 2 * r3[1] + r4[1]),
            c + h / 6 * (r1[2] + 2 * r2[2] + 2 * r3[2] + r4[2]),
        ), th

    def run(self, x0: tuple[float, float, float], record: int = 0, hint: float | None = None,
            n_steps: int | None = None):
        """Integrate from t=0; returns final state and, if ``record``, sampled points."""
        dt = self.dt
        bps = self.sched.breakpoints()
        x = x0
        out = []
        n_total = self.n_steps if n_steps is None else n_steps
        for n in range(n_total + 1):
            t = n * dt
            if record and (n % record == 0 or n == n_total):
                try:
                    out.append(self._sample(t, x, hint))
                except ModelError as exc:
                    raise _blow(n, t, exc) from None
            if n == n_total:
                break
            try:
                t1 = t + dt
                cut = [b for b in bps if t < b < t1 - 1e-12]
                if cut:
                    x, hint = self._step(t, cut[0] - t, x, True, hint)
                    x, hint = self._step(cut[0], t1 - cut[0], x, False, hint)
                else:
                    in_ramp = bool(bps) and t1 <= bps[0] + 1e-12
                    x, hint = self._step(t, dt, x, in_ramp, hint)
            except (ModelError, ValueError, ZeroDivisionError, OverflowError) as exc:
                raise _blow(n + 1, t + dt, exc) from None
            U, k, c = x
            if not (math.isfinite(k) and k > 0):
                raise _blow(n + 1, t + dt, f"k_hat non-positive ({k:.6g})")
            if not (math.isfinite(c) and c > 0):
                raise _blow(n + 1, t + dt, f"c_hat non-positive ({c:.6g})")
            if not 0.0 < U < 1.0:
                raise _blow(n + 1, t + dt, f"unemployment left (0,1) ({U:.6g})")
        return x, out, hint

    def _sample(self, t: float, x, hint) -> PathPoint:
        U, k, c = x
        m, m_dot = self.sched.m_state(t)
        reg = _Regime(self.sched.pre if m_dot else self.sched.post, m, m_dot)
        _, _, _, theta, w, mu, yh = reg.rates(U, k, c, hint)
        return PathPoint(t=t, L=1.0 - U, U=U, V=theta * U, theta=theta, k_hat=k, c_hat=c,
                         mu=mu, wage=w, labor_share=w / yh, m=m, m_dot=m_dot, y_hat=yh)


def _unstable_direction(reg: _Regime, ss: SteadyState) -> np.ndarray:
    """Left eigenvector of the linearised system for its unstable root."""
    x = np.array([ss.u_rate, ss.k_hat, ss.c_hat])
    J = np.empty((3, 3))
    for j in range(3):
        h = 1e-6 * abs(x[j])
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        ru = reg.rates(*up, ss.theta)[:3]
        rd = reg.rates(*dn, ss.theta)[:3]
        J[:, j] = (np.array(ru) - np.array(rd)) / (2 * h)
    vals, vecs = np.linalg.eig(J.T)
    i = int(np.argmax(vals.real))
    if not vals[i].real > 0:
        raise NonConvergenceError("post-shock steady state has no unstable root to shoot against")
    ell = vecs[:, i].real
    return ell / ell[2]


def _sup_gap(pt: PathPoint, ss: SteadyState) -> float:
    pairs = (
        (pt.U, ss.u_rate), (pt.V, ss.v_rate), (pt.theta, ss.theta), (pt.k_hat, ss.k_hat),
        (pt.c_hat, ss.c_hat), (pt.mu, ss.mu), (pt.wage, ss.wage),
        (pt.labor_share, ss.labor_share),
    )
    return max(abs(a - b) / abs(b) for a, b in pairs)


def integrate_path(
    initial: SteadyState,
    shock: ShockSpec,
    params: ModelParams,
    horizon: float = 600.0,
    dt: float = 0.25,
    stride: int = 1,
    endpoint_tol: float = 1e-4,
) -> list[PathPoint]:
    """Saddle path from ``initial`` (pre-shock steady state) after ``shock``."""
    if stride < 1:
        raise ValueError("stride must be at least 1")
    post = post_shock_params(params, shock)
    sched = _Schedule(params, post, shock)
    integ = _Integrator(sched, dt, horizon)
    x_pre = (initial.u_rate, initial.k_hat, initial.c_hat)

    target = None
    try:
        target = solve_steady(post, mu0=initial.mu)
        if not harrod_diagnostics(target, post).feasible:
            target = None
    except ModelError:
        target = None

    pre_points = _pre_shock_points(initial, shock, dt, stride)
    if target is None:
        # no admissible steady state to converge to: consumption cannot jump onto
        # a saddle path, so integrate from the pre-shock level until it fails
        for extend in (1, 4, 16):
            longer = _Integrator(sched, dt, horizon * extend)
            longer.run(x_pre, hint=initial.theta)
        raise NonConvergenceError("infeasible post-shock economy did not blow up within the search horizon")

    ell = _unstable_direction(sched.final, target)
    x_star = np.array([target.u_rate, target.k_hat, target.c_hat])
    big = 1e6

    def miss(c0: float) -> float:
        try:
            xT, _, _ = integ.run((x_pre[0], x_pre[1], c0), hint=initial.theta)
        except BlowUpError as exc:
            return -big if "c_hat" in exc.reason else big
        return float(ell @ (np.array(xT) - x_star))

    dx = np.array([x_pre[0] - x_star[0], x_pre[1] - x_star[1], 0.0])
    guess = target.c_hat - float(ell @ dx)
    c_star = _shoot(miss, guess, target.c_hat)

    _, pts, _ = integ.run((x_pre[0], x_pre[1], c_star), record=stride, hint=initial.theta)
    gap = _sup_gap(pts[-1], target)
    if gap > endpoint_tol:
        raise NonConvergenceError(
            f"path endpoint differs from the post-shock steady state by {gap:.3g} (relative)",
            integ.n_steps, gap,
        )
    return pre_points + pts


def _shoot(miss, guess: float, scale: float) -> float:
    width = 1e-6 * abs(scale)
    lo, hi = guess - width, guess + width
    f_lo, f_hi = miss(lo), miss(hi)
    for _ in range(60):
        if f_lo <= 0 <= f_hi:
            break
        if f_lo > 0:
            hi, f_hi = lo, f_lo
            lo = max(lo - 4 * width, 1e-12)
            f_lo = miss(lo)
        else:
            lo, f_lo = hi, f_hi
            hi = hi + 4 * width
            f_hi = miss(hi)
        width *= 4
    else:
        raise NonConvergenceError("could not bracket the initial consumption jump")
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    return brentq(miss, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _pre_shock_points(ss: SteadyState, shock: ShockSpec, dt: float, stride: int) -> list[PathPoint]:
    pts = []
    n = int(round(shock.t_shock / dt))
    for i in range(n, 0, -stride):
        t = -i * dt
        pts.append(PathPoint(t=t, L=1.0 - ss.u_rate, U=ss.u_rate, V=ss.v_rate, theta=ss.theta,
                             k_hat=ss.k_hat, c_hat=ss.c_hat, mu=ss.mu, wage=ss.wage,
                             labor_share=ss.labor_share, m=ss.m, m_dot=0.0, y_hat=ss.y_hat))
    return pts
