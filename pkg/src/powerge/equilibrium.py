"""Stationary labor-market and rate-of-return equilibrium."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .bargaining import gamma_na, powers, rho_tilde, wage_collective
from .errors import (
    NoCrossingError,
    NonConvergenceError,
    NonPositiveDiscountError,
    NoSolutionError,
    RegionUndefinedError,
    SurplusExhaustedError,
)
from .matching import f_find
from .params import ModelParams, TechnologyParams
from .production import _cobb_douglas_scale, _near_one, task_integral, y_hat
from .production import effective_separation

THETA_MAX = 1e12
K_TOL = 1e-12


@dataclass(frozen=True)
class SteadyState:
    mu: float
    theta: float
    k_hat: float
    c_hat: float
    wage: float
    u_rate: float
    v_rate: float
    labor_share: float
    r_profit: float
    y_hat: float
    y_l: float
    lambda_eff: float
    m: float
    iterations: int = 0
    residual: float = 0.0

    def k_over_qy(self, q_rel: float) -> float:
        """Monthly capital-output ratio k/(q y)."""
        return self.k_hat / (q_rel * self.y_hat)

    def k_over_qy_annual(self, q_rel: float) -> float:
        return self.k_over_qy(q_rel) / 12.0


@dataclass(frozen=True)
class EquilibriumDiagnostics:
    mu_min: float
    g_over_delta: float
    harrod_s: float
    chi: float
    r_profit: float
    feasible: bool
    reason: str
    union_wage_above_output: bool


class Market:
    """Constants of the labor market that do not depend on tightness."""

    __slots__ = (
        "lam", "rt", "c", "cap", "iota", "gf", "ga", "gu", "t_w", "p", "b", "xi",
    )

    def __init__(self, params: ModelParams, tech: TechnologyParams | None = None):
        tech = tech or params.tech
        self.lam = effective_separation(params.match, tech)
        self.rt = rho_tilde(params.pref.rho, tech.alpha, tech.m_dot, tech.g)
        self.c = self.rt + self.lam
        if not self.c > 0:
            raise NonPositiveDiscountError(f"rho_tilde + lambda must be positive (got {self.c!r})")
        p = params.inst.p_union
        if p > 0 and not self.rt > 0:
            raise NonPositiveDiscountError(f"collective wage needs rho_tilde > 0 (got {self.rt!r})")
        self.cap = self.c / self.rt if p > 0 else 0.0
        self.iota = params.match.iota
        self.gf = params.pref.gamma_f
        self.ga = gamma_na(self.gf)
        self.gu = params.inst.gamma_u
        self.t_w = params.inst.t_w
        self.p = p
        self.b = params.inst.b
        self.xi = params.match.xi

    def supply(self, theta: float, yl: float, yh: float) -> float:
        iota = self.iota
        q = (1.0 + theta**iota) ** (-1.0 / iota)
        f = theta * q
        c, gf, ga, gu = self.c, self.gf, self.ga, self.gu
        gb = gf * (1.0 - q) / (1.0 + gf + q * (1.0 - gf))
        pa = ga * (c + f) / (c + ga * f)
        pb = gb * (c + f) / (c + gb * f)
        tw = self.t_w
        pn = pa if tw == 0.0 else (tw * pb + theta * pa) / (tw + theta)
        b = self.b
        wn = b + pn * (yl - b)
        if self.p == 0.0:
            return wn
        pu = gu * (c + f) / (c + gu * f)
        wu = b + pu * (yl - b + self.cap * (yh - yl))
        return wn + self.p * (wu - wn)

    def demand(self, theta: float, yl: float) -> float:
        iota = self.iota
        q = (1.0 + theta**iota) ** (-1.0 / iota)
        return yl - self.c * self.xi / q

    def gap(self, theta: float, yl: float, yh: float) -> float:
        return self.supply(theta, yl, yh) - self.demand(theta, yl)

    def clear(self, yl: float, yh: float, hint: float | None = None) -> tuple[float, float]:
        if not yl > self.b:
            raise SurplusExhaustedError(f"y_L={yl!r} does not exceed b={self.b!r}")
        gap = self.gap
        lo, hi = 0.0, None
        if hint is not None and hint > 0:
            a, z = hint * 0.98, hint * 1.02
            if gap(a, yl, yh) < 0:
                lo = a
                if gap(z, yl, yh) > 0:
                    hi = z
        if hi is None:
            g0 = gap(0.0, yl, yh)
            if g0 >= 0:
                raise NoCrossingError(
                    f"labor supply exceeds demand at every tightness (gap at theta=0 is {g0:.6g})",
                    g0,
                )
            hi = max(1.0, 2.0 * lo)
            while gap(hi, yl, yh) <= 0:
                lo = hi
                hi *= 4.0
                if hi > THETA_MAX:
                    raise NoCrossingError(
                        f"no crossing for theta below {THETA_MAX:g} (gap at theta=0 is {g0:.6g})",
                        g0,
                    )
        theta = brentq(gap, lo, hi, args=(yl, yh), xtol=1e-15, rtol=1e-15, maxiter=200)
        return theta, self.demand(theta, yl)


def k_of_mu(mu: float, tech: TechnologyParams, delta: float | None = None) -> float:
    """Capital at which q * y_k equals delta (1 + mu)."""
    if not mu > -1.0:
        raise ValueError(f"mu must exceed -1 (got {mu!r})")
    d = tech.delta if delta is None else delta
    target = d * (1.0 + mu) / tech.q_rel
    sigma, m, ak = tech.sigma, tech.m, tech.a_k
    if not 0.0 < m < 1.0:
        if m == 0.0 and target == ak:
            raise NoSolutionError("with m=0 every capital level satisfies the condition")
        raise NoSolutionError(f"no interior capital solves the return condition at m={m!r}")
    if _near_one(sigma):
        c = _cobb_douglas_scale(m, tech.alpha)
        k = ((1.0 - m) * c * ak ** (1.0 - m) / target) ** (1.0 / m)
    else:
        e = (sigma - 1.0) / sigma
        c1 = (1.0 - m) ** (1.0 / sigma) * ak**e
        lab = task_integral(m, sigma, tech.alpha) ** (1.0 / sigma)
        inner = (target / c1) ** (sigma - 1.0) - c1
        if not inner > 0:
            bound = ak * (1.0 - m) ** (1.0 / (sigma - 1.0))
            side = "upper" if sigma < 1 else "lower"
            raise NoSolutionError(
                f"required marginal product {target:.6g} violates the CES {side} bound {bound:.6g}"
            )
        k = (inner / lab) ** (-1.0 / e)
    if abs(y_hat(k, tech).y_k - target) * tech.q_rel >= K_TOL:
        lk = math.log(k)
        k = math.exp(
            brentq(lambda x: y_hat(math.exp(x), tech).y_k - target, lk - 1.0, lk + 1.0, xtol=1e-15)
        )
    return k


def theta_clearing(k_hat: float, params: ModelParams) -> tuple[float, float]:
    """Tightness and wage at which bargained supply meets free-entry demand."""
    pt = y_hat(k_hat, params.tech)
    return Market(params).clear(pt.y_l, pt.y_hat)


def markup_map(mu: float, params: ModelParams, market: Market | None = None,
               hint: float | None = None) -> tuple[float, float, float, float]:
    """One application of mu -> y_L / w - 1; returns (phi, k, theta, w)."""
    mk = market or Market(params)
    k = k_of_mu(mu, params.tech)
    pt = y_hat(k, params.tech)
    theta, w = mk.clear(pt.y_l, pt.y_hat, hint)
    return pt.y_l / w - 1.0, k, theta, w


def _require_stationary(params: ModelParams) -> None:
    if params.tech.m_dot != 0.0:
        raise ValueError(f"steady state requires m_dot = 0 (got {params.tech.m_dot!r})")


def solve_steady(
    params: ModelParams,
    mu0: float = 0.3,
    tol: float = 1e-12,
    max_iter: int = 500,
    damping: float = 0.5,
) -> SteadyState:
    """Damped iteration on the rate-of-return map until |phi(mu) - mu| < tol."""
    _require_stationary(params)
    mk = Market(params)
    mu = mu0
    hint = None
    resid = math.inf
    for it in range(1, max_iter + 1):
        phi, k, theta, w = markup_map(mu, params, mk, hint)
        resid = abs(phi - mu)
        if resid < tol:
            return _assemble(params, mk, mu, k, theta, w, it, resid)
        hint = theta
        mu = mu + damping * (phi - mu)
        if not mu > -1.0:
            raise NonConvergenceError("rate-of-return iteration left mu > -1", it, resid)
    raise NonConvergenceError(
        f"rate-of-return map did not converge in {max_iter} iterations (residual {resid:.3g})",
        max_iter,
        resid,
    )


def _assemble(params: ModelParams, mk: Market, mu: float, k: float, theta: float, w: float,
              it: int, resid: float) -> SteadyState:
    tech = params.tech
    pt = y_hat(k, tech)
    f = f_find(theta, params.match.iota)
    u = mk.lam / (mk.lam + f)
    v = theta * u
    L = 1.0 - u
    q = tech.q_rel
    c_hat = (mu * pt.y_hat / (1.0 + mu) - tech.g * k / q
             - params.match.xi * v / L - params.inst.tau / L)
    return SteadyState(
        mu=mu,
        theta=theta,
        k_hat=k,
        c_hat=c_hat,
        wage=w,
        u_rate=u,
        v_rate=v,
        labor_share=w / pt.y_hat,
        r_profit=q * pt.y_hat * mu / (k * (1.0 + mu)),
        y_hat=pt.y_hat,
        y_l=pt.y_l,
        lambda_eff=mk.lam,
        m=tech.m,
        iterations=it,
        residual=resid,
    )


def harrod_diagnostics(ss: SteadyState, params: ModelParams) -> EquilibriumDiagnostics:
    tech = params.tech
    q, g = tech.q_rel, tech.g
    L = 1.0 - ss.u_rate
    chi = q * (params.match.xi * ss.v_rate / L + params.inst.tau / L) / ss.k_hat
    r = q * ss.y_hat * ss.mu / (ss.k_hat * (1.0 + ss.mu))
    # smallest mu for which accumulation, vacancies and taxes leave c_hat >= 0
    x = ss.k_hat * (g + chi) / (q * ss.y_hat)
    mu_min = x / (1.0 - x) if x < 1.0 else math.inf
    g_over_delta = g / tech.delta
    harrod_s = g / (r - chi) if r > chi else math.inf
    reasons = []
    if ss.c_hat < 0:
        reasons.append(f"capitalist consumption negative (c_hat={ss.c_hat:.6g})")
    if not ss.mu > g_over_delta:
        reasons.append(f"mu*={ss.mu:.6g} does not exceed g/delta={g_over_delta:.6g}")
    if not g_over_delta > mu_min:
        reasons.append(f"g/delta={g_over_delta:.6g} does not exceed mu_min={mu_min:.6g}")
    mk = Market(params)
    bp = powers(mk.gf, mk.gu, mk.t_w, ss.theta, (1.0 + ss.theta**mk.iota) ** (-1.0 / mk.iota),
                f_find(ss.theta, mk.iota), mk.rt, mk.lam)
    above = False
    if mk.rt > 0:
        w_u = wage_collective(params.inst.b, bp.psi_u, ss.y_l, ss.y_hat, mk.rt, mk.lam)
        above = w_u > ss.y_hat
    return EquilibriumDiagnostics(
        mu_min=mu_min,
        g_over_delta=g_over_delta,
        harrod_s=harrod_s,
        chi=chi,
        r_profit=r,
        feasible=not reasons,
        reason="; ".join(reasons),
        union_wage_above_output=above,
    )


@dataclass(frozen=True)
class RegionResult:
    region: int
    m_bar: float
    m_tilde: float
    q_bar: float
    q_min: float
    q_max: float


def region_bounds(mu: float, tech: TechnologyParams) -> tuple[float, float, float]:
    """(q_min, q_bar, q_max) for a given rate of return."""
    sigma, alpha, d, ak = tech.sigma, tech.alpha, tech.delta, tech.a_k
    q_bar = d * (1.0 + mu) / ak
    b1 = task_integral(1.0, sigma, alpha)
    w_j1 = ((1.0 + mu) ** (sigma - 1.0) / b1) ** (1.0 / (1.0 - sigma))
    q_min = d / (ak * w_j1)
    q_max = q_min * math.exp(alpha)
    return q_min, q_bar, q_max


def _boundary_curve(z: float, a: float, exact: bool) -> float:
    # solves 1 - m + B_a(m) = z with B_a(m) = (e^{a m} - 1)/a, or its quadratic expansion
    if not exact:
        val = 2.0 * (z - 1.0) / a
        return math.sqrt(val) if val > 0 else 0.0

    def h(m: float) -> float:
        return 1.0 - m + math.expm1(a * m) / a - z

    if h(0.0) * h(1.0) > 0:
        return 1.0 if abs(h(1.0)) < abs(h(0.0)) else 0.0
    if h(0.0) == 0.0:
        return 0.0
    return brentq(h, 0.0, 1.0, xtol=1e-15)


def automation_region(q_rel: float, m: float, mu: float, tech: TechnologyParams,
                      exact: bool = False) -> RegionResult:
    """Classify (q, m) into the three automation regions."""
    sigma, alpha = tech.sigma, tech.alpha
    if _near_one(sigma):
        raise RegionUndefinedError("automation regions need sigma != 1")
    if not mu > -1.0:
        raise ValueError(f"mu must exceed -1 (got {mu!r})")
    q_min, q_bar, q_max = region_bounds(mu, tech)
    lo, hi = min(q_min, q_max), max(q_min, q_max)
    if not lo <= q_rel <= hi:
        raise RegionUndefinedError(f"q={q_rel:.6g} outside [{lo:.6g}, {hi:.6g}]")
    z = (tech.delta * (1.0 + mu) / (tech.a_k * q_rel)) ** (sigma - 1.0)
    a = alpha * (sigma - 1.0)
    m_bar = _boundary_curve(z, a, exact) if q_rel <= q_bar else 0.0
    m_tilde = _boundary_curve(z, -a, exact) if q_rel >= q_bar else 0.0
    if q_rel < q_bar and m < m_bar:
        region = 1
    elif q_rel > q_bar and m < m_tilde:
        region = 3
    else:
        region = 2
    return RegionResult(region, m_bar, m_tilde, q_bar, q_min, q_max)
