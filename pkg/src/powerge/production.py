"""CES task-based production in stationary per-capita units."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError
from .params import MatchingParams, TechnologyParams

SIGMA_ONE_TOL = 1e-6


@dataclass(frozen=True)
class ProductionPoint:
    k_hat: float
    y_hat: float
    y_k: float
    y_l: float


def _near_one(sigma: float) -> bool:
    return abs(sigma - 1.0) < SIGMA_ONE_TOL


def task_integral(m: float, sigma: float, alpha: float) -> float:
    """B(m) = integral of exp(alpha (sigma-1) j) over [0, m]."""
    a = alpha * (sigma - 1.0)
    if _near_one(sigma):
        # series in a; collapses to m exactly at sigma = 1
        return m * (1.0 + a * m / 2.0 + (a * m) ** 2 / 6.0)
    return math.expm1(a * m) / a


def _cobb_douglas_scale(m: float, alpha: float) -> float:
    log_c = alpha * m * m / 2.0
    if m > 0:
        log_c -= m * math.log(m)
    if m < 1:
        log_c -= (1.0 - m) * math.log1p(-m)
    return math.exp(log_c)


def y_hat(k_hat: float, tech: TechnologyParams) -> ProductionPoint:
    """Output and both marginal products at capital ``k_hat``."""
    if not k_hat > 0:
        raise DegenerateInputError(f"k_hat must be positive (got {k_hat!r})")
    sigma, m, ak = tech.sigma, tech.m, tech.a_k
    if m >= 1.0 and sigma <= 1.0:
        raise DegenerateInputError("m=1 with sigma<=1 leaves a labor-only economy")
    if _near_one(sigma):
        c = _cobb_douglas_scale(m, tech.alpha)
        y = c * (ak * k_hat) ** (1.0 - m)
        yk = (1.0 - m) * y / k_hat
        return ProductionPoint(k_hat, y, yk, y - k_hat * yk)
    e = (sigma - 1.0) / sigma
    cap = (1.0 - m) ** (1.0 / sigma) * (ak * k_hat) ** e
    lab = task_integral(m, sigma, tech.alpha) ** (1.0 / sigma)
    total = cap + lab
    y = total ** (1.0 / e)
    # factor payments split output in proportion to the two CES terms,
    # which equals (y/k)^(1/sigma) (1-m)^(1/sigma) A^e for the capital side
    yk = y * cap / (total * k_hat)
    yl = y * lab / total
    return ProductionPoint(k_hat, y, yk, yl)


def labor_share(mu: float, k_hat: float, tech: TechnologyParams) -> float:
    """Labor share implied by markup ``mu`` at capital ``k_hat``."""
    if not mu > -1.0:
        raise ValueError(f"mu must exceed -1 (got {mu!r})")
    sigma, m, ak = tech.sigma, tech.m, tech.a_k
    if _near_one(sigma):
        return m / (1.0 + mu)
    e = (sigma - 1.0) / sigma
    ratio = (1.0 - m) / task_integral(m, sigma, tech.alpha)
    return 1.0 / ((1.0 + mu) * (1.0 + ratio ** (1.0 / sigma) * k_hat**e * ak**e))


def _frontier_ratio(m: float, m_dot: float, M_dot: float, sigma: float, alpha: float) -> float:
    b0 = task_integral(m, sigma, alpha)
    if b0 == 0.0:
        raise DegenerateInputError("technological unemployment is undefined at m=0")
    b1 = task_integral(m + m_dot, sigma, alpha)
    return math.exp(alpha * (sigma - 1.0) * (M_dot - m_dot)) * b1 / b0


def tech_unemployment(L: float, m: float, m_dot: float, M_dot: float, tech: TechnologyParams) -> float:
    """Employment displaced by automation net of reinstatement."""
    if not 0.0 <= L <= 1.0:
        raise ValueError(f"L must lie in [0,1] (got {L!r})")
    if not 0.0 <= m + m_dot <= 1.0:
        raise ValueError(f"m + m_dot must lie in [0,1] (got {m + m_dot!r})")
    return L * (1.0 - _frontier_ratio(m, m_dot, M_dot, tech.sigma, tech.alpha))


def displacement_rate(tech: TechnologyParams) -> float:
    """Per-worker displacement, i.e. the derivative of U^A in L."""
    return 1.0 - _frontier_ratio(tech.m, tech.m_dot, tech.M_dot, tech.sigma, tech.alpha)


def effective_separation(match: MatchingParams, tech: TechnologyParams) -> float:
    return match.lambda0 + displacement_rate(tech)
