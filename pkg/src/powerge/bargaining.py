"""Closed-form bargaining powers and wages."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonPositiveDiscountError, SurplusExhaustedError


@dataclass(frozen=True)
class BargainingPowers:
    gamma_na: float
    gamma_nb: float
    psi_na: float
    psi_nb: float
    psi_n: float
    psi_u: float


def rho_tilde(rho: float, alpha: float, m_dot: float, g: float) -> float:
    """Effective discount rate rho + alpha*m_dot - g."""
    return rho + alpha * m_dot - g


def gamma_na(gamma_f: float) -> float:
    return gamma_f / (1.0 + gamma_f)


def gamma_nb(gamma_f: float, q_theta: float) -> float:
    """Intrinsic worker power when the firm can switch partners."""
    return gamma_f * (1.0 - q_theta) / (1.0 + gamma_f + q_theta * (1.0 - gamma_f))


def psi(gamma: float, rho_tilde: float, lambda_eff: float, f_theta: float) -> float:
    c = rho_tilde + lambda_eff
    if not c > 0:
        raise NonPositiveDiscountError(f"rho_tilde + lambda must be positive (got {c!r})")
    return gamma * (c + f_theta) / (c + gamma * f_theta)


def psi_n(t_w: float, theta: float, psi_na: float, psi_nb: float) -> float:
    w = t_w + theta
    if w == 0.0:
        raise ZeroDivisionError("psi_n weights undefined when t_w = theta = 0")
    return (t_w * psi_nb + theta * psi_na) / w


def wage_individual(b: float, psi_n: float, y_l: float) -> float:
    if not y_l > b:
        raise SurplusExhaustedError(f"y_L={y_l!r} does not exceed b={b!r}")
    return b + psi_n * (y_l - b)


def _capitalization(rho_tilde: float, lambda_eff: float) -> float:
    if not rho_tilde > 0:
        raise NonPositiveDiscountError(f"collective wage needs rho_tilde > 0 (got {rho_tilde!r})")
    return (rho_tilde + lambda_eff) / rho_tilde


def wage_collective(
    b: float, psi_u: float, y_l: float, y_hat: float, rho_tilde: float, lambda_eff: float
) -> float:
    cap = _capitalization(rho_tilde, lambda_eff)
    return b + psi_u * (y_l - b + cap * (y_hat - y_l))


def wage_aggregate(p_union: float, w_n: float, w_u: float) -> float:
    return w_n + p_union * (w_u - w_n)


def wage_premium(
    psi_u: float,
    psi_n: float,
    y_l: float,
    b: float,
    y_hat: float,
    rho_tilde: float,
    lambda_eff: float,
) -> float:
    cap = _capitalization(rho_tilde, lambda_eff)
    return (psi_u - psi_n) * (y_l - b) + psi_u * cap * (y_hat - y_l)


def powers(
    gamma_f: float,
    gamma_u: float,
    t_w: float,
    theta: float,
    q_theta: float,
    f_theta: float,
    rho_tilde: float,
    lambda_eff: float,
) -> BargainingPowers:
    """All intrinsic and actual powers at one labor-market state."""
    ga = gamma_na(gamma_f)
    gb = gamma_nb(gamma_f, q_theta)
    pa = psi(ga, rho_tilde, lambda_eff, f_theta)
    pb = psi(gb, rho_tilde, lambda_eff, f_theta)
    return BargainingPowers(
        gamma_na=ga,
        gamma_nb=gb,
        psi_na=pa,
        psi_nb=pb,
        psi_n=psi_n(t_w, theta, pa, pb),
        psi_u=psi(gamma_u, rho_tilde, lambda_eff, f_theta),
    )
