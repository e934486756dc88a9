"""Matching technology G(U, V) = UV / (U^i + V^i)^(1/i)."""

from __future__ import annotations

import math


def q_fill(theta: float, iota: float) -> float:
    """Vacancy-filling rate q(theta) = (1 + theta^iota)^(-1/iota)."""
    if theta < 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be finite and non-negative (got {theta!r})")
    return (1.0 + theta**iota) ** (-1.0 / iota)


def f_find(theta: float, iota: float) -> float:
    """Job-finding rate f(theta) = theta * q(theta)."""
    # the product can round one ulp above 1 at very large theta
    return min(theta * q_fill(theta, iota), 1.0)


def beveridge_u(lambda_eff: float, theta: float, iota: float) -> float:
    """Unemployment on the locus where inflows equal outflows."""
    if not lambda_eff > 0:
        raise ValueError(f"lambda_eff must be positive (got {lambda_eff!r})")
    return lambda_eff / (lambda_eff + f_find(theta, iota))


def matches(u: float, v: float, iota: float) -> float:
    if u == 0.0 or v == 0.0:
        return 0.0
    return u * v / (u**iota + v**iota) ** (1.0 / iota)
