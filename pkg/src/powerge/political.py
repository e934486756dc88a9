"""Logit quantal-response equilibrium of the worker/government game.

Payoff matrices are indexed ``[s][u]``: ``s`` is the government state
(0 = high support) and ``u`` the bargaining choice (0 = collective).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import expit

from .errors import NonConvergenceError

Matrix = tuple[tuple[float, float], tuple[float, float]]
ZERO: Matrix = ((0.0, 0.0), (0.0, 0.0))


def _matrix(rows) -> Matrix:
    m = tuple(tuple(float(x) for x in row) for row in rows)
    if len(m) != 2 or any(len(r) != 2 for r in m):
        raise ValueError("payoff matrices must be 2x2")
    if not all(math.isfinite(x) for r in m for x in r):
        raise ValueError("payoffs must be finite")
    return m  # type: ignore[return-value]


@dataclass(frozen=True)
class PoliticalGame:
    u_w: Matrix
    u_g: Matrix
    lambda_w: float
    lambda_g: float
    phi_w: Matrix = ZERO
    phi_g: Matrix = ZERO

    def __post_init__(self) -> None:
        for name in ("u_w", "u_g", "phi_w", "phi_g"):
            object.__setattr__(self, name, _matrix(getattr(self, name)))
        for name in ("lambda_w", "lambda_g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative (got {v!r})")

    def at(self, phi: float) -> PoliticalGame:
        """Game with payoffs shifted by ``phi`` times the loadings."""
        shift = lambda a, b: tuple(tuple(x + phi * y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))
        return PoliticalGame(shift(self.u_w, self.phi_w), shift(self.u_g, self.phi_g),
                             self.lambda_w, self.lambda_g)


@dataclass(frozen=True)
class QreSolution:
    p_union: float
    p_support: float
    residual: float
    iterations: int


def baseline_game() -> PoliticalGame:
    """Payoffs whose high-support row and collective cell load on phi."""
    return PoliticalGame(
        u_w=((1.0, 1.0), (1.0, 1.0)),
        u_g=((0.5, 0.3), (0.3, 0.5)),
        lambda_w=6.0,
        lambda_g=11.0,
        phi_w=((0.75, 0.0), (0.0, 0.0)),
        phi_g=((0.5, 0.5), (0.0, 0.0)),
    )


def _logit2(lam: float, a: float, b: float) -> float:
    # probability of the first of two options with utilities a, b
    return float(expit(lam * (a - b)))


def worker_response(game: PoliticalGame, p_support: float) -> float:
    w = game.u_w
    ps = (p_support, 1.0 - p_support)
    a = ps[0] * w[0][0] + ps[1] * w[1][0]
    b = ps[0] * w[0][1] + ps[1] * w[1][1]
    return _logit2(game.lambda_w, a, b)


def government_response(game: PoliticalGame, p_union: float) -> float:
    g = game.u_g
    pu = (p_union, 1.0 - p_union)
    a = pu[0] * g[0][0] + pu[1] * g[0][1]
    b = pu[0] * g[1][0] + pu[1] * g[1][1]
    return _logit2(game.lambda_g, a, b)


def qre_residual(game: PoliticalGame, p_union: float, p_support: float) -> float:
    return max(abs(worker_response(game, p_support) - p_union),
               abs(government_response(game, p_union) - p_support))


def solve_qre(
    game: PoliticalGame,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    damping: float = 0.5,
    stall_window: int = 500,
) -> QreSolution:
    pu, ps = 0.5, 0.5
    best = math.inf
    best_at = 0
    resid = math.inf
    for it in range(1, max_iter + 1):
        nu = worker_response(game, ps)
        ns = government_response(game, pu)
        resid = max(abs(nu - pu), abs(ns - ps))
        if resid < tol:
            return QreSolution(pu, ps, resid, it)
        if resid < best * (1 - 1e-9):
            best, best_at = resid, it
        elif it - best_at > stall_window:
            raise NonConvergenceError(
                f"logit iteration is cycling (residual stuck near {resid:.3g})", it, resid
            )
        pu += damping * (nu - pu)
        ps += damping * (ns - ps)
    raise NonConvergenceError(
        f"logit iteration did not converge in {max_iter} iterations (residual {resid:.3g})",
        max_iter, resid,
    )


JOINT_FIELDS = ("p11", "p12", "p21", "p22")


def threat_sweep(base: PoliticalGame, phi_grid) -> list[tuple[float, tuple[float, float, float, float]]]:
    """Joint probabilities P(U=i) P(S=j) for each covariate value."""
    out = []
    for phi in phi_grid:
        sol = solve_qre(base.at(float(phi)))
        pu, ps = sol.p_union, sol.p_support
        out.append((float(phi), (pu * ps, pu * (1 - ps), (1 - pu) * ps, (1 - pu) * (1 - ps))))
    return out
