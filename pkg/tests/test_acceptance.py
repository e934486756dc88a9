"""The ten acceptance criteria, one test each.

Every test records named sub-checks, times itself against its budget and prints
a single PASS/FAIL line, then fails if any sub-check failed.
"""

import dataclasses
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from powerge.bargaining import gamma_na, powers
from powerge.calibration import ScenarioSpec, TimeSeriesRow, estimate_automation, run_scenario
from powerge.dynamics import ShockSpec, integrate_path, post_shock_params
from powerge.equilibrium import harrod_diagnostics, markup_map, solve_steady
from powerge.errors import BlowUpError
from powerge.fileio import bundled, load_config, read_timeseries
from powerge.matching import f_find, q_fill
from powerge.params import replace_fields
from powerge.political import baseline_game, government_response, qre_residual, solve_qre, worker_response
from powerge.production import labor_share, tech_unemployment, y_hat


class Criterion:
    def __init__(self, number: int, budget: float):
        self.number = number
        self.budget = budget
        self.failed: list[str] = []
        self.start = time.perf_counter()

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        if not ok:
            self.failed.append(f"{name} ({detail})" if detail else name)

    def close(self, capsys) -> None:
        elapsed = time.perf_counter() - self.start
        self.check("runtime", elapsed < self.budget, f"{elapsed:.2f}s >= {self.budget}s")
        status = "FAIL" if self.failed else "PASS"
        line = f"AC{self.number} {status} [{elapsed:.2f}s / {self.budget:g}s]"
        if self.failed:
            line += " failed: " + "; ".join(self.failed)
        with capsys.disabled():
            print("\n" + line)
        assert not self.failed, line


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def test_ac1_calibration_targets(capsys):
    ac = Criterion(1, 1.0)
    cfg = load_config()
    ss = solve_steady(cfg.params)
    ky = ss.k_over_qy_annual(cfg.params.tech.q_rel)
    ac.check("labor share", 0.60 <= ss.labor_share <= 0.66, f"{ss.labor_share:.4f}")
    ac.check("annual K/(qY)", 1.35 <= ky <= 1.65, f"{ky:.4f}")
    ac.check("vacancy rate", 0.02 <= ss.v_rate <= 0.04, f"{ss.v_rate:.4f}")
    ga = gamma_na(cfg.params.pref.gamma_f)
    ac.check("Gamma_na", abs(ga - 0.310345) <= 1e-6, f"{ga:.8f}")
    ac.close(capsys)


def test_ac2_power_ordering_and_limits(capsys):
    ac = Criterion(2, 1.0)
    rng = np.random.default_rng(2024)
    bad = 0
    for _ in range(1000):
        gf, tw = rng.uniform(0.01, 3.0), rng.uniform(0.0, 50.0)
        th, rt = math.exp(rng.uniform(-12, 7)), rng.uniform(1e-4, 0.05)
        lam, iota = rng.uniform(1e-3, 0.2), rng.uniform(0.3, 4.0)
        bp = powers(gf, 0.5, tw, th, q_fill(th, iota), f_find(th, iota), rt, lam)
        bad += not (bp.psi_nb <= bp.psi_n * (1 + 1e-12) and bp.psi_n <= bp.psi_na * (1 + 1e-12))
    ac.check("ordering on 1000 draws", bad == 0, f"{bad} violations")

    iota, gf, rt, lam = 1.25, 0.45, 0.0022, 0.0207
    for th, want in ((1e-8, "low"), (1e8, "high")):
        bp = powers(gf, 0.5, 2.0, th, q_fill(th, iota), f_find(th, iota), rt, lam)
        for name in ("psi_na", "psi_nb", "psi_n"):
            v = getattr(bp, name)
            ok = v < 1e-4 if want == "low" else v > 1 - 1e-4
            ac.check(f"{name} at theta={th:g}", ok, f"{v:.6g}")

    worst = -math.inf
    for tw in np.linspace(0.0, 20.0, 20):
        for th in np.logspace(-3, 3, 20):
            q, f = q_fill(th, iota), f_find(th, iota)
            h = 1e-6
            lo = powers(gf, 0.5, tw, th, q, f, rt, lam).psi_n
            hi = powers(gf, 0.5, tw + h, th, q, f, rt, lam).psi_n
            worst = max(worst, (hi - lo) / h)
    ac.check("d psi_n / d T_w <= 0", worst <= 1e-9, f"max slope {worst:.3g}")
    ac.close(capsys)


# columns: dU/dL with M_dot > 0, dU/dL with M_dot < 0, d/dM_dot, d/dm_dot at 0, d/dm
SIGN_MATRIX = {0.6: (+1, -1, +1, -1, 0), 1.2: (-1, +1, -1, -1, 0)}


def test_ac3_sign_matrix(capsys):
    ac = Criterion(3, 1.0)
    base = load_config().params

    def fd(fun, x, h=1e-7):
        return (fun(x + h) - fun(x - h)) / (2 * h)

    for sigma, want in SIGN_MATRIX.items():
        t = dataclasses.replace(base.tech, sigma=sigma)
        M = t.g / t.alpha

        def u(m=t.m, m_dot=0.0, M_dot=M, L=1.0):
            return tech_unemployment(L, m, m_dot, M_dot, t)

        got = (
            int(np.sign(fd(lambda x: u(L=x), 0.5))),
            int(np.sign(fd(lambda x: u(L=x, M_dot=-M), 0.5))),
            int(np.sign(fd(lambda x: u(M_dot=x), M))),
            int(np.sign(fd(lambda x: u(m_dot=x), 0.0))),
            0 if abs(fd(lambda x: u(m=x), t.m)) < 1e-9 else 1,
        )
        ac.check(f"sigma={sigma}", got == want, f"got {got}, want {want}")
    ac.close(capsys)


def test_ac4_comparative_statics(capsys):
    ac = Criterion(4, 5.0)
    base = load_config().params
    q = base.tech.q_rel
    s0 = solve_steady(base)
    s1 = solve_steady(replace_fields(base, t_w=1.1 * base.inst.t_w))
    ac.check("mobility: mu up", s1.mu > s0.mu)
    ac.check("mobility: theta up", s1.theta > s0.theta)
    ac.check("mobility: V up", s1.v_rate > s0.v_rate)
    ac.check("mobility: U down", s1.u_rate < s0.u_rate)
    ac.check("mobility: Omega down", s1.labor_share < s0.labor_share)
    ac.check("mobility: K/(qY) down", s1.k_over_qy(q) < s0.k_over_qy(q))
    s2 = solve_steady(replace_fields(base, g=base.tech.g + 1e-4))
    ac.check("growth: mu down", s2.mu < s0.mu)
    ac.check("growth: Omega up", s2.labor_share > s0.labor_share)
    ac.check("growth: K/(qY) up", s2.k_over_qy(q) > s0.k_over_qy(q))
    ac.close(capsys)


def test_ac5_fixed_point_identities(capsys):
    ac = Criterion(5, 10.0)
    base = load_config().params
    ss = solve_steady(base)
    phi = markup_map(ss.mu, base)[0]
    ac.check("fixed point", abs(phi - ss.mu) < 1e-10, f"{abs(phi - ss.mu):.3g}")
    ac.check("wage markup", rel(ss.wage * (1 + ss.mu), ss.y_l) < 1e-10)
    ac.check("labor share", rel(labor_share(ss.mu, ss.k_hat, base.tech), ss.wage / ss.y_hat) < 1e-10)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        t = dataclasses.replace(base.tech, m=float(rng.uniform(0.02, 0.98)),
                                sigma=float(rng.choice([0.3, 0.6, 1.2, 2.5])))
        k = float(np.exp(rng.uniform(-2, 6)))
        pt = y_hat(k, t)
        worst = max(worst, rel(k * pt.y_k + pt.y_l, pt.y_hat))
    ac.check("CES Euler identity", worst < 1e-10, f"{worst:.3g}")
    mus = [solve_steady(base, mu0=float(m0)).mu for m0 in np.linspace(0.05, 2.0, 10)]
    ac.check("multi-start spread", max(mus) - min(mus) < 1e-8, f"{max(mus) - min(mus):.3g}")
    ac.close(capsys)


def test_ac6_automation_measure(capsys):
    ac = Criterion(6, 5.0)
    base = load_config().params
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(20):
        m = float(rng.uniform(0.8, 0.92))
        p = replace_fields(base, m=m, t_w=float(rng.uniform(1.0, 4.0)), p_union=float(rng.uniform(0.0, 0.5)))
        ss = solve_steady(p)
        row = TimeSeriesRow(2000, p.inst.p_union, p.tech.g, p.inst.b, ss.k_over_qy_annual(p.tech.q_rel),
                            ss.mu, p.tech.delta, ss.u_rate, ss.v_rate)
        worst = max(worst, abs(estimate_automation(row, p.tech) - m))
    ac.check("round trip", worst < 1e-8, f"{worst:.3g}")
    mean_mu = solve_steady(base).mu
    row = TimeSeriesRow(2000, 0.25, base.tech.g, 0.06, 1.5, mean_mu, base.tech.delta, 0.05, 0.03)
    gap = 1 - estimate_automation(row, base.tech)
    ac.check("magnitude at mean mu", abs(gap - 0.12) <= 0.02, f"1-m={gap:.4f} at mu={mean_mu:.4f}")
    ac.close(capsys)


def test_ac7_bgp_feasibility(capsys):
    ac = Criterion(7, 1.0)
    base = load_config().params
    ss = solve_steady(base)
    d = harrod_diagnostics(ss, base)
    ac.check("feasible", d.feasible, d.reason)
    ac.check("g/delta", abs(d.g_over_delta - 0.30) < 0.005, f"{d.g_over_delta:.4f}")
    tau = brentq(lambda t: solve_steady(replace_fields(base, tau=t)).c_hat, 0.0, 1.0, xtol=1e-15)
    p = replace_fields(base, tau=tau)
    s0 = solve_steady(p)
    floor = harrod_diagnostics(s0, p).mu_min
    ac.check("c=0 pins mu_min", abs(s0.mu - floor) < 1e-8, f"|mu-mu_min|={abs(s0.mu - floor):.3g}")
    ac.close(capsys)


def endpoint_gap(pt, ss) -> float:
    pairs = ((pt.U, ss.u_rate), (pt.V, ss.v_rate), (pt.theta, ss.theta), (pt.k_hat, ss.k_hat),
             (pt.c_hat, ss.c_hat), (pt.mu, ss.mu), (pt.wage, ss.wage), (pt.labor_share, ss.labor_share))
    return max(rel(a, b) for a, b in pairs)


def test_ac8_dynamics(capsys):
    ac = Criterion(8, 60.0)
    base = load_config().params
    ss = solve_steady(base)
    null = integrate_path(ss, ShockSpec("institutions", 0.0), base)
    drift = max(abs(getattr(p, f) - getattr(null[0], f)) for p in null
                for f in ("U", "k_hat", "c_hat", "mu", "theta", "wage", "labor_share"))
    ac.check("null drift", drift < 1e-8 and null[-1].t == 600.0, f"{drift:.3g}")

    shocks = (
        ShockSpec("institutions", 0.2, field="t_w"),
        ShockSpec("institutions", 0.1, field="p_union"),
        ShockSpec("institutions", 0.02, field="b"),
        ShockSpec("growth", 1e-4),
        ShockSpec("automation", -0.02, ramp_months=24),
    )
    coarse = None
    for shock in shocks:
        pts = integrate_path(ss, shock, base, stride=2)
        coarse = coarse or pts
        gap = endpoint_gap(pts[-1], solve_steady(post_shock_params(base, shock)))
        ac.check(f"terminal {shock.kind}/{shock.field if shock.kind == 'institutions' else shock.magnitude}",
                 gap < 1e-4, f"{gap:.3g}")

    fine = integrate_path(ss, shocks[0], base, dt=0.125, stride=4)
    step = max(abs(getattr(a, f) - getattr(b, f)) for a, b in zip(coarse, fine)
               for f in ("U", "k_hat", "c_hat", "mu", "theta", "wage", "labor_share"))
    ac.check("step halving", len(fine) == len(coarse) and step < 1e-6, f"{step:.3g}")

    try:
        integrate_path(ss, ShockSpec("institutions", 0.3, field="tau"), base)
        ac.check("infeasible blow-up", False, "no error raised")
    except BlowUpError:
        pass
    ac.close(capsys)


def grid_oracle(game, n=2001):
    pu = np.linspace(0.0, 1.0, n)
    back = np.array([worker_response(game, government_response(game, float(x))) for x in pu])
    i = int(np.argmin(np.abs(back - pu)))
    fine = np.linspace(pu[max(i - 1, 0)], pu[min(i + 1, n - 1)], n)
    back = np.array([worker_response(game, government_response(game, float(x))) for x in fine])
    j = int(np.argmin(np.abs(back - fine)))
    return float(fine[j]), government_response(game, float(fine[j]))


def test_ac9_qre(capsys):
    ac = Criterion(9, 5.0)
    base = baseline_game()
    phis = np.linspace(-0.16, 0.21, 38)
    p11, p22 = [], []
    worst_res, worst_sum = 0.0, 0.0
    for phi in phis:
        g = base.at(float(phi))
        s = solve_qre(g)
        worst_res = max(worst_res, qre_residual(g, s.p_union, s.p_support))
        joint = (s.p_union * s.p_support, s.p_union * (1 - s.p_support),
                 (1 - s.p_union) * s.p_support, (1 - s.p_union) * (1 - s.p_support))
        worst_sum = max(worst_sum, abs(sum(joint) - 1))
        p11.append(joint[0])
        p22.append(joint[3])
    ac.check("residual", worst_res < 1e-10, f"{worst_res:.3g}")
    ac.check("joint sums", worst_sum < 1e-12, f"{worst_sum:.3g}")
    ac.check("P11 increasing", bool(np.all(np.diff(p11) > 0)))
    ac.check("P22 decreasing", bool(np.all(np.diff(p22) < 0)))
    for phi in (-0.16, 0.0, 0.21):
        g = base.at(phi)
        s = solve_qre(g)
        pu, ps = grid_oracle(g)
        err = max(abs(s.p_union - pu), abs(s.p_support - ps))
        ac.check(f"oracle at phi={phi}", err < 1e-4, f"{err:.3g}")
    ac.close(capsys)


def test_ac10_synthetic_calibration(capsys):
    ac = Criterion(10, 30.0)
    base = load_config().params
    data = read_timeseries(bundled("synthetic_fixture.csv"))
    paths = {}
    for label in ("technical-change-alone", "institutions-alone", "both"):
        path = run_scenario(data, ScenarioSpec(label), base)
        paths[label] = path
        ac.check(f"{label} solves every year", not path.failures and len(path.rows) == len(data),
                 f"failed years {[y for y, _ in path.failures]}")
    inst = paths["institutions-alone"]
    worst = max(abs(r.steady.u_rate - r.target_u) for r in inst.rows)
    ac.check("institutions reproduce U target", worst < 1e-10, f"{worst:.3g}")
    tws = {r.t_w for r in paths["technical-change-alone"].rows}
    ac.check("technology keeps T_w constant", len(tws) == 1, f"{len(tws)} distinct values")
    ac.close(capsys)
