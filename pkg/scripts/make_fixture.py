"""Regenerate the bundled synthetic time series.

Each year is built from a known parameter vector so that the automation
estimate and the mobility inversion recover it: the capital-output ratio
and markup come from the model's own steady state, and the vacancy and
unemployment rates straddle the model's unemployment with a common factor.
"""

import math
import sys

from powerge.equilibrium import solve_steady
from powerge.fileio import atomic_write, bundled, write_timeseries
from powerge.params import monthly_to_annual, replace_fields, baseline_params

YEARS = range(1970, 2000)
SPREAD = 1.15


def truth(i: int, n: int) -> dict:
    x = i / (n - 1)
    return {
        "m": 0.80 + 0.10 * x,
        "t_w": 1.2 + 2.0 * math.sin(math.pi * x),
        "g": 0.0017 * (1.0 - 0.4 * math.sin(math.pi * x)),
        "b": 0.06 + 0.01 * math.cos(2 * math.pi * x),
        "p_union": 0.30 - 0.16 * x,
    }


def main(out: str) -> None:
    base = baseline_params()
    q = base.tech.q_rel
    rows = []
    n = len(YEARS)
    for i, year in enumerate(YEARS):
        tv = truth(i, n)
        ss = solve_steady(replace_fields(base, **tv))
        rows.append({
            "year": year,
            "p_union": tv["p_union"],
            "g_annual": monthly_to_annual(tv["g"]),
            "b": tv["b"],
            "k_over_qy_annual": ss.k_over_qy_annual(q),
            "mu_data": ss.mu,
            "delta_annual": monthly_to_annual(base.tech.delta),
            "u_data": ss.u_rate * SPREAD,
            "v_data": ss.u_rate / SPREAD,
        })
    atomic_write(out, write_timeseries(rows))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(bundled("synthetic_fixture.csv")))
