"""Config files, CSV ingestion and emission, atomic writes."""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .calibration import TimeSeriesRow
from .errors import ParameterError, SchemaError
from .params import ModelParams, annual_to_monthly, from_flat
from .political import PoliticalGame

SECTIONS = {
    "technology": ("sigma", "alpha", "a_k", "q_rel", "m", "g", "delta", "m_dot"),
    "preferences": ("rho", "gamma_f", "epsilon"),
    "matching": ("iota", "lambda0", "xi"),
    "institutions": ("t_w", "p_union", "b", "gamma_u", "tau"),
}
RATE_KEYS = frozenset({"g", "delta", "rho", "lambda0", "m_dot"})
GAME_KEYS = tuple(
    f"{name}_{i}{j}" for name in ("u_w", "u_g", "phi_w", "phi_g") for i in (1, 2) for j in (1, 2)
) + ("lambda_w", "lambda_g")
SHOCK_KEYS = ("kind", "magnitude", "field", "t_shock", "ramp_months", "horizon", "dt", "stride")
RUN_KEYS = ("tol", "max_iter", "damping", "seed")

TIMESERIES_COLUMNS = (
    "year", "p_union", "g_annual", "b", "k_over_qy_annual",
    "mu_data", "delta_annual", "u_data", "v_data",
)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(columns, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([format_value(rec.get(c)) for c in columns])
    return buf.getvalue()


def atomic_write(path: str | os.PathLike | None, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename; ``None`` or '-' means stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_records(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _cell(raw: str, column: str, line: int, integer: bool = False):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        v = int(raw) if integer else float(raw)
    except ValueError:
        raise SchemaError(f"not a number: {raw!r}", column, line) from None
    if not integer and not math.isfinite(v):
        raise SchemaError(f"not finite: {raw!r}", column, line)
    return v


def _domain(v, column: str, line: int, lo: float, hi: float, open_lo: bool = False) -> None:
    if v is None:
        return
    bad = v < lo or v > hi or (open_lo and v == lo)
    if bad:
        raise SchemaError(f"value {v!r} outside its admissible range", column, line)


def read_timeseries(path: str | os.PathLike) -> list[TimeSeriesRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("empty file: header row missing", line=1) from None
        for col in TIMESERIES_COLUMNS:
            if col not in header:
                raise SchemaError("required column missing from header", col, 1)
        extra = [h for h in header if h not in TIMESERIES_COLUMNS]
        if extra:
            raise SchemaError("unknown column in header", extra[0], 1)
        idx = {c: header.index(c) for c in TIMESERIES_COLUMNS}
        rows = []
        seen = set()
        for n, raw in enumerate(reader, 2):
            if not raw or all(not x.strip() for x in raw):
                continue
            if len(raw) != len(header):
                raise SchemaError(f"expected {len(header)} cells, found {len(raw)}", line=n)
            val = {c: _cell(raw[idx[c]], c, n, integer=(c == "year")) for c in TIMESERIES_COLUMNS}
            if val["year"] is None:
                raise SchemaError("year is required", "year", n)
            if val["year"] in seen:
                raise SchemaError(f"duplicate year {val['year']}", "year", n)
            seen.add(val["year"])
            for c in ("p_union", "u_data", "v_data"):
                _domain(val[c], c, n, 0.0, 1.0)
            _domain(val["delta_annual"], "delta_annual", n, 0.0, 1.0, open_lo=True)
            _domain(val["k_over_qy_annual"], "k_over_qy_annual", n, 0.0, math.inf, open_lo=True)
            _domain(val["mu_data"], "mu_data", n, -1.0, math.inf, open_lo=True)
            _domain(val["b"], "b", n, 0.0, math.inf)
            _domain(val["g_annual"], "g_annual", n, -1.0, math.inf, open_lo=True)
            g = val["g_annual"]
            d = val["delta_annual"]
            rows.append(TimeSeriesRow(
                year=val["year"],
                p_union=val["p_union"],
                g=None if g is None else annual_to_monthly(g),
                b=val["b"],
                k_over_qy_annual=val["k_over_qy_annual"],
                mu_data=val["mu_data"],
                delta_data=None if d is None else annual_to_monthly(d),
                u_data=val["u_data"],
                v_data=val["v_data"],
            ))
    return rows


def write_timeseries(rows: list[dict]) -> str:
    return render_csv(TIMESERIES_COLUMNS, rows)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    game: PoliticalGame | None = None
    shock: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)


def bundled(name: str) -> Path:
    return Path(str(resources.files("powerge") / "data" / name))


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(f"{section}.{key}", raw, "must be a number") from None


def _split_key(section: str, key: str) -> tuple[str, str | None]:
    for unit in ("monthly", "annual"):
        suffix = "_" + unit
        if key.endswith(suffix) and key[: -len(suffix)] in RATE_KEYS:
            return key[: -len(suffix)], unit
    return key, None


def _apply_override(cp: configparser.ConfigParser, assignment: str) -> None:
    if "=" not in assignment:
        raise ParameterError("--set", assignment, "must look like key=value")
    key, value = (x.strip() for x in assignment.split("=", 1))
    if "." in key:
        section, key = key.split(".", 1)
    else:
        base, _ = _split_key("", key)
        owners = [s for s, keys in SECTIONS.items() if base in keys]
        owners += ["game"] if key in GAME_KEYS else []
        owners += ["shock"] if key in SHOCK_KEYS else []
        owners += ["run"] if key in RUN_KEYS else []
        if not owners:
            raise ParameterError(key, value, "is not a known configuration key")
        section = owners[0]
    if not cp.has_section(section):
        cp.add_section(section)
    base, unit = _split_key(section, key)
    if unit is not None:
        for u in ("monthly", "annual"):
            cp.remove_option(section, f"{base}_{u}")
    cp.set(section, key, value)


def load_config(path: str | os.PathLike | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Parse a config file (default: the bundled baseline) plus ``key=value`` overrides."""
    cp = configparser.ConfigParser(interpolation=None)
    src = Path(path) if path is not None else bundled("baseline.ini")
    try:
        with open(src) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise SchemaError(f"malformed config: {exc}") from None
    for a in overrides or []:
        _apply_override(cp, a)
    values: dict[str, float] = {}
    for section, keys in SECTIONS.items():
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            base, unit = _split_key(section, key)
            if base not in keys:
                raise ParameterError(f"{section}.{key}", raw, "is not a known key")
            if base in RATE_KEYS and unit is None:
                raise ParameterError(f"{section}.{key}", raw, "needs an explicit _monthly or _annual suffix")
            if base in values:
                raise ParameterError(f"{section}.{key}", raw, "is given twice")
            v = _parse_float(section, key, raw)
            values[base] = annual_to_monthly(v) if unit == "annual" else v
    for section in cp.sections():
        if section not in SECTIONS and section not in ("game", "shock", "run"):
            raise ParameterError(section, "", "is not a known config section")
    params = from_flat(values)
    game = None
    if cp.has_section("game"):
        g = {}
        for key, raw in cp.items("game"):
            if key not in GAME_KEYS:
                raise ParameterError(f"game.{key}", raw, "is not a known key")
            g[key] = _parse_float("game", key, raw)
        mat = lambda n, d=None: tuple(tuple(g.get(f"{n}_{i}{j}", d) for j in (1, 2)) for i in (1, 2))
        for n in ("u_w", "u_g"):
            if any(v is None for r in mat(n) for v in r):
                raise ParameterError(f"game.{n}", "", "needs all four cells")
        for n in ("lambda_w", "lambda_g"):
            if n not in g:
                raise ParameterError(f"game.{n}", "", "is required")
        try:
            game = PoliticalGame(mat("u_w"), mat("u_g"), g["lambda_w"], g["lambda_g"],
                                 mat("phi_w", 0.0), mat("phi_g", 0.0))
        except ValueError as exc:
            raise ParameterError("game", "", str(exc)) from None
    shock = dict(cp.items("shock")) if cp.has_section("shock") else {}
    run = dict(cp.items("run")) if cp.has_section("run") else {}
    for key in shock:
        if key not in SHOCK_KEYS:
            raise ParameterError(f"shock.{key}", shock[key], "is not a known key")
    for key in run:
        if key not in RUN_KEYS:
            raise ParameterError(f"run.{key}", run[key], "is not a known key")
    return RunConfig(params=params, game=game, shock=shock, run=run)
