"""Parameter bundles, validation and unit helpers.

All rates are stored per month. Construction validates every field, so a
``ModelParams`` instance that exists is always admissible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ParameterError

MONTHS_PER_YEAR = 12


def annual_to_monthly(x: float) -> float:
    """Convert a compounded annual rate to the equivalent monthly rate."""
    return math.expm1(math.log1p(x) / MONTHS_PER_YEAR)


def monthly_to_annual(x: float) -> float:
    return math.expm1(MONTHS_PER_YEAR * math.log1p(x))


DEFAULT_DELTA = annual_to_monthly(0.07)


def _finite(name: str, v: float) -> None:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParameterError(name, v, "must be a real number")
    if not math.isfinite(v):
        raise ParameterError(name, v, "must be finite")


def _positive(name: str, v: float) -> None:
    _finite(name, v)
    if not v > 0:
        raise ParameterError(name, v, "must be positive")


def _nonneg(name: str, v: float) -> None:
    _finite(name, v)
    if not v >= 0:
        raise ParameterError(name, v, "must be non-negative")


def _closed_unit(name: str, v: float) -> None:
    _finite(name, v)
    if not 0.0 <= v <= 1.0:
        raise ParameterError(name, v, "must lie in [0,1]")


def _open_unit(name: str, v: float) -> None:
    _finite(name, v)
    if not 0.0 < v < 1.0:
        raise ParameterError(name, v, "must lie in (0,1)")


@dataclass(frozen=True)
class TechnologyParams:
    sigma: float
    alpha: float
    a_k: float
    q_rel: float
    m: float
    g: float
    delta: float = DEFAULT_DELTA
    m_dot: float = 0.0

    def __post_init__(self) -> None:
        _positive("sigma", self.sigma)
        _positive("alpha", self.alpha)
        _positive("a_k", self.a_k)
        _open_unit("delta", self.delta)
        _positive("q_rel", self.q_rel)
        _closed_unit("m", self.m)
        _finite("g", self.g)
        _finite("m_dot", self.m_dot)

    @property
    def M_dot(self) -> float:
        """Growth of the task frontier implied by the balanced-growth rate."""
        return self.g / self.alpha


@dataclass(frozen=True)
class PreferenceParams:
    rho: float
    gamma_f: float
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        _positive("rho", self.rho)
        _positive("gamma_f", self.gamma_f)
        _positive("epsilon", self.epsilon)


@dataclass(frozen=True)
class MatchingParams:
    iota: float
    lambda0: float
    xi: float

    def __post_init__(self) -> None:
        _positive("iota", self.iota)
        _open_unit("lambda0", self.lambda0)
        _positive("xi", self.xi)


@dataclass(frozen=True)
class InstitutionParams:
    t_w: float
    p_union: float
    b: float
    gamma_u: float = 0.5
    tau: float = 0.0

    def __post_init__(self) -> None:
        _nonneg("t_w", self.t_w)
        _closed_unit("p_union", self.p_union)
        _nonneg("b", self.b)
        _open_unit("gamma_u", self.gamma_u)
        _nonneg("tau", self.tau)


_GROUPS = ("tech", "pref", "match", "inst")


@dataclass(frozen=True)
class ModelParams:
    tech: TechnologyParams
    pref: PreferenceParams
    match: MatchingParams
    inst: InstitutionParams

    def __post_init__(self) -> None:
        kinds = (TechnologyParams, PreferenceParams, MatchingParams, InstitutionParams)
        for name, kind in zip(_GROUPS, kinds):
            if not isinstance(getattr(self, name), kind):
                raise ParameterError(name, getattr(self, name), f"must be a {kind.__name__}")

    def flat(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for g in _GROUPS:
            out.update(asdict(getattr(self, g)))
        return out

    def with_values(self, **changes: float) -> ModelParams:
        """Return a copy with the named flat fields replaced (and re-validated)."""
        return replace_fields(self, **changes)


FIELD_GROUP: dict[str, str] = {}
for _g, _cls in zip(_GROUPS, (TechnologyParams, PreferenceParams, MatchingParams, InstitutionParams)):
    for _f in fields(_cls):
        FIELD_GROUP[_f.name] = _g


def replace_fields(p: ModelParams, **changes: float) -> ModelParams:
    per_group: dict[str, dict[str, float]] = {}
    for key, value in changes.items():
        if key not in FIELD_GROUP:
            raise ParameterError(key, value, "is not a model parameter")
        per_group.setdefault(FIELD_GROUP[key], {})[key] = value
    parts = {g: getattr(p, g) for g in _GROUPS}
    for g, vals in per_group.items():
        parts[g] = replace(parts[g], **vals)
    return ModelParams(**parts)


def validate_params(p: ModelParams) -> ModelParams:
    """Re-run every invariant check and hand back the same bundle."""
    if not isinstance(p, ModelParams):
        raise ParameterError("params", p, "must be a ModelParams bundle")
    for g in _GROUPS:
        part = getattr(p, g)
        part.__post_init__()
    return p


def from_flat(values: dict[str, float]) -> ModelParams:
    per_group: dict[str, dict[str, float]] = {g: {} for g in _GROUPS}
    for key, value in values.items():
        if key not in FIELD_GROUP:
            raise ParameterError(key, value, "is not a model parameter")
        per_group[FIELD_GROUP[key]][key] = value
    try:
        return ModelParams(
            tech=TechnologyParams(**per_group["tech"]),
            pref=PreferenceParams(**per_group["pref"]),
            match=MatchingParams(**per_group["match"]),
            inst=InstitutionParams(**per_group["inst"]),
        )
    except TypeError as exc:
        raise ParameterError("params", sorted(values), f"incomplete bundle: {exc}") from None


def to_text(p: ModelParams) -> str:
    """Flat ``group.key=value`` form; floats use round-trip repr."""
    lines = []
    for g in _GROUPS:
        for k, v in asdict(getattr(p, g)).items():
            lines.append(f"{g}.{k}={float(v)!r}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ModelParams:
    values: dict[str, float] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"line {n}", line, "must look like group.key=value")
        key, value = line.split("=", 1)
        name = key.strip().split(".")[-1]
        try:
            values[name] = float(value)
        except ValueError:
            raise ParameterError(name, value.strip(), "must be a number") from None
    return from_flat(values)


def baseline_params(m: float = 0.86, t_w: float = 2.0) -> ModelParams:
    """Baseline monthly calibration; ``m`` and ``t_w`` are the free targets."""
    return ModelParams(
        tech=TechnologyParams(sigma=0.6, alpha=1.4, a_k=0.022, q_rel=0.35, m=m, g=0.0017),
        pref=PreferenceParams(rho=0.0222, gamma_f=0.45),
        match=MatchingParams(iota=1.25, lambda0=0.02, xi=8.0),
        inst=InstitutionParams(t_w=t_w, p_union=0.25, b=0.06),
    )
