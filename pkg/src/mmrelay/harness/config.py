"""Experiment configuration: flat ``key = value`` text or JSON.

Example::

    # Case 4 sweep
    scenario = case4
    M = 64, 128, 256, 512
    K = 20
    P_dB = 0
    Q_dB = 0
    P_c = 0.8
    N = 10000
    seed = 1
    gamma_th_dB = 8

A scenario is either a set of scaling exponents (``r_k``, ``r_p``, ``r_q``,
``r_c`` with base constants ``k0``, ``p0``, ``q0``, ``c0``) or explicit
``K``, ``P``, ``Q``, ``P_c``. Keys ending in ``_dB`` are converted to
linear scale here and nowhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..model import NetworkParams, ScalingExponents, as_fraction, realize_parameters

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config",
           "db_to_linear", "linear_to_db"]

MIN_TRIALS = 1000

_EXPONENT_KEYS = ("r_k", "r_p", "r_q", "r_c", "k0", "p0", "q0", "c0")
_EXPLICIT_KEYS = ("K", "P", "Q", "P_c", "tau")
_DB_KEYS = {"P_dB": "P", "Q_dB": "Q", "gamma_th_dB": "gamma_th"}


class ConfigError(ValueError):
    """Malformed configuration, with the offending line and field if known."""

    def __init__(self, message: str, line: Optional[int] = None,
                 field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass
class ExperimentConfig:
    scenario: str
    M: List[int]
    N: int = 10_000
    seed: int = 0
    exponents: Optional[ScalingExponents] = None
    explicit: Dict[str, float] = field(default_factory=dict)
    gamma_th: List[float] = field(default_factory=list)
    modulation: Tuple[float, float] = (0.5, 1.0)
    out: Optional[str] = None
    overlays: List[str] = field(default_factory=list)
    users: str = "first"

    def __post_init__(self):
        self.validate()

    def validate(self, min_trials: int = MIN_TRIALS) -> None:
        if not self.scenario:
            raise ConfigError("scenario name is empty", field="scenario")
        if not self.M:
            raise ConfigError("M grid is empty", field="M")
        if any(b <= a for a, b in zip(self.M, self.M[1:])):
            raise ConfigError("M grid must be strictly ascending", field="M")
        if any(m < 1 for m in self.M):
            raise ConfigError("M values must be positive", field="M")
        if self.N < min_trials:
            raise ConfigError(f"N={self.N} below the minimum of {min_trials}", field="N")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative", field="seed")
        if (self.exponents is None) == (not self.explicit):
            raise ConfigError("give either scaling exponents or explicit K, P, Q, P_c")
        if self.explicit:
            missing = [k for k in ("K", "P", "Q", "P_c") if k not in self.explicit]
            if missing:
                raise ConfigError(f"missing {', '.join(missing)}", field=missing[0])
        if any(g <= 0 for g in self.gamma_th):
            raise ConfigError("thresholds must be positive", field="gamma_th")
        A, B = self.modulation
        if not (0 < A <= 1 and B > 0):
            raise ConfigError("modulation needs 0 < A <= 1 and B > 0", field="A")

    def params_at(self, M: int) -> NetworkParams:
        """Network parameters of this scenario at antenna count ``M``."""
        if self.exponents is not None:
            return realize_parameters(self.exponents, M)
        e = self.explicit
        tau = e.get("tau")
        return NetworkParams.from_csi_quality(
            M=M, K=int(e["K"]), P=e["P"], Q=e["Q"], P_c=e["P_c"],
            tau=None if tau is None else int(tau))

    # -- serialization -------------------------------------------------------

    def to_pairs(self) -> List[Tuple[str, str]]:
        out = [("scenario", self.scenario),
               ("M", ", ".join(str(m) for m in self.M)),
               ("N", str(self.N)),
               ("seed", str(self.seed))]
        if self.exponents is not None:
            for k in _EXPONENT_KEYS:
                v = getattr(self.exponents, k)
                out.append((k, str(v) if isinstance(v, Fraction) else repr(v)))
        for k in _EXPLICIT_KEYS:
            if k in self.explicit:
                v = self.explicit[k]
                out.append((k, str(int(v)) if k in ("K", "tau") else repr(float(v))))
        if self.gamma_th:
            out.append(("gamma_th", ", ".join(repr(g) for g in self.gamma_th)))
        out.append(("A", repr(self.modulation[0])))
        out.append(("B", repr(self.modulation[1])))
        if self.out is not None:
            out.append(("out", self.out))
        if self.overlays:
            out.append(("overlay", ", ".join(self.overlays)))
        out.append(("users", self.users))
        return out

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_pairs())

    def to_json(self) -> str:
        d = {}
        for k, v in self.to_pairs():
            if k in ("M", "gamma_th", "overlay"):
                d[k] = [x.strip() for x in v.split(",")]
            else:
                d[k] = v
        d["M"] = [int(m) for m in d["M"]]
        if "gamma_th" in d:
            d["gamma_th"] = [float(g) for g in d["gamma_th"]]
        return json.dumps(d, indent=2)

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return all(getattr(self, f.name) == getattr(other, f.name) for f in fields(self))


# -- parsing -----------------------------------------------------------------

_KNOWN = set(("scenario", "M", "N", "seed", "gamma_th", "A", "B", "out", "overlay",
              "users") + _EXPONENT_KEYS + _EXPLICIT_KEYS) | set(_DB_KEYS)


def _split_list(raw: str) -> List[str]:
    return [x.strip() for x in raw.split(",") if x.strip()]


def _build(items: Dict[str, Tuple[object, Optional[int]]]) -> ExperimentConfig:
    """Turn ``{key: (raw value, line)}`` into a config; raw values may be
    strings (text format) or JSON scalars/lists."""

    def get(key, conv, default=None):
        if key not in items:
            return default
        raw, line = items[key]
        try:
            return conv(raw)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value {raw!r} ({exc})", line=line, field=key) from None

    def as_list(conv):
        def f(raw):
            vals = raw if isinstance(raw, list) else _split_list(str(raw))
            return [conv(v) for v in vals]
        return f

    def as_int(raw):
        if isinstance(raw, float) and raw.is_integer():
            return int(raw)
        if isinstance(raw, bool):
            raise ValueError("boolean")
        return int(str(raw).strip())

    def as_float(raw):
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("non-finite")
        return v

    # dB keys are converted here and stored linear
    for db_key, lin_key in _DB_KEYS.items():
        if db_key in items:
            if lin_key in items:
                raise ConfigError(f"both {db_key} and {lin_key} given",
                                  line=items[db_key][1], field=db_key)
            raw, line = items[db_key]
            if lin_key == "gamma_th":
                vals = get(db_key, as_list(as_float))
                items[lin_key] = ([db_to_linear(v) for v in vals], line)
            else:
                items[lin_key] = (db_to_linear(get(db_key, as_float)), line)

    if "scenario" not in items:
        raise ConfigError("missing scenario", field="scenario")
    if "M" not in items:
        raise ConfigError("missing M grid", field="M")

    exponents = None
    if any(k in items for k in _EXPONENT_KEYS):
        kw = {}
        for k in _EXPONENT_KEYS:
            if k in items:
                kw[k] = get(k, as_fraction if k.startswith("r_") else as_float)
        try:
            exponents = ScalingExponents(**kw)
        except ValueError as exc:
            k = next(iter(kw))
            raise ConfigError(str(exc), line=items[k][1]) from None
    explicit = {}
    for k in _EXPLICIT_KEYS:
        if k in items:
            explicit[k] = get(k, as_int if k in ("K", "tau") else as_float)
    if exponents is not None and explicit:
        k = next(iter(explicit))
        raise ConfigError("exponents and explicit parameters are exclusive",
                          line=items[k][1], field=k)

    cfg_kw = dict(
        scenario=get("scenario", lambda r: str(r).strip()),
        M=get("M", as_list(as_int)),
        N=get("N", as_int, 10_000),
        seed=get("seed", as_int, 0),
        exponents=exponents,
        explicit=explicit,
        gamma_th=get("gamma_th", as_list(as_float), []),
        modulation=(get("A", as_float, 0.5), get("B", as_float, 1.0)),
        out=get("out", lambda r: str(r).strip()),
        overlays=get("overlay", as_list(lambda r: str(r).strip()), []),
        users=get("users", lambda r: str(r).strip(), "first"),
    )
    try:
        return ExperimentConfig(**cfg_kw)
    except ConfigError as exc:
        if exc.line is None and exc.field is not None and exc.field in items:
            raise ConfigError(str(exc).split(": ", 1)[-1],
                              line=items[exc.field][1], field=exc.field) from None
        raise


def _parse_text(text: str) -> ExperimentConfig:
    items: Dict[str, Tuple[object, Optional[int]]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected key = value, got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError("unknown key", line=lineno, field=key)
        if key in items:
            raise ConfigError("duplicate key", line=lineno, field=key)
        items[key] = (value, lineno)
    return _build(items)


def _parse_json(text: str) -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise ConfigError("JSON config must be an object")
    unknown = sorted(set(obj) - _KNOWN)
    if unknown:
        raise ConfigError("unknown key", field=unknown[0])
    return _build({k: (v, None) for k, v in obj.items()})


def parse_config(text: str) -> ExperimentConfig:
    """Parse key=value text, or JSON if the first non-blank character is ``{``."""
    if text.lstrip().startswith("{"):
        return _parse_json(text)
    return _parse_text(text)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
