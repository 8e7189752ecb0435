"""Strict YAML run configuration.

Units: every rate, frequency and detuning is in rad/s, every time in s.
``eta``, ``eta_L``, phases, ``beta``, ``r_max`` and ``n_threshold`` are
dimensionless. A document looks like::

    experiment: squeeze
    system: {Delta: 3.0e6, lambda1: 3.0e5, lambda2: 3.0e5, Omega_abs: 3.0e5,
             delta: 6.0e4, eta: 0.1, nu: 5.0e5, varphi: 1.5707963267948966}
    truncations: {N_cav: 64, N_vib: 8}
    t_final: 2.0e-4
    samples: 11
    output: {path: squeeze.csv, format: csv}
"""
from __future__ import annotations

import difflib
import math
import warnings
from dataclasses import dataclass, field, fields

import yaml

from .errors import ConfigError
from .model import SystemParams

EXPERIMENTS = ("params", "evolve", "regimes", "squeeze", "filter", "semiclassical")
FORMATS = ("csv", "json")
SECTIONS = ("experiment", "system", "effective", "truncations", "output")

SYSTEM_KEYS = tuple(f.name for f in fields(SystemParams))
COMPLEX_SYSTEM_KEYS = ("lambda1", "lambda2")
FREQUENCY_KEYS = ("omega", "nu", "delta", "Delta", "lambda1", "lambda2", "Omega_abs")
EFFECTIVE_KEYS = ("regime", "omega_ii", "xi_ii", "chi_ii", "weak_xi_sign", "override")
TRUNCATION_KEYS = ("N_cav", "N_vib")
OUTPUT_KEYS = ("path", "format")

# experiment -> (required, optional-with-defaults)
EXPERIMENT_KEYS = {
    "params": ((), {}),
    "evolve": (("t_final", "samples"), {}),
    "regimes": (("delta_list", "m_max"), {"beta": None}),
    "squeeze": (("t_final", "samples"), {"engine": "analytic", "alpha": 0.0, "tune_delta": False}),
    "filter": (("M", "beta", "t_final", "samples", "n_threshold"), {"tune_delta": True}),
    "semiclassical": (("beta_values", "r_max", "samples"), {"cavity_engine": "numeric"}),
}
DEFAULT_TRUNCATIONS = {"N_cav": 64, "N_vib": 32}


def _suggest(key: str, allowed) -> str:
    close = difflib.get_close_matches(key, list(allowed), n=1, cutoff=0.6)
    return f"; did you mean {close[0]!r}?" if close else ""


def _reject_unknown(section: str, given: dict, allowed):
    for key in given:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}{key!r}{_suggest(key, allowed)}")


def parse_complex(value, key: str) -> complex:
    """Number, ``"1e5+2e4j"`` string, or ``[re, im]`` pair."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got a boolean")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{key}: cannot read {value!r} as a complex number") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(parse_real(value[0], key), parse_real(value[1], key))
    raise ConfigError(f"{key}: expected a number, a complex string or [re, im], got {value!r}")


def parse_real(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        raise ConfigError(f"{key}: expected a real number, got {value!r}")
    return float(value)


def parse_int(value, key: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def _complex_out(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    system: SystemParams
    effective: dict = field(default_factory=dict)
    N_cav: int = DEFAULT_TRUNCATIONS["N_cav"]
    N_vib: int = DEFAULT_TRUNCATIONS["N_vib"]
    options: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "csv"

    def to_document(self) -> dict:
        doc = {"experiment": self.experiment}
        sysd = {}
        for k, v in self.system.as_dict().items():
            sysd[k] = _complex_out(v) if k in COMPLEX_SYSTEM_KEYS else v
        doc["system"] = sysd
        if self.effective:
            doc["effective"] = {k: (_complex_out(v) if k == "xi_ii" else v) for k, v in self.effective.items()}
        doc["truncations"] = {"N_cav": self.N_cav, "N_vib": self.N_vib}
        for k, v in self.options.items():
            if k == "beta" and v is not None:
                v = _complex_out(v)
            elif k == "beta_values":
                v = [_complex_out(b) for b in v]
            elif k == "alpha":
                v = _complex_out(v)
            doc[k] = v
        out = {"format": self.output_format}
        if self.output_path is not None:
            out["path"] = self.output_path
        doc["output"] = out
        return doc


def serialize(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_document(), sort_keys=False)


def _parse_system(raw) -> SystemParams:
    if not isinstance(raw, dict):
        raise ConfigError("system: expected a mapping of SystemParams fields")
    _reject_unknown("system.", raw, SYSTEM_KEYS)
    kw = {}
    for k, v in raw.items():
        key = f"system.{k}"
        kw[k] = parse_complex(v, key) if k in COMPLEX_SYSTEM_KEYS else parse_real(v, key)
        mag = abs(kw[k])
        if k in FREQUENCY_KEYS and 0 < mag < 1.0:
            warnings.warn(f"{key}={mag:g} rad/s is suspiciously small; rates are in rad/s", UserWarning,
                          stacklevel=3)
    try:
        return SystemParams(**kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"system: {exc}") from None


def _parse_effective(raw) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("effective: expected a mapping")
    _reject_unknown("effective.", raw, EFFECTIVE_KEYS)
    out = {}
    regime = raw.get("regime", "auto")
    if regime not in ("auto", "weak", "strong", "manual"):
        raise ConfigError(f"effective.regime: expected auto|weak|strong|manual, got {regime!r}")
    out["regime"] = regime
    if regime == "manual":
        for k in ("omega_ii", "xi_ii"):
            if k not in raw:
                raise ConfigError(f"effective.{k}: required when effective.regime is manual")
    elif any(k in raw for k in ("omega_ii", "xi_ii", "chi_ii")):
        raise ConfigError("effective.omega_ii/xi_ii/chi_ii: only allowed when effective.regime is manual")
    if "omega_ii" in raw:
        out["omega_ii"] = parse_real(raw["omega_ii"], "effective.omega_ii")
    if "xi_ii" in raw:
        out["xi_ii"] = parse_complex(raw["xi_ii"], "effective.xi_ii")
    if "chi_ii" in raw:
        out["chi_ii"] = parse_real(raw["chi_ii"], "effective.chi_ii")
    if "weak_xi_sign" in raw:
        s = parse_int(raw["weak_xi_sign"], "effective.weak_xi_sign")
        if s not in (1, -1):
            raise ConfigError("effective.weak_xi_sign: must be 1 or -1")
        out["weak_xi_sign"] = s
    if "override" in raw:
        if not isinstance(raw["override"], bool):
            raise ConfigError("effective.override: expected true or false")
        out["override"] = raw["override"]
    return out


def _parse_option(key: str, value):
    if key in ("t_final", "r_max"):
        v = parse_real(value, key)
        if v < 0 or not math.isfinite(v):
            raise ConfigError(f"{key}: must be a finite value >= 0 (seconds for t_final)")
        return v
    if key == "samples":
        return parse_int(value, key, minimum=1)
    if key in ("M", "m_max"):
        return parse_int(value, key, minimum=0 if key == "M" else 1)
    if key == "n_threshold":
        v = parse_real(value, key)
        if v < 0:
            raise ConfigError("n_threshold: must be >= 0 photons")
        return v
    if key in ("beta", "alpha"):
        return None if value is None else parse_complex(value, key)
    if key == "beta_values":
        if not isinstance(value, list) or not value:
            raise ConfigError("beta_values: expected a non-empty list")
        return [parse_complex(b, f"beta_values[{i}]") for i, b in enumerate(value)]
    if key == "delta_list":
        if not isinstance(value, list) or not value:
            raise ConfigError("delta_list: expected a non-empty list of detunings in rad/s")
        return [parse_real(d, f"delta_list[{i}]") for i, d in enumerate(value)]
    if key == "engine":
        if value not in ("analytic", "numeric"):
            raise ConfigError(f"engine: expected analytic|numeric, got {value!r}")
        return value
    if key == "cavity_engine":
        if value not in ("numeric", "bogoliubov"):
            raise ConfigError(f"cavity_engine: expected numeric|bogoliubov, got {value!r}")
        return value
    if key == "tune_delta":
        if not isinstance(value, bool):
            raise ConfigError("tune_delta: expected true or false")
        return value
    raise ConfigError(f"unknown key {key!r}")


def config_from_document(doc) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    experiment = doc.get("experiment")
    if experiment is None:
        raise ConfigError("experiment: required (one of " + ", ".join(EXPERIMENTS) + ")")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown {experiment!r}{_suggest(str(experiment), EXPERIMENTS)}")
    required, optional = EXPERIMENT_KEYS[experiment]
    allowed = set(SECTIONS) | set(required) | set(optional)
    every_option = {k for r, o in EXPERIMENT_KEYS.values() for k in (*r, *o)}
    for key in doc:
        if key not in allowed:
            if key in every_option:
                raise ConfigError(f"{key!r} is not used by experiment {experiment!r}")
            raise ConfigError(f"unknown key {key!r}{_suggest(key, allowed)}")
    if "system" not in doc:
        raise ConfigError("system: required")
    system = _parse_system(doc["system"])
    effective = _parse_effective(doc.get("effective"))

    trunc = dict(DEFAULT_TRUNCATIONS)
    raw_t = doc.get("truncations") or {}
    if not isinstance(raw_t, dict):
        raise ConfigError("truncations: expected a mapping with N_cav and N_vib")
    _reject_unknown("truncations.", raw_t, TRUNCATION_KEYS)
    for k, v in raw_t.items():
        trunc[k] = parse_int(v, f"truncations.{k}", minimum=2)

    options = {}
    for k in required:
        if k not in doc:
            raise ConfigError(f"{k}: required by experiment {experiment!r}")
        options[k] = _parse_option(k, doc[k])
    for k, default in optional.items():
        options[k] = _parse_option(k, doc[k]) if k in doc else default

    raw_o = doc.get("output") or {}
    if not isinstance(raw_o, dict):
        raise ConfigError("output: expected a mapping with path and format")
    _reject_unknown("output.", raw_o, OUTPUT_KEYS)
    fmt = raw_o.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"output.format: expected csv|json, got {fmt!r}")
    path = raw_o.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path: expected a string")
    return RunConfig(experiment, system, effective, trunc["N_cav"], trunc["N_vib"], options, path, fmt)


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Validate a YAML document into a :class:`RunConfig`.

    ``experiment`` (the CLI subcommand) fills in a missing ``experiment`` key
    and must agree with it when both are given.

    Raises:
        ConfigError: naming the offending key and the violated constraint.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}".splitlines()[0]) from None
    if experiment is not None and isinstance(doc, dict):
        given = doc.get("experiment")
        if given is None:
            doc = {"experiment": experiment, **doc}
        elif given != experiment:
            raise ConfigError(f"experiment: config says {given!r} but the subcommand is {experiment!r}")
    return config_from_document(doc)
