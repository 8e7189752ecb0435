"""Command-line entry point.

Result files are deterministic: the same configuration always produces
byte-identical output. Wall time goes to a separate ``*.timing.json`` file.

Exit codes: 0 success, 2 configuration error, 3 physics precondition,
4 truncation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import classify_regime, effective_params, validate_effective_dynamics
from .config import EXPERIMENTS, SYSTEM_KEYS, RunConfig, config_from_document, parse_config
from .dynamics import resonant_detuning
from .errors import ConfigError, IonCavityError, TruncationError
from .experiments import (
    regime_map,
    run_fock_filter,
    run_h1_squeezing,
    run_semiclassical_comparison,
    significant_levels,
)
from .fockalg import Atom, Boson, SpaceSignature
from .model import EffectiveParams

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_TRUNCATION = 0, 2, 3, 4

# Stable column sets per experiment
COLUMNS = {
    "params": ("omega_ii", "chi_ii", "xi_ii_re", "xi_ii_im", "xi_ii_abs", "ratio_plus", "ratio_minus",
               "regime"),
    "evolve": ("t_seconds", "fidelity", "n_exact", "n_effective", "var_min_exact", "var_min_effective",
               "population_i"),
    "squeeze": ("t_seconds", "r", "R_percent", "theta_min", "var_min", "var_max", "var_theta_0", "n_mean"),
    "regimes": ("delta", "m", "Xi", "Gamma_abs", "F_abs", "regime_code"),
    "filter": ("t_seconds", "n_RS", "n_RS_analytic", "n_NS", "norm"),
    "semiclassical": ("t_seconds", "beta_re", "beta_im", "r", "var_quantum", "var_semiclassical",
                      "var_reference", "deviation", "n_mean"),
}


def _clean(value):
    """JSON-safe, deterministic representation."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.generic,)):
        value = value.item()
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def resolve_effective(cfg: RunConfig) -> EffectiveParams:
    e = cfg.effective
    if e.get("regime") == "manual":
        return EffectiveParams.manual(e["omega_ii"], e["xi_ii"], e.get("chi_ii", 0.0))
    regime = None if e.get("regime", "auto") == "auto" else e["regime"]
    return effective_params(cfg.system, regime=regime, override=e.get("override", False),
                            weak_xi_sign=e.get("weak_xi_sign", 1))


def execute(cfg: RunConfig) -> tuple:
    """Run one configuration; returns ``(rows, summary)``. Rows are tuples in ``COLUMNS`` order."""
    p = cfg.system
    o = cfg.options
    summary: dict = {}
    exp = cfg.experiment
    eff = resolve_effective(cfg)

    if exp == "params":
        v = classify_regime(p)
        xi = eff.xi_ii
        rows = [(eff.omega_ii, eff.chi_ii, xi.real, xi.imag, abs(xi), v.ratio_plus, v.ratio_minus, eff.regime)]
    elif exp == "evolve":
        space = SpaceSignature.of(Boson(cfg.N_cav), Boson(cfg.N_vib), Atom())
        res = validate_effective_dynamics(p, eff, space, o["t_final"], max(1, o["samples"] - 1))
        rows = list(zip(res.times, res.fidelity, res.n_exact, res.n_effective, res.var_min_exact,
                        res.var_min_effective, res.population_i))
        summary = {"max_infidelity": res.max_infidelity, "warnings": list(res.warnings)}
    elif exp == "squeeze":
        if o["tune_delta"]:
            p = p.replace(delta=eff.omega_ii)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_h1_squeezing(p, o["t_final"], o["samples"], o["engine"], eff=eff, N_cav=cfg.N_cav,
                                   alpha=o["alpha"])
        s = res.series()
        rows = list(zip(*(s[c] for c in COLUMNS["squeeze"])))
        summary = {"r": res.r, "R_percent": res.R, "theta_min": res.theta_min, "squeeze_angle": res.squeeze_angle,
                   "var_min": res.var_min, "n_mean": res.n_mean, "warnings": list(res.warnings)}
    elif exp == "regimes":
        maps = regime_map(p, eff, o["delta_list"], o["m_max"])
        rows = [(mp.delta, r.m, r.Xi, abs(r.Gamma), r.F_abs, r.code) for mp in maps for r in mp.reports]
        sig = None if o["beta"] is None else significant_levels(o["beta"])
        summary = {"maps": [{"delta": mp.delta, "shape": mp.shape, "resonant_levels": list(mp.resonant_levels),
                             "crossings": mp.crossings,
                             "classes_over_significant": (None if sig is None
                                                          else sorted(mp.classes_over(sig)))}
                            for mp in maps]}
    elif exp == "filter":
        if o["tune_delta"]:
            p = p.replace(delta=resonant_detuning(p, eff, o["M"]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_fock_filter(p, eff, o["M"], o["beta"], o["t_final"], o["samples"], o["n_threshold"],
                                  N_cav=cfg.N_cav, N_vib=cfg.N_vib)
        s = res.series()
        rows = list(zip(*(s[c] for c in COLUMNS["filter"])))
        summary = {"success_prob": res.success_prob, "fidelity": res.fidelity,
                   "detection_prob": res.detection_prob, "bound_NS": res.bound_NS,
                   "max_n_NS": float(np.max(res.n_NS)), "delta_resonant": res.delta_resonant,
                   "delta_unscaled": res.delta_unscaled, "post_measure_populations": res.post_measure_state.populations(0),
                   "notes": list(res.notes), "warnings": list(res.warnings)}
    else:
        curves = run_semiclassical_comparison(p, eff, o["beta_values"], o["r_max"], o["samples"],
                                              N_cav=cfg.N_cav, N_vib=cfg.N_vib, cavity_engine=o["cavity_engine"])
        rows = []
        for c in curves:
            s = c.series()
            for k in range(len(c.r)):
                rows.append((s["t_seconds"][k], c.beta.real, c.beta.imag, c.r[k], c.var_quantum[k],
                             c.var_semiclassical[k], c.var_reference[k], c.deviation[k], s["n_mean"][k]))
        summary = {"curves": [{"beta": c.beta, "delta": c.delta, "theta_sq": c.theta_sq,
                               "frame": "Fock-resolved time-independent frame"} for c in curves]}
    return rows, summary


def metadata(cfg: RunConfig) -> dict:
    p = cfg.system
    eff = resolve_effective(cfg)
    return {
        "library_version": __version__,
        "experiment": cfg.experiment,
        "config": cfg.to_document(),
        "system": p.as_dict(),
        "effective": eff.as_dict(),
        "validity": classify_regime(p).as_dict(),
        "columns": list(COLUMNS[cfg.experiment]),
        "regime_codes": {"subcritical": 0, "critical": 1, "supercritical": 2, "resonant": 3},
    }


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _set_key(cfg: RunConfig, key: str, value: float) -> RunConfig:
    name = key.split(".", 1)[1] if key.startswith("system.") else key
    if name in SYSTEM_KEYS:
        return replace(cfg, system=cfg.system.replace(**{name: value}))
    doc = cfg.to_document()
    if key.startswith("effective."):
        doc.setdefault("effective", {})[key.split(".", 1)[1]] = value
    elif key.startswith("truncations."):
        doc["truncations"][key.split(".", 1)[1]] = int(round(value))
    elif key in cfg.options:
        doc[key] = int(round(value)) if key in ("M", "m_max", "samples") else value
    else:
        raise ConfigError(f"--sweep: key {key!r} is not a system field or an option of {cfg.experiment!r}")
    return config_from_document(doc)


def parse_sweep(spec: str) -> tuple:
    try:
        key, rng = spec.split("=", 1)
        start, stop, steps = rng.split(":")
        values = np.linspace(float(start), float(stop), int(steps))
    except ValueError:
        raise ConfigError(f"--sweep: expected key=start:stop:steps, got {spec!r}") from None
    if len(values) < 1:
        raise ConfigError("--sweep: steps must be >= 1")
    return key.strip(), [float(v) for v in values]


def _execute_one(cfg: RunConfig):
    return execute(cfg)


def run(cfg: RunConfig, out: str | None = None, fmt: str | None = None, sweep: str | None = None,
        workers: int | None = None, stdout=None) -> int:
    """Execute ``cfg`` and write the result files. Returns the exit status."""
    stdout = stdout or sys.stdout
    fmt = fmt or cfg.output_format
    out = out if out is not None else cfg.output_path
    start = time.perf_counter()
    columns = list(COLUMNS[cfg.experiment])
    meta = metadata(cfg)
    if sweep:
        key, values = parse_sweep(sweep)
        configs = [_set_key(cfg, key, v) for v in values]
        if workers == 1 or len(configs) == 1:
            results = [execute(c) for c in configs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_execute_one, configs))
        rows = [(v, *row) for v, (rs, _) in zip(values, results) for row in rs]
        columns = ["sweep_value"] + columns
        meta["sweep"] = {"key": key, "values": values}
        meta["summary"] = [s for _, s in results]
    else:
        rows, summary = execute(cfg)
        meta["summary"] = summary
    wall = time.perf_counter() - start

    if fmt == "csv":
        body = to_csv(columns, rows)
        meta_text = json.dumps(_clean(meta), indent=2, sort_keys=True) + "\n"
    else:
        doc = dict(meta)
        doc["series"] = {c: [_clean(row[i]) for row in rows] for i, c in enumerate(columns)}
        body = json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
        meta_text = None
    timing = json.dumps({"wall_time_seconds": wall}) + "\n"

    if out is None:
        stdout.write(body)
        return EXIT_OK
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(body)
    if meta_text is not None:
        Path(str(path) + ".meta.json").write_text(meta_text)
    Path(str(path) + ".timing.json").write_text(timing)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ioncavity", description="Trapped ion in a cavity: engineered interactions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", help="result file (default: output.path, else stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
        sp.add_argument("--sweep", help="key=start:stop:steps, e.g. Delta=3e6:12e6:4")
        sp.add_argument("--workers", type=int, default=None, help="worker processes for --sweep")
    return ap


def _fail(code: int, exc: BaseException) -> int:
    msg = str(exc).replace("\n", " ")
    print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        return _fail(EXIT_CONFIG, ConfigError(f"cannot read {args.config}: {exc.strerror}"))
    try:
        cfg = parse_config(text, experiment=args.command)
        return run(cfg, out=args.out, fmt=args.format, sweep=args.sweep, workers=args.workers)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except TruncationError as exc:
        return _fail(EXIT_TRUNCATION, exc)
    except (IonCavityError, ValueError) as exc:
        return _fail(EXIT_PHYSICS, exc)


if __name__ == "__main__":
    sys.exit(main())
