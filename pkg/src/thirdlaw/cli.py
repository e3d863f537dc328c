"""Command-line front end.

Subcommands ``bound``, ``oracle``, ``scan`` and ``protocol`` read one JSON
config (unknown keys rejected), run the matching library path, and write a
JSON document or CSV table. Floats are written with 17 significant digits;
infinities as the token ``inf``.

Exit codes: 0 success, 1 oracle validation failure, 2 config error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import jsonschema
import numpy as np

from . import bounds as B
from .oracle import random_instance, validate_bound
from .spectra import AnalyticBathModel, ExplicitBathSpectrum, load_bath, load_system

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2

SCAN_HEADER = ("param", "epsilon_lb", "T_prime_lb", "E_threshold", "premise_ok")
PROTOCOL_HEADER = ("t", "T_prime", "W")
ORACLE_HEADER = ("instance", "epsilon_oracle", "epsilon_bound", "margin", "ok")
METHODS = ("general", "smooth", "thermal", "radiation", "time")
SWEEP_PARAMS = ("w_max", "V", "t", "discard", "n_modes")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- schema

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_temperature = {"anyOf": [_pos, {"const": "inf"}]}
_level = {"anyOf": [_num, {"type": "array", "prefixItems": [_num, {"type": "integer", "minimum": 1}],
                            "minItems": 2, "maxItems": 2}]}
_range = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "values": {"type": "array", "items": _num, "minItems": 1},
        "start": _num, "stop": _num,
        "num": {"type": "integer", "minimum": 1},
        "scale": {"enum": ["linear", "log"]},
    },
    "oneOf": [{"required": ["values"]}, {"required": ["start", "stop", "num"]}],
}
_mode = {"anyOf": [
    {"type": "array", "items": _num, "minItems": 1},
    {"type": "object", "additionalProperties": False, "required": ["oscillator"], "properties": {"oscillator": _pos}},
    {"type": "object", "additionalProperties": False, "required": ["spin"], "properties": {"spin": _pos}},
]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "levels": {"type": "array", "items": _level, "minItems": 1},
                "T_S": _temperature,
                "init_eigs": {"type": "array", "items": _pos, "minItems": 1},
                "g": {"type": "integer", "minimum": 1},
                "Delta": _pos,
                "d": {"type": "integer", "minimum": 1},
            },
            "oneOf": [{"required": ["levels", "T_S"]}, {"required": ["levels", "init_eigs"]}, {"required": ["d"]}],
        },
        "bath": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "modes": {"type": "array", "items": _mode, "minItems": 1},
                "e_cut": _pos,
                "energies": {"type": "array", "items": _num, "minItems": 2},
                "truncation_cutoff": _pos,
                "exponential": {"type": "object", "additionalProperties": False, "required": ["alpha", "n_steps"],
                                "properties": {"alpha": _pos, "n_steps": {"type": "integer", "minimum": 1},
                                               "step": _pos}},
                "analytic": {"type": "object", "additionalProperties": False, "required": ["alpha", "D", "V"],
                             "properties": {"alpha": _pos, "D": {"type": "integer", "minimum": 1},
                                            "nu": {"type": "number", "minimum": 0.5, "exclusiveMaximum": 1},
                                            "V": _pos}},
                "V": _pos,
            },
            "oneOf": [{"required": ["modes", "e_cut"]}, {"required": ["energies"]},
                      {"required": ["exponential"]}, {"required": ["analytic"]}],
        },
        "beta": _pos,
        "w_max": {"type": "number", "minimum": 0},
        "omega": _pos,
        "method": {"enum": list(METHODS)},
        "budget": {"type": "object", "additionalProperties": False, "required": ["u", "v"],
                   "properties": {"u": _pos, "v": _pos, "t": _pos}},
        "remap": {"type": "object", "additionalProperties": False, "required": ["final_g", "final_Delta"],
                  "properties": {"final_g": {"type": "integer", "minimum": 1}, "final_Delta": _pos}},
        "discard": {"type": "integer", "minimum": 1},
        "sweep": {"type": "object", "additionalProperties": False, "required": ["param", "range"],
                  "properties": {"param": {"enum": list(SWEEP_PARAMS)}, "range": _range}},
        "random": {"type": "object", "additionalProperties": False, "required": ["instances"],
                   "properties": {"instances": {"type": "integer", "minimum": 1},
                                  "max_bath_states": {"type": "integer", "minimum": 2, "maximum": 1000}}},
        "protocol": {"type": "object", "additionalProperties": False, "required": ["Delta", "T", "u", "t"],
                     "properties": {"Delta": _pos, "T": _pos, "u": _pos, "t": _range}},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
}

_validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)


def _field_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def validate_config(doc: Any) -> None:
    errors = sorted(_validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError("; ".join(f"{_field_path(e)}: {e.message}" for e in errors))


# ---------------------------------------------------------------- config objects

@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple

    @classmethod
    def from_doc(cls, doc: dict) -> "SweepSpec":
        return cls(doc["param"], expand_range(doc["range"]))


def expand_range(doc: dict) -> tuple:
    if "values" in doc:
        vals = [float(v) for v in doc["values"]]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ConfigError("range.values: must be in ascending order")
        return tuple(vals)
    start, stop, num = float(doc["start"]), float(doc["stop"]), int(doc["num"])
    if stop < start:
        raise ConfigError("range: stop must be >= start")
    if doc.get("scale", "linear") == "log":
        if not start > 0:
            raise ConfigError("range.start: log scale needs start > 0")
        return tuple(float(x) for x in np.geomspace(start, stop, num))
    return tuple(float(x) for x in np.linspace(start, stop, num))


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    system: Optional[dict] = None
    bath: Optional[dict] = None
    beta: Optional[float] = None
    w_max: float = 0.0
    omega: Optional[float] = None
    method: Optional[str] = None
    budget: Optional[dict] = None
    remap: Optional[dict] = None
    discard: Optional[int] = None
    sweep: Optional[SweepSpec] = None
    random: Optional[dict] = None
    protocol: Optional[dict] = None
    seed: int = 0

    @classmethod
    def from_doc(cls, doc: Any, seed: Optional[int] = None) -> "RunConfig":
        validate_config(doc)
        kwargs = {k: doc[k] for k in ("system", "bath", "beta", "w_max", "omega", "method", "budget",
                                     "remap", "discard", "random", "protocol", "seed") if k in doc}
        if "sweep" in doc:
            kwargs["sweep"] = SweepSpec.from_doc(doc["sweep"])
        if seed is not None:
            kwargs["seed"] = seed
        return cls(raw=doc, **kwargs)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(", ".join(f"{n}: required for this command" for n in missing))

    # model construction ------------------------------------------------

    def build_system(self):
        self.require("system")
        system = load_system(self.system)
        if self.remap is not None:
            system = B.remap_changed_hamiltonian(system, self.remap["final_g"], self.remap["final_Delta"])
        if self.discard is not None:
            system = B.discard_subsystem(system, self.discard)
        return system

    def build_bath(self, bath_doc: Optional[dict] = None):
        self.require("bath", "beta")
        return load_bath(self.bath if bath_doc is None else bath_doc, self.beta)

    def resolved_method(self, bath) -> str:
        if self.method is not None:
            return self.method
        return "radiation" if isinstance(bath, AnalyticBathModel) else "general"


# ---------------------------------------------------------------- serialization

def format_number(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and ``"inf"`` for infinities."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float, np.integer, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_field(x: Any) -> str:
    if x is None:
        # no constraint beyond the trivial lower bound
        return "0"
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(csv_field(v) for v in row) + "\n")
    return buf.getvalue()


def report_row(param: Any, rep: B.BoundReport) -> tuple:
    return (param, rep.epsilon_lb, rep.T_prime_lb, rep.E_threshold, rep.premise_ok)


# ---------------------------------------------------------------- commands

def run_bound(system, bath, method: str, w_max: float, omega=None, budget=None) -> B.BoundReport:
    """Dispatch one bound evaluation by method name."""
    if method == "general":
        if not isinstance(bath, ExplicitBathSpectrum):
            raise ConfigError("method general: needs an explicit bath")
        return B.error_bound_general(system, bath, w_max, omega)
    if method == "smooth":
        return B.error_bound_smooth(system, bath, w_max, omega)
    if method == "thermal":
        return B.thermal_cooling_bound(system, bath, w_max, omega)
    if not isinstance(bath, AnalyticBathModel):
        raise ConfigError(f"method {method}: needs an analytic bath")
    if method == "radiation":
        return B.radiation_bound(system, bath, w_max)
    if budget is None or "t" not in budget:
        raise ConfigError("budget.t: required for method time")
    rb = B.ResourceBudget.at_time(budget["t"], budget["u"], budget["v"], bath.D)
    return B.time_bound(system, bath, rb)[0]


def cmd_bound(cfg: RunConfig) -> dict:
    system, bath = cfg.build_system(), cfg.build_bath()
    method = cfg.resolved_method(bath)
    rep = run_bound(system, bath, method, cfg.w_max, cfg.omega, cfg.budget)
    return {"command": "bound", "input": cfg.raw, "report": rep.to_dict()}


def cmd_oracle(cfg: RunConfig) -> dict:
    """Oracle validation of one configured instance, or of a seeded random suite."""
    results = []
    if cfg.random is not None:
        rng = np.random.default_rng(cfg.seed)
        for _ in range(cfg.random["instances"]):
            inst = random_instance(rng, cfg.random.get("max_bath_states", 50))
            results.append(validate_bound(inst.system, inst.bath, inst.w_max))
    else:
        system, bath = cfg.build_system(), cfg.build_bath()
        if not isinstance(bath, ExplicitBathSpectrum):
            raise ConfigError("bath: oracle needs an explicit bath")
        results.append(validate_bound(system, bath, cfg.w_max, cfg.omega))
    rows = [{"epsilon_oracle": r.epsilon_oracle, "epsilon_bound": r.epsilon_bound, "margin": r.margin,
             "ok": r.ok, "unassessed_mass": r.unassessed_mass, "epsilon_exact": r.epsilon_exact,
             "relaxation_gap": r.relaxation_gap} for r in results]
    return {"command": "oracle", "input": cfg.raw, "seed": cfg.seed,
            "all_ok": all(r.ok for r in results), "instances": rows}


def _sweep_point(cfg: RunConfig, system, bath, method: str, param: str, value: float) -> B.BoundReport:
    w_max, budget = cfg.w_max, cfg.budget
    if param == "w_max":
        w_max = value
    elif param == "V":
        if not isinstance(bath, AnalyticBathModel):
            raise ConfigError("sweep.param V: needs an analytic bath")
        bath = bath.with_volume(value)
    elif param == "t":
        if method != "time":
            raise ConfigError("sweep.param t: needs method time")
        budget = {**(budget or {}), "t": value}
    elif param == "discard":
        if int(value) != value or value < 1:
            raise ConfigError("sweep.range: discard values must be positive integers")
        system = B.discard_subsystem(system, int(value))
    elif param == "n_modes":
        doc = cfg.bath
        if "modes" not in doc or int(value) != value or not 1 <= value <= len(doc["modes"]):
            raise ConfigError("sweep.param n_modes: needs a mode bath and integer counts within its mode list")
        sub = {**doc, "modes": doc["modes"][: int(value)]}
        sub.pop("V", None)
        bath = cfg.build_bath(sub)
    return run_bound(system, bath, method, w_max, cfg.omega, budget)


def cmd_scan(cfg: RunConfig) -> str:
    cfg.require("sweep")
    system, bath = cfg.build_system(), cfg.build_bath()
    method = cfg.resolved_method(bath)
    rows = [report_row(v, _sweep_point(cfg, system, bath, method, cfg.sweep.param, v))
            for v in cfg.sweep.values]
    return write_csv(SCAN_HEADER, rows)


def cmd_protocol(cfg: RunConfig) -> str:
    cfg.require("protocol")
    p = cfg.protocol
    times = expand_range(p["t"])
    pts = B.isothermal_shift_protocol(p["Delta"], p["T"], p["u"], times)
    return write_csv(PROTOCOL_HEADER, [(q.t, q.T_prime, q.W) for q in pts])


def _oracle_csv(doc: dict) -> str:
    rows = [(i, r["epsilon_oracle"], r["epsilon_bound"], r["margin"], r["ok"])
            for i, r in enumerate(doc["instances"])]
    return write_csv(ORACLE_HEADER, rows)


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thirdlaw", description="Third-law cooling bounds and oracle checks.")
    parser.add_argument("command", choices=("bound", "oracle", "scan", "protocol"))
    parser.add_argument("--config", required=True, type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    parser.add_argument("--seed", type=int, help="random seed, overrides the config value")
    parser.add_argument("--csv", action="store_true", help="emit CSV for bound/oracle")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    status = EXIT_OK
    try:
        try:
            doc = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from exc
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must be an unsigned 64-bit integer")
        cfg = RunConfig.from_doc(doc, seed=args.seed)
        if args.command == "bound":
            result = cmd_bound(cfg)
            rep = result["report"]
            text = (write_csv(SCAN_HEADER, [(rep["method"], rep["epsilon_lb"], rep["T_prime_lb"], rep["E_threshold"],
                                               rep["premise_ok"])])
                    if args.csv else dumps(result) + "\n")
        elif args.command == "oracle":
            result = cmd_oracle(cfg)
            status = EXIT_OK if result["all_ok"] else EXIT_VALIDATION
            text = _oracle_csv(result) if args.csv else dumps(result) + "\n"
        elif args.command == "scan":
            text = cmd_scan(cfg)
        else:
            text = cmd_protocol(cfg)
    except ValueError as exc:
        # every input problem (schema, model invariant, inapplicable bound, budget) lands here
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    if args.out is not None:
        args.out.write_text(text)
    else:
        stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
