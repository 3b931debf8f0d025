"""Command-line sweeps writing ``<name>.csv`` and ``<name>.summary.json``.

Every parameter can come from an INI file (``--config``, one section per
subcommand) or from the flag of the same name; flags win. Grids are written
``start:stop:points``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bands import JunctionParams, band_columns, band_row
from .detector import (SWEEP_COLUMNS, DetectorParams, deep_collector_quartet,
                       energy_sensitivity_from, noise_quartet,
                       signal_to_noise_from)
from .errors import (ConfigError, SingleWellError, SingularSystem,
                     ToleranceNotMet, TruncationError)
from .flux import MODES, ThreeLevelParams, rate_for_mode
from .qubits import (SquidParams, find_double_well, flux_qubit_bias,
                     plasma_frequency)

EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_SINGULAR = 2, 3, 4


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def as_text(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.points}"


def parse_grid(key: str, text: str) -> Grid:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key} must be start:stop:points, got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{key} must be start:stop:points, got {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ConfigError(f"{key} bounds must be finite")
    if points < 2:
        raise ConfigError(f"{key} needs points >= 2")
    if not start < stop:
        raise ConfigError(f"{key} needs start < stop")
    return Grid(start, stop, points)


# key -> (kind, default, check); kind is float, int, str or "grid"
def _positive(v):
    return None if v > 0 else "must be > 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _choice(options):
    def check(v):
        return None if v in options else f"must be one of {', '.join(options)}"
    return check


def _min_int(lo):
    def check(v):
        return None if v is None or v >= lo else f"must be >= {lo}"
    return check


SCHEMAS = {
    "bands": {
        "e-c": (float, 1.0, _positive),
        "e-j": (float, 0.5, _nonneg),
        "t": (float, 0.0, _nonneg),
        "n-max": (int, None, _min_int(1)),
        "levels": (int, 3, _min_int(1)),
        "q-grid": ("grid", "0:1:101", None),
    },
    "squid": {
        "e-j": (float, 1.5, _positive),
        "e-c": (float, 0.01, _positive),
        "e-l": (float, 1.0, _positive),
        "phi-e-grid": ("grid", "2.9:3.38:49", None),
    },
    "flux-rate": {
        "eps": (float, 0.0, None),
        "a": (float, 0.01, _nonneg),
        "delta": (float, 1.0, _nonneg),
        "gamma1": (float, 0.05, _nonneg),
        "gamma2": (float, 0.05, _nonneg),
        "g": (float, 0.0, _nonneg),
        "temp": (float, 0.0, _nonneg),
        "mode": (str, "full", _choice(MODES)),
        "nu-grid": ("grid", "-3:3:201", None),
    },
    "detector": {
        "gamma": (float, 1.0, _positive),
        "gamma-ratio": (float, 1.0, _positive),
        "route": (str, "closed", _choice(("closed", "quad"))),
        "collector-depth": (float, 50.0, _positive),
        "temp": (float, 0.0, _nonneg),
        "z-grid": ("grid", "-30:5:141", None),
    },
}
COMMON = ("name", "out-dir", "threads")
GRID_KEY = {"bands": "q-grid", "squid": "phi-e-grid", "flux-rate": "nu-grid", "detector": "z-grid"}


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    grid: Grid
    name: str
    out_dir: Path
    threads: int
    sources: dict = field(default_factory=dict)


def _coerce(sub: str, key: str, raw):
    kind, _, check = SCHEMAS[sub][key]
    if kind == "grid":
        return parse_grid(key, raw)
    if raw is None:
        value = None
    else:
        try:
            value = kind(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a {kind.__name__}, got {raw!r}") from None
        if kind is float and not math.isfinite(value):
            raise ConfigError(f"{key} must be finite")
    if check is not None and value is not None:
        problem = check(value)
        if problem:
            raise ConfigError(f"{key} {problem}")
    return value


def _read_config_file(path: str, sub: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    for section in parser.sections():
        if section not in SCHEMAS and section != "run":
            raise ConfigError(f"unknown section [{section}] in {path}")
    values = {}
    for section in ("run", sub):
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            allowed = COMMON if section == "run" else (*SCHEMAS[sub], *COMMON)
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = raw
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesojj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mesojj {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for sub, schema in SCHEMAS.items():
        sp = subs.add_parser(sub)
        sp.add_argument("--config", default=argparse.SUPPRESS)
        sp.add_argument("--name", default=argparse.SUPPRESS)
        sp.add_argument("--out-dir", dest="out-dir", default=argparse.SUPPRESS)
        sp.add_argument("--threads", default=argparse.SUPPRESS)
        sp.add_argument("--sweep", action="append", default=argparse.SUPPRESS,
                        metavar="VAR=START:STOP:POINTS")
        for key in schema:
            sp.add_argument(f"--{key}", dest=key, default=argparse.SUPPRESS)
    return parser


def _attach_values(argv):
    """Join ``--flag value`` pairs so values such as ``-2:2:21`` are not read as flags."""
    out, it = [], iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok and tok not in ("--help", "--version"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse_config(argv) -> RunConfig:
    """Merge defaults, the optional config file and flags into a RunConfig."""
    try:
        ns = vars(build_parser().parse_args(_attach_values(list(argv))))
    except SystemExit as exc:
        if exc.code:
            raise ConfigError("invalid command line") from None
        raise
    sub = ns.pop("subcommand")
    schema = SCHEMAS[sub]
    raw, sources = {}, {}
    for key, (_, default, _) in schema.items():
        raw[key], sources[key] = default, "default"
    raw.update({"name": sub, "out-dir": ".", "threads": None})
    sources.update({"name": "default", "out-dir": "default", "threads": "default"})

    if "config" in ns:
        for key, value in _read_config_file(ns.pop("config"), sub).items():
            raw[key], sources[key] = value, "file"
    for spec in ns.pop("sweep", []):
        var, sep, text = spec.partition("=")
        key = GRID_KEY[sub]
        if not sep or var.replace("_", "-") + "-grid" != key:
            raise ConfigError(f"--sweep for {sub} must be {key[:-5]}=start:stop:points")
        raw[key], sources[key] = text, "flag"
    for key, value in ns.items():
        raw[key], sources[key] = value, "flag"

    params = {key: _coerce(sub, key, raw[key]) for key in schema}
    grid = params.pop(GRID_KEY[sub])
    if sub == "squid" and not (math.pi / 2 <= grid.start and grid.stop <= 3 * math.pi / 2):
        raise ConfigError("phi-e-grid must lie within [pi/2, 3pi/2]")

    threads = raw["threads"]
    if threads is None:
        threads = os.environ.get("MESOJJ_THREADS")
        if threads is not None:
            sources["threads"] = "env"
    if threads is None:
        threads = os.cpu_count() or 1
    try:
        threads = int(threads)
    except ValueError:
        raise ConfigError(f"threads must be an integer, got {threads!r}") from None
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    return RunConfig(sub, params, grid, str(raw["name"]), Path(raw["out-dir"]), threads, sources)


# --- per-subcommand point functions -------------------------------------------

def _bands_setup(cfg: RunConfig):
    p = cfg.params
    template = JunctionParams(p["e-c"], p["e-j"], 0.0, p["n-max"])
    levels = p["levels"]

    def point(q):
        return band_row(template.with_q(q), p["t"], levels), "ok"
    return band_columns(levels), point


SQUID_COLUMNS = ["phi_e", "phi_left", "phi_right", "barrier_phi", "u_left", "u_right",
                 "u_barrier", "delta_phi", "omega_left", "omega_right", "bias"]


def _squid_setup(cfg: RunConfig):
    p = cfg.params

    def point(phi_e):
        sp = SquidParams(p["e-j"], p["e-c"], p["e-l"], phi_e)
        try:
            dw = find_double_well(sp)
            bias = flux_qubit_bias(sp)
        except SingleWellError:
            return [phi_e] + [math.nan] * (len(SQUID_COLUMNS) - 1), "single_well"
        row = [phi_e, dw.phi_left, dw.phi_right, dw.barrier_phi, dw.u_left, dw.u_right,
               dw.u_barrier, dw.delta_phi, plasma_frequency(sp, "left"),
               plasma_frequency(sp, "right"), bias]
        return row, "ok"
    return SQUID_COLUMNS, point


def _flux_setup(cfg: RunConfig):
    p = cfg.params
    template = ThreeLevelParams(0.0, p["eps"], p["a"], p["delta"], p["gamma1"], p["gamma2"],
                                p["g"], p["temp"])

    def point(nu):
        tp = ThreeLevelParams(nu, *[getattr(template, k) for k in
                                    ("eps", "a", "delta", "gamma1", "gamma2", "g", "temp")])
        return [nu, rate_for_mode(tp, p["mode"])], "rwa_suspect" if tp.rwa_suspect else "ok"
    return ["nu", "rate"], point


def _detector_setup(cfg: RunConfig):
    p = cfg.params
    gamma, ratio = p["gamma"], p["gamma-ratio"]
    g1, g2 = gamma * ratio / (1 + ratio), gamma / (1 + ratio)

    def point(z):
        if p["route"] == "closed":
            nq = deep_collector_quartet(g1, g2, z)
        else:
            dp = DetectorParams(g1, g2, 0.0, z * gamma, -p["collector-depth"] * gamma, p["temp"])
            nq = noise_quartet(dp)
        row = [z, nq.s_i, nq.s_q, nq.s_iq.real, nq.lam,
               energy_sensitivity_from(nq), signal_to_noise_from(nq)]
        return row, "ok"
    return list(SWEEP_COLUMNS), point


SETUPS = {"bands": _bands_setup, "squid": _squid_setup,
          "flux-rate": _flux_setup, "detector": _detector_setup}


def format_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def execute(cfg: RunConfig):
    """Compute ``(header, rows, flags)`` for a validated config."""
    header, point = SETUPS[cfg.subcommand](cfg)
    xs = [float(x) for x in cfg.grid.values()]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(point, xs))
    else:
        results = [point(x) for x in xs]
    rows = [r for r, _ in results]
    flags = [f for _, f in results]
    return header, rows, flags


def run(cfg: RunConfig) -> int:
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    header, rows, flags = execute(cfg)
    wall = time.perf_counter() - t0
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.out_dir / f"{cfg.name}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(header, rows))
    echo = {k: v for k, v in cfg.params.items()}
    echo[GRID_KEY[cfg.subcommand]] = cfg.grid.as_text()
    summary = {
        "subcommand": cfg.subcommand,
        "version": __version__,
        "parameters": echo,
        "sources": cfg.sources,
        "threads": cfg.threads,
        "started_utc": started,
        "wall_time_s": wall,
        "points": len(rows),
        "columns": header,
        "point_flags": flags,
        "all_ok": all(f == "ok" for f in flags),
        "csv": str(csv_path),
    }
    with open(cfg.out_dir / f"{cfg.name}.summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"mesojj: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ToleranceNotMet, TruncationError) as exc:
        print(f"mesojj: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SingularSystem as exc:
        print(f"mesojj: singular system: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ValueError as exc:
        print(f"mesojj: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
