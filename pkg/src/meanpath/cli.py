"""Configuration-driven command-line front end.

Subcommands: sample, solve-cycle, solve-path, solve-ratio, bound,
estimate-cdelta, estimate-w, estimate-t, estimate-lnm, oriented, fit-alpha.

Parameters come, in increasing precedence, from built-in defaults, an INI-style
config file (``--config``, flat key=value lines under an ``[experiment]``
section), ``MEANPATH_``-prefixed environment variables, and command-line
flags.  Unknown config keys are rejected with the file line number.

Artifacts (CSV files, gnuplot companion scripts, and a manifest recording the
resolved config, package version, and per-file SHA-256 digests) are written to
``--out`` via write-to-temp plus atomic rename, so an interrupt never leaves a
partially written file.  Exit codes: 0 success, 2 invalid configuration,
3 exact-solver capacity exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .bounds import BOUND_CSV_HEADER, bound_csv_row, brw_lower_bound
from .exact import (
    SOLUTION_CSV_HEADER,
    CapacityError,
    InfeasibleError,
    exact_diagonal_ratio,
    exact_k_cycle,
    exact_origin_path,
    solution_csv_row,
)
from .estimate import (
    CurveEstimate,
    check_bound_consistency,
    estimate_c_delta,
    estimate_lnm,
    estimate_oriented,
    estimate_t,
    estimate_w,
    fit_scaling_exponent,
    gnuplot_script,
    read_records_csv,
    records_to_csv,
)
from .points import Region, read_points_csv, points_to_csv, sample_poisson, sample_uniform
from .search import (
    SearchOptions,
    dinkelbach_ratio_path,
    local_search_k_cycle,
    oriented_path_search,
    trace_csv,
)

ENV_PREFIX = "MEANPATH_"

COMMANDS = (
    "sample",
    "solve-cycle",
    "solve-path",
    "solve-ratio",
    "bound",
    "estimate-cdelta",
    "estimate-w",
    "estimate-t",
    "estimate-lnm",
    "oriented",
    "fit-alpha",
)


class ConfigError(ValueError):
    """Invalid configuration; printed with a line number when file-sourced."""


@dataclass
class ExperimentConfig:
    command: str
    dim: int = 2
    n: list[int] | None = None
    s: list[float] | None = None
    delta: list[float] | None = None
    m: list[int] | None = None
    eta: float | None = None
    replicates: int = 20
    seed: int = 0
    workers: int = 1
    solver: str = "auto"
    out: str | None = None
    trace: bool = False
    rate: float = 1.0
    replicate: int = 0
    points: str | None = None
    window: float = 3.0
    m_rule: str = "sqrt"
    c0: float | None = None
    level: float = 0.99
    cap: int = 18
    curve: str | None = None


_INT_LIST = {"n", "m"}
_FLOAT_LIST = {"s", "delta"}
_INTS = {"dim", "replicates", "seed", "workers", "replicate", "cap"}
_FLOATS = {"eta", "rate", "window", "c0", "level"}
_BOOLS = {"trace"}
_STRS = {"command", "solver", "out", "points", "m_rule", "curve"}
_KNOWN_KEYS = _INT_LIST | _FLOAT_LIST | _INTS | _FLOATS | _BOOLS | _STRS


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_LIST:
            return [int(v) for v in str(raw).split(",") if v != ""]
        if key in _FLOAT_LIST:
            return [float(v) for v in str(raw).split(",") if v != ""]
        if key in _INTS:
            return int(raw)
        if key in _FLOATS:
            return float(raw)
        if key in _BOOLS:
            if isinstance(raw, bool):
                return raw
            return str(raw).strip().lower() in ("1", "true", "yes", "on")
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _key_line_number(path: str, key: str) -> int:
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            stripped = line.split("=")[0].split(":")[0].strip()
            if stripped == key:
                return i
    return 0


def _load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    values: dict = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            key = key.replace("-", "_")
            if key not in _KNOWN_KEYS:
                line = _key_line_number(path, key)
                raise ConfigError(f"{path}:{line}: unknown key {key!r}")
            values[key] = _parse_value(key, raw)
    return values


def _env_overrides() -> dict:
    values = {}
    for key in sorted(_KNOWN_KEYS):
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _parse_value(key, raw)
    return values


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="meanpath",
        description="Minimum average edge-length paths and sparse tours over random points.",
    )
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--dim", type=int)
    p.add_argument("--n", help="integer or comma list")
    p.add_argument("--s", help="number or comma list")
    p.add_argument("--delta", help="number or comma list")
    p.add_argument("--m", help="integer or comma list")
    p.add_argument("--eta", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--solver", choices=("exact", "heuristic", "auto"))
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--trace", action="store_true", default=None)
    p.add_argument("--rate", type=float)
    p.add_argument("--replicate", type=int)
    p.add_argument("--points", help="point-set CSV fixture")
    p.add_argument("--window", type=float)
    p.add_argument("--m-rule", dest="m_rule")
    p.add_argument("--c0", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--cap", type=int)
    p.add_argument("--curve", help="records CSV with a delta curve")
    return p


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    args = _build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(_load_config_file(args.config))
    values.update(_env_overrides())
    for key in _KNOWN_KEYS - {"command"}:
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
    command = args.command or values.get("command")
    if not command:
        raise ConfigError("no command given (positional argument or `command` config key)")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values["command"] = command
    cfg = ExperimentConfig(**{f.name: values[f.name] for f in fields(ExperimentConfig) if f.name in values})
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.dim < 2:
        raise ConfigError("dim must be >= 2")
    if cfg.replicates < 1:
        raise ConfigError("replicates must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.cap < 2:
        raise ConfigError("cap must be >= 2")
    if not 0.5 < cfg.level < 1.0:
        raise ConfigError("level must lie in (0.5, 1)")
    if cfg.delta is not None and any(not 0.0 < d <= 1.0 for d in cfg.delta):
        raise ConfigError("delta values must lie in (0, 1]")
    if cfg.s is not None and any(s <= 0 for s in cfg.s):
        raise ConfigError("s values must be positive")


# --- artifact helpers -----------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class _Artifacts:
    """Collects artifact files and writes the manifest last."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.outdir = Path(cfg.out) if cfg.out else None
        self.files: dict[str, str] = {}
        if self.outdir:
            self.outdir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.outdir is None:
            return
        _atomic_write(self.outdir / name, text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()

    def finish(self) -> None:
        if self.outdir is None:
            return
        config = {
            f.name: getattr(self.cfg, f.name)
            for f in fields(ExperimentConfig)
            if getattr(self.cfg, f.name) is not None
        }
        manifest = {
            "version": __version__,
            "config": config,
            "artifacts": dict(sorted(self.files.items())),
        }
        _atomic_write(self.outdir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _single(values, name: str):
    if values is None or len(values) != 1:
        raise ConfigError(f"{name} requires exactly one value")
    return values[0]


def _load_fixture(cfg: ExperimentConfig):
    if not cfg.points:
        raise ConfigError("this command needs --points FILE")
    region = None
    if cfg.s is not None:
        region = Region.cube(_single(cfg.s, "--s"), cfg.dim)
    return read_points_csv(cfg.points, region=region)


def _search_options(cfg: ExperimentConfig) -> SearchOptions:
    return SearchOptions(seed=cfg.seed, replicate=cfg.replicate)


# --- command handlers -------------------------------------------------------------


def _cmd_sample(cfg: ExperimentConfig, art: _Artifacts) -> None:
    if cfg.n is not None:
        n = _single(cfg.n, "--n")
        side = _single(cfg.s, "--s") if cfg.s is not None else n ** (1.0 / cfg.dim)
        ps = sample_uniform(n, Region.cube(side, cfg.dim), cfg.seed, cfg.replicate)
    else:
        if cfg.s is None:
            raise ConfigError("sample needs --n (uniform) or --s with --rate (Poisson)")
        side = _single(cfg.s, "--s")
        ps = sample_poisson(Region.cube(side, cfg.dim), cfg.rate, cfg.seed, cfg.replicate)
    text = points_to_csv(ps)
    sys.stdout.write(text)
    art.write("points.csv", text)


def _cmd_bound(cfg: ExperimentConfig, art: _Artifacts) -> None:
    b = brw_lower_bound(cfg.dim)
    lines = [BOUND_CSV_HEADER, bound_csv_row(b)]
    aux = " ".join(f"{k}={v!r}" for k, v in sorted(b.auxiliary.items()))
    lines.append(f"# {aux}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    art.write("bound.csv", text)


def _cmd_solve_cycle(cfg: ExperimentConfig, art: _Artifacts) -> None:
    ps = _load_fixture(cfg)
    m = _single(cfg.m, "--m")
    if cfg.solver == "heuristic" or (cfg.solver == "auto" and len(ps) > cfg.cap):
        sol = local_search_k_cycle(ps, m, _search_options(cfg))
    else:
        sol = exact_k_cycle(ps, m, cap=cfg.cap)
    text = SOLUTION_CSV_HEADER + "\n" + solution_csv_row("cycle", len(ps), sol) + "\n"
    sys.stdout.write(text)
    art.write("solution.csv", text)


def _cmd_solve_path(cfg: ExperimentConfig, art: _Artifacts) -> None:
    ps = _load_fixture(cfg)
    m = _single(cfg.m, "--m")
    origin = ps.region.corner("lower")
    sol = exact_origin_path(ps, m, origin=origin, cap=cfg.cap)
    text = SOLUTION_CSV_HEADER + "\n" + solution_csv_row("origin-path", len(ps), sol) + "\n"
    sys.stdout.write(text)
    art.write("solution.csv", text)


def _cmd_solve_ratio(cfg: ExperimentConfig, art: _Artifacts) -> None:
    ps = _load_fixture(cfg)
    region = ps.region
    max_interior = None
    if cfg.eta is not None:
        max_interior = math.floor(cfg.eta * max(region.sides))
    trace_states = [] if cfg.trace else None
    if cfg.solver == "exact" or (cfg.solver == "auto" and len(ps) <= cfg.cap):
        sol = exact_diagonal_ratio(ps, region, max_interior, cap=cfg.cap)
    else:
        sol = dinkelbach_ratio_path(
            ps, region, max_interior, _search_options(cfg), trace=trace_states, cap=cfg.cap
        )
    text = SOLUTION_CSV_HEADER + "\n" + solution_csv_row("diagonal-ratio", len(ps), sol) + "\n"
    sys.stdout.write(text)
    art.write("solution.csv", text)
    if trace_states is not None:
        art.write("trace.csv", trace_csv(trace_states))


def _require(value, flag: str):
    if value is None:
        raise ConfigError(f"this command needs {flag}")
    return value


def _emit_records(art: _Artifacts, records, x_column: str) -> None:
    text = records_to_csv(records)
    sys.stdout.write(text)
    art.write("records.csv", text)
    art.write("records.gp", gnuplot_script("records.csv", x_column))
    problems = check_bound_consistency(list(records))
    for p in problems:
        sys.stderr.write(f"warning: {p}\n")


def _cmd_estimate_cdelta(cfg: ExperimentConfig, art: _Artifacts) -> None:
    n = _single(_require(cfg.n, "--n"), "--n")
    deltas = _require(cfg.delta, "--delta")
    curve = estimate_c_delta(
        cfg.dim, n, deltas, cfg.replicates, solver=cfg.solver,
        seed=cfg.seed, workers=cfg.workers, cap=cfg.cap,
    )
    _emit_records(art, curve.records, "delta")


def _cmd_estimate_w(cfg: ExperimentConfig, art: _Artifacts) -> None:
    s_values = _require(cfg.s, "--s")
    records = estimate_w(
        cfg.dim, s_values, eta=cfg.eta, replicates=cfg.replicates,
        seed=cfg.seed, workers=cfg.workers, cap=cfg.cap,
    )
    _emit_records(art, records, "s")


def _cmd_estimate_t(cfg: ExperimentConfig, art: _Artifacts) -> None:
    m_values = _require(cfg.m, "--m")
    records = estimate_t(
        cfg.dim, m_values, cfg.replicates, window_multiplier=cfg.window,
        seed=cfg.seed, workers=cfg.workers, cap=cfg.cap,
    )
    _emit_records(art, records, "m")


def _cmd_estimate_lnm(cfg: ExperimentConfig, art: _Artifacts) -> None:
    n_values = _require(cfg.n, "--n")
    rule = cfg.m_rule
    if rule.startswith("pow:"):
        rule = ("pow", float(rule.split(":", 1)[1]))
    records = estimate_lnm(
        cfg.dim, n_values, m_rule=rule, replicates=cfg.replicates, solver=cfg.solver,
        seed=cfg.seed, workers=cfg.workers, cap=cfg.cap,
    )
    _emit_records(art, records, "n")


def _cmd_oriented(cfg: ExperimentConfig, art: _Artifacts) -> None:
    s_values = _require(cfg.s, "--s")
    records = estimate_oriented(
        cfg.dim, s_values, replicates=cfg.replicates, seed=cfg.seed, workers=cfg.workers
    )
    _emit_records(art, records, "s")


def _cmd_fit_alpha(cfg: ExperimentConfig, art: _Artifacts) -> None:
    curve_file = _require(cfg.curve, "--curve")
    c0 = _require(cfg.c0, "--c0")
    records = [r for r in read_records_csv(curve_file) if r.delta is not None]
    records.sort(key=lambda r: r.delta)
    if not records:
        raise ConfigError("curve file holds no delta records")
    curve = CurveEstimate(records[0].d, records[0].n or 0, tuple(records))
    fit = fit_scaling_exponent(curve, c0)
    text = (
        "exponent,amplitude,c0,residual_norm\n"
        f"{fit.exponent!r},{fit.amplitude!r},{fit.c0!r},{fit.residual_norm!r}\n"
    )
    sys.stdout.write(text)
    art.write("fit.csv", text)


_HANDLERS = {
    "sample": _cmd_sample,
    "bound": _cmd_bound,
    "solve-cycle": _cmd_solve_cycle,
    "solve-path": _cmd_solve_path,
    "solve-ratio": _cmd_solve_ratio,
    "estimate-cdelta": _cmd_estimate_cdelta,
    "estimate-w": _cmd_estimate_w,
    "estimate-t": _cmd_estimate_t,
    "estimate-lnm": _cmd_estimate_lnm,
    "oriented": _cmd_oriented,
    "fit-alpha": _cmd_fit_alpha,
}


def run(cfg: ExperimentConfig) -> int:
    art = _Artifacts(cfg)
    _HANDLERS[cfg.command](cfg, art)
    art.finish()
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except CapacityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except (ConfigError, InfeasibleError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
