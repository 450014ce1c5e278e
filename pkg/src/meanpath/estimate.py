"""Monte Carlo drivers for the normalized path and cycle functionals.

Each estimator runs independent replicates, one counter-based RNG stream per
(seed, grid index, replicate) cell, so results are bit-identical no matter
how many worker processes are used.  Replicates may be farmed out to a
process pool; aggregation sorts by replicate index first, which makes it
order-independent.

Normalized per-replicate values:

* ``Lndelta``  cycle through ceil(delta*n) of n uniform points in a
  volume-n cube, divided by delta*n,
* ``Lsdelta``  cycle through ceil(delta*N) of the Poisson points of a
  side-s cube, divided by delta*s^d,
* ``Ws`` / ``Ws_eta``  minimum average edge length of corner-to-corner paths
  (optionally through at most floor(eta*s) points),
* ``Tm``  shortest origin path through m points, divided by m,
* ``Lnm``  cycle through m_n of n uniform points, divided by m_n,
* ``oriented``  planar strictly-upward variant of ``Ws``.

Records carry an exact/heuristic solver tag; a record is tagged heuristic if
any of its replicates needed the heuristic solver (heuristics overestimate
minima, so such records are upper estimates).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import brw_lower_bound, unit_ball_volume
from .exact import (
    DEFAULT_CAP,
    CapacityError,
    exact_diagonal_ratio,
    exact_k_cycle,
    exact_origin_path,
)
from .points import PointSet, Provenance, Region, sample_poisson, sample_uniform, stream
from .search import (
    SearchOptions,
    dinkelbach_ratio_path,
    local_search_k_cycle,
    local_search_origin_path,
    oriented_path_search,
)

__all__ = [
    "EstimateRecord",
    "CurveEstimate",
    "FitResult",
    "ConvexityReport",
    "MonotonicityReport",
    "estimate_c_delta",
    "estimate_w",
    "estimate_t",
    "estimate_lnm",
    "estimate_oriented",
    "fit_scaling_exponent",
    "convexity_check",
    "monotonicity_check",
    "check_bound_consistency",
    "t_raw_variance",
    "RECORDS_CSV_HEADER",
    "record_csv_row",
    "records_to_csv",
    "read_records_csv",
    "gnuplot_script",
]

FUNCTIONALS = ("Lndelta", "Lsdelta", "Ws", "Ws_eta", "Tm", "Lnm", "oriented")


@dataclass(frozen=True)
class EstimateRecord:
    """Replicate statistics of one normalized functional at one grid point."""

    functional: str
    d: int
    n: int | None
    s: float | None
    delta: float | None
    m: int | None
    eta: float | None
    replicates: int
    mean: float
    variance: float
    stderr: float
    solver: str
    seed: int
    note: str = ""  # not serialized

    def __post_init__(self) -> None:
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"unknown functional {self.functional!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.stderr != math.sqrt(self.variance / self.replicates):
            raise ValueError("stderr must equal sqrt(variance / replicates)")


@dataclass(frozen=True)
class CurveEstimate:
    """Records over a strictly increasing delta grid at fixed n and d."""

    d: int
    n: int
    records: tuple[EstimateRecord, ...]

    def __post_init__(self) -> None:
        deltas = [r.delta for r in self.records]
        if any(d is None or not (0.0 < d <= 1.0) for d in deltas):
            raise ValueError("delta values must lie in (0, 1]")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("delta grid must be strictly increasing")

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(r.delta for r in self.records)


@dataclass(frozen=True)
class FitResult:
    """Least-squares power-law fit of (mean - c0) against delta on log axes."""

    exponent: float
    amplitude: float
    c0: float
    residual_norm: float
    grid: tuple[float, ...]


# --- per-replicate solvers ---------------------------------------------------


@dataclass(frozen=True)
class _Task:
    functional: str
    d: int
    seed: int
    replicates: int
    grid_index: int
    solver: str = "auto"
    cap: int = DEFAULT_CAP
    n: int | None = None
    s: float | None = None
    delta: float | None = None
    m: int | None = None
    eta: float | None = None
    window_multiplier: float = 3.0
    path_scale: float = 1.0


def _replicate_index(task: _Task, r: int) -> int:
    return task.grid_index * task.replicates + r


def _solve_cycle(ps: PointSet, m: int, solver: str, cap: int, seed: int, rep: int) -> tuple[float, str]:
    """Cycle length through exactly m points under the given solver policy.

    m <= 1 is the degenerate empty/single-point cycle of length 0.
    """
    n = len(ps)
    if m <= 1:
        return 0.0, "exact"
    if solver == "exact" or (solver == "auto" and n <= cap):
        sol = exact_k_cycle(ps, m, cap=cap)
        return sol.length, "exact"
    if m == 2:
        from .exact import distance_matrix

        D = distance_matrix(ps)
        np.fill_diagonal(D, np.inf)
        return 2.0 * float(D.min()), "heuristic"
    sol = local_search_k_cycle(ps, m, SearchOptions(seed=seed, replicate=rep))
    return sol.length, "heuristic"


def _value_lndelta(task: _Task, rep: int) -> tuple[float, str]:
    side = task.n ** (1.0 / task.d)
    region = Region.cube(side, task.d)
    ps = sample_uniform(task.n, region, task.seed, rep)
    m = math.ceil(task.delta * task.n)
    length, used = _solve_cycle(ps, m, task.solver, task.cap, task.seed, rep)
    return length / (task.delta * task.n), used


def _value_lnm(task: _Task, rep: int) -> tuple[float, str]:
    side = task.n ** (1.0 / task.d)
    region = Region.cube(side, task.d)
    ps = sample_uniform(task.n, region, task.seed, rep)
    length, used = _solve_cycle(ps, task.m, task.solver, task.cap, task.seed, rep)
    return length / task.m, used


def _value_lsdelta(task: _Task, rep: int) -> tuple[float, str]:
    region = Region.cube(task.s, task.d)
    ps = sample_poisson(region, 1.0, task.seed, rep)
    m = math.ceil(task.delta * len(ps))
    length, used = _solve_cycle(ps, m, task.solver, task.cap, task.seed, rep)
    return length / (task.delta * task.s ** task.d), used


def _value_w(task: _Task, rep: int) -> tuple[float, str]:
    region = Region.cube(task.s, task.d)
    ps = sample_poisson(region, 1.0, task.seed, rep)
    max_interior = None if task.eta is None else math.floor(task.eta * task.s)
    if len(ps) <= task.cap:
        return exact_diagonal_ratio(ps, region, max_interior, cap=task.cap).w, "exact"
    path = dinkelbach_ratio_path(
        ps, region, max_interior, SearchOptions(seed=task.seed, replicate=rep), cap=task.cap
    )
    return path.w, "heuristic"


def _value_oriented(task: _Task, rep: int) -> tuple[float, str]:
    region = Region.cube(task.s, task.d)
    ps = sample_poisson(region, 1.0, task.seed, rep)
    path = oriented_path_search(ps, region, SearchOptions(seed=task.seed, replicate=rep))
    return path.w, "exact"


def _sample_ball(task: _Task, rep: int) -> PointSet:
    """Rate-1 Poisson points in a centered ball, grown (deterministically)
    until it holds at least m points."""
    d = task.d
    rng = stream(task.seed, rep)
    radius = task.window_multiplier * task.m * task.path_scale
    while True:
        count = int(rng.poisson((2.0 * radius) ** d))
        u = rng.random((count, d))
        coords = (u - 0.5) * (2.0 * radius)
        inside = coords[(coords ** 2).sum(axis=1) <= radius * radius]
        if len(inside) >= task.m:
            box = Region((-radius,) * d, (2.0 * radius,) * d)
            prov = Provenance("poisson-ball", 1.0, task.seed, rep)
            return PointSet(d, inside, box, prov)
        radius *= 2.0


def _value_t(task: _Task, rep: int) -> tuple[float, str]:
    ps = _sample_ball(task, rep)
    if task.m == 1:  # the optimal 1-point path is the nearest point
        return float(np.sqrt((ps.coords**2).sum(axis=1)).min()), "exact"
    if len(ps) <= task.cap:
        sol = exact_origin_path(ps, task.m, cap=task.cap)
        return sol.length / task.m, "exact"
    sol = local_search_origin_path(ps, task.m, opts=SearchOptions(seed=task.seed, replicate=rep))
    return sol.length / task.m, "heuristic"


_DISPATCH: dict[str, Callable[[_Task, int], tuple[float, str]]] = {
    "Lndelta": _value_lndelta,
    "Lnm": _value_lnm,
    "Lsdelta": _value_lsdelta,
    "Ws": _value_w,
    "Ws_eta": _value_w,
    "Tm": _value_t,
    "oriented": _value_oriented,
}


def _replicate_value(task: _Task, r: int) -> tuple[int, float, str]:
    value, used = _DISPATCH[task.functional](task, _replicate_index(task, r))
    return r, value, used


def _replicate_value_args(args: tuple[_Task, int]) -> tuple[int, float, str]:
    return _replicate_value(*args)


def _run_task(task: _Task, workers: int) -> tuple[np.ndarray, str]:
    if workers <= 1:
        out = [_replicate_value(task, r) for r in range(task.replicates)]
    else:
        chunk = max(1, task.replicates // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(
                ex.map(_replicate_value_args, ((task, r) for r in range(task.replicates)), chunksize=chunk)
            )
    out.sort(key=lambda t: t[0])
    values = np.array([v for _, v, _ in out], dtype=float)
    tag = "exact" if all(u == "exact" for _, _, u in out) else "heuristic"
    return values, tag


def _aggregate(task: _Task, values: np.ndarray, tag: str, note: str = "") -> EstimateRecord:
    k = len(values)
    mean = float(np.mean(values))
    variance = float(np.var(values, ddof=1)) if k > 1 else 0.0
    return EstimateRecord(
        functional=task.functional,
        d=task.d,
        n=task.n,
        s=task.s,
        delta=task.delta,
        m=task.m,
        eta=task.eta,
        replicates=k,
        mean=mean,
        variance=variance,
        stderr=math.sqrt(variance / k),
        solver=tag,
        seed=task.seed,
        note=note,
    )


# --- public estimators ---------------------------------------------------------


def estimate_c_delta(
    d: int,
    n: int,
    deltas: Sequence[float],
    replicates: int,
    solver: str = "auto",
    seed: int = 0,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
) -> CurveEstimate:
    """Normalized subset-cycle length L/(delta*n) over a delta grid."""
    _check_solver(solver)
    if solver == "exact" and n > cap:
        raise CapacityError(f"exact solver needs n <= cap ({cap}); got n={n}")
    records = []
    for gi, delta in enumerate(deltas):
        if not (0.0 < delta <= 1.0):
            raise ValueError("delta values must lie in (0, 1]")
        task = _Task(
            "Lndelta", d, seed, replicates, gi, solver=solver, cap=cap,
            n=n, delta=float(delta), m=math.ceil(delta * n),
        )
        values, tag = _run_task(task, workers)
        records.append(_aggregate(task, values, tag))
    return CurveEstimate(d, n, tuple(records))


def estimate_w(
    d: int,
    s_values: Sequence[float],
    eta: float | None = None,
    replicates: int = 20,
    seed: int = 0,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
) -> list[EstimateRecord]:
    """Minimum average edge length of corner-to-corner paths per cube side s.

    Exact when the replicate fits under the cap, parametric-search heuristic
    otherwise (such records are flagged as upper estimates via the solver tag).
    """
    records = []
    functional = "Ws" if eta is None else "Ws_eta"
    for gi, s in enumerate(s_values):
        if not s > 0:
            raise ValueError("s must be positive")
        task = _Task(functional, d, seed, replicates, gi, cap=cap, s=float(s), eta=eta)
        values, tag = _run_task(task, workers)
        records.append(_aggregate(task, values, tag))
    return records


def estimate_t(
    d: int,
    m_values: Sequence[int],
    replicates: int,
    window_multiplier: float = 3.0,
    path_scale: float = 1.0,
    seed: int = 0,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
) -> list[EstimateRecord]:
    """Normalized origin-path length T/m, sampling a ball window of radius
    window_multiplier * m * path_scale around the origin.

    The functional is defined on the infinite process; the window is a
    truncation, so pair each study with the window-insensitivity check
    (doubling the multiplier should not move the means materially).
    """
    if window_multiplier <= 0:
        raise ValueError("window multiplier must be positive")
    records = []
    for gi, m in enumerate(m_values):
        if m < 1:
            raise ValueError("m must be >= 1")
        task = _Task(
            "Tm", d, seed, replicates, gi, cap=cap, m=int(m),
            window_multiplier=float(window_multiplier), path_scale=float(path_scale),
        )
        note = ""
        expected = unit_ball_volume(d) * (window_multiplier * m * path_scale) ** d
        if expected < 2.0 * m:
            note = (
                f"window expects only {expected:.1f} points for m={m}; "
                "it was grown on demand and may bind"
            )
            warnings.warn(note, stacklevel=2)
        values, tag = _run_task(task, workers)
        records.append(_aggregate(task, values, tag, note=note))
    return records


def _resolve_m_rule(rule) -> Callable[[int], int]:
    if callable(rule):
        return rule
    if rule == "linear":
        return lambda n: n
    if rule == "sqrt":
        return lambda n: math.ceil(math.sqrt(n))
    if rule == "log2":
        return lambda n: math.ceil(math.log(n) ** 2)
    if isinstance(rule, tuple) and len(rule) == 2 and rule[0] == "pow":
        gamma = float(rule[1])
        return lambda n: math.ceil(n ** gamma)
    raise ValueError(f"unknown m rule {rule!r}")


def estimate_lnm(
    d: int,
    n_values: Sequence[int],
    m_rule="sqrt",
    replicates: int = 20,
    solver: str = "auto",
    seed: int = 0,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
) -> list[EstimateRecord]:
    """Normalized sparse subset-cycle length L(n, m_n)/m_n over an n grid.

    ``m_rule`` is "linear", "sqrt", "log2", ("pow", gamma), or a callable.
    """
    _check_solver(solver)
    rule = _resolve_m_rule(m_rule)
    records = []
    for gi, n in enumerate(n_values):
        m = int(rule(int(n)))
        if not 3 <= m <= n:
            raise ValueError(f"m rule must yield 3 <= m <= n; got m={m} at n={n}")
        task = _Task("Lnm", d, seed, replicates, gi, solver=solver, cap=cap, n=int(n), m=m)
        values, tag = _run_task(task, workers)
        records.append(_aggregate(task, values, tag))
    return records


def estimate_oriented(
    d: int,
    s_values: Sequence[float],
    replicates: int = 20,
    seed: int = 0,
    workers: int = 1,
) -> list[EstimateRecord]:
    """Planar strictly-upward variant of the corner-to-corner ratio."""
    if d != 2:
        raise ValueError("the oriented variant is defined for d=2 only")
    records = []
    for gi, s in enumerate(s_values):
        if not s > 0:
            raise ValueError("s must be positive")
        task = _Task("oriented", d, seed, replicates, gi, s=float(s))
        values, tag = _run_task(task, workers)
        records.append(_aggregate(task, values, tag))
    return records


def _check_solver(solver: str) -> None:
    if solver not in ("exact", "heuristic", "auto"):
        raise ValueError("solver must be one of exact|heuristic|auto")


# --- curve diagnostics ----------------------------------------------------------


def fit_scaling_exponent(curve: CurveEstimate, c0: float) -> FitResult:
    """Least-squares fit of log(mean - c0) against log delta."""
    if len(curve.records) < 3:
        raise ValueError("need at least 3 grid points to fit an exponent")
    deltas = np.array(curve.deltas)
    means = np.array([r.mean for r in curve.records])
    diffs = means - c0
    if (diffs <= 0).any():
        bad = [float(x) for x in deltas[diffs <= 0]]
        raise ValueError(f"means must exceed c0 at every grid point; offending deltas: {bad}")
    x = np.log(deltas)
    y = np.log(diffs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.linalg.norm(y - (slope * x + intercept)))
    return FitResult(float(slope), float(math.exp(intercept)), float(c0), resid, tuple(curve.deltas))


@dataclass(frozen=True)
class ConvexityReport:
    """Chord test of delta*mean at interior grid points, at 3-SE resolution."""

    entries: tuple[tuple[float, float, float, bool], ...]  # (delta, excess, pooled_se, ok)

    @property
    def violations(self) -> tuple[tuple[float, float, float, bool], ...]:
        return tuple(e for e in self.entries if not e[3])

    @property
    def ok(self) -> bool:
        return not self.violations


def convexity_check(curve: CurveEstimate) -> ConvexityReport:
    """For each interior delta, check delta*mean against the chord of its
    neighbors plus 3 pooled standard errors."""
    recs = curve.records
    if len(recs) < 3:
        raise ValueError("need at least 3 grid points for a convexity check")
    entries = []
    for i in range(1, len(recs) - 1):
        r0, r1, r2 = recs[i - 1], recs[i], recs[i + 1]
        lam = (r2.delta - r1.delta) / (r2.delta - r0.delta)
        g0, g1, g2 = r0.delta * r0.mean, r1.delta * r1.mean, r2.delta * r2.mean
        chord = lam * g0 + (1.0 - lam) * g2
        pooled = math.sqrt(
            (lam * r0.delta * r0.stderr) ** 2
            + (r1.delta * r1.stderr) ** 2
            + ((1.0 - lam) * r2.delta * r2.stderr) ** 2
        )
        excess = g1 - chord
        entries.append((r1.delta, excess, pooled, excess <= 3.0 * pooled))
    return ConvexityReport(tuple(entries))


@dataclass(frozen=True)
class MonotonicityReport:
    entries: tuple[tuple[float, float, float, float, bool], ...]  # (d1, d2, excess, pooled, ok)

    @property
    def violations(self):
        return tuple(e for e in self.entries if not e[4])

    @property
    def ok(self) -> bool:
        return not self.violations


def monotonicity_check(curve: CurveEstimate) -> MonotonicityReport:
    """mean(delta1) <= mean(delta2) + 3 pooled SE for every delta1 < delta2."""
    recs = curve.records
    entries = []
    for i in range(len(recs)):
        for j in range(i + 1, len(recs)):
            a, b = recs[i], recs[j]
            pooled = math.sqrt(a.stderr**2 + b.stderr**2)
            excess = a.mean - b.mean
            entries.append((a.delta, b.delta, excess, pooled, excess <= 3.0 * pooled))
    return MonotonicityReport(tuple(entries))


def check_bound_consistency(records: Sequence[EstimateRecord]) -> list[str]:
    """Normalized means must sit above the closed-form lower bound minus 3 SE."""
    problems = []
    for rec in records:
        lb = brw_lower_bound(rec.d).value
        if rec.mean < lb - 3.0 * rec.stderr:
            problems.append(
                f"{rec.functional} mean {rec.mean!r} below lower bound {lb!r} - 3*SE"
            )
    return problems


def t_raw_variance(record: EstimateRecord) -> float:
    """Raw variance of the unnormalized origin-path length (T, not T/m)."""
    if record.functional != "Tm" or record.m is None:
        raise ValueError("raw variance is defined for Tm records")
    return record.variance * record.m**2


# --- CSV / plot-script rendering --------------------------------------------------

RECORDS_CSV_HEADER = "functional,d,n,s,delta,m,eta,replicates,mean,variance,stderr,solver,seed"


def _opt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def record_csv_row(rec: EstimateRecord) -> str:
    return ",".join(
        [
            rec.functional,
            str(rec.d),
            _opt(rec.n),
            _opt(rec.s),
            _opt(rec.delta),
            _opt(rec.m),
            _opt(rec.eta),
            str(rec.replicates),
            repr(rec.mean),
            repr(rec.variance),
            repr(rec.stderr),
            rec.solver,
            str(rec.seed),
        ]
    )


def records_to_csv(records: Sequence[EstimateRecord]) -> str:
    lines = [RECORDS_CSV_HEADER]
    lines.extend(record_csv_row(r) for r in records)
    return "\n".join(lines) + "\n"


def read_records_csv(source: str) -> list[EstimateRecord]:
    """Inverse of :func:`records_to_csv`; ``source`` is a path or CSV text."""
    if "\n" not in source:
        with open(source, "r", newline="") as fh:
            text = fh.read()
    else:
        text = source
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != RECORDS_CSV_HEADER:
        raise ValueError("not a records CSV: bad header")
    out = []
    for ln in lines[1:]:
        f, d, n, s, delta, m, eta, reps, mean, var, se, solver, seed = ln.split(",")
        out.append(
            EstimateRecord(
                functional=f,
                d=int(d),
                n=int(n) if n else None,
                s=float(s) if s else None,
                delta=float(delta) if delta else None,
                m=int(m) if m else None,
                eta=float(eta) if eta else None,
                replicates=int(reps),
                mean=float(mean),
                variance=float(var),
                stderr=float(se),
                solver=solver,
                seed=int(seed),
            )
        )
    return out


def gnuplot_script(csv_name: str, x_column: str = "delta") -> str:
    """Companion plot script for a records CSV (gnuplot-compatible text)."""
    cols = {"n": 3, "s": 4, "delta": 5, "m": 6}
    xc = cols[x_column]
    return (
        "set datafile separator ','\n"
        f"set xlabel '{x_column}'\n"
        "set ylabel 'normalized length'\n"
        "set key left top\n"
        f"plot '{csv_name}' skip 1 using {xc}:9:11 with yerrorlines title 'estimate'\n"
    )
