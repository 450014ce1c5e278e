"""Closed-form and finite-size bounds on the sparse-path constants.

The closed-form lower bound on the vanishing-density limit comes from a
first-moment comparison with the branching random walk whose step lengths are
the point norms of a rate-1 Poisson process:

    value(d) = e^{-1} (d-1) (v_d Gamma(d+1))^{-1/(d-1)},

optimized at lambda* = (d-1)/value, with v_d = pi^{d/2} / Gamma(1 + d/2) the
unit-ball volume.  In the plane this is 1/(2*pi*e) ~ 0.0585.

The finite-size upper bound uses the fact that the normalized expected cycle
length  E L(s, delta) / s^d  is minimized in the infinite-size limit, so any
finite-s replicate mean (from the exact solver) sits above the limiting
value delta*c(delta); heuristic lengths overstate and stay valid upper
bounds, but are flagged.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "BoundResult",
    "unit_ball_volume",
    "brw_lower_bound",
    "finite_s_upper_bound",
    "BOUND_CSV_HEADER",
    "bound_csv_row",
]


@dataclass(frozen=True)
class BoundResult:
    """A one-sided bound on a limiting constant, with derivation metadata."""

    target: str  # "c0plus" | "delta_c_delta"
    direction: str  # "lower" | "upper"
    dimension: int
    value: float
    auxiliary: dict[str, float] = field(default_factory=dict)
    derivation: str = "closed_form"  # "closed_form" | "finite_s_mean"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValueError("bound value must be finite and positive")
        if self.derivation == "closed_form":
            lam = self.auxiliary.get("lambda_star")
            if lam is None or lam != (self.dimension - 1) / self.value:
                raise ValueError("closed-form bounds must carry lambda_star = (d-1)/value")


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in d dimensions: pi^{d/2} / Gamma(1 + d/2)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0)


def brw_lower_bound(d: int) -> BoundResult:
    """Closed-form lower bound on the vanishing-density limit constant.

    value = e^{-1} (d-1) (v_d Gamma(d+1))^{-1/(d-1)}; the optimizing
    exponential-tilt parameter lambda* = (d-1)/value and v_d are reported in
    the auxiliary map.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    vd = unit_ball_volume(d)
    value = math.exp(-1.0) * (d - 1) * (vd * math.gamma(d + 1.0)) ** (-1.0 / (d - 1))
    aux = {"lambda_star": (d - 1) / value, "v_d": vd}
    return BoundResult("c0plus", "lower", d, value, aux, "closed_form")


def finite_s_upper_bound(
    samples: Sequence[tuple[float, float, Sequence[float]]],
    dimension: int,
    level: float = 0.99,
    solver: str = "exact",
) -> BoundResult:
    """Upper bound on delta*c(delta) from replicate cycle lengths at finite s.

    ``samples`` holds (s, delta, replicate lengths) groups; the bound is the
    smallest group mean of length/s^d.  A one-sided normal upper confidence
    limit at ``level`` is reported in the auxiliary map, along with the s that
    attained the minimum; heuristic-solver inputs are flagged (they remain
    valid upper bounds, only more conservative).
    """
    if not samples:
        raise ValueError("samples must be nonempty")
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    deltas = {float(delta) for _, delta, _ in samples}
    if len(deltas) != 1:
        raise ValueError("all sample groups must share the same delta")
    delta = deltas.pop()
    best: tuple[float, float, float, int] | None = None  # (mean, se, s, k)
    for s, _, values in samples:
        vals = [float(v) for v in values]
        if len(vals) < 2:
            raise ValueError(f"each s group needs >= 2 replicates (s={s})")
        scale = float(s) ** dimension
        norm = [v / scale for v in vals]
        mean = statistics.fmean(norm)
        se = math.sqrt(statistics.variance(norm) / len(norm))
        if best is None or mean < best[0]:
            best = (mean, se, float(s), len(norm))
    mean, se, s_star, k = best
    z = statistics.NormalDist().inv_cdf(level)
    aux = {
        "s_star": s_star,
        "delta": delta,
        "replicates": float(k),
        "stderr": se,
        "ci_half_width": z * se,
        "upper_cl": mean + z * se,
        "level": level,
        "heuristic": 0.0 if solver == "exact" else 1.0,
    }
    return BoundResult("delta_c_delta", "upper", dimension, mean, aux, "finite_s_mean")


BOUND_CSV_HEADER = "target,direction,d,delta,value,ci,derivation"


def bound_csv_row(b: BoundResult) -> str:
    delta = b.auxiliary.get("delta")
    ci = b.auxiliary.get("ci_half_width")
    delta_s = "" if delta is None else repr(delta)
    ci_s = "" if ci is None else repr(ci)
    return f"{b.target},{b.direction},{b.dimension},{delta_s},{b.value!r},{ci_s},{b.derivation}"
