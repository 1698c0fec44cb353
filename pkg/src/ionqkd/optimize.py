"""Grid sweeps and maximization over attempt counts and repeater spacing.

The secret key rate is maximized by an exhaustive scan over the integer
attempt count n_eg (the objective is not guaranteed unimodal there) nested
inside a spacing scan. A per-deployed-qubit objective divides the key rate by
the total qubit count of the chain for hardware-cost comparisons.
"""

import itertools
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import (
    DEFAULT_CONVENTIONS,
    ArchitectureSpec,
    Conventions,
    RepeaterParams,
    chain_qber,
    effective_station_error,
    link_success_prob,
)
from .rates import RateReport, binary_entropy, evaluate_point, raw_rate_curve

DEFAULT_N_MAX = 100_000

#: relative tolerance under which objective values count as tied; ties go to
#: the smaller parameter value
REL_TIE_TOL = 1e-12

#: parameters a sweep may vary (n_eg is optimized per point, m fixes the
#: architecture)
SWEEPABLE_FIELDS = (
    "L_tot", "L0", "L_att", "eta_c", "eps_g", "t0", "F0", "c", "R_source",
)

MAX_SWEEP_POINTS = 1_000_000


class Objective(Enum):
    MAX_RSEC = "rsec"
    MAX_RSEC_PER_QUBIT = "rsec-per-qubit"


@dataclass(frozen=True)
class SweepAxis:
    """One named parameter axis with strictly increasing values."""

    name: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.name not in SWEEPABLE_FIELDS:
            raise ValueError(
                f"axis name must be one of {SWEEPABLE_FIELDS}, "
                f"got {self.name!r}"
            )
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError(f"axis {self.name!r} has no values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(
                f"axis {self.name!r} values must be strictly increasing"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def linear(cls, name: str, start: float, stop: float,
               num: int) -> "SweepAxis":
        return cls(name, tuple(np.linspace(start, stop, num)))

    @classmethod
    def log(cls, name: str, start: float, stop: float, num: int) -> "SweepAxis":
        if start <= 0 or stop <= 0:
            raise ValueError("log axis endpoints must be positive")
        return cls(name, tuple(np.geomspace(start, stop, num)))


@dataclass(frozen=True)
class OptimizationResult:
    best_params: RepeaterParams
    best_report: RateReport
    n_eg_opt: int
    L0_opt: float
    objective: Objective
    objective_value: float


@dataclass(frozen=True)
class SweepPoint:
    """One evaluated grid point with its optimized attempt count."""

    params: RepeaterParams
    n_eg_opt: int
    report: RateReport


def _argmax_first_tie(values: np.ndarray, rel_tol: float = REL_TIE_TOL) -> int:
    """Index of the maximum, resolving near-ties toward the first entry."""
    best = float(np.max(values))
    if best <= 0.0:
        return 0
    return int(np.argmax(values >= best * (1.0 - rel_tol)))


def _secret_fraction(params: RepeaterParams) -> float:
    eps = effective_station_error(params.eps_g, params.F0)
    Q = chain_qber(eps, params.geometry.n_stations)
    return max(0.0, 1.0 - 2.0 * binary_entropy(Q))


def rsec_per_qubit(
    R_sec: float,
    params: RepeaterParams,
    arch: ArchitectureSpec,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> float:
    """Secret key rate per deployed qubit, in bits/s per qubit.

    Divides by (station count) x (qubits per station). End nodes also hold
    modules, so they are counted by default; with endpoints excluded the
    divisor is the intermediate-station count (0 for a single link, where the
    metric is reported as 0).
    """
    offset = 1.0 if conventions.stations_include_endpoints else -1.0
    stations = params.L_tot / params.L0 + offset
    if stations <= 0.0:
        return 0.0
    return R_sec / (stations * arch.qubits_per_module)


def optimize_neg(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    n_max: int = DEFAULT_N_MAX,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> tuple[int, RateReport]:
    """Exhaustively scan n_eg in [1, n_max] for the best secret key rate.

    Ties break toward smaller n_eg. If no attempt count yields a positive key
    rate, returns the n_eg maximizing the raw rate; the report's ``zero_key``
    flag marks that case.
    """
    if not n_max >= 1:
        raise ValueError(f"n_max must be >= 1, got {n_max!r}")
    n = np.arange(1, n_max + 1)
    R_raw = raw_rate_curve(params, arch, n, conventions)
    sf = _secret_fraction(params)
    objective = R_raw * sf if sf > 0.0 else R_raw
    idx = _argmax_first_tie(objective)
    if idx == n_max - 1 and n_max > 1:
        warnings.warn(
            f"n_eg optimum sits on the search bound n_max={n_max}; "
            "consider raising n_max",
            stacklevel=2,
        )
    n_opt = int(n[idx])
    report = evaluate_point(replace(params, n_eg=n_opt), arch, conventions)
    return n_opt, report


def _grid_values(L0_grid, L_tot: float) -> tuple[float, ...]:
    values = L0_grid.values if isinstance(L0_grid, SweepAxis) else tuple(
        float(v) for v in L0_grid
    )
    if not values:
        raise ValueError("spacing grid is empty")
    for v in values:
        if not (0.0 < v <= L_tot):
            raise ValueError(
                f"spacing grid values must lie in (0, L_tot], got {v!r}"
            )
    return values


def _default_coarse_grid(L_tot: float) -> tuple[float, ...]:
    hi = min(100.0, L_tot)
    values = tuple(np.round(np.arange(0.5, hi + 1e-9, 0.5), 6))
    return values if values else (L_tot,)


def _objective_value(
    report: RateReport,
    point: RepeaterParams,
    arch: ArchitectureSpec,
    objective: Objective,
    conventions: Conventions,
) -> float:
    if objective is Objective.MAX_RSEC:
        return report.R_sec
    return rsec_per_qubit(report.R_sec, point, arch, conventions)


def optimize_spacing(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    L0_grid=None,
    objective: Objective = Objective.MAX_RSEC,
    n_max: int = DEFAULT_N_MAX,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> OptimizationResult:
    """Optimize the repeater spacing (with n_eg optimized at every point).

    ``L0_grid`` may be a SweepAxis, an iterable of spacings, or None for the
    default two-stage search: a coarse 0.5 km scan up to min(100 km, L_tot)
    followed by 0.1 km refinement around the coarse optimum.
    """
    objective = Objective(objective)

    def scan(values):
        best = None
        for L0 in values:
            point = replace(params, L0=float(L0))
            n_opt, report = optimize_neg(point, arch, n_max, conventions)
            value = _objective_value(report, point, arch, objective,
                                     conventions)
            if best is None or value > best[0] * (1.0 + REL_TIE_TOL):
                best = (value, float(L0), n_opt, report)
        return best

    if L0_grid is None:
        best = scan(_default_coarse_grid(params.L_tot))
        lo = max(best[1] - 0.4, 0.1)
        hi = min(best[1] + 0.4, params.L_tot)
        fine = tuple(np.round(np.arange(lo, hi + 1e-9, 0.1), 6))
        refined = scan(fine)
        if refined[0] > best[0] * (1.0 + REL_TIE_TOL):
            best = refined
    else:
        best = scan(_grid_values(L0_grid, params.L_tot))

    value, L0_opt, n_opt, report = best
    return OptimizationResult(
        best_params=replace(params, L0=L0_opt, n_eg=n_opt),
        best_report=report,
        n_eg_opt=n_opt,
        L0_opt=L0_opt,
        objective=objective,
        objective_value=value,
    )


def min_viable_spacing(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    L0_grid,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> float | None:
    """Smallest grid spacing with a positive secret key rate, or None.

    R_sec > 0 exactly when the secret fraction and the link success
    probability are both positive, so no n_eg scan is needed here.
    """
    values = _grid_values(L0_grid, params.L_tot)
    for L0 in values:
        point = replace(params, L0=L0)
        p = link_success_prob(point.eta_c, point.L0, point.L_att)
        if p > 0.0 and _secret_fraction(point) > 0.0:
            return L0
    return None


def crossover_distance(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    Ltot_grid,
    n_max: int = DEFAULT_N_MAX,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> float | None:
    """Smallest total distance where the repeater beats direct transmission.

    Scans the ascending L_tot grid at fixed spacing params.L0 (n_eg optimized
    per point), then bisects between the bracketing grid points down to 1 km.
    Returns None when the benchmark is never beaten on the grid.
    """
    values = tuple(float(v) for v in (
        Ltot_grid.values if isinstance(Ltot_grid, SweepAxis) else Ltot_grid
    ))
    if not values:
        raise ValueError("L_tot grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("L_tot grid must be strictly increasing")

    def beats(L_tot: float) -> bool:
        point = replace(params, L_tot=L_tot)
        _, report = optimize_neg(point, arch, n_max, conventions)
        return report.R_sec > report.R_plob

    hit = None
    for i, L_tot in enumerate(values):
        if beats(L_tot):
            hit = i
            break
    if hit is None:
        return None
    if hit == 0:
        return values[0]
    lo, hi = values[hit - 1], values[hit]
    while hi - lo > 1.0:
        mid = 0.5 * (lo + hi)
        if beats(mid):
            hi = mid
        else:
            lo = mid
    return hi


def sweep(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    axes,
    objective: Objective = Objective.MAX_RSEC,
    n_max: int = DEFAULT_N_MAX,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> list[SweepPoint]:
    """Cartesian-product evaluation over at most two axes.

    n_eg is optimized at every point; rows come out in outer-axis-major
    order. Grids above one million points are rejected.
    """
    Objective(objective)
    axes = list(axes)
    if not axes:
        raise ValueError("sweep needs at least one axis")
    if len(axes) > 2:
        raise ValueError(f"sweep supports at most 2 axes, got {len(axes)}")
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ValueError(f"sweep axes must be distinct, got {names}")
    total = 1
    for a in axes:
        total *= len(a.values)
    if total > MAX_SWEEP_POINTS:
        raise ValueError(
            f"sweep of {total} points exceeds the {MAX_SWEEP_POINTS} limit"
        )
    rows = []
    for combo in itertools.product(*(a.values for a in axes)):
        point = replace(params, **dict(zip(names, combo)))
        n_opt, report = optimize_neg(point, arch, n_max, conventions)
        rows.append(SweepPoint(
            params=replace(point, n_eg=n_opt),
            n_eg_opt=n_opt,
            report=report,
        ))
    return rows
