"""Closed-form raw and secret key rates plus the RCI and repeaterless benchmarks.

All rates are in bits/s. The raw rate counts end-to-end entangled pairs per
second; multiplying by the two-basis secret fraction 1 - 2*h(Q) gives the
asymptotic secret key rate. The reverse-coherent-information rate upper-bounds
any key protocol on the shared state, and the repeaterless bound
R_source * K(eta) with K(eta) = -log2(1 - eta) is the direct-transmission
capacity the repeater has to beat.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_CONVENTIONS,
    ArchitectureMismatchError,
    ArchitectureSpec,
    ChainGeometry,
    Conventions,
    RepeaterParams,
    Variant,
    chain_qber,
    effective_station_error,
    link_success_prob,
)

#: chain QBER above which the two-basis secret fraction 1 - 2*h(Q) is zero
QBER_CUTOFF = 0.11002786443835955


@dataclass(frozen=True)
class RateReport:
    """All rate quantities for one parameter point."""

    p_link: float          # per-attempt link success probability
    P_success: float       # chain success probability per cycle
    T_cycle: float         # cycle time, s
    R_raw: float           # raw pair rate, bits/s
    Q: float               # effective quantum bit error rate
    secret_fraction: float  # max(0, 1 - 2*h(Q))
    R_sec: float           # secret key rate, bits/s
    I_R: float             # reverse coherent information per shared pair
    R_rci: float           # RCI rate, bits/s
    R_plob: float          # repeaterless benchmark rate, bits/s

    @property
    def zero_key(self) -> bool:
        """True when no secret key is produced at this point."""
        return self.R_sec <= 0.0


def chain_success_prob(p: float, n_eg: int, n_links: float) -> float:
    """Probability that every link succeeds within n_eg attempts.

    P = [1 - (1 - p)^n_eg]^n_links; n_links may be non-integer.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not n_eg >= 1:
        raise ValueError(f"n_eg must be >= 1, got {n_eg!r}")
    if not n_links >= 1.0:
        raise ValueError(f"n_links must be >= 1, got {n_links!r}")
    return (1.0 - (1.0 - p) ** n_eg) ** n_links


def cycle_time(L0: float, n_eg: int, t0: float, c: float) -> float:
    """Duration of one generation window over an elementary link.

    T = 3*L0*n_eg/(2c) + 2*t0: one and a half fiber transits per heralded
    attempt (photon to the midpoint plus classical confirmation), then a swap
    gate and a measurement.
    """
    if not L0 >= 0.0:
        raise ValueError(f"L0 must be nonnegative, got {L0!r}")
    if not n_eg >= 1:
        raise ValueError(f"n_eg must be >= 1, got {n_eg!r}")
    if not t0 >= 0.0:
        raise ValueError(f"t0 must be nonnegative, got {t0!r}")
    if not c > 0.0:
        raise ValueError(f"c must be positive, got {c!r}")
    return L0 * 3.0 * n_eg / (2.0 * c) + 2.0 * t0


def raw_rate_type1(
    params: RepeaterParams,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> tuple[float, float, float]:
    """Raw rate of the sequential single-communication-ion architecture.

    Returns (R_raw, P_success, T_cycle) with R_raw = P_success / (2T) under
    the default convention; see :class:`ionqkd.core.Conventions` for the
    alternate single-T denominator.
    """
    if params.m != 1:
        raise ArchitectureMismatchError(
            f"TypeI rate needs m = 1 communication ion, got m={params.m!r}"
        )
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    geom = params.geometry
    P = chain_success_prob(p, params.n_eg, geom.n_links)
    T = cycle_time(params.L0, params.n_eg, params.t0, params.c)
    return P / (conventions.type1_kappa() * T), P, T


def prob_links(m: int, i: int, n0: int, p: float) -> float:
    """Probability that exactly i of m ion pairs entangle within n0 rounds.

    C(m, i) * [1 - (1-p)^n0]^i * (1-p)^(n0 * (m - i)).
    """
    if not (isinstance(m, int) and m >= 1):
        raise ValueError(f"m must be an integer >= 1, got {m!r}")
    if not (isinstance(i, int) and 0 <= i <= m):
        raise ValueError(f"i must be an integer in [0, m], got {i!r}")
    if not n0 >= 1:
        raise ValueError(f"n0 must be >= 1, got {n0!r}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    q_fail = (1.0 - p) ** n0
    return math.comb(m, i) * (1.0 - q_fail) ** i * q_fail ** (m - i)


def raw_rate_type2(
    params: RepeaterParams,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> tuple[float, float, float]:
    """Raw rate of the simultaneous multi-communication-ion architecture.

    A link succeeds when at least one of its ion pairs entangles, so
    R_raw = [1 - Prob(pairs, 0, n_eg)]^n_links / T. Returns
    (R_raw, P_success, T_cycle).
    """
    if params.m < 2:
        raise ArchitectureMismatchError(
            f"TypeII rate needs m >= 2 communication ions, got m={params.m!r}"
        )
    pairs = conventions.pairs_per_link(params.m)
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    geom = params.geometry
    P = (1.0 - prob_links(pairs, 0, params.n_eg, p)) ** geom.n_links
    T = cycle_time(params.L0, params.n_eg, params.t0, params.c)
    return P / T, P, T


def binary_entropy(Q: float) -> float:
    """h(Q) = -Q*log2(Q) - (1-Q)*log2(1-Q), with 0*log2(0) = 0."""
    if not (0.0 <= Q <= 1.0):
        raise ValueError(f"Q must lie in [0, 1], got {Q!r}")
    if Q == 0.0 or Q == 1.0:
        return 0.0
    return -Q * math.log2(Q) - (1.0 - Q) * math.log2(1.0 - Q)


def secret_key_rate(R_raw: float, Q: float) -> float:
    """Two-basis secret key rate R_raw * max(0, 1 - 2*h(Q)).

    The fraction hits zero at Q ~ 0.1100; negative values are reported as
    zero because no secure key can be distilled there.
    """
    if not R_raw >= 0.0:
        raise ValueError(f"R_raw must be nonnegative, got {R_raw!r}")
    return R_raw * max(0.0, 1.0 - 2.0 * binary_entropy(Q))


def rci(Q: float) -> float:
    """Reverse coherent information of the shared end-to-end state.

    The remote pair compatible with the error model has Bell weights
    (1 - 3Q/2, Q/2, Q/2, Q/2), giving
    I_R = 1 + (1 - 3Q/2)*log2(1 - 3Q/2) + (3Q/2)*log2(Q/2), 0*log2(0) = 0.
    """
    if not (0.0 <= Q <= 2.0 / 3.0):
        raise ValueError(
            f"Q must lie in [0, 2/3] for a valid remote state, got {Q!r}"
        )
    if Q == 0.0:
        return 1.0
    w = 1.0 - 1.5 * Q
    first = w * math.log2(w) if w > 0.0 else 0.0
    return 1.0 + first + 1.5 * Q * math.log2(Q / 2.0)


def plob_rate(eta_c: float, L: float, L_att: float = 20.0,
              R_source: float = 1e6) -> float:
    """Repeaterless secret-key capacity in temporal units.

    R_source * K(eta) with K(eta) = -log2(1 - eta) and
    eta = eta_c^2 * exp(-L / L_att), the end-to-end transmittivity including
    the coupling of both photons.
    """
    if not (0.0 <= eta_c <= 1.0):
        raise ValueError(f"eta_c must lie in [0, 1], got {eta_c!r}")
    if not L >= 0.0:
        raise ValueError(f"L must be nonnegative, got {L!r}")
    if not L_att > 0.0:
        raise ValueError(f"L_att must be positive, got {L_att!r}")
    if not R_source >= 0.0:
        raise ValueError(f"R_source must be nonnegative, got {R_source!r}")
    eta = eta_c**2 * math.exp(-L / L_att)
    if eta >= 1.0:
        raise ValueError(f"channel transmittivity must be < 1, got {eta!r}")
    # -log2(1 - eta) via log1p so tiny transmittivities do not underflow
    return R_source * (-math.log1p(-eta) / math.log(2.0))


def evaluate_point(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> RateReport:
    """Evaluate every rate quantity for one parameter point."""
    if params.m != arch.comm_ions:
        raise ArchitectureMismatchError(
            f"params.m={params.m!r} does not match "
            f"arch.comm_ions={arch.comm_ions!r}"
        )
    if arch.variant is Variant.TYPE_I:
        R_raw, P, T = raw_rate_type1(params, conventions)
    else:
        R_raw, P, T = raw_rate_type2(params, conventions)
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    geom = params.geometry
    eps = effective_station_error(params.eps_g, params.F0)
    Q = chain_qber(eps, geom.n_stations)
    sf = max(0.0, 1.0 - 2.0 * binary_entropy(Q))
    I_R = rci(Q)
    return RateReport(
        p_link=p,
        P_success=P,
        T_cycle=T,
        R_raw=R_raw,
        Q=Q,
        secret_fraction=sf,
        R_sec=R_raw * sf,
        I_R=I_R,
        R_rci=R_raw * I_R,
        R_plob=plob_rate(params.eta_c, params.L_tot, params.L_att,
                         params.R_source),
    )


def raw_rate_curve(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    n_values: np.ndarray,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> np.ndarray:
    """Vectorized raw rate over an array of attempt counts n_eg.

    Used by the optimizer; matches raw_rate_type1/raw_rate_type2 pointwise.
    """
    if params.m != arch.comm_ions:
        raise ArchitectureMismatchError(
            f"params.m={params.m!r} does not match "
            f"arch.comm_ions={arch.comm_ions!r}"
        )
    n = np.asarray(n_values, dtype=float)
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    n_links = params.geometry.n_links
    T = params.L0 * 3.0 * n / (2.0 * params.c) + 2.0 * params.t0
    if arch.variant is Variant.TYPE_I:
        if params.m != 1:
            raise ArchitectureMismatchError(
                f"TypeI rate needs m = 1, got m={params.m!r}"
            )
        exponent = n
        kappa = conventions.type1_kappa()
    else:
        if params.m < 2:
            raise ArchitectureMismatchError(
                f"TypeII rate needs m >= 2, got m={params.m!r}"
            )
        exponent = n * conventions.pairs_per_link(params.m)
        kappa = 1.0
    P = (1.0 - (1.0 - p) ** exponent) ** n_links
    return P / (kappa * T)
