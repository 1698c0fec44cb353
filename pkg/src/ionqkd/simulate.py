"""Monte Carlo simulation of the repeater protocols.

Statistically independent cross-check for the closed-form rates: every trial
plays one protocol cycle — each elementary link makes up to n_eg heralded
attempts (one Bernoulli(p) process per available ion pair), the chain succeeds
when every link does, and each intermediate station then injects independent
X- and Z-basis flips with the per-station error probability. End-to-end errors
are odd flip parities.

Reproducibility: trials are processed in fixed-size blocks and block b draws
from a counter-based generator keyed by (seed, b), so results are bit
identical for a given (config, seed) regardless of how many workers run the
blocks. Every accumulator is an integer, which makes the reduction exact and
order independent.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_CONVENTIONS,
    ArchitectureMismatchError,
    ArchitectureSpec,
    Conventions,
    RepeaterParams,
    Variant,
    chain_qber,
    effective_station_error,
    link_success_prob,
)
from .rates import cycle_time

TRIALS_PER_BLOCK = 4096


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: parameter point, architecture, trials, seed."""

    params: RepeaterParams
    arch: ArchitectureSpec
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError(
                f"trials must be an integer >= 1, got {self.trials!r}"
            )
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValueError(
                f"seed must be a 64-bit unsigned integer, got {self.seed!r}"
            )
        if self.params.m != self.arch.comm_ions:
            raise ArchitectureMismatchError(
                f"params.m={self.params.m!r} does not match "
                f"arch.comm_ions={self.arch.comm_ions!r}"
            )


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo estimates with standard errors; qber fields are None when
    no trial produced a chain."""

    p_success_hat: float
    p_success_se: float
    qber_hat: float | None
    qber_se: float | None
    raw_rate_hat: float
    raw_rate_se: float
    trials_used: int
    n_success: int
    seed: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream that is a pure function of (seed, block)."""
    return np.random.Generator(
        np.random.Philox(key=seed, counter=[0, 0, block, 0])
    )


def _first_success_attempt(rng: np.random.Generator, p: float,
                           shape: tuple[int, ...]) -> np.ndarray:
    """Attempt index (1-based) of the first heralded success, per entry.

    Sampled as a geometric variable via inverse transform; entries that would
    first succeed after attempt k have value k regardless of any cap, so
    comparing against n_eg caps the process.
    """
    u = rng.random(shape)
    if p <= 0.0:
        return np.full(shape, np.inf)
    if p >= 1.0:
        return np.ones(shape)
    g = np.ceil(np.log(1.0 - u) / math.log1p(-p))
    return np.maximum(g, 1.0)


def simulate_link_attempts(
    p: float, n_eg: int, m: int, rng: np.random.Generator,
) -> tuple[bool, int]:
    """Play one link's generation window: m ion pairs, up to n_eg attempts.

    Returns (success, attempts_used); attempts_used is the first attempt
    where some pair succeeded, or n_eg if none did.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not n_eg >= 1:
        raise ValueError(f"n_eg must be >= 1, got {n_eg!r}")
    if not m >= 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    first = float(_first_success_attempt(rng, p, (m,)).min())
    if first <= n_eg:
        return True, int(first)
    return False, n_eg


def _chain_counts(
    seed: int,
    block: int,
    size: int,
    p: float,
    n_eg: int,
    pairs: int,
    n_links: int,
    n_stations: int,
    eps: float,
) -> tuple[int, int, int]:
    """Simulate one block; returns integer sums (successes, e, e^2).

    e is the per-trial error count (X parity + Z parity, 0..2) over
    successful trials. Draw order per block: link attempts, X flips, Z flips.
    """
    rng = _block_rng(seed, block)
    first = _first_success_attempt(rng, p, (size, n_links, pairs))
    link_ok = (first <= n_eg).any(axis=2)
    chain_ok = link_ok.all(axis=1)
    if n_stations > 0:
        x_par = ((rng.random((size, n_stations)) < eps).sum(axis=1)) & 1
        z_par = ((rng.random((size, n_stations)) < eps).sum(axis=1)) & 1
        e = (x_par + z_par)[chain_ok]
    else:
        e = np.zeros(int(chain_ok.sum()), dtype=np.int64)
    return int(chain_ok.sum()), int(e.sum()), int((e * e).sum())


def simulate_chain(
    config: SimConfig,
    conventions: Conventions = DEFAULT_CONVENTIONS,
    workers: int = 1,
) -> SimEstimate:
    """Estimate chain success probability, QBER, and raw rate by simulation.

    Args:
        config: parameter point, architecture, trial count, and RNG seed.
        conventions: reporting conventions; they set the ion pairs per link
            for the simultaneous architecture and the sequential
            architecture's cycle-time multiplier.
        workers: number of threads over trial blocks; any value yields bit
            identical results.

    The link and station counts are rounded up to integers
    (ceil(L_tot / L0) links). The raw-rate estimate is
    p_success_hat / (kappa * T) with T the cycle time and kappa = 2 for the
    sequential architecture under the default convention, else 1.
    """
    if not workers >= 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")
    params, arch = config.params, config.arch
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    n_links = math.ceil(params.L_tot / params.L0)
    n_stations = n_links - 1
    if arch.variant is Variant.TYPE_I:
        pairs = 1
        kappa = conventions.type1_kappa()
    else:
        pairs = conventions.pairs_per_link(params.m)
        kappa = 1.0
    eps = effective_station_error(params.eps_g, params.F0)
    T = cycle_time(params.L0, params.n_eg, params.t0, params.c)

    n_blocks = (config.trials + TRIALS_PER_BLOCK - 1) // TRIALS_PER_BLOCK

    def run_block(b: int) -> tuple[int, int, int]:
        size = min(TRIALS_PER_BLOCK, config.trials - b * TRIALS_PER_BLOCK)
        return _chain_counts(config.seed, b, size, p, params.n_eg, pairs,
                             n_links, n_stations, eps)

    if workers == 1:
        results = [run_block(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, range(n_blocks)))

    n_success = sum(r[0] for r in results)
    s1 = sum(r[1] for r in results)
    s2 = sum(r[2] for r in results)
    N = config.trials

    p_hat = n_success / N
    p_se = math.sqrt(p_hat * (1.0 - p_hat) / N)
    if n_success == 0:
        warnings.warn(
            "no trial produced an end-to-end chain; QBER estimate unavailable",
            stacklevel=2,
        )
        q_hat = q_se = None
    else:
        # per-trial error value e/2 lies in {0, 0.5, 1}
        q_hat = s1 / (2.0 * n_success)
        if n_success >= 2:
            var = (s2 / 4.0 - n_success * q_hat * q_hat) / (n_success - 1)
            q_se = math.sqrt(max(var, 0.0) / n_success)
        else:
            q_se = 0.0
    return SimEstimate(
        p_success_hat=p_hat,
        p_success_se=p_se,
        qber_hat=q_hat,
        qber_se=q_se,
        raw_rate_hat=p_hat / (kappa * T),
        raw_rate_se=p_se / (kappa * T),
        trials_used=N,
        n_success=n_success,
        seed=config.seed,
    )


def analytic_reference(
    params: RepeaterParams,
    arch: ArchitectureSpec,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> tuple[float, float, float]:
    """Closed-form (P_success, Q, R_raw) at the simulator's integer geometry.

    The simulator uses ceil(L_tot / L0) links; the closed-form rate engine
    uses the real ratio, so comparisons against simulation go through this
    helper instead.
    """
    if params.m != arch.comm_ions:
        raise ArchitectureMismatchError(
            f"params.m={params.m!r} does not match "
            f"arch.comm_ions={arch.comm_ions!r}"
        )
    p = link_success_prob(params.eta_c, params.L0, params.L_att)
    n_links = math.ceil(params.L_tot / params.L0)
    n_stations = n_links - 1
    if arch.variant is Variant.TYPE_I:
        pairs = 1
        kappa = conventions.type1_kappa()
    else:
        pairs = conventions.pairs_per_link(params.m)
        kappa = 1.0
    P = (1.0 - (1.0 - p) ** (params.n_eg * pairs)) ** n_links
    eps = effective_station_error(params.eps_g, params.F0)
    Q = chain_qber(eps, n_stations)
    T = cycle_time(params.L0, params.n_eg, params.t0, params.c)
    return P, Q, P / (kappa * T)
