"""Domain types and the per-station error model for trapped-ion repeater chains.

A chain of total length ``L_tot`` is divided into elementary fiber links of
length ``L0``. Each station holds one module of co-trapped communication and
memory ions; heralded photon interference entangles neighboring modules, a
pair of swap gates moves that entanglement onto memory ions, and entanglement
swapping at the intermediate stations stitches the links into one long pair.
This module holds the parameter/state containers and the closed-form pieces
of the error model; rate formulas live in :mod:`ionqkd.rates`.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

#: absolute tolerance for Bell-diagonal normalization checks
NORM_ATOL = 1e-12

#: cap on the per-station flip probability; beyond 1/2 the parity
#: accumulation formula would oscillate instead of saturating
MAX_FLIP_PROB = 0.5


class ArchitectureMismatchError(ValueError):
    """Parameters are inconsistent with the selected repeater architecture."""


class Variant(Enum):
    """Repeater module family, keyed by communication-ion count."""

    TYPE_I = "TypeI"    # one communication ion, sequential link generation
    TYPE_II = "TypeII"  # several communication ions, simultaneous links


def _check_unit_interval(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def _check_positive(name: str, value: float) -> float:
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)


def _check_nonnegative(name: str, value: float) -> float:
    if not value >= 0.0:
        raise ValueError(f"{name} must be nonnegative, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class RepeaterParams:
    """Physical and protocol scalars for one repeater-chain operating point.

    Lengths are in km, times in s, rates in Hz, speeds in km/s.
    """

    L_tot: float          # end-to-end distance
    L0: float             # spacing between neighboring stations
    eta_c: float          # coupling efficiency (emission+collection+coupling)
    eps_g: float = 0.0    # effective two-qubit gate error
    F0: float = 1.0       # initial Bell-pair fidelity
    L_att: float = 20.0   # fiber attenuation length
    t0: float = 1e-6      # gate-plus-measurement time
    c: float = 2e5        # signal speed in fiber
    m: int = 1            # communication ions per module
    n_eg: int = 1         # max entanglement-generation attempts per cycle
    R_source: float = 1e6  # source attempt rate for the repeaterless benchmark

    def __post_init__(self) -> None:
        _check_positive("L0", self.L0)
        _check_positive("L_att", self.L_att)
        if not self.L_tot >= self.L0:
            raise ValueError(
                f"L_tot must be >= L0, got L_tot={self.L_tot!r}, L0={self.L0!r}"
            )
        _check_unit_interval("eta_c", self.eta_c)
        _check_unit_interval("eps_g", self.eps_g)
        _check_unit_interval("F0", self.F0)
        _check_nonnegative("t0", self.t0)
        _check_positive("c", self.c)
        _check_positive("R_source", self.R_source)
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ValueError(f"m must be an integer >= 1, got {self.m!r}")
        if not (isinstance(self.n_eg, int) and self.n_eg >= 1):
            raise ValueError(f"n_eg must be an integer >= 1, got {self.n_eg!r}")
        if self.F0 < 0.25:
            # still a valid state, but the dominant Bell component is no
            # longer the intended one
            warnings.warn(
                f"F0={self.F0!r} is below 1/4, outside the physically "
                "intended regime",
                stacklevel=2,
            )

    @property
    def geometry(self) -> "ChainGeometry":
        return ChainGeometry.from_lengths(self.L_tot, self.L0)


@dataclass(frozen=True)
class ArchitectureSpec:
    """Module composition: protocol variant plus ion counts per module."""

    variant: Variant
    comm_ions: int
    mem_ions: int = 2

    def __post_init__(self) -> None:
        if not isinstance(self.variant, Variant):
            raise ValueError(f"variant must be a Variant, got {self.variant!r}")
        if not (isinstance(self.comm_ions, int) and self.comm_ions >= 1):
            raise ValueError(
                f"comm_ions must be an integer >= 1, got {self.comm_ions!r}"
            )
        if not (isinstance(self.mem_ions, int) and self.mem_ions >= 2):
            # entanglement swapping joins two memory ions
            raise ValueError(
                f"mem_ions must be an integer >= 2, got {self.mem_ions!r}"
            )
        if self.variant is Variant.TYPE_I and self.comm_ions != 1:
            raise ArchitectureMismatchError(
                f"TypeI modules have exactly 1 communication ion, "
                f"got comm_ions={self.comm_ions!r}"
            )
        if self.variant is Variant.TYPE_II and self.comm_ions < 2:
            raise ArchitectureMismatchError(
                f"TypeII modules need >= 2 communication ions, "
                f"got comm_ions={self.comm_ions!r}"
            )

    @classmethod
    def type_i(cls, mem_ions: int = 2) -> "ArchitectureSpec":
        return cls(Variant.TYPE_I, comm_ions=1, mem_ions=mem_ions)

    @classmethod
    def type_ii(cls, comm_ions: int, mem_ions: int = 2) -> "ArchitectureSpec":
        return cls(Variant.TYPE_II, comm_ions=comm_ions, mem_ions=mem_ions)

    @classmethod
    def for_params(cls, params: RepeaterParams) -> "ArchitectureSpec":
        """Default architecture implied by the communication-ion count."""
        if params.m == 1:
            return cls.type_i()
        return cls.type_ii(params.m)

    @property
    def qubits_per_module(self) -> int:
        return self.comm_ions + self.mem_ions


@dataclass(frozen=True)
class BellDiagonalState:
    """Two-qubit state diagonal in the Bell basis (phi+, phi-, psi+, psi-)."""

    p_phi_plus: float
    p_phi_minus: float
    p_psi_plus: float
    p_psi_minus: float

    def __post_init__(self) -> None:
        for name, value in (
            ("p_phi_plus", self.p_phi_plus),
            ("p_phi_minus", self.p_phi_minus),
            ("p_psi_plus", self.p_psi_plus),
            ("p_psi_minus", self.p_psi_minus),
        ):
            _check_unit_interval(name, value)
        total = (self.p_phi_plus + self.p_phi_minus
                 + self.p_psi_plus + self.p_psi_minus)
        if abs(total - 1.0) > NORM_ATOL:
            raise ValueError(
                f"Bell-diagonal components must sum to 1 within {NORM_ATOL}, "
                f"got sum={total!r}"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_phi_plus, self.p_phi_minus,
                self.p_psi_plus, self.p_psi_minus)

    @property
    def fidelity(self) -> float:
        """Overlap with the target phi+ Bell state."""
        return self.p_phi_plus


@dataclass(frozen=True)
class ChainGeometry:
    """Link and station counts, kept as real numbers.

    Spacings are optimized on a continuous grid, so ``L_tot / L0`` is
    generally non-integer; the closed-form rates use it directly as an
    exponent.
    """

    n_links: float
    n_stations: float

    def __post_init__(self) -> None:
        if not self.n_links >= 1.0:
            raise ValueError(f"n_links must be >= 1, got {self.n_links!r}")
        if abs(self.n_stations - (self.n_links - 1.0)) > 1e-9:
            raise ValueError(
                f"n_stations must equal n_links - 1, got "
                f"n_links={self.n_links!r}, n_stations={self.n_stations!r}"
            )

    @classmethod
    def from_lengths(cls, L_tot: float, L0: float) -> "ChainGeometry":
        _check_positive("L0", L0)
        n_links = L_tot / L0
        return cls(n_links=n_links, n_stations=n_links - 1.0)


@dataclass(frozen=True)
class Conventions:
    """Resolutions of reporting ambiguities in the rate model.

    ``type1_denominator``
        "2T" divides the sequential-architecture raw rate by twice the cycle
        time (left and right generation windows back to back); "T" divides by
        a single cycle time. Published optimal-spacing rate tables are
        reconstructed by "T" at high coupling efficiency and by "2T" at low
        efficiency, so both stay available.
    ``type2_pairing``
        "full" lets all m communication ions of a module serve each elementary
        link, which is the literal multi-pair success formula; "split" assigns
        m/2 ions to the left link and m/2 to the right, which is what a module
        generating in both directions at once can physically sustain and is
        the reading that reproduces the published optimal n_eg values.
        "split" requires even m.
    ``stations_include_endpoints``
        Whether the per-deployed-qubit metric counts the two end nodes in the
        station tally (they also hold modules).
    """

    type1_denominator: str = "2T"
    type2_pairing: str = "full"
    stations_include_endpoints: bool = True

    def __post_init__(self) -> None:
        if self.type1_denominator not in ("2T", "T"):
            raise ValueError(
                f"type1_denominator must be '2T' or 'T', "
                f"got {self.type1_denominator!r}"
            )
        if self.type2_pairing not in ("full", "split"):
            raise ValueError(
                f"type2_pairing must be 'full' or 'split', "
                f"got {self.type2_pairing!r}"
            )

    def pairs_per_link(self, m: int) -> int:
        """Communication-ion pairs available to one elementary link."""
        if self.type2_pairing == "full":
            return m
        if m % 2 != 0:
            raise ValueError(
                f"type2_pairing='split' needs an even ion count, got m={m!r}"
            )
        return m // 2

    def type1_kappa(self) -> float:
        """Cycle-time multiplier in the sequential-architecture raw rate."""
        return 2.0 if self.type1_denominator == "2T" else 1.0


DEFAULT_CONVENTIONS = Conventions()


def link_success_prob(eta_c: float, L0: float, L_att: float = 20.0) -> float:
    """Per-attempt success probability of heralded entanglement generation.

    p = (1/2) * eta_c^2 * exp(-L0 / L_att); the factor 1/2 comes from the
    linear-optics Bell measurement at the midpoint, eta_c^2 from coupling two
    photons into fiber.
    """
    _check_unit_interval("eta_c", eta_c)
    _check_nonnegative("L0", L0)
    _check_positive("L_att", L_att)
    return 0.5 * eta_c**2 * math.exp(-L0 / L_att)


def initial_bell_state(F0: float) -> BellDiagonalState:
    """Elementary entangled pair with fidelity F0, remainder spread evenly."""
    _check_unit_interval("F0", F0)
    rest = (1.0 - F0) / 3.0
    return BellDiagonalState(F0, rest, rest, rest)


def swap_transfer_channel(state: BellDiagonalState,
                          eps_g: float) -> BellDiagonalState:
    """Pair of communication-to-memory swap gates with error ``eps_g``.

    With probability eps_g the two-qubit state is hit by a uniform mix of the
    16 Pauli pairs (one Pauli on each qubit), i.e. replaced by the maximally
    mixed state; in the Bell-diagonal representation every component maps to
    (1 - eps_g) * p + eps_g / 4.
    """
    if not isinstance(state, BellDiagonalState):
        raise ValueError(f"state must be a BellDiagonalState, got {state!r}")
    _check_unit_interval("eps_g", eps_g)
    return BellDiagonalState(
        *((1.0 - eps_g) * p + eps_g / 4.0 for p in state.as_tuple())
    )


def effective_station_error(eps_g: float, F0: float) -> float:
    """Per-station flip probability seen by each measurement basis.

    eps_{X/Z} = eps_g + (2/3) * (1 - F0), clamped to [0, 1/2]: the gate error
    of the swap transfer plus the swapping CNOT, and the share of the initial
    infidelity that each basis detects.
    """
    _check_unit_interval("eps_g", eps_g)
    _check_unit_interval("F0", F0)
    eps = eps_g + (2.0 / 3.0) * (1.0 - F0)
    return min(max(eps, 0.0), MAX_FLIP_PROB)


def chain_qber(eps: float, R: float) -> float:
    """End-to-end quantum bit error rate over R stations.

    Q(R) = (1/2) * [1 - (1 - 2*eps)^R]: an end-to-end error needs an odd
    number of per-station flips. X and Z bases see the same eps here, so the
    effective Q equals the per-basis value.
    """
    if not (0.0 <= eps <= MAX_FLIP_PROB):
        raise ValueError(f"eps must lie in [0, 0.5], got {eps!r}")
    _check_nonnegative("R", R)
    return 0.5 * (1.0 - (1.0 - 2.0 * eps) ** R)
