"""Independent reference implementations used to check the closed forms.

Everything here deliberately avoids the package's own formulas: the channel
oracle multiplies out 4x4 density matrices, the parity oracle runs exact
dynamic programming, and the information oracle diagonalizes states and takes
Von Neumann entropies.
"""

import numpy as np

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (_I, _X, _Y, _Z)

_s = 1 / np.sqrt(2)
BELL_VECS = (
    np.array([_s, 0, 0, _s]),    # phi+
    np.array([_s, 0, 0, -_s]),   # phi-
    np.array([0, _s, _s, 0]),    # psi+
    np.array([0, _s, -_s, 0]),   # psi-
)


def bell_diagonal_density(components) -> np.ndarray:
    """4x4 density matrix of a Bell-diagonal state in the computational basis."""
    rho = np.zeros((4, 4), dtype=complex)
    for weight, vec in zip(components, BELL_VECS):
        rho += weight * np.outer(vec, vec.conj())
    return rho


def bell_components(rho: np.ndarray) -> np.ndarray:
    """Project a two-qubit density matrix back onto the Bell basis."""
    return np.array([np.real(v.conj() @ rho @ v) for v in BELL_VECS])


def pauli_pair_channel_bruteforce(components, eps_g: float) -> np.ndarray:
    """All 16 two-qubit Pauli terms of the swap-transfer channel, explicitly."""
    rho = bell_diagonal_density(components)
    acc = np.zeros((4, 4), dtype=complex)
    for sig_a in PAULIS:
        for sig_b in PAULIS:
            U = np.kron(sig_a, sig_b)
            acc += U @ rho @ U.conj().T
    out = (1.0 - eps_g) * rho + (eps_g / 16.0) * acc
    return bell_components(out)


def parity_odd_dp(eps: float, R: int) -> float:
    """Probability of an odd number of successes among R Bernoulli(eps) trials,
    by exact dynamic programming."""
    p_odd = 0.0
    for _ in range(R):
        p_odd = p_odd * (1.0 - eps) + (1.0 - p_odd) * eps
    return p_odd


def von_neumann_entropy(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-15]
    return float(-(evals * np.log2(evals)).sum())


def rci_entropy_oracle(Q: float) -> float:
    """Reverse coherent information from entropies of the remote state."""
    rho_ab = bell_diagonal_density((1 - 1.5 * Q, Q / 2, Q / 2, Q / 2))
    # trace out the second qubit
    rho_a = np.trace(rho_ab.reshape(2, 2, 2, 2), axis1=1, axis2=3)
    return von_neumann_entropy(rho_a) - von_neumann_entropy(rho_ab)
