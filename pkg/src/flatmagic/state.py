"""Dense pure states of N qubits and in-place gate kernels.

Basis index convention: bit k of the integer index is the value of qubit k,
so qubit 0 is the least significant bit.  Bitstring labels are read as binary
numbers, i.e. the rightmost character is qubit 0 (``"10"`` is qubit 1 set).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARY_ATOL = 1e-10

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Two-qubit matrices use kron(first, second): the first factor acts on site_i.
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


@dataclass(frozen=True, eq=False)
class Statevector:
    """Normalized amplitude vector of length ``2**n_qubits``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex).reshape(-1)
        d = amps.size
        if d < 2 or d & (d - 1):
            raise ValueError(f"amplitude vector length {d} is not a power of two >= 2")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def tensor(self, other: "Statevector") -> "Statevector":
        """Return ``self ⊗ other`` with ``other`` on the low qubits."""
        return Statevector(np.kron(self.amplitudes, other.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy())

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits})"


def as_amplitudes(state) -> np.ndarray:
    if isinstance(state, Statevector):
        return state.amplitudes
    return np.asarray(state, dtype=complex).reshape(-1)


def new_basis_state(n_qubits: int, bits: str) -> Statevector:
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if len(bits) != n_qubits or set(bits) - {"0", "1"}:
        raise ValueError(f"bitstring {bits!r} does not describe {n_qubits} qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return Statevector(amps)


def zero_state(n_qubits: int) -> Statevector:
    return new_basis_state(n_qubits, "0" * n_qubits)


def prepare_bloch(theta: float, phi: float) -> Statevector:
    """cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩."""
    return Statevector(
        np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    )


def product_state(single: Statevector, n_qubits: int) -> Statevector:
    amps = single.amplitudes
    for _ in range(n_qubits - 1):
        amps = np.kron(amps, single.amplitudes)
    return Statevector(amps)


def _check_unitary(u: np.ndarray, size: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(size), atol=UNITARY_ATOL, rtol=0):
        raise ValueError("matrix is not unitary")
    return u


def _check_site(site: int, n: int):
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} qubits")


def _axis(site: int, n: int) -> int:
    # C-order reshape puts the most significant bit first.
    return n - 1 - site


def apply_1q_inplace(psi: np.ndarray, n: int, site: int, u: np.ndarray) -> np.ndarray:
    """Unchecked kernel; returns the new amplitude array (may alias ``psi``)."""
    view = psi.reshape((1 << (n - 1 - site), 2, 1 << site))
    out = np.einsum("ab,ibj->iaj", u, view)
    return out.reshape(-1)


def apply_2q_inplace(
    psi: np.ndarray, n: int, site_i: int, site_j: int, u: np.ndarray
) -> np.ndarray:
    tensor = psi.reshape((2,) * n)
    ai, aj = _axis(site_i, n), _axis(site_j, n)
    out = np.tensordot(u.reshape(2, 2, 2, 2), tensor, axes=([2, 3], [ai, aj]))
    out = np.moveaxis(out, [0, 1], [ai, aj])
    return np.ascontiguousarray(out).reshape(-1)


def apply_one_qubit(state: Statevector, site: int, u) -> Statevector:
    n = state.n_qubits
    _check_site(site, n)
    u = _check_unitary(u, 2)
    return Statevector(apply_1q_inplace(state.amplitudes.copy(), n, site, u))


def apply_two_qubit(state: Statevector, site_i: int, site_j: int, u) -> Statevector:
    """Apply a 4x4 unitary; ``u`` is written in the basis kron(site_i, site_j)."""
    n = state.n_qubits
    _check_site(site_i, n)
    _check_site(site_j, n)
    if site_i == site_j:
        raise ValueError("two-qubit gate needs distinct sites")
    u = _check_unitary(u, 4)
    return Statevector(apply_2q_inplace(state.amplitudes, n, site_i, site_j, u))


def rxx_matrix(theta: float) -> np.ndarray:
    """exp(-i θ/2 X⊗X)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, 0, 0, -1j * s], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [-1j * s, 0, 0, c]]
    )


def apply_rxx(state: Statevector, theta: float, site_i: int, site_j: int) -> Statevector:
    return apply_two_qubit(state, site_i, site_j, rxx_matrix(theta))


def rxx_state(theta: float) -> Statevector:
    """R_XX(θ)|00⟩ on two qubits."""
    return apply_rxx(zero_state(2), theta, 0, 1)
