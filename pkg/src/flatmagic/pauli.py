"""N-qubit Pauli strings stored as (x_mask, z_mask) bit pairs.

Per site the bits decode as (0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z, and the
string is the Hermitian operator ``i**popcount(x & z) * X**x Z**z``.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np

from .state import as_amplitudes

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}
_I_POWERS = np.array([1, 1j, -1, -1j])


def _popcount(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    count = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        count += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return count


class PauliString(NamedTuple):
    n_qubits: int
    x_mask: int
    z_mask: int

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse e.g. ``"XIZ"``; the rightmost letter acts on qubit 0."""
        x = z = 0
        n = len(label)
        for pos, ch in enumerate(label.upper()):
            site = n - 1 - pos
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= bx << site
            z |= bz << site
        return cls(n, x, z)

    @property
    def label(self) -> str:
        return "".join(
            _LETTERS[(self.x_mask >> k) & 1, (self.z_mask >> k) & 1]
            for k in reversed(range(self.n_qubits))
        )

    @property
    def n_y(self) -> int:
        return (self.x_mask & self.z_mask).bit_count()

    def matrix(self) -> np.ndarray:
        """Dense matrix; for tests at small N."""
        d = 1 << self.n_qubits
        idx = np.arange(d)
        signs = (-1.0) ** _popcount(idx & self.z_mask)
        m = np.zeros((d, d), dtype=complex)
        m[idx ^ self.x_mask, idx] = signs
        return (1j**self.n_y) * m


def pauli_expectation(state, p: PauliString) -> float:
    """⟨Ψ|P|Ψ⟩ in O(d) by pairing σ with σ⊕x_mask."""
    psi = as_amplitudes(state)
    d = psi.size
    if d != 1 << p.n_qubits:
        raise ValueError(f"Pauli on {p.n_qubits} qubits vs state of dimension {d}")
    idx = np.arange(d)
    signs = 1 - 2 * (_popcount(idx & p.z_mask) & 1)
    val = (1j**p.n_y) * np.sum(np.conj(psi[idx ^ p.x_mask]) * psi * signs)
    return float(val.real)


def enumerate_paulis(n_qubits: int) -> Iterator[PauliString]:
    """All 4**N strings, lexicographic in (x_mask, z_mask); identity first."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    d = 1 << n_qubits
    for x in range(d):
        for z in range(d):
            yield PauliString(n_qubits, x, z)


def _fwht_rows(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 1 (length 2**n)."""
    rows, d = a.shape
    h = 1
    while h < d:
        v = a.reshape(rows, d // (2 * h), 2, h)
        lo = v[:, :, 0, :].copy()
        hi = v[:, :, 1, :]
        v[:, :, 0, :] += hi
        v[:, :, 1, :] = lo - hi
        h *= 2
    return a


def pauli_spectrum(state, chunk_elems: int = 1 << 22) -> np.ndarray:
    """All expectation values as an array ``E[x_mask, z_mask]``.

    Runs in O(N 4**N): for every X-pattern the sum over σ of the sign
    (-1)**(z·σ) is a Walsh-Hadamard transform over z.
    """
    psi = as_amplitudes(state)
    d = psi.size
    idx = np.arange(d)
    out = np.empty((d, d))
    rows_per_chunk = max(1, min(d, chunk_elems // d))
    for start in range(0, d, rows_per_chunk):
        xs = np.arange(start, min(d, start + rows_per_chunk))
        w = np.conj(psi[idx[None, :] ^ xs[:, None]]) * psi[None, :]
        w = _fwht_rows(w)
        n_y = _popcount(xs[:, None] & idx[None, :])
        out[xs] = np.real(w * _I_POWERS[n_y & 3])
    return out


def xi_norm(state) -> float:
    """Σ_P ⟨P⟩⁴ / d²."""
    e = pauli_spectrum(state)
    d = e.shape[0]
    return float(np.sum(e**4) / d**2)
