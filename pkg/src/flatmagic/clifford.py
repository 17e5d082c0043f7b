"""Clifford tableaux: sampling, synthesis into gates, and statevector action.

A tableau stores the images ``C P C†`` of the generators X_0..X_{N-1}
(rows 0..N-1) and Z_0..Z_{N-1} (rows N..2N-1) as Hermitian Pauli strings
with a sign bit.  Gate updates follow Aaronson & Gottesman (2004), so a
gate applied to a tableau conjugates every row, i.e. composes the gate
after the Clifford.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .state import Statevector, as_amplitudes, HADAMARD

Gate = tuple  # ("h", a) | ("s", a) | ("sdg", a) | ("x", a) | ("z", a) | ("cx", c, t)

_CLIFFORD_ORDERS = {1: 24, 2: 11520}


@dataclass(eq=False)
class CliffordTableau:
    x: np.ndarray  # (2N, N) uint8
    z: np.ndarray  # (2N, N) uint8
    r: np.ndarray  # (2N,) uint8 sign bits

    @property
    def n_qubits(self) -> int:
        return self.x.shape[1]

    @classmethod
    def identity(cls, n_qubits: int) -> "CliffordTableau":
        eye = np.eye(n_qubits, dtype=np.uint8)
        zero = np.zeros_like(eye)
        return cls(
            np.vstack([eye, zero]),
            np.vstack([zero, eye]),
            np.zeros(2 * n_qubits, dtype=np.uint8),
        )

    @classmethod
    def from_symplectic(cls, table: np.ndarray, phases: np.ndarray) -> "CliffordTableau":
        table = np.asarray(table, dtype=np.uint8) % 2
        n = table.shape[0] // 2
        return cls(table[:, :n].copy(), table[:, n:].copy(), np.asarray(phases, dtype=np.uint8) % 2)

    @classmethod
    def from_circuit(cls, n_qubits: int, gates: Sequence[Gate]) -> "CliffordTableau":
        tab = cls.identity(n_qubits)
        for g in gates:
            tab.apply_gate(g)
        return tab

    @property
    def symplectic(self) -> np.ndarray:
        return np.hstack([self.x, self.z])

    @property
    def phases(self) -> np.ndarray:
        return self.r

    def copy(self) -> "CliffordTableau":
        return CliffordTableau(self.x.copy(), self.z.copy(), self.r.copy())

    def key(self) -> bytes:
        return self.x.tobytes() + self.z.tobytes() + self.r.tobytes()

    def __eq__(self, other):
        return isinstance(other, CliffordTableau) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def is_symplectic(self) -> bool:
        n = self.n_qubits
        m = self.symplectic.astype(np.int64)
        omega = np.block(
            [[np.zeros((n, n), int), np.eye(n, dtype=int)], [np.eye(n, dtype=int), np.zeros((n, n), int)]]
        )
        return bool(np.array_equal((m @ omega @ m.T) % 2, omega))

    # -- gate updates (conjugation of every row) --------------------------

    def h(self, a: int):
        x, z = self.x, self.z
        self.r ^= x[:, a] & z[:, a]
        x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()

    def s(self, a: int):
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def sdg(self, a: int):
        # S† = Z S; the Z sign flip commutes with the S update.
        self.r ^= self.x[:, a]
        self.s(a)

    def px(self, a: int):
        self.r ^= self.z[:, a]

    def pz(self, a: int):
        self.r ^= self.x[:, a]

    def cx(self, c: int, t: int):
        x, z = self.x, self.z
        self.r ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
        x[:, t] ^= x[:, c]
        z[:, c] ^= z[:, t]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def apply_gate(self, gate: Gate):
        name = gate[0]
        if name == "h":
            self.h(gate[1])
        elif name == "s":
            self.s(gate[1])
        elif name == "sdg":
            self.sdg(gate[1])
        elif name == "x":
            self.px(gate[1])
        elif name == "z":
            self.pz(gate[1])
        elif name == "cx":
            self.cx(gate[1], gate[2])
        else:
            raise ValueError(f"unknown gate {gate!r}")

    # -- Pauli conjugation ---------------------------------------------------

    def conjugate(self, x_mask: int, z_mask: int) -> tuple[int, int, int]:
        """Return (sign, x', z') with C P C† = sign · P' (Hermitian strings)."""
        n = self.n_qubits
        xs = np.array([(x_mask >> k) & 1 for k in range(n)], dtype=np.uint8)
        zs = np.array([(z_mask >> k) & 1 for k in range(n)], dtype=np.uint8)
        # Track i**e X**ox Z**oz.
        e = int(np.sum(xs & zs))
        ox = np.zeros(n, dtype=np.uint8)
        oz = np.zeros(n, dtype=np.uint8)
        rows = [k for k in range(n) if xs[k]] + [n + k for k in range(n) if zs[k]]
        for row in rows:
            rx, rz = self.x[row], self.z[row]
            e += 2 * int(self.r[row]) + int(np.sum(rx & rz)) + 2 * int(np.sum(oz & rx))
            ox ^= rx
            oz ^= rz
        e = (e - int(np.sum(ox & oz))) % 4
        if e % 2:
            raise AssertionError("conjugated string is not Hermitian; tableau is invalid")
        xm = sum(int(b) << k for k, b in enumerate(ox))
        zm = sum(int(b) << k for k, b in enumerate(oz))
        return (1 if e == 0 else -1), xm, zm


# -- synthesis ----------------------------------------------------------------


def synthesize(tab: CliffordTableau) -> list[Gate]:
    """Gate list (application order) implementing ``tab`` up to global phase.

    Greedy qubit-by-qubit reduction of the tableau to the identity; the
    recorded reduction is inverted at the end.
    """
    t = tab.copy()
    n = t.n_qubits
    red: list[Gate] = []

    def do(*gate):
        if gate[0] == "cz":
            for g in (("h", gate[2]), ("cx", gate[1], gate[2]), ("h", gate[2])):
                t.apply_gate(g)
                red.append(g)
            return
        t.apply_gate(gate)
        red.append(gate)

    for i in range(n):
        # destabilizer row i -> X_i
        row = i
        if not t.x[row, i]:
            js = [j for j in range(i, n) if t.x[row, j]]
            if not js:
                j = next(j for j in range(i, n) if t.z[row, j])
                do("h", j)
            else:
                j = js[0]
            if j != i:
                do("cx", j, i)
        for k in range(i + 1, n):
            if t.x[row, k]:
                do("cx", i, k)
        if t.z[row, i]:
            do("s", i)
        for k in range(i + 1, n):
            if t.z[row, k]:
                do("cz", i, k)
        # stabilizer row i -> Z_i
        row = n + i
        for k in range(i + 1, n):
            if t.x[row, k]:
                if t.z[row, k]:
                    do("s", k)
                do("h", k)
        for k in range(i + 1, n):
            if t.z[row, k]:
                do("cx", k, i)
        if t.x[row, i]:
            do("h", i)
            do("s", i)
            do("h", i)
    for i in range(n):
        if t.r[i]:
            do("z", i)
        if t.r[n + i]:
            do("x", i)
    if not np.array_equal(t.key(), CliffordTableau.identity(n).key()):
        raise AssertionError("synthesis failed to reduce tableau")
    inverse = {"s": "sdg", "sdg": "s"}
    return [(inverse.get(g[0], g[0]),) + tuple(g[1:]) for g in reversed(red)]


# -- statevector action ---------------------------------------------------------

_S_PHASE = {"s": 1j, "sdg": -1j, "z": -1.0}


def apply_gates_inplace(psi: np.ndarray, n: int, gates: Sequence[Gate]) -> np.ndarray:
    t = psi.reshape((2,) * n)
    for g in gates:
        name = g[0]
        if name == "h":
            ax = n - 1 - g[1]
            a0 = np.take(t, 0, axis=ax)
            a1 = np.take(t, 1, axis=ax)
            t = np.stack([(a0 + a1), (a0 - a1)], axis=ax) * HADAMARD[0, 0]
        elif name in _S_PHASE:
            idx = [slice(None)] * n
            idx[n - 1 - g[1]] = 1
            t[tuple(idx)] *= _S_PHASE[name]
        elif name == "x":
            t = np.flip(t, axis=n - 1 - g[1])
        elif name == "cx":
            idx = [slice(None)] * n
            idx[n - 1 - g[1]] = 1
            sub = t[tuple(idx)]
            tax = n - 1 - g[2]
            tax -= tax > n - 1 - g[1]
            t[tuple(idx)] = np.flip(sub, axis=tax).copy()
        else:
            raise ValueError(f"unknown gate {g!r}")
        t = np.ascontiguousarray(t)
    return t.reshape(-1)


def apply_circuit(state, gates: Sequence[Gate]) -> Statevector:
    psi = as_amplitudes(state).copy()
    n = psi.size.bit_length() - 1
    return Statevector(apply_gates_inplace(psi, n, gates))


def apply_clifford(state, c: CliffordTableau) -> Statevector:
    psi = as_amplitudes(state)
    if psi.size != 1 << c.n_qubits:
        raise ValueError(f"tableau on {c.n_qubits} qubits vs state of dimension {psi.size}")
    return apply_circuit(psi, synthesize(c))


def circuit_unitary(n_qubits: int, gates: Sequence[Gate]) -> np.ndarray:
    d = 1 << n_qubits
    cols = [apply_gates_inplace(np.eye(d, dtype=complex)[:, j].copy(), n_qubits, gates) for j in range(d)]
    return np.column_stack(cols)


def clifford_unitary(c: CliffordTableau) -> np.ndarray:
    return circuit_unitary(c.n_qubits, synthesize(c))


# -- uniform sampling (Bravyi & Maslov canonical form) -------------------------


def _sample_qmallows(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    had = np.zeros(n, dtype=bool)
    perm = np.zeros(n, dtype=int)
    remaining = list(range(n))
    for i in range(n):
        m = n - i
        eps = 4.0 ** (-m)
        u = rng.uniform()
        k = -int(np.ceil(np.log2(u + (1 - u) * eps)))
        had[i] = k < m
        if k >= m:
            k = 2 * m - k - 1
        perm[i] = remaining.pop(k)
    return had, perm


@lru_cache(maxsize=None)
def _tril(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.tril_indices(n, -1)


def _gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    aug = np.hstack([mat.astype(np.uint8) % 2, np.eye(n, dtype=np.uint8)])
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r, col])
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        others = np.nonzero(aug[:, col])[0]
        others = others[others != col]
        aug[others] ^= aug[col]
    return aug[:, n:]


def _unit_lower_inverse(mat: np.ndarray) -> np.ndarray:
    if mat.shape[0] <= 16:
        # Unit-triangular integer matrices have exact integer inverses.
        return np.rint(np.linalg.inv(mat)).astype(np.int64) % 2
    return _gf2_inverse(mat).astype(np.int64)


def _hadamard_free_table(n: int, bits: np.ndarray) -> np.ndarray:
    """Symplectic table of a random Hadamard-free Clifford from random bits."""
    rows, cols = _tril(n)
    m = rows.size
    gamma = np.diag(bits[:n]).astype(np.int64)
    gamma[rows, cols] = bits[n : n + m]
    gamma[cols, rows] = bits[n : n + m]
    delta = np.eye(n, dtype=np.int64)
    delta[rows, cols] = bits[n + m : n + 2 * m]
    table = np.zeros((2 * n, 2 * n), dtype=np.int64)
    table[:n, :n] = delta
    table[n:, :n] = (gamma @ delta) % 2
    table[n:, n:] = _unit_lower_inverse(delta).T
    return table


def random_clifford(n_qubits: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniform Clifford modulo global phase.

    Canonical form F1·H·perm·F2 of Bravyi and Maslov:
    the Hadamard layer and permutation come from the quantum Mallows
    distribution, F1 and F2 are uniform Hadamard-free Cliffords.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    n = n_qubits
    had, perm = _sample_qmallows(n, rng)
    per_layer = n + n * (n - 1)
    bits = rng.integers(2, size=2 * per_layer + 2 * n)
    table1 = _hadamard_free_table(n, bits[:per_layer])
    table2 = _hadamard_free_table(n, bits[per_layer : 2 * per_layer])
    table = table2[np.concatenate([perm, n + perm])]
    inds = np.nonzero(had)[0]
    table[np.concatenate([inds, inds + n])] = table[np.concatenate([inds + n, inds])]
    return CliffordTableau.from_symplectic((table1 @ table) % 2, bits[2 * per_layer :])


# -- exhaustive enumeration for N <= 2 ------------------------------------------


def _generators(n: int) -> list[Gate]:
    gens: list[Gate] = []
    for a in range(n):
        gens += [("h", a), ("s", a), ("x", a), ("z", a)]
    if n == 2:
        gens.append(("cx", 0, 1))
    return gens


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[tuple[CliffordTableau, ...], np.ndarray]:
    gens = _generators(n)
    gate_u = [circuit_unitary(n, [g]) for g in gens]
    start = CliffordTableau.identity(n)
    seen = {start.key(): 0}
    tabs = [start]
    unitaries = [np.eye(1 << n, dtype=complex)]
    head = 0
    while head < len(tabs):
        tab, u = tabs[head], unitaries[head]
        head += 1
        for g, gu in zip(gens, gate_u):
            nxt = tab.copy()
            nxt.apply_gate(g)
            k = nxt.key()
            if k not in seen:
                seen[k] = len(tabs)
                tabs.append(nxt)
                unitaries.append(gu @ u)
    return tuple(tabs), np.array(unitaries)


def enumerate_cliffords(n_qubits: int) -> Iterator[CliffordTableau]:
    """Every Clifford modulo phase for N = 1 (24) or N = 2 (11,520)."""
    if n_qubits not in _CLIFFORD_ORDERS:
        raise NotImplementedError("exhaustive enumeration only for 1 or 2 qubits")
    for tab in _enumerate(n_qubits)[0]:
        yield tab.copy()


def clifford_group_unitaries(n_qubits: int) -> np.ndarray:
    """Dense unitaries aligned with ``enumerate_cliffords`` order (read-only)."""
    if n_qubits not in _CLIFFORD_ORDERS:
        raise NotImplementedError("exhaustive enumeration only for 1 or 2 qubits")
    u = _enumerate(n_qubits)[1]
    u.setflags(write=False)
    return u


@lru_cache(maxsize=None)
def _two_qubit_index() -> dict[bytes, int]:
    return {tab.key(): i for i, tab in enumerate(_enumerate(2)[0])}


def random_two_qubit_clifford(rng: np.random.Generator) -> tuple[np.ndarray, CliffordTableau]:
    """Uniform two-qubit Clifford as (4x4 unitary in kron(site_i, site_j) basis, tableau).

    The tableau acts with qubit 0 = site_j and qubit 1 = site_i, matching
    ``state.apply_two_qubit`` where the first Kronecker factor is site_i.
    """
    tab = random_clifford(2, rng)
    u = clifford_group_unitaries(2)[_two_qubit_index()[tab.key()]]
    return u.copy(), tab


# -- stabilizer-state support ---------------------------------------------------


def gf2_rank(mat: np.ndarray) -> int:
    m = np.asarray(mat, dtype=np.uint8).copy() % 2
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivots = np.nonzero(m[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def stabilizer_participation_entropy(c: CliffordTableau) -> int:
    """S_q (any q) of C|0…0⟩: GF(2) rank of the stabilizer X-block."""
    n = c.n_qubits
    return gf2_rank(c.x[n:])
