"""Closed-form reference values: single qubit, product states, Haar moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import UnsupportedParameters
from .state import Statevector


def single_qubit_m_q(theta: float, phi: float, q: float) -> float:
    if q == 1:
        raise UnsupportedParameters("no closed form at q = 1")
    if not q > 0:
        raise ValueError("q must be positive")
    omega = (np.sin(theta) * np.sin(phi)) ** (2 * q) + (np.sin(theta) * np.cos(phi)) ** (2 * q)
    val = float(np.log2((1 + np.cos(theta) ** (2 * q) + omega) / 2) / (1 - q))
    return 0.0 if abs(val) < 1e-15 else val


def single_qubit_s_q(theta: float, q: float) -> float:
    if q == 1:
        raise UnsupportedParameters("use the numeric Shannon limit at q = 1")
    if not q > 0:
        raise ValueError("q must be positive")
    return float(np.log2(np.cos(theta / 2) ** (2 * q) + np.sin(theta / 2) ** (2 * q)) / (1 - q))


def hadamard_state_flatness(theta: float, phi: float) -> float:
    """Flatness of H applied to the Bloch state (θ, φ)."""
    a = (np.sin(theta) * np.cos(phi)) ** 2
    return float((a - a**2) / 4)


def single_qubit_orbit_flatness(theta: float, phi: float) -> float:
    """Flatness averaged over the 24 single-qubit Cliffords."""
    s2 = np.sin(theta) ** 2
    return float(s2 * (-2 * s2 * np.cos(4 * phi) + 7 * np.cos(2 * theta) + 9) / 96)


def product_state_reference(theta: float, phi: float, n_qubits: int, q: float) -> tuple[float, float]:
    """(M_q, S_q) of the N-fold product of a Bloch state."""
    return n_qubits * single_qubit_m_q(theta, phi, q), n_qubits * single_qubit_s_q(theta, q)


# -- Haar moments -----------------------------------------------------------------


@dataclass(frozen=True)
class HaarMomentSpec:
    d: int
    q: int
    r: int

    def __post_init__(self):
        if self.q < 1 or self.r < 1:
            raise ValueError("q and r must be positive integers")
        if self.d < 2 or self.d & (self.d - 1):
            raise ValueError("d must be a power of two")


def partitions(r: int) -> Iterator[list[tuple[int, int]]]:
    """Partitions of r as [(part, multiplicity), ...], parts decreasing."""

    def rec(remaining: int, max_part: int) -> Iterator[list[int]]:
        if remaining == 0:
            yield []
            return
        for part in range(min(remaining, max_part), 0, -1):
            for rest in rec(remaining - part, part):
                yield [part] + rest

    for parts in rec(r, r):
        grouped: list[tuple[int, int]] = []
        for p in parts:
            if grouped and grouped[-1][0] == p:
                grouped[-1] = (p, grouped[-1][1] + 1)
            else:
                grouped.append((p, 1))
        yield grouped


def _rising(d: int, k: int) -> int:
    return math.prod(d + j for j in range(k))


def _falling(d: int, k: int) -> int:
    return math.prod(d - j for j in range(k))


def haar_ipr_moment_exact(spec: HaarMomentSpec) -> Fraction:
    """E over Haar states of I_q**r as an exact rational.

    Sums over partitions λ of r; each contributes (number of set partitions
    of r with block sizes λ) × (ordered distinct basis labels for the
    blocks) × Π (q·block)!, over d(d+1)…(d+rq−1).
    """
    d, q, r = spec.d, spec.q, spec.r
    total = 0
    for lam in partitions(r):
        n_blocks = sum(n for _, n in lam)
        a_lam = math.factorial(r) // (
            math.prod(math.factorial(part) ** n for part, n in lam) * math.prod(math.factorial(n) for _, n in lam)
        )
        weight = math.prod(math.factorial(part * q) ** n for part, n in lam)
        total += _falling(d, n_blocks) * weight * a_lam
    return Fraction(total, _rising(d, r * q))


def haar_ipr_moment(spec: HaarMomentSpec) -> float:
    return float(haar_ipr_moment_exact(spec))


def haar_mean_flatness_exact(d: int) -> Fraction:
    if d < 2:
        raise ValueError("d must be at least 2")
    return Fraction(2 * (d - 1), (d + 1) * (d + 2) * (d + 3))


def haar_mean_flatness(d: int) -> float:
    return float(haar_mean_flatness_exact(d))


def haar_flatness_variance_exact(d: int) -> Fraction:
    if d < 2:
        raise ValueError("d must be at least 2")
    num = 8 * (17 * d**5 + 42 * d**4 - 106 * d**3 - 72 * d**2 + 449 * d - 330)
    den = (d + 1) ** 2 * (d + 2) ** 2 * (d + 3) ** 2 * (d + 4) * (d + 5) * (d + 6) * (d + 7)
    return Fraction(num, den)


def haar_flatness_std(d: int) -> float:
    """Standard deviation of the flatness of a single Haar-random state."""
    return math.sqrt(haar_flatness_variance_exact(d))


def haar_flatness_std_asymptotic(d: int) -> float:
    return 2 * math.sqrt(34) / d**2.5


def haar_mean_stabilizer_purity(d: int) -> float:
    """E[2^{-M₂}] over Haar states, 4/(d+3)."""
    return 4 / (d + 3)


def sample_haar_state(n_qubits: int, rng: np.random.Generator) -> Statevector:
    d = 1 << n_qubits
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return Statevector(v / np.linalg.norm(v))
