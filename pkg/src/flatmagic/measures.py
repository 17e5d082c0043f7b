"""Participation and stabilizer entropies, flatness, and the size-scaling fit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .errors import UnsupportedParameters
from .pauli import pauli_spectrum
from .state import as_amplitudes

PROB_FLOOR = 1e-15

MeasureKind = Literal["ipr", "participation_entropy", "stabilizer_entropy", "flatness"]


@dataclass(frozen=True)
class MeasureReport:
    n_qubits: int
    q: float | None
    value: float
    kind: MeasureKind


@dataclass(frozen=True)
class FitResult:
    q: float | None
    d_q: float
    c_q: float
    residual: float


def _check_q(q: float):
    if not q > 0:
        raise ValueError(f"Renyi index must be positive, got {q}")


def participation_distribution(state) -> np.ndarray:
    p = np.abs(as_amplitudes(state)) ** 2
    p[p < PROB_FLOOR] = 0.0
    return p


def _ipr_from_probs(p: np.ndarray, q: float) -> float:
    nz = p[p > 0]
    return float(np.sum(nz**q))


def ipr(state, q: float) -> float:
    """Σ_σ p(σ)**q."""
    _check_q(q)
    return _ipr_from_probs(participation_distribution(state), q)


def _renyi_bits(weights: np.ndarray, q: float) -> float:
    w = weights[weights > 0]
    if q == 1:
        return float(-np.sum(w * np.log2(w)))
    return float(np.log2(np.sum(w**q)) / (1 - q))


def participation_entropy(state, q: float) -> float:
    _check_q(q)
    return _renyi_bits(participation_distribution(state), q)


def stabilizer_entropy(state, q: float, spectrum: np.ndarray | None = None) -> float:
    """Rényi-q entropy of the Pauli distribution ⟨P⟩²/d, minus N.

    Exhaustive over all 4**N strings; ``q = 1`` is the Shannon limit.
    """
    _check_q(q)
    e = pauli_spectrum(state) if spectrum is None else spectrum
    d = e.shape[0]
    xi = e.reshape(-1) ** 2 / d
    xi[xi < PROB_FLOOR] = 0.0
    value = _renyi_bits(xi, q) - np.log2(d)
    return max(value, 0.0) if value > -1e-12 else value


def flatness_from_probs(p: np.ndarray) -> float:
    """I₃ − I₂² of a (quasi)probability vector; no clipping applied."""
    p = np.asarray(p, dtype=float)
    return float(np.sum(p**3) - np.sum(p**2) ** 2)


def multifractal_flatness(state) -> float:
    return flatness_from_probs(participation_distribution(state))


def batch_flatness(amplitudes: np.ndarray) -> np.ndarray:
    """Flatness of each row of a (k, d) amplitude array."""
    p = np.abs(amplitudes) ** 2
    return np.sum(p**3, axis=-1) - np.sum(p**2, axis=-1) ** 2


def generalized_flatness(state, q: float, m: int, *, k: float | None = None) -> float:
    """I_q − I_s**m with s = (k − 1 + q)/m.

    The offset ``k`` has no agreed value; it must be given explicitly except
    at (q, m) = (3, 2), where every reading must reproduce I₃ − I₂² (k = 2).
    ``k = m`` is the choice for which Jensen's inequality gives a nonnegative
    result for m ≥ 1.
    """
    if k is None:
        if (q, m) != (3, 2):
            raise UnsupportedParameters(
                f"offset k must be given explicitly for (q, m) = ({q}, {m})"
            )
        k = 2
    if m < 1 or int(m) != m:
        raise ValueError("m must be a positive integer")
    s = (k - 1 + q) / m
    if not (q > 0 and s > 0):
        raise UnsupportedParameters(f"invalid indices q={q}, s={s}")
    p = participation_distribution(state)
    return _ipr_from_probs(p, q) - _ipr_from_probs(p, s) ** m


def measure_report(state, kind: MeasureKind, q: float | None = None) -> MeasureReport:
    n = as_amplitudes(state).size.bit_length() - 1
    if kind == "ipr":
        value = ipr(state, q)
    elif kind == "participation_entropy":
        value = participation_entropy(state, q)
    elif kind == "stabilizer_entropy":
        value = stabilizer_entropy(state, q)
    elif kind == "flatness":
        value = multifractal_flatness(state)
    else:
        raise ValueError(f"unknown measure {kind!r}")
    return MeasureReport(n, q, value, kind)


def fit_scaling(points: Iterable[tuple[float, float]], q: float | None = None) -> FitResult:
    """Least-squares line S_q = D_q N + c_q through (N, S_q) points."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or np.unique(pts[:, 0]).size < 2:
        raise ValueError("need at least two points with distinct N")
    design = np.column_stack([pts[:, 0], np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(design, pts[:, 1], rcond=None)
    resid = float(np.sum((design @ coef - pts[:, 1]) ** 2))
    return FitResult(q=q, d_q=float(coef[0]), c_q=float(coef[1]), residual=resid)
