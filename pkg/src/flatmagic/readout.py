"""Simulated two-qubit device: shot sampling, readout confusion, passive mitigation.

Probability vectors are in computational index order (index = int(label, 2))
unless ``ordering="model"`` is passed, in which case they follow the
model's ``basis_order``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .clifford import clifford_group_unitaries
from .errors import ModelError
from .measures import flatness_from_probs, stabilizer_entropy
from .orbit import master_seed, substream, theorem_rhs
from .state import apply_rxx, as_amplitudes, new_basis_state, rxx_state

DEVICE_BASIS_ORDER = ("01", "00", "10", "11")


@dataclass(frozen=True)
class ReadoutModel:
    p: float
    q: float
    basis_order: tuple[str, ...] = field(default=DEVICE_BASIS_ORDER)

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or 1 - 2 * self.p - self.q < 0:
            raise ModelError(f"invalid confusion weights p={self.p}, q={self.q}")
        if sorted(self.basis_order) != ["00", "01", "10", "11"]:
            raise ModelError(f"basis order must list the four 2-qubit labels, got {self.basis_order}")

    @property
    def matrix(self) -> np.ndarray:
        """A in ``basis_order``; column j is the readout distribution of label j."""
        p, q = self.p, self.q
        a = 1 - 2 * p - q
        return np.array([[a, p, p, q], [p, a, q, p], [p, q, a, p], [q, p, p, a]])

    @property
    def _perm(self) -> np.ndarray:
        # _perm[j] = computational index of the j-th model label
        return np.array([int(label, 2) for label in self.basis_order])

    @property
    def computational_matrix(self) -> np.ndarray:
        a = np.zeros((4, 4))
        perm = self._perm
        a[np.ix_(perm, perm)] = self.matrix
        return a

    def to_model_order(self, vec) -> np.ndarray:
        return np.asarray(vec, dtype=float)[self._perm]

    def from_model_order(self, vec) -> np.ndarray:
        out = np.empty(4)
        out[self._perm] = np.asarray(vec, dtype=float)
        return out


class ShotHistogram(NamedTuple):
    counts: np.ndarray  # computational index order
    total: int

    @property
    def labels(self) -> list[str]:
        n = self.counts.size.bit_length() - 1
        return [format(i, f"0{n}b") for i in range(self.counts.size)]

    def as_dict(self) -> dict[str, int]:
        return {lab: int(c) for lab, c in zip(self.labels, self.counts)}

    def frequencies(self) -> np.ndarray:
        return self.counts / self.total


class MitigationResult(NamedTuple):
    probabilities: np.ndarray
    quasiprobabilities: np.ndarray
    clipped: bool


def sample_counts(probs, n_shots: int, rng: np.random.Generator) -> ShotHistogram:
    if n_shots < 1:
        raise ValueError("n_shots must be at least 1")
    p = np.clip(np.asarray(probs, dtype=float), 0, None)
    return ShotHistogram(rng.multinomial(n_shots, p / p.sum()), n_shots)


def sample_shots(state, n_shots: int, rng: np.random.Generator) -> ShotHistogram:
    return sample_counts(np.abs(as_amplitudes(state)) ** 2, n_shots, rng)


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.shape != (4,):
        raise ValueError("expected a length-4 probability vector")
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    return p


def _matrix(model: ReadoutModel, ordering: str) -> np.ndarray:
    if ordering == "computational":
        return model.computational_matrix
    if ordering == "model":
        return model.matrix
    raise ValueError(f"unknown ordering {ordering!r}")


def apply_readout_noise(probs, model: ReadoutModel, ordering: str = "computational") -> np.ndarray:
    return _matrix(model, ordering) @ _check_probs(probs)


def mitigate_readout(noisy, model: ReadoutModel, ordering: str = "computational") -> MitigationResult:
    """A⁻¹·noisy, then clip negatives and renormalize (flagged)."""
    a = _matrix(model, ordering)
    try:
        quasi = np.linalg.solve(a, np.asarray(noisy, dtype=float))
    except np.linalg.LinAlgError:
        raise ModelError("confusion matrix is singular") from None
    if np.linalg.cond(a) > 1e12:
        raise ModelError("confusion matrix is numerically singular")
    clipped = bool(np.any(quasi < 0))
    probs = np.clip(quasi, 0, None)
    probs = probs / probs.sum()
    return MitigationResult(probs, quasi, clipped)


def fit_readout_model(confusion: np.ndarray, basis_order: Sequence[str] = DEVICE_BASIS_ORDER) -> ReadoutModel:
    """Least-squares (p, q) for an empirical 4x4 confusion matrix.

    ``confusion[:, j]`` is the measured distribution (computational order)
    after preparing computational basis state j.
    """
    probe = ReadoutModel(0.0, 0.0, tuple(basis_order))
    base = probe.computational_matrix
    dp = ReadoutModel(0.25, 0.0, tuple(basis_order)).computational_matrix - base
    dq = ReadoutModel(0.0, 0.5, tuple(basis_order)).computational_matrix - base
    design = np.column_stack([dp.ravel() / 0.25, dq.ravel() / 0.5])
    (p, q), *_ = np.linalg.lstsq(design, (np.asarray(confusion) - base).ravel(), rcond=None)
    return ReadoutModel(float(max(p, 0.0)), float(max(q, 0.0)), tuple(basis_order))


def calibration_experiment(
    model: ReadoutModel, n_shots: int, rng, theta: float = 0.01
) -> np.ndarray:
    """Empirical confusion matrix from the four basis preparations with C = 1.

    Each basis state gets R_XX(θ) with a small θ before readout, as in the
    device calibration; the leak is O(θ²).
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    a = model.computational_matrix
    cols = []
    for j in range(4):
        prepared = apply_rxx(new_basis_state(2, format(j, "02b")), theta, 0, 1)
        ideal = np.abs(prepared.amplitudes) ** 2
        cols.append(sample_counts(a @ ideal, n_shots, gen).frequencies())
    return np.column_stack(cols)


@dataclass(frozen=True)
class DeviceRecord:
    theta: float
    f_dig: float
    f_corr: float
    f_ex: float
    sigma_stat: float
    sigma_dig: float
    n_realizations: int
    clipped_fraction: float


def device_experiment(
    theta_grid: Sequence[float],
    n_realizations: int,
    n_shots: int | None,
    model: ReadoutModel,
    rng=None,
    *,
    negativity: str = "keep",
) -> list[DeviceRecord]:
    """Noisy-readout estimate of the orbit-averaged flatness of R_XX(θ)|00⟩.

    ``n_shots=None`` uses exact noisy probabilities (infinite-shot limit).
    ``negativity`` selects how mitigated quasiprobabilities enter the
    flatness: ``"keep"`` uses them as is, which leaves the polynomial
    estimator unbiased up to shot noise; ``"clip"`` projects onto the
    simplex and biases F upward whenever the ideal distribution has zeros.
    """
    if n_realizations < 2:
        raise ValueError("need at least 2 realizations")
    if negativity not in ("clip", "keep"):
        raise ValueError(f"unknown negativity handling {negativity!r}")
    ss = master_seed(rng)
    group = clifford_group_unitaries(2)
    a = model.computational_matrix
    records = []
    for t_idx, theta in enumerate(theta_grid):
        gen = substream(ss, t_idx)
        psi = rxx_state(theta).amplitudes
        f_ex = theorem_rhs(stabilizer_entropy(psi, 2), 4)
        picks = gen.integers(len(group), size=n_realizations)
        f_dig = np.empty(n_realizations)
        f_corr = np.empty(n_realizations)
        clipped = 0
        for k, idx in enumerate(picks):
            ideal = np.abs(group[idx] @ psi) ** 2
            noisy = a @ ideal
            est = noisy if n_shots is None else sample_counts(noisy, n_shots, gen).frequencies()
            mit = mitigate_readout(est, model)
            clipped += mit.clipped
            f_dig[k] = flatness_from_probs(est)
            f_corr[k] = flatness_from_probs(mit.probabilities if negativity == "clip" else mit.quasiprobabilities)
        root_n = math.sqrt(n_realizations)
        records.append(
            DeviceRecord(
                theta=float(theta),
                f_dig=float(f_dig.mean()),
                f_corr=float(f_corr.mean()),
                f_ex=f_ex,
                sigma_stat=float(f_corr.std(ddof=1) / root_n),
                sigma_dig=float(f_dig.std(ddof=1) / root_n),
                n_realizations=n_realizations,
                clipped_fraction=clipped / n_realizations,
            )
        )
    return records
