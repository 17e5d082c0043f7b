"""Clifford-orbit averages of the multifractal flatness and M₂ inversion.

Protocols
---------
exact       every element of the Clifford group (N ≤ 2)
global      a fresh uniform N-qubit Clifford per sample
local_walk  random 2-qubit Clifford on a random bond (i, i+1 mod N), state kept
layer_walk  a brickwork layer of 2-qubit Cliffords, offset alternating by one
            site, before each record

Randomness is derived from one master seed: global samples use substream
``i`` for sample ``i`` and walk chains use substream ``c`` for chain ``c``,
so results do not depend on how work is split between processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .clifford import (
    apply_gates_inplace,
    clifford_group_unitaries,
    random_clifford,
    synthesize,
)
from .errors import UnsupportedParameters
from .measures import stabilizer_entropy
from .state import apply_2q_inplace, as_amplitudes

Protocol = Literal["global", "local_walk", "layer_walk", "exact"]
PROTOCOLS = ("global", "local_walk", "layer_walk", "exact")


@dataclass(frozen=True)
class OrbitEstimate:
    mean_flatness: float
    std_error: float
    n_samples: int
    m2_estimate: float
    m2_std_error: float
    protocol: str
    out_of_range: bool = False


class M2Estimate(NamedTuple):
    m2: float
    m2_std_error: float
    out_of_range: bool


class AccuracyResult(NamedTuple):
    n_samples: int
    saturated: bool
    m2_estimate: float
    m2_std_error: float


def theorem_rhs(m2: float, d: int) -> float:
    """Orbit-averaged flatness predicted from M₂: 2(1 − 2^−M₂)/((d+1)(d+2))."""
    return 2.0 * (1.0 - 2.0 ** (-m2)) / ((d + 1) * (d + 2))


def estimate_m2(mean_flatness: float, std_error: float, d: int) -> M2Estimate:
    """Invert the orbit-average relation; error propagated by the delta method."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    scale = (d + 1) * (d + 2) / 2.0
    arg = 1.0 - scale * mean_flatness
    if arg <= 0:
        return M2Estimate(math.nan, math.nan, True)
    m2 = -math.log2(arg)
    if m2 == 0.0:
        m2 = 0.0
    return M2Estimate(m2, scale * std_error / (math.log(2) * arg), False)


# -- randomness ----------------------------------------------------------------


def master_seed(rng) -> np.random.SeedSequence:
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2**63)))
    return np.random.SeedSequence(rng)


def substream(ss: np.random.SeedSequence, index: int) -> np.random.Generator:
    child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (index,))
    return np.random.Generator(np.random.PCG64(child))


# -- samplers -------------------------------------------------------------------


def _moments(psi: np.ndarray) -> tuple[float, float]:
    p = psi.real**2 + psi.imag**2
    i2 = float(np.dot(p, p))
    return float(np.dot(p * p, p)), i2 * i2


def _global_block(psi: np.ndarray, entropy, spawn_key, start: int, stop: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy, spawn_key=spawn_key)
    n = psi.size.bit_length() - 1
    out = np.empty((stop - start, 2))
    for row, i in enumerate(range(start, stop)):
        c = random_clifford(n, substream(ss, i))
        out[row] = _moments(apply_gates_inplace(psi.copy(), n, synthesize(c)))
    return out


class Walker:
    """One chain of the local or layer walk; ``take(k)`` yields k records."""

    def __init__(self, psi: np.ndarray, protocol: str, rng: np.random.Generator, burn_in: int = 0):
        self.n = psi.size.bit_length() - 1
        if self.n < 2:
            raise UnsupportedParameters("walk protocols need at least 2 qubits")
        if protocol not in ("local_walk", "layer_walk"):
            raise ValueError(f"not a walk protocol: {protocol!r}")
        self.psi = psi.copy()
        self.protocol = protocol
        self.rng = rng
        self.gates = clifford_group_unitaries(2)
        self.offset = 0
        for _ in range(burn_in):
            self._step()

    def _bond(self, i: int):
        u = self.gates[self.rng.integers(len(self.gates))]
        self.psi = apply_2q_inplace(self.psi, self.n, (i + 1) % self.n, i, u)

    def _step(self):
        if self.protocol == "local_walk":
            self._bond(int(self.rng.integers(self.n)))
        else:
            for j in range(self.n // 2):
                self._bond(self.offset + 2 * j)
            self.offset ^= 1

    def take(self, k: int) -> np.ndarray:
        out = np.empty((k, 2))
        for row in range(k):
            self._step()
            out[row] = _moments(self.psi)
        return out


def _walk_chain(psi, protocol, entropy, spawn_key, chain, count, burn_in) -> np.ndarray:
    ss = np.random.SeedSequence(entropy, spawn_key=spawn_key)
    return Walker(psi, protocol, substream(ss, chain), burn_in).take(count)


def orbit_moment_samples(
    state,
    protocol: str,
    n_samples: int,
    rng=None,
    *,
    burn_in: int = 0,
    n_chains: int = 1,
    workers: int = 1,
) -> np.ndarray:
    """Per-sample (I₃, I₂²) along the protocol's state sequence, shape (n, 2)."""
    psi = as_amplitudes(state)
    ss = master_seed(rng)
    key = tuple(ss.spawn_key)
    if protocol == "global":
        n_blocks = max(1, workers)
        edges = np.linspace(0, n_samples, n_blocks + 1).astype(int)
        jobs = [(psi, ss.entropy, key, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        fn = _global_block
    elif protocol in ("local_walk", "layer_walk"):
        counts = [n_samples // n_chains + (c < n_samples % n_chains) for c in range(n_chains)]
        jobs = [(psi, protocol, ss.entropy, key, c, k, burn_in) for c, k in enumerate(counts) if k]
        fn = _walk_chain
    else:
        raise ValueError(f"unknown sampling protocol {protocol!r}")
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, *zip(*jobs)))
    else:
        parts = [fn(*job) for job in jobs]
    return np.concatenate(parts)


def _summarize(values: np.ndarray, d: int, protocol: str) -> OrbitEstimate:
    n = values.size
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    est = estimate_m2(mean, se, d)
    return OrbitEstimate(mean, se, n, est.m2, est.m2_std_error, protocol, est.out_of_range)


def orbit_average_mc(
    state,
    protocol: str,
    n_samples: int,
    rng=None,
    *,
    burn_in: int = 0,
    n_chains: int = 1,
    workers: int = 1,
) -> OrbitEstimate:
    """Monte Carlo estimate of the orbit-averaged flatness with plain standard error."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    moments = orbit_moment_samples(
        state, protocol, n_samples, rng, burn_in=burn_in, n_chains=n_chains, workers=workers
    )
    d = as_amplitudes(state).size
    return _summarize(moments[:, 0] - moments[:, 1], d, protocol)


def orbit_moments_exact(state) -> tuple[float, float]:
    """Exact orbit means of (I₃, I₂²) over the whole Clifford group, N ≤ 2."""
    psi = as_amplitudes(state)
    n = psi.size.bit_length() - 1
    if n > 2:
        raise UnsupportedParameters("exact orbit average needs N <= 2; use Monte Carlo")
    orbit = clifford_group_unitaries(n) @ psi
    p = np.abs(orbit) ** 2
    i3 = np.sum(p**3, axis=1)
    i2 = np.sum(p**2, axis=1)
    return float(np.mean(i3)), float(np.mean(i2**2))


def orbit_average_exact(state) -> OrbitEstimate:
    psi = as_amplitudes(state)
    n = psi.size.bit_length() - 1
    if n > 2:
        raise UnsupportedParameters("exact orbit average needs N <= 2; use Monte Carlo")
    orbit = clifford_group_unitaries(n) @ psi
    p = np.abs(orbit) ** 2
    flat = np.sum(p**3, axis=1) - np.sum(p**2, axis=1) ** 2
    mean = float(np.mean(flat))
    est = estimate_m2(mean, 0.0, psi.size)
    return OrbitEstimate(mean, 0.0, flat.size, est.m2, est.m2_std_error, "exact", est.out_of_range)


def orbit_average(state, protocol: str, n_samples: int = 0, rng=None, **kwargs) -> OrbitEstimate:
    if protocol == "exact":
        return orbit_average_exact(state)
    return orbit_average_mc(state, protocol, n_samples, rng, **kwargs)


def jackknife_m2(values: np.ndarray, d: int, n_blocks: int = 20) -> tuple[float, float]:
    """Blocked jackknife of the M₂ estimate; an alternative to the delta method."""
    values = np.asarray(values, dtype=float)
    blocks = np.array_split(values, n_blocks)
    total = values.sum()
    loo = []
    for b in blocks:
        est = estimate_m2((total - b.sum()) / (values.size - b.size), 0.0, d)
        loo.append(est.m2)
    loo = np.array(loo)
    mean = float(np.mean(loo))
    return mean, float(np.sqrt((n_blocks - 1) / n_blocks * np.sum((loo - mean) ** 2)))


# -- sample complexity -------------------------------------------------------------


def running_m2_error(values: np.ndarray, d: int) -> np.ndarray:
    """Delta-method σ(M₂) after each prefix of ``values`` (inf where undefined)."""
    n = np.arange(1, values.size + 1)
    mean = np.cumsum(values) / n
    var = np.maximum(np.cumsum(values**2) / n - mean**2, 0.0) * n / np.maximum(n - 1, 1)
    se = np.sqrt(var / n)
    scale = (d + 1) * (d + 2) / 2.0
    arg = 1.0 - scale * mean
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(arg > 0, scale * se / (math.log(2) * arg), np.inf)
    err[0] = np.inf
    return err


def samples_to_accuracy(
    state,
    protocol: str,
    target_sigma: float,
    rng=None,
    max_samples: int = 10**6,
    *,
    min_samples: int = 100,
    chunk: int = 2000,
) -> AccuracyResult:
    """Smallest sample count at which the running σ(M₂) first drops below target."""
    if not target_sigma > 0:
        raise ValueError("target_sigma must be positive")
    psi = as_amplitudes(state)
    d = psi.size
    ss = master_seed(rng)
    if protocol in ("local_walk", "layer_walk"):
        walker = Walker(psi, protocol, substream(ss, 0))
        draw = lambda start, k: walker.take(k)  # noqa: E731
    elif protocol == "global":
        draw = lambda start, k: _global_block(psi, ss.entropy, tuple(ss.spawn_key), start, start + k)  # noqa: E731
    else:
        raise ValueError(f"unknown sampling protocol {protocol!r}")
    values = np.empty(0)
    while values.size < max_samples:
        k = min(chunk, max_samples - values.size)
        m = draw(values.size, k)
        values = np.concatenate([values, m[:, 0] - m[:, 1]])
        err = running_m2_error(values, d)
        hits = np.nonzero(err[min_samples - 1 :] < target_sigma)[0]
        if hits.size:
            n_hit = int(hits[0]) + min_samples
            est = estimate_m2(float(np.mean(values[:n_hit])), 0.0, d)
            return AccuracyResult(n_hit, False, est.m2, float(err[n_hit - 1]))
        chunk = min(2 * chunk, 10**5)
    est = estimate_m2(float(np.mean(values)), 0.0, d)
    return AccuracyResult(values.size, True, est.m2, float(running_m2_error(values, d)[-1]))


def exact_m2(state) -> float:
    return stabilizer_entropy(state, 2)
