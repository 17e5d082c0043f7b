from __future__ import annotations

import math

import numpy as np
import pytest

from flatmagic.clifford import apply_clifford, random_clifford
from flatmagic.errors import UnsupportedParameters
from flatmagic.measures import stabilizer_entropy
from flatmagic.orbit import (
    estimate_m2,
    jackknife_m2,
    master_seed,
    orbit_average,
    orbit_average_exact,
    orbit_average_mc,
    orbit_moment_samples,
    orbit_moments_exact,
    running_m2_error,
    samples_to_accuracy,
    theorem_rhs,
)
from flatmagic.pauli import xi_norm
from flatmagic.state import prepare_bloch, product_state, rxx_state, zero_state

from conftest import T_ANGLES, random_state

PROTOCOLS = ["global", "local_walk", "layer_walk"]


def stabilizer(n, seed=0):
    return apply_clifford(zero_state(n), random_clifford(n, np.random.default_rng(seed)))


class TestTheoremRhs:
    def test_values(self):
        assert theorem_rhs(0.0, 2) == 0
        assert theorem_rhs(math.log2(4 / 3), 2) == pytest.approx(1 / 24)
        assert theorem_rhs(math.log2(4 / 3), 4) == pytest.approx(1 / 60)


class TestExact:
    @pytest.mark.parametrize("n", [1, 2])
    def test_stabilizer(self, n):
        est = orbit_average_exact(stabilizer(n))
        assert est.mean_flatness == pytest.approx(0, abs=1e-15)
        assert est.std_error == 0 and est.protocol == "exact"

    def test_t_state(self, t_state):
        est = orbit_average_exact(t_state)
        assert est.mean_flatness == pytest.approx(1 / 24, abs=1e-14)
        assert est.m2_estimate == pytest.approx(math.log2(4 / 3), abs=1e-12)
        assert est.n_samples == 24

    def test_rxx_quarter(self):
        assert orbit_average_exact(rxx_state(math.pi / 4)).mean_flatness == pytest.approx(1 / 60, abs=1e-14)

    def test_theorem_random_states(self, rng):
        for n, count in [(1, 50), (2, 10)]:
            for _ in range(count):
                s = random_state(n, rng)
                rhs = theorem_rhs(stabilizer_entropy(s, 2), 2**n)
                assert abs(orbit_average_exact(s).mean_flatness - rhs) < 1e-10

    def test_too_many_qubits(self):
        with pytest.raises(UnsupportedParameters):
            orbit_average_exact(zero_state(3))

    def test_dispatch(self, t_state):
        assert orbit_average(t_state, "exact").mean_flatness == pytest.approx(1 / 24)


class TestMomentIdentities:
    def test_t_state_moments(self, t_state):
        i3, i2sq = orbit_moments_exact(t_state)
        assert i3 == pytest.approx(0.5, abs=1e-14)
        assert i2sq == pytest.approx(11 / 24, abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2])
    def test_corrected_sign_holds_exactly(self, n, rng):
        d = 2**n
        for _ in range(5):
            s = random_state(n, rng)
            i3, i2sq = orbit_moments_exact(s)
            assert i3 == pytest.approx(6 / ((d + 1) * (d + 2)), abs=1e-12)
            assert i2sq == pytest.approx((4 + 2 * d * xi_norm(s)) / ((d + 1) * (d + 2)), abs=1e-12)

    def test_printed_sign_fails(self, t_state):
        d = 2
        _, i2sq = orbit_moments_exact(t_state)
        assert abs(i2sq - (4 - 2 * d * xi_norm(t_state)) / ((d + 1) * (d + 2))) > 0.1

    @pytest.mark.parametrize("n", [3, 4])
    def test_mc_moments(self, n, rng):
        d = 2**n
        s = random_state(n, rng)
        m = orbit_moment_samples(s, "global", 4000, np.random.SeedSequence(100 + n))
        root = math.sqrt(m.shape[0])
        i3_target = 6 / ((d + 1) * (d + 2))
        i2_target = (4 + 2 * d * xi_norm(s)) / ((d + 1) * (d + 2))
        assert abs(m[:, 0].mean() - i3_target) < 3 * m[:, 0].std(ddof=1) / root
        assert abs(m[:, 1].mean() - i2_target) < 3 * m[:, 1].std(ddof=1) / root


class TestEstimateM2:
    def test_stabilizer(self):
        est = estimate_m2(0.0, 0.0, 8)
        assert est.m2 == 0 and not est.out_of_range

    def test_t_state_inversion(self):
        assert estimate_m2(1 / 24, 0.0, 2).m2 == pytest.approx(math.log2(4 / 3), abs=1e-14)

    @pytest.mark.parametrize("mean", [1 / 6, 0.2])
    def test_out_of_range(self, mean):
        est = estimate_m2(mean, 0.01, 2)
        assert est.out_of_range and math.isnan(est.m2)

    def test_interior_not_flagged(self):
        assert not estimate_m2(1 / 12, 0.0, 2).out_of_range

    def test_delta_method(self):
        d, f, se = 4, 0.01, 1e-3
        scale = (d + 1) * (d + 2) / 2
        expected = scale * se / (math.log(2) * (1 - scale * f))
        assert estimate_m2(f, se, d).m2_std_error == pytest.approx(expected)

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            estimate_m2(0.0, 0.0, 1)


class TestMonteCarlo:
    @pytest.mark.parametrize("protocol", PROTOCOLS)
    def test_stabilizer_samples_zero(self, protocol):
        m = orbit_moment_samples(stabilizer(4), protocol, 200, np.random.SeedSequence(1))
        # rounding accumulates along a walk; 1e-12 is the flatness floor
        assert np.max(np.abs(m[:, 0] - m[:, 1])) < 1e-12

    def test_t_state_global(self, t_state):
        est = orbit_average_mc(t_state, "global", 100_000, np.random.SeedSequence(7))
        assert abs(est.mean_flatness - 1 / 24) < 3 * est.std_error

    def test_too_few_samples(self, t_state):
        with pytest.raises(ValueError):
            orbit_average_mc(t_state, "global", 1)

    def test_unknown_protocol(self, t_state):
        with pytest.raises(ValueError):
            orbit_average_mc(t_state, "teleport", 10)

    def test_std_error_definition(self, rng):
        s = random_state(3, rng)
        ss = np.random.SeedSequence(3)
        est = orbit_average_mc(s, "local_walk", 500, ss)
        m = orbit_moment_samples(s, "local_walk", 500, ss)
        f = m[:, 0] - m[:, 1]
        assert est.mean_flatness == pytest.approx(f.mean())
        assert est.std_error == pytest.approx(f.std(ddof=1) / math.sqrt(500))

    @pytest.mark.parametrize("n", [3, 4])
    def test_protocol_equivalence(self, n, rng):
        s = random_state(n, rng)
        ests = [orbit_average_mc(s, p, 6000, np.random.SeedSequence(n)) for p in PROTOCOLS]
        for a in ests:
            for b in ests:
                assert abs(a.mean_flatness - b.mean_flatness) < 3 * math.hypot(a.std_error, b.std_error) + 1e-15

    def test_haar_ensemble_grand_mean(self):
        rng = np.random.default_rng(8)
        d = 8
        means = [orbit_average_mc(random_state(3, rng), "global", 100, np.random.SeedSequence(k)).mean_flatness for k in range(200)]
        assert np.mean(means) == pytest.approx(7 / 495, rel=0.05)


class TestDeterminism:
    def test_global_independent_of_workers(self, rng):
        s = random_state(3, rng)
        a = orbit_moment_samples(s, "global", 300, np.random.SeedSequence(9), workers=1)
        b = orbit_moment_samples(s, "global", 300, np.random.SeedSequence(9), workers=3)
        np.testing.assert_array_equal(a, b)

    def test_chains_independent_of_workers(self, rng):
        s = random_state(3, rng)
        a = orbit_moment_samples(s, "local_walk", 300, np.random.SeedSequence(9), n_chains=3, workers=1)
        b = orbit_moment_samples(s, "local_walk", 300, np.random.SeedSequence(9), n_chains=3, workers=2)
        np.testing.assert_array_equal(a, b)

    def test_master_seed_forms(self):
        assert master_seed(5).entropy == 5
        ss = np.random.SeedSequence(5)
        assert master_seed(ss) is ss
        assert isinstance(master_seed(np.random.default_rng(1)), np.random.SeedSequence)

    def test_burn_in_shifts_chain(self, rng):
        s = random_state(3, rng)
        a = orbit_moment_samples(s, "local_walk", 50, np.random.SeedSequence(4))
        b = orbit_moment_samples(s, "local_walk", 40, np.random.SeedSequence(4), burn_in=10)
        np.testing.assert_allclose(a[10:], b, atol=1e-15)


class TestSampleComplexity:
    def test_stabilizer_hits_minimum(self):
        res = samples_to_accuracy(stabilizer(3), "global", 0.1, np.random.SeedSequence(0), min_samples=100)
        assert res.n_samples == 100 and not res.saturated

    def test_saturation_flag(self, rng):
        res = samples_to_accuracy(random_state(5, rng), "local_walk", 1e-6, np.random.SeedSequence(0), max_samples=500, chunk=200)
        assert res.saturated and res.n_samples == 500

    def test_first_passage(self, t_state):
        res = samples_to_accuracy(product_state(t_state, 3), "local_walk", 0.1, np.random.SeedSequence(2))
        assert not res.saturated and res.m2_std_error < 0.1

    def test_invalid_target(self, t_state):
        with pytest.raises(ValueError):
            samples_to_accuracy(t_state, "global", 0.0)

    def test_error_decreases_with_samples(self, rng):
        s = random_state(4, rng)
        m = orbit_moment_samples(s, "global", 4000, np.random.SeedSequence(6))
        err = running_m2_error(m[:, 0] - m[:, 1], 16)
        n = np.arange(1, err.size + 1)
        ok = np.isfinite(err) & (n >= 50)
        slope = np.polyfit(np.log(n[ok]), np.log(err[ok]), 1)[0]
        assert slope < 0

    def test_jackknife_agrees_with_delta(self, rng):
        s = random_state(3, rng)
        m = orbit_moment_samples(s, "global", 5000, np.random.SeedSequence(12))
        f = m[:, 0] - m[:, 1]
        mean, se = jackknife_m2(f, 8)
        delta = estimate_m2(f.mean(), f.std(ddof=1) / math.sqrt(f.size), 8)
        assert mean == pytest.approx(delta.m2, abs=3 * delta.m2_std_error)
        assert se == pytest.approx(delta.m2_std_error, rel=0.5)


class TestSampleComplexityPrediction:
    """N_0.1 for Haar states follows from the exact Haar variance of F.

    With x = (d+1)(d+2)F/2 and E[1 - x] = 4/(d+3), the delta method gives
    N ~ ((d+1)(d+2) std(F) / (2 ln2 sigma (1 - x)))**2, which approaches
    N ∝ d only once d is large.
    """

    @staticmethod
    def predicted(d, sigma=0.1):
        from flatmagic.oracles import haar_flatness_std

        scale = (d + 1) * (d + 2) / 2
        return (scale * haar_flatness_std(d) / (math.log(2) * sigma * 4 / (d + 3))) ** 2

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_haar_matches_prediction(self, n):
        from flatmagic.oracles import sample_haar_state

        counts = []
        for r in range(7):
            s = sample_haar_state(n, np.random.default_rng([n, r]))
            counts.append(samples_to_accuracy(s, "local_walk", 0.1, np.random.SeedSequence([n, r, 1])).n_samples)
        ratio = np.median(counts) / self.predicted(2**n)
        assert 0.6 < ratio < 1.6

    def test_prediction_slope_below_one_until_large_n(self):
        logs = [math.log2(self.predicted(2**n)) for n in range(2, 16)]
        local = np.diff(logs)
        assert local[0] > 2 and local[-1] == pytest.approx(1, abs=0.05)
