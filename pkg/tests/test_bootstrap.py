import numpy as np
import pytest
from conftest import int_seq

from entrate import (
    BootstrapConfig,
    EstimatorSpec,
    bootstrap_se,
    choose_p,
    stationary_bootstrap_sample,
)
from entrate.simulate import benchmark_matrix, simulate_chain


class TestChooseP:
    def test_power_of_two(self):
        assert choose_p(1.0, 1024) == pytest.approx(0.1)

    def test_zero_entropy_clamped_with_warning(self):
        with pytest.warns(UserWarning, match="clamped"):
            p = choose_p(0.0, 100)
        assert p == 1e-6

    def test_above_one_clamped(self):
        with pytest.warns(UserWarning, match="clamped"):
            assert choose_p(20.0, 100) == 1.0

    def test_mean_block_length(self):
        # H = 2.8934 at n = 1000 targets blocks of mean length about 3.44.
        p = choose_p(2.8934, 1000)
        assert 1.0 / p == pytest.approx(3.44, abs=0.01)


class TestStationaryBootstrapSample:
    def test_length_and_alphabet_preserved(self):
        rng = np.random.default_rng(2)
        seq = int_seq([0, 1, 2, 1, 0, 2, 2, 1], kappa=3)
        out = stationary_bootstrap_sample(seq, 0.3, rng)
        assert out.length == seq.length
        assert set(out.states.tolist()) <= {0, 1, 2}

    def test_constant_sequence_unchanged(self):
        seq = int_seq([1] * 20, kappa=2)
        for p in (0.05, 0.5, 1.0):
            out = stationary_bootstrap_sample(seq, p, np.random.default_rng(3))
            assert out.states.tolist() == seq.states.tolist()

    def test_tiny_p_yields_wrapped_rotation(self):
        # With p = 1e-6 the first block almost surely covers the whole output,
        # so the sample is a wrap-around rotation of the input.
        seq = int_seq([0, 1, 2], kappa=3)
        out = stationary_bootstrap_sample(seq, 1e-6, np.random.default_rng(5))
        rotations = {(0, 1, 2), (1, 2, 0), (2, 0, 1)}
        assert tuple(out.states.tolist()) in rotations

    def test_p_one_is_iid_position_sampling(self):
        # Geometric(1) blocks have length exactly 1.
        rng = np.random.default_rng(7)
        seq = int_seq(list(range(10)), kappa=10)
        out = stationary_bootstrap_sample(seq, 1.0, rng)
        counts = np.bincount(out.states, minlength=10)
        assert counts.sum() == 10

    def test_determinism(self):
        seq = int_seq([0, 1, 0, 0, 1, 1, 0, 1], kappa=2)
        a = stationary_bootstrap_sample(seq, 0.4, np.random.default_rng(11))
        b = stationary_bootstrap_sample(seq, 0.4, np.random.default_rng(11))
        assert np.array_equal(a.states, b.states)

    def test_block_length_distribution(self):
        # Geometric(p) on {1, 2, ...} has mean 1/p; at p = 0.2, 1e5 draws sit
        # within 2% of 5.
        rng = np.random.default_rng(13)
        draws = rng.geometric(0.2, size=100_000)
        assert draws.min() >= 1
        assert abs(draws.mean() - 5.0) / 5.0 < 0.02

    def test_invalid_p(self):
        seq = int_seq([0, 1], kappa=2)
        with pytest.raises(ValueError):
            stationary_bootstrap_sample(seq, 0.0, np.random.default_rng(1))
        with pytest.raises(ValueError):
            stationary_bootstrap_sample(seq, 1.5, np.random.default_rng(1))


class TestBootstrapSe:
    def test_constant_sequence_zero_se(self):
        seq = int_seq([1] * 30, kappa=2)
        result = bootstrap_se(
            seq, EstimatorSpec("empirical", 1), BootstrapConfig(p=0.5, replicates=20, seed=1)
        )
        assert result.standard_error == 0.0
        assert result.estimates.tolist() == [0.0] * 20

    def test_determinism(self):
        rng = np.random.default_rng(17)
        seq = int_seq(rng.integers(0, 3, 200), kappa=3)
        config = BootstrapConfig(p=0.25, replicates=25, seed=99)
        a = bootstrap_se(seq, EstimatorSpec("empirical", 1), config)
        b = bootstrap_se(seq, EstimatorSpec("empirical", 1), config)
        assert np.array_equal(a.estimates, b.estimates)
        assert a.standard_error == b.standard_error

    def test_estimator_tag_and_point_estimate(self):
        rng = np.random.default_rng(19)
        seq = int_seq(rng.integers(0, 3, 300), kappa=3)
        result = bootstrap_se(
            seq, EstimatorSpec("swlz"), BootstrapConfig(p=0.3, replicates=10, seed=5)
        )
        assert result.estimator_tag == "swlz"
        assert result.point_estimate > 0

    def test_failure_policies(self):
        # Rare symbol: some resamples never leave state 0, making the eigen
        # method fail on those replicates.
        seq = int_seq([0] * 60 + [1] + [0] * 60 + [1, 0], kappa=2)
        spec = EstimatorSpec("eigen", 1)
        config = BootstrapConfig(p=0.9, replicates=40, seed=21)
        zero = bootstrap_se(seq, spec, config, failure_policy="zero")
        drop = bootstrap_se(seq, spec, config, failure_policy="drop")
        assert zero.n_failures > 0
        assert zero.n_failures == drop.n_failures
        assert len(zero.estimates) == 40
        assert len(drop.estimates) == 40 - drop.n_failures
        assert (zero.estimates == 0.0).sum() >= zero.n_failures

    def test_original_sequence_errors_propagate(self):
        seq = int_seq([0] * 50 + [1], kappa=2)
        with pytest.raises(ValueError):
            bootstrap_se(
                seq, EstimatorSpec("eigen", 1), BootstrapConfig(p=0.5, replicates=5, seed=1)
            )

    def test_conservative_for_low_entropy_chain(self):
        # Median bootstrap SE across 100 simulated series stays above 0.8x the
        # empirical SE of the point estimates, at n = 1000 and n = 5000.
        P = benchmark_matrix("low")
        spec = EstimatorSpec("empirical", 1)
        for n in (1000, 5000):
            rng = np.random.default_rng(42)
            points = []
            boot_ses = []
            for k in range(100):
                seq = simulate_chain(P, n, rng=rng)
                from entrate import estimate_direct

                h = estimate_direct(seq).value
                points.append(h)
                config = BootstrapConfig(
                    p=choose_p(h, n), replicates=100, seed=1000 + k
                )
                boot_ses.append(bootstrap_se(seq, spec, config).standard_error)
            empirical_se = np.std(points, ddof=1)
            assert np.median(boot_ses) >= 0.8 * empirical_se


class TestBootstrapConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            BootstrapConfig(p=0.0, replicates=10, seed=1)
        with pytest.raises(ValueError):
            BootstrapConfig(p=0.5, replicates=1, seed=1)
