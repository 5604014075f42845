"""Tests for labeled seeds and vectorized hashing."""
import numpy as np

from symnorm.hashing import bucket_and_sign, derive_seed, mix64, sampled, seed_family, uniform01


class TestDeriveSeed:
    """Test labeled seed derivation."""

    def test_deterministic(self):
        """Test identical labels give identical seeds."""
        assert derive_seed(7, "countsketch", 3) == derive_seed(7, "countsketch", 3)

    def test_labels_separate(self):
        """Test different labels or roots give different seeds."""
        seeds = {
            derive_seed(7, "countsketch", 3),
            derive_seed(7, "countsketch", 4),
            derive_seed(7, "levels", 3),
            derive_seed(8, "countsketch", 3),
        }
        assert len(seeds) == 4

    def test_range(self):
        """Test seeds are unsigned 64-bit."""
        seed = derive_seed(-1, "x")
        assert 0 <= seed < 1 << 64


class TestSeedFamily:
    """Test seed arrays."""

    def test_prefix_stable(self):
        """Test growing the leading axis keeps existing seeds."""
        small = seed_family(3, "countsketch", 0, shape=(4, 5))
        large = seed_family(3, "countsketch", 0, shape=(9, 5))
        assert np.array_equal(large[:4], small)

    def test_distinct(self):
        """Test seeds inside a family differ."""
        family = seed_family(3, "levels", "member", 2, shape=(64,))
        assert np.unique(family).size == 64


class TestKeyedHashing:
    """Test bucket, sign and membership hashing."""

    def test_mix_broadcasts(self):
        """Test a column of seeds against a row of keys."""
        seeds = seed_family(1, "t", shape=(3, 1))
        keys = np.arange(10)
        out = mix64(keys, seeds)
        assert out.shape == (3, 10)
        assert np.array_equal(out[1], mix64(keys, seeds[1, 0]))

    def test_bucket_and_sign_ranges(self):
        """Test buckets lie in [0, width) and signs are +-1."""
        buckets, signs = bucket_and_sign(np.arange(5000), np.uint64(99), 37)
        assert buckets.min() >= 0 and buckets.max() < 37
        assert set(np.unique(signs).tolist()) == {-1, 1}
        assert abs(signs.mean()) < 0.05

    def test_sampled_rate(self):
        """Test membership at level phi has rate 2^-phi."""
        keys = np.arange(200_000)
        assert sampled(keys, np.uint64(5), 0).all()
        rate = sampled(keys, np.uint64(5), 3).mean()
        assert 0.11 < rate < 0.14

    def test_sampled_nested(self):
        """Test deeper levels only keep members of shallower ones."""
        keys = np.arange(50_000)
        deep = sampled(keys, np.uint64(12), 4)
        shallow = sampled(keys, np.uint64(12), 2)
        assert not (deep & ~shallow).any()

    def test_uniform01(self):
        """Test uniform draws are reproducible and in [0, 1)."""
        draws = [uniform01(4, "x", i) for i in range(200)]
        assert all(0.0 <= d < 1.0 for d in draws)
        assert uniform01(4, "x", 0) == draws[0]
        assert 0.3 < float(np.mean(draws)) < 0.7
