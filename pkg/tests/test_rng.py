"""Counter-based RNG: correctness of the masked-integer mixing."""

import numpy as np

from reinsgame._rng import GOLDEN, mix64, to_signed64, uniform_at

MASK = (1 << 64) - 1


def reference_mix64(z: int) -> int:
    """Straightforward SplitMix64 finalizer in plain modular arithmetic."""
    z &= MASK
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK
    return z ^ (z >> 31)


def reference_uniform(seed: int, index: int) -> float:
    z = reference_mix64((seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK)
    return (z >> 11) * 2.0**-53


class TestMixing:
    def test_mix64_matches_reference(self):
        for z in (0, 1, 42, 2**63 - 1, -1, -(2**62), 987654321987654321):
            got = int(mix64(z)) & MASK
            assert got == reference_mix64(z & MASK)

    def test_uniforms_match_reference(self):
        for seed in (0, 1, -123456789, 2**62):
            s = to_signed64(seed)
            for idx in (0, 1, 2, 57, 10**6):
                assert uniform_at(s, idx) == reference_uniform(seed, idx)

    def test_to_signed64(self):
        assert to_signed64(0) == 0
        assert to_signed64(2**63) == -(2**63)
        assert to_signed64(MASK) == -1
        assert to_signed64(-1) == -1
        assert to_signed64(2**64 + 5) == 5

    def test_golden_constant_is_signed_weyl_increment(self):
        assert (GOLDEN & MASK) == 0x9E3779B97F4A7C15


class TestUniformQuality:
    def test_moments(self):
        n = 200_000
        draws = np.array([uniform_at(991, i) for i in range(n)])
        assert np.all((draws >= 0.0) & (draws < 1.0))
        # mean 1/2 with sd 1/sqrt(12 n); variance 1/12
        assert abs(draws.mean() - 0.5) < 5 * (1.0 / np.sqrt(12 * n))
        assert abs(draws.var() - 1.0 / 12.0) < 5e-4

    def test_no_obvious_serial_correlation(self):
        n = 100_000
        draws = np.array([uniform_at(1313, i) for i in range(n)])
        corr = np.corrcoef(draws[:-1], draws[1:])[0, 1]
        assert abs(corr) < 5.0 / np.sqrt(n)
