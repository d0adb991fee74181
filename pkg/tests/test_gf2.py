import numpy as np
import pytest

from oracles import (
    brute_force_lfsr_length,
    gf2_rank_oracle,
    rank_class_probability,
    textbook_berlekamp_massey,
)
from rtdrng.nist.gf2 import berlekamp_massey, gf2_rank


class TestBerlekampMassey:
    def test_all_zeros(self):
        assert berlekamp_massey([0, 0, 0, 0, 0]) == 0

    def test_impulse_at_end(self):
        assert berlekamp_massey([0, 0, 0, 0, 1]) == 5

    def test_alternating(self):
        assert berlekamp_massey([1, 0, 1, 0, 1, 0]) == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            berlekamp_massey([])

    @pytest.mark.parametrize("length", range(1, 9))
    def test_exhaustive_against_brute_force(self, length):
        for value in range(2**length):
            seq = [(value >> k) & 1 for k in range(length)]
            assert berlekamp_massey(seq) == brute_force_lfsr_length(seq)

    def test_matches_textbook_formulation_on_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            seq = (rng.random(rng.integers(10, 300)) < 0.5).astype(np.uint8)
            assert berlekamp_massey(seq) == textbook_berlekamp_massey(seq)

    def test_expected_complexity_of_random_blocks(self):
        # random 500-bit blocks concentrate near length/2
        rng = np.random.default_rng(2)
        values = [berlekamp_massey((rng.random(500) < 0.5).astype(np.uint8)) for _ in range(50)]
        assert all(246 <= v <= 254 for v in values)


class TestRank:
    def test_identity(self):
        assert gf2_rank(np.eye(32, dtype=np.uint8)) == 32

    def test_zero_matrix(self):
        assert gf2_rank(np.zeros((32, 32), dtype=np.uint8)) == 0

    def test_duplicate_rows_collapse(self):
        m = np.zeros((4, 4), dtype=np.uint8)
        m[0] = [1, 0, 1, 0]
        m[1] = [1, 0, 1, 0]
        m[2] = [0, 1, 0, 0]
        assert gf2_rank(m) == 2

    def test_random_against_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = (rng.random((32, 32)) < 0.5).astype(np.uint8)
            assert gf2_rank(m) == gf2_rank_oracle(m)

    def test_rectangular(self):
        rng = np.random.default_rng(4)
        for shape in ((5, 9), (9, 5), (1, 7)):
            m = (rng.random(shape) < 0.5).astype(np.uint8)
            assert gf2_rank(m) == gf2_rank_oracle(m)

    def test_rank_class_frequencies(self):
        # empirical {32, 31, <=30} frequencies vs the exact distribution
        rng = np.random.default_rng(5)
        trials = 10_000
        counts = {"full": 0, "minus1": 0, "rest": 0}
        for _ in range(trials):
            r = gf2_rank((rng.random((32, 32)) < 0.5).astype(np.uint8))
            if r == 32:
                counts["full"] += 1
            elif r == 31:
                counts["minus1"] += 1
            else:
                counts["rest"] += 1
        probs = {
            "full": rank_class_probability(32, 32),
            "minus1": rank_class_probability(32, 31),
        }
        probs["rest"] = 1.0 - probs["full"] - probs["minus1"]
        for key, p in probs.items():
            sigma = (p * (1 - p) / trials) ** 0.5
            assert abs(counts[key] / trials - p) < 3 * sigma

    def test_class_probabilities_sane(self):
        assert rank_class_probability(32, 32) == pytest.approx(0.2888, abs=2e-4)
        assert rank_class_probability(32, 31) == pytest.approx(0.5776, abs=2e-4)
