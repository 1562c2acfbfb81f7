import random

import pytest

from vocablab.bpe import TokenizedCorpus
from vocablab.errors import ConfigurationError, ConsistencyError
from vocablab.overlap import (
    complementary_size,
    compute_overlap,
    compute_triple_overlap,
    format_pct,
    format_share,
    triple_overlap_from_counts,
)
from vocablab.vocab import extract_vocab

# Published vocabulary sizes for the de+sv and de+fi joint settings and the
# disjoint control; the toolkit must reproduce the derived columns exactly.
DE, SV, FI = 31421, 31383, 31671
JOINT_DESV, JOINT_DEFI = 58918, 60577
DISJOINT_DESV = 62802


def vocab_of(tokens):
    return extract_vocab(TokenizedCorpus("xx", [list(tokens)]))


class TestPairwise:
    def test_desv_published_sizes(self):
        report = compute_overlap(DE, SV, JOINT_DESV)
        assert report.overlap_count == 3886
        assert format_pct(report.overlap_pct) == "6.6"

    def test_defi_published_sizes(self):
        report = compute_overlap(DE, FI, JOINT_DEFI)
        assert report.overlap_count == 2515
        assert format_pct(report.overlap_pct) == "4.2"

    def test_disjoint_published_sizes(self):
        report = compute_overlap(DE, SV, DISJOINT_DESV)
        assert report.overlap_count == 2
        assert format_pct(report.overlap_pct) == "0.003"

    def test_self_overlap(self):
        v = vocab_of(["a", "b", "c", "a"])
        report = compute_overlap(v, v)
        assert report.overlap_count == v.size
        assert report.size_joint == v.size
        assert report.overlap_pct == 100.0

    def test_specials_only_pair(self):
        a = vocab_of(["x", "y"])
        b = vocab_of(["p", "q"])
        report = compute_overlap(a, b)
        assert report.overlap_tokens == frozenset({"</s>", "<unk>"})
        assert report.overlap_count == 2

    def test_identity_asserted_against_joint(self):
        a = vocab_of(["x", "y"])
        b = vocab_of(["y", "z"])
        joint = extract_vocab(
            TokenizedCorpus("a", [["x", "y"]]), TokenizedCorpus("b", [["y", "z"]])
        )
        report = compute_overlap(a, b, joint)
        assert report.overlap_count == a.size + b.size - joint.size

    def test_identity_violation_reports_counts(self):
        a = vocab_of(["x", "y"])
        b = vocab_of(["y", "z"])
        with pytest.raises(ConsistencyError, match=r"\|A\|=4.*\|B\|=4.*\|joint\|=99"):
            compute_overlap(a, b, 99)

    def test_sizes_require_joint(self):
        with pytest.raises(ConfigurationError):
            compute_overlap(10, 12)

    def test_symmetry(self):
        a = vocab_of(["x", "y", "q"])
        b = vocab_of(["y", "z"])
        fwd = compute_overlap(a, b)
        rev = compute_overlap(b, a)
        assert fwd.overlap_tokens == rev.overlap_tokens
        assert fwd.size_joint == rev.size_joint
        assert (fwd.size_a, fwd.size_b) == (rev.size_b, rev.size_a)

    def test_token_length_histogram(self):
        # overlap tokens: b, aa, ccc, </s>, <unk> with lengths 1, 2, 3, 4, 5
        a = vocab_of(["aa", "b", "ccc"])
        report = compute_overlap(a, a)
        assert report.token_length_histogram == {1: 1, 2: 1, 3: 1, 4: 1, 5: 1}

    def test_pct_bounds_random(self):
        rng = random.Random(0)
        for _ in range(50):
            a = vocab_of([str(rng.randint(0, 20)) for _ in range(rng.randint(1, 30))])
            b = vocab_of([str(rng.randint(0, 20)) for _ in range(rng.randint(1, 30))])
            report = compute_overlap(a, b)
            assert 0.0 <= report.overlap_pct <= 100.0


class TestTriple:
    def test_published_counts(self):
        report = triple_overlap_from_counts(3886, 2515, 2072)
        assert report.unique_ab == 1814
        assert report.unique_ac == 443
        assert format_share(report.share_ab) == "53"
        assert format_share(report.share_ac) == "82"

    def test_identical_aux(self):
        base = vocab_of(["a", "b", "c"])
        aux = vocab_of(["b", "c", "d"])
        report = compute_triple_overlap(base, aux, aux)
        assert report.oo == report.o_ab == report.o_ac
        assert report.unique_ab == report.unique_ac == 0
        assert report.share_ab == report.share_ac == 100.0

    def test_specials_only(self):
        base = vocab_of(["a"])
        aux1 = vocab_of(["b"])
        aux2 = vocab_of(["c"])
        report = compute_triple_overlap(base, aux1, aux2)
        assert report.oo == frozenset({"</s>", "<unk>"})
        assert report.unique_ab == 0 and report.unique_ac == 0

    def test_subset_invariants(self):
        base = vocab_of(["a", "b", "c", "d"])
        aux1 = vocab_of(["a", "b", "x"])
        aux2 = vocab_of(["b", "c", "y"])
        report = compute_triple_overlap(base, aux1, aux2)
        assert report.oo <= report.o_ab and report.oo <= report.o_ac
        assert report.unique_ab + report.count_oo == report.count_ab

    def test_impossible_counts(self):
        with pytest.raises(ConsistencyError):
            triple_overlap_from_counts(10, 20, 15)


class TestComplementary:
    def test_published_targets(self):
        assert complementary_size(JOINT_DESV, DE) == 27497
        assert complementary_size(JOINT_DEFI, DE) == 29156

    def test_boundary(self):
        assert complementary_size(101, 100) == 1

    def test_equal_sizes_error(self):
        with pytest.raises(ConfigurationError):
            complementary_size(100, 100)
        with pytest.raises(ConfigurationError):
            complementary_size(99, 100)

    def test_accepts_vocabularies(self):
        joint = vocab_of(["a", "b", "c"])
        base = vocab_of(["a"])
        assert complementary_size(joint, base) == 2


class TestFormatting:
    @pytest.mark.parametrize(
        "value,expected",
        [(6.5955, "6.6"), (4.1517, "4.2"), (0.00318, "0.003"), (0.0, "0.0"),
         (100.0, "100.0"), (6.65, "6.7"), (0.0095, "0.010")],
    )
    def test_pct(self, value, expected):
        assert format_pct(value) == expected

    @pytest.mark.parametrize("value,expected", [(53.318, "53"), (82.385, "82"), (99.5, "100")])
    def test_share(self, value, expected):
        assert format_share(value) == expected
