from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcpss import kernels
from mcpss.dissimilarity import (
    DissimilarityConfig,
    compound_dissimilarity,
    dissimilarity_rate,
    edit_distance,
    exhaustive_history,
    lz_complexity,
    lz_score,
    ngram_patterns,
    ngram_score,
    rate_sets,
    zeta,
)
from mcpss.errors import ConfigError

SIGMA = "ACDEFGHIKLMNPQRSTVWY"


def oracle_history(s):
    """Fragments straight from the rule: grow while the text repeats the
    previous fragment or already occurs before the preceding character."""
    out, prev, i = [], None, 0
    while i < len(s):
        end = len(s)
        for j in range(i + 1, len(s) + 1):
            cand = s[i:j]
            if cand != prev and s.find(cand, 0, max(i - 1, 0)) < 0:
                end = j
                break
        prev = s[i:end]
        out.append(prev)
        i = end
    return out


@lru_cache(maxsize=None)
def oracle_edit(x, y):
    if not x:
        return len(y)
    if not y:
        return len(x)
    return min(
        oracle_edit(x[1:], y) + 1,
        oracle_edit(x, y[1:]) + 1,
        oracle_edit(x[1:], y[1:]) + (x[0] != y[0]),
    )


def small_strings(alphabet, max_len):
    for n in range(max_len + 1):
        for t in product(alphabet, repeat=n):
            yield "".join(t)


class TestExhaustiveHistory:
    def test_reference_decomposition(self):
        h = exhaustive_history("TTCCPSTCIVPSA")
        assert str(h) == "T.TC.C.P.S.TCI.V.PSA"
        assert h.complexity == 8

    def test_second_reference(self):
        assert str(exhaustive_history("APAFSVSGG")) == "A.P.AF.S.V.SG.G"

    @pytest.mark.parametrize("s, c", [("THTDKRKLL", 7), ("APAFSVSGG", 7), ("TTCCPSTCIVPSA", 8), ("A", 1)])
    def test_complexity(self, s, c):
        assert lz_complexity(s) == c

    def test_repeated_letter_hand_trace(self):
        # A | A repeats the previous fragment, so grow to AA, which is new | A is the final copy
        assert exhaustive_history("AAAA").fragments == ("A", "AA", "A")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            exhaustive_history("")
        with pytest.raises(ValueError):
            lz_complexity("")

    @given(st.text(alphabet="ABC", min_size=1, max_size=40))
    def test_matches_rule_oracle(self, s):
        assert list(exhaustive_history(s).fragments) == oracle_history(s)

    @given(st.text(alphabet=SIGMA, min_size=1, max_size=64))
    def test_reconstruction_and_uniqueness(self, s):
        frags = exhaustive_history(s).fragments
        assert "".join(frags) == s
        body = frags[:-1]
        assert len(set(body)) == len(body)


class TestZeta:
    def test_single_letter(self):
        assert lz_complexity("AA") == 2
        assert zeta("A", "A") == 1

    def test_self_concatenation(self):
        p = "TTCCPSTCIVPSA"
        assert lz_complexity(p + p) == 9
        assert zeta(p, p) == 1

    def test_disjoint_alphabets_cost_more(self):
        for p in small_strings("AB", 5):
            if not p:
                continue
            q = "C" * len(p)
            assert zeta(p, q) >= zeta(p, p)

    def test_non_negative_brute_force(self):
        strings = [s for s in small_strings("ABC", 5) if s]
        for p in strings:
            for q in strings:
                assert zeta(p, q) >= 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            zeta("", "A")


class TestLzScore:
    def test_identical_single_letter(self):
        assert lz_score("A", "A") == Fraction(1, 1)

    def test_identical_reference_string(self):
        # c(p + p) = 8 (A.P.AF.S.V.SG.G + the copy APAFSVSGG), so zeta = 1
        assert lz_complexity("APAFSVSGG" * 2) == 8
        assert lz_score("APAFSVSGG", "APAFSVSGG") == Fraction(1, 7)

    @given(st.text(alphabet="ABCD", min_size=1, max_size=12), st.text(alphabet="ABCD", min_size=1, max_size=12))
    def test_symmetric(self, p, q):
        assert lz_score(p, q) == lz_score(q, p)


class TestDissimilarityRate:
    def test_hand_example(self):
        assert rate_sets("AAB", "ABC") == (frozenset("AB"), frozenset("C"))
        assert dissimilarity_rate("AAB", "ABC") == Fraction(2, 3)

    def test_identical(self):
        assert dissimilarity_rate("ACDA", "ACDA") == Fraction(1, 4)

    def test_disjoint(self):
        assert dissimilarity_rate("AAC", "DEF") == 1 + 2 + 3

    def test_unknown_never_shared(self):
        shared, other = rate_sets("XA", "XA")
        assert shared == frozenset("A")
        assert other == frozenset("X")


class TestNgrams:
    @pytest.mark.parametrize("s, n, grams", [
        ("ABCD", 2, ["AB", "BC", "CD"]),
        ("ABCD", 4, ["ABCD"]),
        ("AAA", 2, ["AA", "AA"]),
    ])
    def test_patterns(self, s, n, grams):
        assert ngram_patterns(s, n) == grams

    @pytest.mark.parametrize("n", [0, 5])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            ngram_patterns("ABCD", n)

    def test_score_examples(self):
        assert ngram_score("ABCD", "BCDE", 2) == 2
        assert ngram_score("ABAB", "ABAB", 2) == 2  # AB, BA
        assert ngram_score("AAA", "CCC", 1) == 0

    @given(st.text(alphabet="ABC", min_size=3, max_size=15), st.text(alphabet="ABC", min_size=3, max_size=15),
           st.integers(1, 3))
    def test_score_bounds_and_symmetry(self, p, q, n):
        score = ngram_score(p, q, n)
        assert score == ngram_score(q, p, n)
        assert score <= min(len(set(ngram_patterns(p, n))), len(set(ngram_patterns(q, n))))


class TestCompound:
    def test_hand_composed_value(self):
        # zeta: c(AABABC)=3 (A.AB.ABC), c(ABCAAB)=5 (A.B.C.AA.B); c(AAB)=2, c(ABC)=3
        # shared {A,B}, other {C}, shared bigrams {AB}
        verbatim = DissimilarityConfig(2)
        assert compound_dissimilarity("AAB", "ABC", verbatim) == Fraction(2 * 3, 3 * 2 * 2)
        rate = DissimilarityConfig(2, rho_orientation="rate")
        assert compound_dissimilarity("AAB", "ABC", rate) == Fraction(2 * 2, 3 * 3 * 2)

    @given(st.text(alphabet="ACDX", min_size=4, max_size=12), st.text(alphabet="ACDX", min_size=4, max_size=12))
    def test_symmetry_and_collapse(self, p, q):
        for orient in ("verbatim", "rate"):
            for m in ("lz", "lz+rho", "full"):
                cfg = DissimilarityConfig.from_measure(m, 3, orient)
                assert compound_dissimilarity(p, q, cfg) == compound_dissimilarity(q, p, cfg)
        assert compound_dissimilarity(p, q, DissimilarityConfig(3, False, False)) == lz_score(p, q)

    @given(st.text(alphabet="ACDE", min_size=4, max_size=12), st.text(alphabet="ACDE", min_size=4, max_size=12))
    def test_ngram_factor_never_increases(self, p, q):
        for orient in ("verbatim", "rate"):
            full = compound_dissimilarity(p, q, DissimilarityConfig(3, True, True, orient))
            partial = compound_dissimilarity(p, q, DissimilarityConfig(3, True, False, orient))
            assert 0 <= full <= partial

    def test_ngram_size_must_be_below_lengths(self):
        with pytest.raises(ConfigError):
            compound_dissimilarity("ABC", "ABCD", DissimilarityConfig(3))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            DissimilarityConfig(0)
        with pytest.raises(ConfigError):
            DissimilarityConfig(3, rho_orientation="sideways")
        with pytest.raises(ConfigError):
            DissimilarityConfig(5).check_window(5)
        with pytest.raises(ConfigError):
            DissimilarityConfig.from_measure("nope")


class TestEditDistance:
    @pytest.mark.parametrize("x, y, d", [("AAB", "AAB", 0), ("", "HEC", 3), ("kitten", "sitting", 3)])
    def test_examples(self, x, y, d):
        assert edit_distance(x, y) == d
        assert oracle_edit(x, y) == d

    def test_metric_axioms_brute_force(self):
        strings = list(small_strings("ABC", 3))
        dist = {(a, b): edit_distance(a, b) for a in strings for b in strings}
        for a in strings:
            for b in strings:
                assert dist[a, b] == dist[b, a]
                assert (dist[a, b] == 0) == (a == b)
                for c in strings:
                    assert dist[a, c] <= dist[a, b] + dist[b, c]


class TestKernelsMatchExact:
    """The compiled batch route must give the same numbers as the exact one."""

    @pytest.fixture
    def windows(self, rng):
        alphabet = np.array(list("ACDEGX"))
        return ["".join(rng.choice(alphabet, 9)) for _ in range(40)]

    def test_complexity(self, windows):
        for w in windows:
            assert kernels.lz_complexity_codes(kernels.encode([w])[0]) == lz_complexity(w)

    @pytest.mark.parametrize("orient", ["verbatim", "rate"])
    @pytest.mark.parametrize("measure", ["lz", "lz+rho", "full"])
    def test_compound_matrix(self, windows, measure, orient):
        cfg = DissimilarityConfig.from_measure(measure, 3, orient)
        a, b = windows[:15], windows[15:]
        got = kernels.combine(kernels.pair_components(kernels.prepare(a, 3), kernels.prepare(b, 3)), cfg)
        want = np.array([[float(compound_dissimilarity(p, q, cfg)) for q in b] for p in a])
        assert np.array_equal(got, want)

    def test_symmetric_components(self, windows):
        enc = kernels.prepare(windows, 3)
        sym = kernels.pair_components(enc)
        assert np.array_equal(sym, kernels.pair_components(enc, kernels.prepare(windows, 3)))

    def test_edit_matrix(self, windows):
        codes = kernels.encode(windows)
        got = kernels.edit_distance_matrix(codes)
        want = np.array([[edit_distance(p, q) for q in windows] for p in windows])
        assert np.array_equal(got, want)

    def test_encode_rejects_foreign_characters(self):
        with pytest.raises(ValueError):
            kernels.encode(["AC1"])

    @settings(max_examples=50)
    @given(st.lists(st.text(alphabet="ACDEX", min_size=7, max_size=7), min_size=2, max_size=6))
    def test_random_batches(self, ws):
        cfg = DissimilarityConfig(2)
        got = kernels.combine(kernels.pair_components(kernels.prepare(ws, 2)), cfg)
        for i, p in enumerate(ws):
            for j, q in enumerate(ws):
                assert got[i, j] == float(compound_dissimilarity(p, q, cfg))
