from fractions import Fraction

import pytest

from dispgeo.errors import (
    HypothesisViolated,
    NotAlmostCyclicallyReduced,
    NotPingPong,
    PingPongNotFound,
)
from dispgeo.hyperbolic import (
    certify_ping_pong,
    check_chain_separation,
    conjugacy_undistortion_check,
    find_ping_pong_pair,
    is_almost_cyclically_reduced,
    pair_offset,
    select_acr,
    stable_length_lower_bound,
    stable_norm_length_bound,
)
from dispgeo.words import Word, ball, multiply, parse_word, stable_norm, word_length

W = parse_word


@pytest.fixture(scope="module")
def pair():
    return certify_ping_pong(W("aab"), W("bba"), 0)


class TestAcr:
    def test_cyclically_reduced_is_acr(self):
        v = is_almost_cyclically_reduced(W("aab"), 0)
        assert v.is_acr and v.product == 0 and v.threshold == 1

    def test_deep_conjugate_is_not(self):
        # |g^2| = 10 so <g, g^-1> = (9 + 9 - 10)/2 = 4 > 9/3
        g = W("bbbbaBBBB")
        assert word_length(g * g) == 10
        v = is_almost_cyclically_reduced(g, 0)
        assert not v.is_acr and v.product == 4 and v.threshold == 3

    def test_empty_word(self):
        v = is_almost_cyclically_reduced(Word.identity(2), 0)
        assert v.is_acr and v.product == 0 and v.threshold == 0

    def test_product_equals_peeled_letters(self):
        # independent identity: <g, g^-1> = number of letters peeled by
        # cyclic reduction, via |g^2| = 2|g| - 2 peel
        for g in ball(2, 6):
            v = is_almost_cyclically_reduced(g, 0)
            peel = (word_length(g) - stable_norm(g)) // 2
            assert v.product == peel


class TestStableLengthLowerBound:
    def test_holds_for_acr(self):
        assert stable_length_lower_bound(W("aab"), 0) == 1
        assert stable_norm(W("aab")) == 3 >= 1

    def test_single_letter(self):
        assert stable_length_lower_bound(W("a"), 0) == Fraction(1, 3)

    def test_long_word(self):
        g = W("bbbbaBBBBaab")
        assert stable_length_lower_bound(g, 0) == 4
        assert stable_norm(g) == 12 >= 4

    def test_rejects_non_acr(self):
        with pytest.raises(NotAlmostCyclicallyReduced):
            stable_length_lower_bound(W("bbbbaBBBB"), 0)

    def test_exhaustive_radius_8(self):
        for g in ball(2, 8):
            v = is_almost_cyclically_reduced(g, 0)
            if v.is_acr:
                assert stable_norm(g) >= Fraction(word_length(g), 3)


class TestChainSeparation:
    def test_powers(self):
        g = W("ab")
        points = [g ** n for n in range(8)]
        assert check_chain_separation(points, 2, 0)

    def test_single_point(self):
        assert check_chain_separation([W("ab")], 5, 0)

    def test_pingpong_word_prefixes(self):
        # prefixes of (uv)^m for a ping-pong pair form a separated chain
        u, v = W("aab"), W("bba")
        w = (u * v) ** 4
        points = [Word(w.letters[:3 * i], 2) for i in range(9)]
        assert check_chain_separation(points, 3, 0)

    def test_hypothesis_violated(self):
        # constant-ish chain: d(x_0, x_2) = 0 < d(x_0, x_1) + a
        points = [Word.identity(2), W("a"), Word.identity(2)]
        with pytest.raises(HypothesisViolated) as exc:
            check_chain_separation(points, 1, 0)
        assert exc.value.index == 0


class TestCertifyPingPong:
    def test_flagship_pair(self, pair):
        assert (pair.margin1, pair.margin2, pair.margin3) == (
            Fraction(3), Fraction(3, 2), Fraction(3, 2))

    def test_too_short_for_delta(self):
        with pytest.raises(NotPingPong) as exc:
            certify_ping_pong(W("a"), W("b"), 1)
        assert exc.value.condition == 1

    def test_equal_pair_fails_condition_2(self):
        with pytest.raises(NotPingPong) as exc:
            certify_ping_pong(W("ab"), W("ab"), 0)
        assert exc.value.condition == 2

    def test_self_overlap_fails_condition_3(self):
        # at delta = 0 a free group never fails condition 3 (the self
        # product is the peel count, always < |w|/2), so use delta = 1/30:
        # u = b^-2 a b^2 has self product 2 > 5/2 - 20/30, while the cross
        # products with v = b^4 a are all 0 and conditions 1-2 pass
        with pytest.raises(NotPingPong) as exc:
            certify_ping_pong(W("BBabb"), W("bbbba"), Fraction(1, 30))
        assert exc.value.condition == 3

    def test_monotone_in_delta(self, pair):
        # succeeding at delta implies succeeding at every smaller delta
        for delta in (Fraction(1, 100), Fraction(1, 50), Fraction(3, 100)):
            certify_ping_pong(pair.u, pair.v, delta)
        with pytest.raises(NotPingPong):
            certify_ping_pong(pair.u, pair.v, Fraction(4, 100))

    def test_free_subgroup_words_nontrivial(self, pair):
        # every reduced word of length <= 5 in u, v, u^-1, v^-1 is a
        # nontrivial element: the pair generates a free subgroup
        symbols = [pair.u, pair.u.inverse(), pair.v, pair.v.inverse()]
        inverse_of = {0: 1, 1: 0, 2: 3, 3: 2}
        count = 0
        frontier = [((), Word.identity(2))]
        for _ in range(5):
            nxt = []
            for idx_seq, value in frontier:
                for i, s in enumerate(symbols):
                    if idx_seq and inverse_of[idx_seq[-1]] == i:
                        continue
                    w = multiply(value, s)
                    assert w, f"trivial image for symbol word {idx_seq + (i,)}"
                    nxt.append((idx_seq + (i,), w))
                    count += 1
            frontier = nxt
        assert count == 4 * (1 + 3 + 9 + 27 + 81)


class TestFindPingPongPair:
    def test_finds_power(self):
        n, cert = find_ping_pong_pair(W("ab"), W("a"), 0, n_max=10)
        assert 1 <= n <= 10
        assert cert.u == W("ab") ** n

    def test_empty_f_rejected(self):
        with pytest.raises(ValueError):
            find_ping_pong_pair(Word.identity(2), W("a"), 0, 10)

    def test_commuting_rejected(self):
        with pytest.raises(ValueError):
            find_ping_pong_pair(W("a"), W("a"), 0, 10)

    def test_not_cyclically_reduced_rejected(self):
        with pytest.raises(ValueError):
            find_ping_pong_pair(W("Bab"), W("a"), 0, 10)

    def test_cap_exhausted(self):
        with pytest.raises(PingPongNotFound):
            find_ping_pong_pair(W("ab"), W("a"), 50, n_max=3)


class TestSelectAcr:
    def test_repairs_deep_conjugate(self, pair):
        g = W("bbbbaBBBB")
        assert select_acr(g, pair) == g * pair.u
        assert (g * pair.u).to_str() == "bbbbaBBBBaab"

    def test_keeps_acr_input(self, pair):
        g = W("a" * 9)
        assert select_acr(g, pair) == g

    def test_other_conjugate(self, pair):
        g = W("BBBBAbbbb")
        chosen = select_acr(g, pair)
        assert chosen in (g * pair.u, g * pair.v)
        assert is_almost_cyclically_reduced(chosen, 0).is_acr

    def test_hypothesis_checked(self, pair):
        with pytest.raises(HypothesisViolated):
            select_acr(W("ab"), pair)

    def test_exhaustive_lengths_9_to_10(self, pair):
        # longer lengths are covered by the acceptance suite
        for g in ball(2, 10):
            if word_length(g) >= 9:
                chosen = select_acr(g, pair)
                assert is_almost_cyclically_reduced(chosen, 0).is_acr


class TestStableNormLengthBound:
    def test_example(self, pair):
        res = stable_norm_length_bound(W("bbbbaBBBB"), pair)
        assert (res.lhs, res.rhs, res.holds) == (9, Fraction(45), True)

    def test_empty(self, pair):
        res = stable_norm_length_bound(Word.identity(2), pair)
        assert res.lhs == 0 and res.holds

    def test_offset_derived(self, pair):
        assert pair_offset(pair) == 9

    def test_broken_alpha_detects_violation(self, pair):
        res = stable_norm_length_bound(W("bbbbaBBBB"), pair, alpha=-100)
        assert not res.holds

    def test_exhaustive_radius_8(self, pair):
        for g in ball(2, 8):
            assert stable_norm_length_bound(g, pair).holds


class TestUndistortionCheck:
    def test_witness_family(self, pair):
        gens = [Word.identity(2), pair.u, pair.v]
        assert conjugacy_undistortion_check(gens, 3, 9, radius=10)

    def test_identity_alone_fails(self):
        assert not conjugacy_undistortion_check(
            [Word.identity(2)], 1, 0, radius=3)

    def test_radius_zero(self):
        assert conjugacy_undistortion_check([Word.identity(2)], 1, 0, 0)

    def test_bad_constants_rejected(self):
        with pytest.raises(ValueError):
            conjugacy_undistortion_check([Word.identity(2)], 0, 0, 1)
        with pytest.raises(ValueError):
            conjugacy_undistortion_check([Word.identity(2)], 1, -1, 1)
