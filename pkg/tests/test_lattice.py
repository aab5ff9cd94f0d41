import math
from fractions import Fraction
from itertools import product as iter_product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dispgeo.errors import (
    IdentityInput,
    NoModulusFound,
    ResourceExceeded,
    TorsionInput,
    ZeroScale,
)
from dispgeo.lattice import (
    GeneratorSet,
    as_int_matrix,
    char_poly,
    contortion_witness,
    depth_root_bound,
    det_exact,
    elementary_generators,
    enumerate_ball,
    find_roots_in_box,
    has_trivial_hyperbolic_part,
    identity,
    inverse_unimodular,
    is_p_unit_denominator,
    is_torsion,
    mat_mod,
    mat_mul,
    mat_pow,
    sl_group_order,
    translation_length_lower,
    translation_length_upper,
    unipotence_exponent,
    unipotent_conjugation_identity,
    word_length_bfs,
)


def E(n, i, j, t):
    rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    rows[i][j] = t
    return tuple(tuple(r) for r in rows)


FIB = ((2, 1), (1, 1))


@pytest.fixture(scope="module")
def gens2():
    return elementary_generators(2)


@pytest.fixture(scope="module")
def gens3():
    return elementary_generators(3)


@pytest.fixture(scope="module")
def ball4(gens2):
    return enumerate_ball(gens2, 4)


def oracle_totient(m):
    return sum(1 for a in range(1, m + 1) if math.gcd(a, m) == 1)


def oracle_all_products_lengths(gens, radius):
    """Naive oracle: multiply out every generator sequence up to the
    radius and keep the first (shortest) length per matrix."""
    n = gens.dimension
    lengths = {identity(n): 0}
    layer = [identity(n)]
    for r in range(1, radius + 1):
        nxt = []
        for m in layer:
            for s in gens.elements:
                p = mat_mul(m, s)
                nxt.append(p)
                if p not in lengths:
                    lengths[p] = r
        layer = nxt
    return lengths


class TestExactHelpers:
    @given(st.lists(st.integers(0, 3), max_size=10))
    def test_generator_word_properties(self, picks):
        gens = elementary_generators(2)
        m = identity(2)
        for i in picks:
            m = mat_mul(m, gens.elements[i])
        assert det_exact(m) == 1
        assert mat_mul(m, inverse_unimodular(m)) == identity(2)
        coeffs = char_poly(m)
        assert coeffs[0] == 1 and coeffs[-1] == 1  # monic, det pinned

    def test_char_poly(self):
        assert char_poly(FIB) == (1, -3, 1)
        assert char_poly(identity(3)) == (1, -3, 3, -1)
        assert char_poly(E(3, 0, 2, 5)) == (1, -3, 3, -1)

    def test_det(self):
        assert det_exact(FIB) == 1
        assert det_exact(((2, 0), (0, 2))) == 4
        assert det_exact(((1, 2, 3), (4, 5, 6), (7, 8, 9))) == 0

    def test_inverse(self):
        assert mat_mul(FIB, inverse_unimodular(FIB)) == identity(2)
        big = mat_pow(FIB, 9)
        assert mat_mul(inverse_unimodular(big), big) == identity(2)

    def test_as_int_matrix_rejects(self):
        with pytest.raises(ValueError):
            as_int_matrix([[1.5, 0], [0, 1]])
        with pytest.raises(ValueError):
            as_int_matrix([[1, 0, 0], [0, 1, 0]])
        assert as_int_matrix(np.eye(2)) == identity(2)


class TestGeneratorSet:
    def test_elementary_count_and_bound(self, gens2, gens3):
        assert len(gens2.elements) == 4
        assert len(gens3.elements) == 12
        phi = (1 + math.sqrt(5)) / 2
        for g in (gens2, gens3):
            assert phi <= g.norm_bound <= 1.62

    def test_rejects_identity(self):
        with pytest.raises(ValueError):
            GeneratorSet.from_matrices([identity(2), E(2, 0, 1, 1),
                                        E(2, 0, 1, -1)])

    def test_rejects_unsymmetric(self):
        with pytest.raises(ValueError):
            GeneratorSet.from_matrices([E(2, 0, 1, 1)])

    def test_frobenius_fallback(self):
        gs = GeneratorSet.from_matrices([FIB, inverse_unimodular(FIB)])
        # operator norm of FIB is (3 + sqrt 5)/2 = 2.618; Frobenius sqrt(7)
        assert 2.618 <= gs.norm_bound <= math.sqrt(7) * (1 + 1e-9)


class TestEnumerateBall:
    def test_radius_zero(self, gens2):
        table = enumerate_ball(gens2, 0)
        assert table.index == {identity(2): 0}

    def test_radius_one(self, gens2):
        table = enumerate_ball(gens2, 1)
        assert len(table.index) == 5

    def test_fib_has_length_two(self, ball4):
        assert ball4.index[FIB] == 2

    def test_matches_naive_oracle(self, gens2, ball4):
        assert ball4.index == oracle_all_products_lengths(gens2, 4)

    def test_resource_cap(self, gens2):
        with pytest.raises(ResourceExceeded):
            enumerate_ball(gens2, 8, max_size=50)

    def test_deterministic(self, gens2):
        a = list(enumerate_ball(gens2, 3).index.items())
        b = list(enumerate_ball(gens2, 3).index.items())
        assert a == b

    def test_neighbor_consistency(self, gens2):
        # multiplying a table entry by a generator moves the length by at
        # most 1, or leaves the ball from the boundary layer only
        table = enumerate_ball(gens2, 3)
        for m, length in table.index.items():
            for s in gens2.elements:
                child_length = table.index.get(mat_mul(m, s))
                if child_length is None:
                    assert length == table.radius
                else:
                    assert abs(child_length - length) <= 1


class TestWordLengthBfs:
    def test_identity(self, gens2):
        assert word_length_bfs(identity(2), gens2, 3) == 0

    def test_generator(self, gens2):
        assert word_length_bfs(E(2, 0, 1, 1), gens2, 3) == 1

    def test_shear_power(self, gens2):
        assert word_length_bfs(E(2, 0, 1, 3), gens2, 6) == 3

    def test_not_in_ball(self, gens2):
        assert word_length_bfs(E(2, 0, 1, 9), gens2, 3) is None

    def test_agrees_with_table(self, gens2, ball4):
        for m, length in list(ball4.index.items())[::17]:
            assert word_length_bfs(m, gens2, 4) == length


class TestTranslationLength:
    def test_conjugate_of_generator(self, gens2):
        h = mat_mul(E(2, 0, 1, 1), E(2, 1, 0, -1))
        m = mat_mul(mat_mul(h, E(2, 0, 1, 1)), inverse_unimodular(h))
        assert translation_length_upper(m, gens2, 3, 6) == 1

    def test_identity_upper(self, gens2):
        assert translation_length_upper(identity(2), gens2, 2, 2) == 0

    def test_fib_at_most_two(self, gens2):
        assert translation_length_upper(FIB, gens2, 3, 6) <= 2

    def test_lower_examples(self, gens3):
        e13p = E(3, 0, 2, 7)
        expected = math.log(7) / math.log(gens3.norm_bound)
        assert abs(translation_length_lower(e13p, gens3) - expected) < 1e-12
        assert translation_length_lower(E(3, 0, 2, 1), gens3) == 0.0

    def test_lower_rejects_identity(self, gens2):
        with pytest.raises(IdentityInput):
            translation_length_lower(identity(2), gens2)

    def test_lower_below_upper_on_ball(self, gens2, ball4):
        for m in ball4.index:
            if m == identity(2):
                continue
            upper = translation_length_upper(m, gens2, 2, 4)
            if upper is not None and upper > 0:
                assert translation_length_lower(m, gens2) <= upper

    def test_gcd_invariant_under_conjugation(self, gens2, ball4):
        def gcd_shift(m):
            d = 0
            for i in range(2):
                for j in range(2):
                    d = math.gcd(d, abs(m[i][j] - (1 if i == j else 0)))
            return d

        rng = np.random.default_rng(20)
        mats = list(ball4.index)
        for _ in range(1000):
            m = mats[rng.integers(len(mats))]
            h = mats[rng.integers(len(mats))]
            conj = mat_mul(mat_mul(h, m), inverse_unimodular(h))
            assert gcd_shift(conj) == gcd_shift(m)

    def test_lower_diverges_on_shear_powers(self, gens3):
        values = [translation_length_lower(E(3, 0, 2, 2 ** j), gens3)
                  for j in range(1, 21)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 10.0


class TestUnipotenceExponent:
    def test_known_values(self):
        assert unipotence_exponent(2) == 12
        assert unipotence_exponent(3) == 12
        assert unipotence_exponent(4) == 120

    def test_against_totient_oracle(self):
        for n in (2, 3, 4, 5):
            orders = [m for m in range(1, 2 * n * n + 1)
                      if oracle_totient(m) <= n]
            assert unipotence_exponent(n) == math.lcm(*orders)


class TestTrivialHyperbolicPart:
    def test_unipotent(self):
        assert has_trivial_hyperbolic_part(E(2, 0, 1, 5))

    def test_rotation(self):
        assert has_trivial_hyperbolic_part(((0, -1), (1, 0)))

    def test_fib(self):
        assert not has_trivial_hyperbolic_part(FIB)

    def test_matches_float_spectral_radius(self, ball4):
        for m in list(ball4.index)[::5]:
            moduli = np.abs(np.linalg.eigvals(np.array(m, dtype=float)))
            assert has_trivial_hyperbolic_part(m) == bool(
                np.max(moduli) < 1.5)  # tiny integer matrices: gap at 1

    def test_torsion_detection(self):
        assert is_torsion(identity(2))
        assert is_torsion(((0, -1), (1, 0)))
        assert not is_torsion(E(2, 0, 1, 1))
        assert not is_torsion(FIB)


class TestDepthRootBound:
    def test_fib_certificate(self):
        cert = depth_root_bound(FIB)
        golden2 = (3 + math.sqrt(5)) / 2
        assert cert.branch == "hyperbolic"
        assert abs(cert.K - golden2) < 1e-9
        assert cert.K1 == 6
        assert abs(cert.b - golden2) < 1e-6
        assert cert.q == 2 and cert.depth == 2
        assert cert.M == 12
        assert cert.box_bound == 4
        assert cert.roots_found == ()

    def test_torsion_rejected(self):
        with pytest.raises(TorsionInput):
            depth_root_bound(identity(2))
        with pytest.raises(TorsionInput):
            depth_root_bound(((0, -1), (1, 0)))

    def test_unipotent_branch(self):
        cert = depth_root_bound(E(2, 0, 1, 1))
        assert cert.branch == "quasi_unipotent"
        assert cert.b is None and cert.q is None
        assert cert.depth == 13  # divisor bound from U = A^12 = E(12)
        assert cert.roots_found == ()

    def test_shear_with_real_square_root(self):
        cert = depth_root_bound(E(2, 0, 1, 4))
        ks = {k for k, _ in cert.roots_found}
        assert 2 in ks  # E12(2) squares to E12(4)
        for k, root in cert.roots_found:
            assert k < cert.depth
            assert mat_pow(root, k) == E(2, 0, 1, 4)

    def test_three_by_three_unipotent(self):
        cert = depth_root_bound(E(3, 0, 2, 1))
        assert cert.branch == "quasi_unipotent"
        # involution-twisted square roots exist inside the box
        assert len(cert.roots_found) == 4
        for k, root in cert.roots_found:
            assert k == 2 and mat_pow(root, 2) == E(3, 0, 2, 1)

    def test_dimension_guard(self):
        with pytest.raises(Exception):
            depth_root_bound(identity(4))

    def test_soundness_on_small_hyperbolic_family(self, ball4):
        hyperbolic = [m for m in ball4.index
                      if abs(m[0][0] + m[1][1]) >= 3][:20]
        assert len(hyperbolic) == 20
        for m in hyperbolic:
            cert = depth_root_bound(m)  # raises on any root above depth
            assert cert.branch == "hyperbolic"
            assert cert.depth >= 2

    def test_soundness_on_quasi_unipotent_family(self, ball4):
        family = [m for m in ball4.index
                  if has_trivial_hyperbolic_part(m)
                  and not is_torsion(m)][:15]
        assert len(family) >= 10
        for m in family:
            cert = depth_root_bound(m)  # raises on any root above depth
            assert cert.branch == "quasi_unipotent"
            for k, root in cert.roots_found:
                assert k < cert.depth
                assert mat_pow(root, k) == m


class TestFindRootsInBox:
    def test_finds_known_root(self):
        roots = find_roots_in_box(E(2, 0, 1, 2), 2, 2)
        assert E(2, 0, 1, 1) in roots
        assert ((-1, -1), (0, -1)) in roots

    def test_exact_power_fallback(self):
        # (2*box)^k overflows int64, exercising the big-int path
        roots = find_roots_in_box(E(2, 0, 1, 64), 64, 2)
        assert E(2, 0, 1, 1) in roots

    def test_no_roots_of_fib(self):
        assert find_roots_in_box(FIB, 2, 4) == []
        assert find_roots_in_box(FIB, 3, 4) == []

    def test_enumeration_cap_is_an_error(self):
        with pytest.raises(ResourceExceeded):
            find_roots_in_box(E(3, 0, 2, 1), 2, 3)  # 7^9 candidates


class TestQuotient:
    def test_orders_by_enumeration(self):
        for n, m in ((2, 2), (2, 3), (3, 2)):
            count = 0
            for entries in iter_product(range(m), repeat=n * n):
                mat = tuple(tuple(entries[i * n + j] for j in range(n))
                            for i in range(n))
                if det_exact(mat) % m == 1 % m:
                    count += 1
            assert count == sl_group_order(n, m)

    def test_reduction_is_homomorphism(self, ball4):
        rng = np.random.default_rng(30)
        mats = list(ball4.index)
        for _ in range(200):
            a = mats[rng.integers(len(mats))]
            b = mats[rng.integers(len(mats))]
            for m in (2, 3, 5):
                assert mat_mod(mat_mul(a, b), m) == mat_mod(
                    mat_mul(mat_mod(a, m), mat_mod(b, m)), m)

    def test_witness_example(self):
        w = contortion_witness(E(2, 0, 1, 1), [E(2, 0, 1, 1)])
        assert w.modulus == 2 and w.k == 6
        assert mat_pow(E(2, 0, 1, 1), 6) == E(2, 0, 1, 6)
        assert mat_mod(E(2, 0, 1, 6), 2) == identity(2)
        assert mat_mod(E(2, 0, 1, 1), 2) != identity(2)

    def test_witness_skips_vanishing_modulus(self):
        # E13(2) is the identity mod 2, so the smallest usable prime is 3
        w = contortion_witness(E(3, 0, 2, 1), [E(3, 0, 2, 1), E(3, 0, 2, 2)])
        assert w.modulus == 3
        assert w.k == sl_group_order(3, 3) == 5616

    def test_witness_rejects_identity_rep(self):
        with pytest.raises(ValueError):
            contortion_witness(E(2, 0, 1, 1), [identity(2)])

    def test_witness_rejects_torsion(self):
        with pytest.raises(TorsionInput):
            contortion_witness(((0, -1), (1, 0)), [E(2, 0, 1, 1)])

    def test_no_modulus_found(self):
        with pytest.raises(NoModulusFound):
            contortion_witness(E(2, 0, 1, 1), [E(2, 0, 1, 6)], prime_cap=3)


class TestZpConjugation:
    def test_identity_scale(self):
        _, res = unipotent_conjugation_identity(1)
        assert res == ((1, 1), (0, 1))

    def test_integer_scale(self):
        conj, res = unipotent_conjugation_identity(3)
        assert conj == ((3, 0), (0, Fraction(1, 3)))
        assert res == ((1, 9), (0, 1))

    def test_fractional_scale(self):
        _, res = unipotent_conjugation_identity(Fraction(1, 2))
        assert res == ((1, Fraction(1, 4)), (0, 1))

    def test_zero_rejected(self):
        with pytest.raises(ZeroScale):
            unipotent_conjugation_identity(0)

    def test_p_unit_denominators(self):
        assert is_p_unit_denominator(Fraction(3, 8), 2)
        assert is_p_unit_denominator(Fraction(7), 5)
        assert not is_p_unit_denominator(Fraction(1, 6), 2)
        assert is_p_unit_denominator(Fraction(1, 125), 5)

    def test_membership_enforced_with_p(self):
        # diag(t, 1/t) lies in SL(2, Z[1/p]) iff t is a unit +-p^k
        unipotent_conjugation_identity(Fraction(125), p=5)
        unipotent_conjugation_identity(Fraction(1, 2), p=2)
        with pytest.raises(ValueError):
            unipotent_conjugation_identity(Fraction(3), p=5)
        with pytest.raises(ValueError):
            unipotent_conjugation_identity(Fraction(1, 6), p=2)
