import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnscope import transform
from rnscope.rns import (
    COEFFICIENT,
    EVALUATION,
    InsufficientPrimesError,
    Modulus,
    Polynomial,
    StructureError,
    automorphism,
    find_ntt_primes,
    is_prime,
    mod_arith,
    poly_elementwise,
    random_polynomial,
    zero_polynomial,
)

from oracles import primes_below_congruent, trial_division_is_prime

Q17 = Modulus.for_prime(17, 4)


def _poly(vals, m=Q17, domain=COEFFICIENT):
    return Polynomial((m,), np.array([vals], dtype=np.uint64), domain)


class TestPrimality:
    def test_matches_trial_division_below_4096(self):
        for n in range(4096):
            assert is_prime(n) == trial_division_is_prime(n)

    def test_large_known_values(self):
        assert is_prime((1 << 31) - 1)  # Mersenne prime
        assert not is_prime((1 << 29) + 1)  # 3 * 59 * 3033169


class TestFindNttPrimes:
    def test_count_two_bitwidth_eight(self):
        mods = find_ntt_primes(2, 8, 16)
        assert sorted(m.q for m in mods) == [97, 193]
        assert primes_below_congruent(256, 32, count=2) == [193, 97]

    def test_insufficient_primes_below_64(self):
        assert primes_below_congruent(64, 32) == []
        with pytest.raises(InsufficientPrimesError):
            find_ntt_primes(1, 6, 16)

    def test_candidate_17_has_psi_2(self):
        (m,) = find_ntt_primes(1, 5, 4)
        assert m.q == 17 and m.psi == 2
        assert pow(2, 4, 17) == 16

    def test_search_is_descending_and_word_size(self):
        mods = find_ntt_primes(8, 31, 1 << 12)
        qs = [m.q for m in mods]
        assert qs == sorted(qs, reverse=True)
        assert all(q < 1 << 31 for q in qs)
        assert qs == primes_below_congruent(1 << 31, 1 << 13, count=8)

    def test_root_order_verified(self):
        for m in find_ntt_primes(4, 20, 64):
            assert pow(m.psi, 2 * m.n, m.q) == 1
            assert pow(m.psi, m.n, m.q) == m.q - 1


class TestModArith:
    def test_spec_values(self):
        assert mod_arith(3, 5, Q17, "mul") == 15
        assert mod_arith(16, 5, Q17, "add") == 4

    def test_mul_identity(self):
        for x in range(17):
            assert mod_arith(x, 1, Q17, "mul") == x

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**31), st.integers(0, 2**31), st.sampled_from([17, 97, 2147352577]))
    def test_matches_integer_arithmetic(self, x, y, q):
        m = Modulus.for_prime(q, 4 if q < 100 else 1 << 12)
        x, y = x % q, y % q
        assert mod_arith(x, y, m, "add") == (x + y) % q
        assert mod_arith(x, y, m, "sub") == (x - y) % q
        assert mod_arith(x, y, m, "mul") == (x * y) % q

    def test_barrett_reduce_full_range(self):
        m = Modulus.for_prime(2147352577, 1 << 16)
        for x in [0, 1, m.q - 1, (m.q - 1) ** 2, 12345678901234567]:
            assert m.reduce(x) == x % m.q


class TestPolyElementwise:
    def test_add_zero_identity(self, rng):
        a = random_polynomial((Q17,), 4, rng)
        z = zero_polynomial((Q17,), 4)
        assert np.array_equal(poly_elementwise(a, z, "add").coeffs, a.coeffs)

    def test_sub_self_is_zero(self, rng):
        a = random_polynomial((Q17,), 4, rng)
        assert not poly_elementwise(a, a, "sub").coeffs.any()

    def test_mul_small_vectors(self):
        a = _poly([1, 2, 3, 4], domain=EVALUATION)
        b = _poly([2, 2, 2, 2], domain=EVALUATION)
        assert poly_elementwise(a, b, "mul").coeffs.tolist() == [[2, 4, 6, 8]]

    def test_mul_requires_evaluation_domain(self):
        a = _poly([1, 2, 3, 4])
        with pytest.raises(StructureError):
            poly_elementwise(a, a, "mul")

    def test_basis_mismatch_rejected(self, rng):
        other = Modulus.for_prime(97, 4)
        a = random_polynomial((Q17,), 4, rng)
        b = random_polynomial((other,), 4, rng)
        with pytest.raises(StructureError):
            poly_elementwise(a, b, "add")

    def test_exact_against_wide_integers(self, rng):
        mods = find_ntt_primes(3, 31, 16)
        a = random_polynomial(tuple(mods), 16, rng, EVALUATION)
        b = random_polynomial(tuple(mods), 16, rng, EVALUATION)
        for kind, op in (("add", lambda x, y, q: (x + y) % q),
                         ("sub", lambda x, y, q: (x - y) % q),
                         ("mul", lambda x, y, q: (x * y) % q)):
            got = poly_elementwise(a, b, kind)
            for i, m in enumerate(mods):
                for j in range(16):
                    assert int(got.coeffs[i, j]) == op(
                        int(a.coeffs[i, j]), int(b.coeffs[i, j]), m.q
                    )

    def test_commutative_add_mul(self, rng):
        mods = tuple(find_ntt_primes(2, 31, 16))
        a = random_polynomial(mods, 16, rng, EVALUATION)
        b = random_polynomial(mods, 16, rng, EVALUATION)
        for kind in ("add", "mul"):
            ab = poly_elementwise(a, b, kind)
            ba = poly_elementwise(b, a, kind)
            assert np.array_equal(ab.coeffs, ba.coeffs)


class TestAutomorphism:
    def test_identity_map(self, rng):
        a = random_polynomial((Q17,), 4, rng)
        assert np.array_equal(automorphism(a, 1).coeffs, a.coeffs)

    def test_monomial_x_to_k3(self):
        # x -> x^3 and x^3 -> x^9 = x (since x^8 = 1 in the 2N-cyclic index group)
        assert automorphism(_poly([0, 1, 0, 0]), 3).coeffs.tolist() == [[0, 0, 0, 1]]
        assert automorphism(_poly([0, 0, 0, 1]), 3).coeffs.tolist() == [[0, 1, 0, 0]]

    def test_negacyclic_sign(self):
        # x^2 -> x^6 = -x^2 * x^4 ... i.e. index 2*3=6 wraps with negation.
        out = automorphism(_poly([0, 0, 1, 0]), 3)
        assert out.coeffs.tolist() == [[0, 0, 16, 0]]

    def test_even_k_rejected(self):
        with pytest.raises(ValueError):
            automorphism(_poly([1, 0, 0, 0]), 2)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 127), st.integers(0, 127))
    def test_composition(self, a_idx, b_idx):
        k1, k2 = 2 * a_idx + 1, 2 * b_idx + 1
        rng = np.random.default_rng(a_idx * 1000 + b_idx)
        m = Modulus.for_prime(97, 16)
        p = random_polynomial((m,), 16, rng)
        two_step = automorphism(automorphism(p, k1), k2)
        one_step = automorphism(p, (k1 * k2) % 32)
        assert np.array_equal(two_step.coeffs, one_step.coeffs)

    def test_inverse_index_roundtrip(self, rng):
        m = Modulus.for_prime(97, 16)
        p = random_polynomial((m,), 16, rng)
        for k in (3, 5, 31):
            k_inv = pow(k, -1, 32)
            assert np.array_equal(
                automorphism(automorphism(p, k), k_inv).coeffs, p.coeffs
            )

    def test_evaluation_domain_matches_transform_route(self, rng):
        mods = tuple(find_ntt_primes(3, 31, 16))
        p = random_polynomial(mods, 16, rng)
        p_eval = transform.ntt_polynomial(p)
        for k in (3, 7, 15, 25):
            direct = automorphism(p_eval, k)
            routed = transform.ntt_polynomial(automorphism(p, k))
            assert np.array_equal(direct.coeffs, routed.coeffs)
            assert direct.domain == EVALUATION


class TestPolynomial:
    def test_validate_detects_out_of_range(self):
        p = _poly([1, 2, 3, 4])
        p.coeffs[0, 0] = 17
        with pytest.raises(StructureError):
            p.validate()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(StructureError):
            Polynomial((Q17,), np.zeros((2, 4), dtype=np.uint64), COEFFICIENT)

    def test_unknown_domain_rejected(self):
        with pytest.raises(StructureError):
            Polynomial((Q17,), np.zeros((1, 4), dtype=np.uint64), "fourier")
