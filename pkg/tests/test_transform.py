import itertools

import numpy as np
import pytest

from rnscope import transform
from rnscope.instrument import counters
from rnscope.rns import (
    COEFFICIENT,
    Modulus,
    StructureError,
    find_ntt_primes,
    random_polynomial,
)

from oracles import negacyclic_product

Q17 = Modulus.for_prime(17, 4)
T17 = transform.build_twiddle_table(Q17, 4)


class TestRoundTrip:
    def test_exhaustive_identity_n4_q17(self):
        rows = np.array(list(itertools.product(range(17), repeat=4)), dtype=np.uint64)
        fwd = transform.ntt(rows, Q17, T17)
        back = transform.ntt(fwd, Q17, T17, direction="inverse")
        assert np.array_equal(back, rows)

    def test_delta_transforms_to_constant_row(self):
        out = transform.ntt(np.array([1, 0, 0, 0], dtype=np.uint64), Q17, T17)
        assert out.tolist() == [1, 1, 1, 1]

    def test_identity_random_rows_multiple_sizes(self, rng):
        for n in (4, 16, 256):
            for m in find_ntt_primes(3, 31, n):
                table = transform.build_twiddle_table(m, n)
                rows = rng.integers(0, m.q, size=(500, n), dtype=np.uint64)
                back = transform.ntt(
                    transform.ntt(rows, m, table), m, table, direction="inverse"
                )
                assert np.array_equal(back, rows)

    def test_length_mismatch_rejected(self):
        with pytest.raises(StructureError):
            transform.ntt(np.zeros(8, dtype=np.uint64), Q17, T17)


class TestConvolution:
    @pytest.mark.parametrize("n", [4, 16, 256])
    def test_products_match_schoolbook(self, n, rng):
        (m,) = find_ntt_primes(1, 31, n)
        table = transform.build_twiddle_table(m, n)
        for _ in range(10):
            a = rng.integers(0, m.q, size=n, dtype=np.uint64)
            b = rng.integers(0, m.q, size=n, dtype=np.uint64)
            fa = transform.ntt(a, m, table)
            fb = transform.ntt(b, m, table)
            got = transform.ntt(fa * fb % np.uint64(m.q), m, table, direction="inverse")
            expected = negacyclic_product(a.tolist(), b.tolist(), m.q)
            assert got.tolist() == expected

    def test_worked_examples_q17(self):
        def prod(a, b):
            fa = transform.ntt(np.array(a, dtype=np.uint64), Q17, T17)
            fb = transform.ntt(np.array(b, dtype=np.uint64), Q17, T17)
            return transform.ntt(fa * fb % np.uint64(17), Q17, T17,
                                 direction="inverse").tolist()

        assert prod([1, 1, 0, 0], [1, 1, 0, 0]) == [1, 2, 1, 0]
        assert prod([0, 0, 0, 1], [0, 1, 0, 0]) == [16, 0, 0, 0]  # x^4 = -1

    def test_linearity(self, rng):
        (m,) = find_ntt_primes(1, 31, 256)
        table = transform.build_twiddle_table(m, 256)
        q = np.uint64(m.q)
        a = rng.integers(0, m.q, size=256, dtype=np.uint64)
        b = rng.integers(0, m.q, size=256, dtype=np.uint64)
        lhs = transform.ntt((a + b) % q, m, table)
        rhs = (transform.ntt(a, m, table) + transform.ntt(b, m, table)) % q
        assert np.array_equal(lhs, rhs)


class TestTwoPhase:
    @pytest.mark.parametrize("n,n1", [(16, 2), (16, 4), (16, 8), (16, 16), (256, 16)])
    def test_bit_equal_to_single_phase(self, n, n1, rng):
        basis = tuple(find_ntt_primes(2, 31, n))
        p = random_polynomial(basis, n, rng)
        one = transform.ntt_polynomial(p)
        for otf in (False, True):
            two = transform.ntt_two_phase(p, n1=n1, on_the_fly=otf)
            assert np.array_equal(one.coeffs, two.coeffs)
            back = transform.ntt_two_phase(two, "inverse", n1=n1, on_the_fly=otf)
            assert np.array_equal(back.coeffs, p.coeffs)

    def test_cross_check_n16_q97(self, rng):
        m = Modulus.for_prime(97, 16)
        basis = (m,)
        p = random_polynomial(basis, 16, rng)
        ref = transform.ntt(p.coeffs, m, transform.build_twiddle_table(m, 16))
        two = transform.ntt_two_phase(p, n1=4)
        assert np.array_equal(two.coeffs, ref)

    def test_phase1_twiddle_count_and_otf_phase2(self, rng):
        n, n1 = 256, 16
        basis = tuple(find_ntt_primes(1, 31, n))
        p = random_polynomial(basis, n, rng)
        counters.reset()
        transform.ntt_two_phase(p, n1=n1, on_the_fly=True)
        assert counters.twiddle_slots_phase1 == n1 - 1
        assert counters.twiddle_slots_phase2 == 0  # bulk phase reads only seeds
        assert counters.seed_reads == 2 * (n - n1)
        assert counters.otf_mults == n - n1

    def test_table_mode_counts_all_slots(self, rng):
        n, n1 = 64, 8
        basis = tuple(find_ntt_primes(1, 31, n))
        p = random_polynomial(basis, n, rng)
        counters.reset()
        transform.ntt_two_phase(p, n1=n1, on_the_fly=False)
        assert counters.twiddle_slots_phase1 == n1 - 1
        assert counters.twiddle_slots_phase2 == n - n1
        assert counters.seed_reads == 0


class TestOnTheFlyGeneration:
    def test_equals_table_exhaustively_n16_q97(self):
        m = Modulus.for_prime(97, 16)
        table = transform.build_twiddle_table(m, 16)
        block = table.seed_block
        for direction, ref in (("forward", table.fwd), ("inverse", table.inv)):
            for t in range(16):
                got = transform.generate_twiddle(
                    table, t // block, t % block, m, direction
                )
                assert got == int(ref[t])

    def test_slot_zero_is_one(self):
        m = Modulus.for_prime(97, 16)
        table = transform.build_twiddle_table(m, 16)
        assert transform.generate_twiddle(table, 0, 0, m) == 1

    def test_out_of_range_rejected(self):
        m = Modulus.for_prime(97, 16)
        table = transform.build_twiddle_table(m, 16)
        with pytest.raises(ValueError):
            transform.generate_twiddle(table, 99, 0, m)
        with pytest.raises(ValueError):
            transform.generate_twiddle(table, 0, table.seed_block, m)

    def test_seed_set_is_sqrt_sized_at_2_16(self):
        (m,) = find_ntt_primes(1, 31, 1 << 16)
        table = transform.build_twiddle_table(m, 1 << 16)
        assert table.seed_size <= 2 * int((1 << 16) ** 0.5)
        assert table.n1 == 1 << 8


class TestInstrumentation:
    @pytest.mark.parametrize("n", [4, 16, 256])
    def test_butterfly_count_per_limb(self, n, rng):
        basis = tuple(find_ntt_primes(2, 31, n))
        p = random_polynomial(basis, n, rng)
        counters.reset()
        transform.ntt_polynomial(p)
        lg = n.bit_length() - 1
        assert counters.butterflies == len(basis) * (n // 2) * lg

    def test_two_phase_butterflies_match(self, rng):
        n = 64
        basis = tuple(find_ntt_primes(1, 31, n))
        p = random_polynomial(basis, n, rng)
        counters.reset()
        transform.ntt_two_phase(p, n1=8)
        assert counters.butterflies == (n // 2) * 6


class TestLargeDegree:
    def test_identity_and_linearity_at_2_16(self, rng):
        n = 1 << 16
        (m,) = find_ntt_primes(1, 31, n)
        table = transform.build_twiddle_table(m, n)
        rows = rng.integers(0, m.q, size=(4, n), dtype=np.uint64)
        fwd = transform.ntt(rows, m, table)
        assert np.array_equal(
            transform.ntt(fwd, m, table, direction="inverse"), rows
        )
        q = np.uint64(m.q)
        lhs = transform.ntt((rows[0] + rows[1]) % q, m, table)
        assert np.array_equal(lhs, (fwd[0] + fwd[1]) % q)

    def test_dump_text_header(self):
        table = transform.build_twiddle_table(Q17, 4)
        text = table.dump_text()
        assert text.splitlines()[0] == "# twiddles q=17 n=4 n1=2"
        assert len(text.splitlines()) == 5
