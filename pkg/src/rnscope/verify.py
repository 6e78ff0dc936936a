"""Oracle-backed verification suites for the engine.

Each suite checks an implementation path against an independent oracle:
the transform suite against an O(N^2) schoolbook negacyclic product, the
base-conversion suite against exact wide-integer CRT arithmetic, and the
key-switching suite against end-to-end decryption error bounds.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import baseconv, keyswitch, transform
from .params import ParameterSet
from .rns import COEFFICIENT, Modulus, Polynomial, find_ntt_primes

FAULT_NONE = "none"
FAULT_TWIDDLE = "twiddle"


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    failures: int
    stats: dict = field(default_factory=dict)
    elapsed: float = 0.0


def schoolbook_negacyclic(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """O(N^2) negacyclic product oracle, exact in 64-bit steps."""
    n = len(a)
    a = a.astype(np.uint64)
    b = b.astype(np.uint64)
    qq = np.uint64(q)
    c = np.zeros(n, dtype=np.uint64)
    for i in range(n):
        if not a[i]:
            continue
        lo = a[i] * b[: n - i] % qq  # contributes to c[i:]
        hi = a[i] * b[n - i :] % qq  # wraps negacyclically into c[:i]
        c[i:] = (c[i:] + lo) % qq
        c[:i] = (c[:i] + qq - hi) % qq
    return c


def _corrupt_table(m: Modulus, n: int) -> transform.TwiddleTable:
    table = transform.build_twiddle_table(m, n)
    bad = table.fwd.copy()
    slot = n // 2 + 1 if n > 2 else 1
    bad[slot] = (bad[slot] + 1) % m.q
    table.fwd = bad
    return table


def transform_suite(
    seed: int = 0,
    sizes: tuple[int, ...] = (4, 16, 256),
    moduli_per_size: int = 3,
    identity_rows: int = 10_000,
    product_pairs: int = 32,
    fault: str = FAULT_NONE,
) -> SuiteResult:
    """Round-trip identity and the convolution theorem against the oracle."""
    rng = np.random.default_rng(seed)
    t0 = time.time()
    checks = failures = 0
    worst = 0
    for n in sizes:
        for m in find_ntt_primes(moduli_per_size, 31, n):
            table = (
                _corrupt_table(m, n) if fault == FAULT_TWIDDLE
                else transform.build_twiddle_table(m, n)
            )
            rows = rng.integers(0, m.q, size=(identity_rows, n), dtype=np.uint64)
            back = transform.ntt(
                transform.ntt(rows, m, table), m, table, direction="inverse"
            )
            checks += 1
            if not np.array_equal(back, rows):
                failures += 1
            for _ in range(product_pairs):
                a = rng.integers(0, m.q, size=n, dtype=np.uint64)
                b = rng.integers(0, m.q, size=n, dtype=np.uint64)
                via_ntt = transform.ntt(
                    transform.ntt(a, m, table) * transform.ntt(b, m, table) % np.uint64(m.q),
                    m, table, direction="inverse",
                )
                expected = schoolbook_negacyclic(a, b, m.q)
                checks += 1
                mism = int(np.count_nonzero(via_ntt != expected))
                if mism:
                    failures += 1
                    worst = max(worst, mism)
    return SuiteResult(
        name="ntt-convolution",
        passed=failures == 0,
        checks=checks,
        failures=failures,
        stats={"sizes": list(sizes), "worst_mismatched_coeffs": worst},
        elapsed=time.time() - t0,
    )


def _crt_convert_oracle(
    a: Polynomial, q_basis: tuple[Modulus, ...], p_basis: tuple[Modulus, ...]
) -> np.ndarray:
    """Exact wide-integer evaluation of the fast-base-conversion formula."""
    qs = [m.q for m in q_basis]
    big_q = math.prod(qs)
    qhat = [big_q // q for q in qs]
    inv = [pow(h, -1, q) for h, q in zip(qhat, qs)]
    n = a.n
    out = np.zeros((len(p_basis), n), dtype=np.uint64)
    cols = a.coeffs.T.tolist()
    for j, col in enumerate(cols):
        c = sum(h * (x * iq % q) for h, iq, q, x in zip(qhat, inv, qs, col))
        for i, m in enumerate(p_basis):
            out[i, j] = c % m.q
    return out


def bconv_suite(
    seed: int = 0,
    l_in: int = 12,
    l_out_values: tuple[int, ...] = (12, 24, 48),
    n: int = 1 << 16,
    bitwidth: int = 31,
    columns: int = 1000,
) -> SuiteResult:
    """Deferred-reduction BConv against the wide-integer oracle and the
    intermediate-reduction fallback, plus the overflow certificate."""
    rng = np.random.default_rng(seed)
    t0 = time.time()
    checks = failures = 0
    max_ratio = 0.0
    for l_out in l_out_values:
        q_basis, p_basis = baseconv.search_overflow_free_moduli(l_in, l_out, n, bitwidth)
        table = baseconv.build_bconv_table(q_basis, p_basis)
        checks += 1
        if not table.overflow_free:
            failures += 1
        # Certificate re-verified with exact integers.
        qs = [m.q for m in q_basis]
        for i, row_sum in enumerate(table.row_sums):
            checks += 1
            recomputed = sum(int(table.t[i, j]) * qs[j] for j in range(l_in))
            if recomputed != row_sum or recomputed >= 1 << 64:
                failures += 1
        max_ratio = max(max_ratio, max(table.row_sums) / 2.0**64)
        rows = np.stack(
            [rng.integers(0, m.q, size=columns, dtype=np.uint64) for m in q_basis]
        )
        a = Polynomial(q_basis, rows, COEFFICIENT)
        fast = baseconv.bconv(a, table)
        slow = baseconv.bconv_with_intermediate_reduction(a, table)
        oracle = _crt_convert_oracle(a, q_basis, p_basis)
        checks += 2
        if not np.array_equal(fast.coeffs, slow.coeffs):
            failures += 1
        if not np.array_equal(fast.coeffs, oracle):
            failures += 1
    return SuiteResult(
        name="bconv-wide-integer",
        passed=failures == 0,
        checks=checks,
        failures=failures,
        stats={"l_in": l_in, "l_out": list(l_out_values),
               "max_row_sum_over_2e64": max_ratio},
        elapsed=time.time() - t0,
    )


def keyswitch_suite(
    params: ParameterSet,
    seed: int = 0,
    trials: int = 20,
    message_bound: int = 8,
) -> SuiteResult:
    """decrypt(keyswitch(encrypt(m))) recovers m within 2^-10 relative error;
    stage composability and batching are bit-exact."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    checks = failures = 0
    max_rel = 0.0
    max_abs = 0
    for trial in range(trials):
        base = seed * 1000 + trial
        s_from = keyswitch.keygen(params, seed=base + 1)
        s_to = keyswitch.keygen(params, seed=base + 2)
        msg = rng.integers(1, message_bound + 1, params.n).astype(np.int64)
        msg *= rng.choice(np.array([-1, 1], dtype=np.int64), params.n)
        msg *= params.delta
        ct = keyswitch.encrypt(msg, s_from, params, seed=base + 3)
        evk = keyswitch.switching_keygen(s_from, s_to, params, seed=base + 4)
        switched = keyswitch.keyswitch(ct, evk)
        dec = keyswitch.decrypt(switched, s_to)
        err = np.abs(dec - msg)
        rel = float((err / np.abs(msg)).max())
        max_rel = max(max_rel, rel)
        max_abs = max(max_abs, int(err.max()))
        checks += 1
        if rel >= 2.0**-10:
            failures += 1
        if trial == 0:
            raised = keyswitch.keyswitch_stage1(ct.a, params)
            q_part, p_part = keyswitch.keyswitch_stage2(raised, evk)
            delta = keyswitch.keyswitch_stage3(q_part, p_part, params)
            from .rns import poly_elementwise

            composed_b = poly_elementwise(delta.b, ct.b, "add")
            checks += 1
            if not (
                np.array_equal(delta.a.coeffs, switched.a.coeffs)
                and np.array_equal(composed_b.coeffs, switched.b.coeffs)
            ):
                failures += 1
            sequential = keyswitch.keyswitch_stage1(ct.a, params, batch=1)
            checks += 1
            if not all(
                np.array_equal(x.coeffs, y.coeffs)
                for x, y in zip(sequential, raised)
            ):
                failures += 1
    return SuiteResult(
        name="keyswitch-decrypt",
        passed=failures == 0,
        checks=checks,
        failures=failures,
        stats={
            "trials": trials,
            "max_relative_error": max_rel,
            "max_abs_error": max_abs,
            "bound": 2.0**-10,
        },
        elapsed=time.time() - t0,
    )


def run_all(
    params: ParameterSet,
    seed: int = 0,
    fault: str = FAULT_NONE,
    keyswitch_trials: int = 20,
    bconv_n: int = 1 << 16,
) -> list[SuiteResult]:
    return [
        transform_suite(seed=seed, fault=fault),
        bconv_suite(seed=seed, n=bconv_n),
        keyswitch_suite(params, seed=seed, trials=keyswitch_trials),
    ]
