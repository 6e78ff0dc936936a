"""Fast base conversion as a deferred-reduction integer GEMM.

Converting a polynomial from basis {Q_j} to basis {P_i} multiplies the
pre-scaled residues y[j] = a[j] * (Q*/Q_j)^-1 mod Q_j by the constant
table T[i][j] = (Q*/Q_j) mod P_i and reduces the accumulated sum once mod
P_i. The result is the CRT value plus e * Q* for some 0 <= e < L_in.

The single final reduction is only sound when every accumulator row stays
below 2^64; build_bconv_table certifies sum_j T[i][j] * Q_j < 2^64 for
all i, and search_overflow_free_moduli finds bases satisfying it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instrument import counters
from .rns import (
    COEFFICIENT,
    InsufficientPrimesError,
    Modulus,
    Polynomial,
    RnsError,
    StructureError,
    is_prime,
)

_U64 = 1 << 64


class OverflowUnsafeError(RnsError):
    """The deferred-reduction fast path would overflow its accumulator."""


@dataclass(frozen=True)
class BConvTable:
    """Conversion constants from q_basis (length L_in) to p_basis (L_out)."""

    q_basis: tuple[Modulus, ...]
    p_basis: tuple[Modulus, ...]
    t: np.ndarray  # (L_out, L_in): (Q*/Q_j) mod P_i
    inv_qhat: np.ndarray  # (L_in,): (Q*/Q_j)^-1 mod Q_j
    overflow_free: bool
    row_sums: tuple[int, ...]  # exact sum_j T[i][j] * Q_j per output row

    @property
    def l_in(self) -> int:
        return len(self.q_basis)

    @property
    def l_out(self) -> int:
        return len(self.p_basis)


def build_bconv_table(
    q_basis: tuple[Modulus, ...], p_basis: tuple[Modulus, ...]
) -> BConvTable:
    qs = [m.q for m in q_basis]
    ps = [m.q for m in p_basis]
    if set(qs) & set(ps):
        raise StructureError("input and output bases share a modulus")
    all_mods = qs + ps
    for i in range(len(all_mods)):
        for j in range(i + 1, len(all_mods)):
            if math.gcd(all_mods[i], all_mods[j]) != 1:
                raise StructureError(
                    f"moduli {all_mods[i]} and {all_mods[j]} are not coprime"
                )
    q_star = math.prod(qs)
    qhat = [q_star // q for q in qs]
    t = np.array([[h % p for h in qhat] for p in ps], dtype=np.uint64)
    inv_qhat = np.array([pow(h, -1, q) for h, q in zip(qhat, qs)], dtype=np.uint64)
    row_sums = tuple(
        sum(int(t[i, j]) * qs[j] for j in range(len(qs))) for i in range(len(ps))
    )
    return BConvTable(
        q_basis=tuple(q_basis),
        p_basis=tuple(p_basis),
        t=t,
        inv_qhat=inv_qhat,
        overflow_free=all(s < _U64 for s in row_sums),
        row_sums=row_sums,
    )


def _check_input(a: Polynomial, table: BConvTable) -> None:
    if a.domain != COEFFICIENT:
        raise StructureError("base conversion operates on coefficient-domain input")
    if tuple(m.q for m in a.basis) != tuple(m.q for m in table.q_basis):
        raise StructureError("polynomial basis does not match conversion table")


def _prescale(a: Polynomial, table: BConvTable) -> np.ndarray:
    q_col = a.q_column()
    counters.elementwise += a.coeffs.size
    return a.coeffs * table.inv_qhat[:, None] % q_col


def bconv(a: Polynomial, table: BConvTable) -> Polynomial:
    """Deferred-reduction fast path: one 64-bit accumulator pass, one final
    reduction per output limb. Requires table.overflow_free."""
    _check_input(a, table)
    if not table.overflow_free:
        raise OverflowUnsafeError(
            "accumulator may exceed 2^64; use bconv_with_intermediate_reduction"
        )
    y = _prescale(a, table)
    n = a.n
    acc = np.zeros((table.l_out, n), dtype=np.uint64)
    for k in range(table.l_in):
        acc += table.t[:, k][:, None] * y[k][None, :]
        counters.mads += table.l_out * n
    p_col = np.array([m.q for m in table.p_basis], dtype=np.uint64)[:, None]
    out = acc % p_col
    counters.reductions += table.l_out * n
    return Polynomial(table.p_basis, out, COEFFICIENT)


def bconv_with_intermediate_reduction(a: Polynomial, table: BConvTable) -> Polynomial:
    """Baseline path: reduce the accumulator whenever the next term could
    overflow 2^64. Works for any table; bit-identical to bconv whenever
    both are applicable."""
    _check_input(a, table)
    y = _prescale(a, table)
    n = a.n
    out = np.empty((table.l_out, n), dtype=np.uint64)
    for i in range(table.l_out):
        p = int(table.p_basis[i].q)
        acc = np.zeros(n, dtype=np.uint64)
        bound = 0
        for k in range(table.l_in):
            term_max = int(table.t[i, k]) * (int(table.q_basis[k].q) - 1)
            if bound + term_max >= _U64:
                acc %= np.uint64(p)
                counters.reductions += n
                bound = p - 1
            acc += np.uint64(int(table.t[i, k])) * y[k]
            counters.mads += n
            bound += term_max
        out[i] = acc % np.uint64(p)
        counters.reductions += n
    return Polynomial(table.p_basis, out, COEFFICIENT)


def convert(a: Polynomial, table: BConvTable) -> Polynomial:
    """Dispatch to the fast path when the overflow certificate holds."""
    if table.overflow_free:
        return bconv(a, table)
    return bconv_with_intermediate_reduction(a, table)


def search_overflow_free_moduli(
    l_in: int, l_out: int, n: int, bitwidth: int
) -> tuple[tuple[Modulus, ...], tuple[Modulus, ...]]:
    """Deterministic greedy search for bases satisfying the overflow-free
    condition sum_j T[i][j] * Q_j < 2^64 for every output modulus.

    The input basis takes the l_in largest NTT-friendly primes below
    2^bitwidth; output candidates are then scanned downward and accepted
    only if their table row satisfies the bound.
    """
    step = 2 * n
    floor = 1 << (bitwidth - 2)
    q_basis: list[Modulus] = []
    p_basis: list[Modulus] = []
    qs: list[int] = []
    qhat_cache: list[int] = []
    best_rejected: int | None = None
    p = ((1 << bitwidth) - 2) // step * step + 1
    while p >= floor and len(p_basis) < l_out:
        if is_prime(p):
            if len(q_basis) < l_in:
                q_basis.append(Modulus.for_prime(p, n))
                qs.append(p)
                if len(q_basis) == l_in:
                    q_star = math.prod(qs)
                    qhat_cache = [q_star // q for q in qs]
            else:
                row_sum = sum((h % p) * q for h, q in zip(qhat_cache, qs))
                if row_sum < _U64:
                    p_basis.append(Modulus.for_prime(p, n))
                elif best_rejected is None or row_sum < best_rejected:
                    best_rejected = row_sum
        p -= step
    if len(q_basis) < l_in or len(p_basis) < l_out:
        detail = (
            f"best rejected row sum {best_rejected} (bound 2^64 = {_U64})"
            if best_rejected is not None
            else "no candidates evaluated"
        )
        raise InsufficientPrimesError(
            f"overflow-free search exhausted primes below 2^{bitwidth}: "
            f"got {len(q_basis)}/{l_in} input and {len(p_basis)}/{l_out} "
            f"output moduli; {detail}"
        )
    return tuple(q_basis), tuple(p_basis)
