"""Negacyclic NTT/INTT per limb with a two-phase kernel split and
on-the-fly twiddle generation from an O(sqrt(N)) seed set.

Forward transforms use Cooley-Tukey butterflies (x + w*y, x - w*y) over a
bit-reversed power table of the 2N-th root psi; inverse transforms use
Gentleman-Sande butterflies (x + y, w*(x - y)) with N^-1 folded into the
final stage. Both are natural-order in, natural-order out (the
bit-reversed ordering is internal to the evaluation domain).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .instrument import counters
from .rns import COEFFICIENT, EVALUATION, Modulus, Polynomial, StructureError

FORWARD = "forward"
INVERSE = "inverse"


def _bit_reverse_indices(bits: int) -> np.ndarray:
    n = 1 << bits
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _power_table(base: int, count: int, q: int) -> np.ndarray:
    powers = np.empty(count, dtype=np.uint64)
    acc = 1
    for i in range(count):
        powers[i] = acc
        acc = acc * base % q
    return powers


@dataclass
class TwiddleTable:
    """Schedule-ordered twiddle factors for one modulus and ring degree.

    fwd[t] = psi^bitrev(t) and inv[t] = psi^-bitrev(t) for t in [0, N); the
    butterfly stage s reads slots [2^s, 2^(s+1)). The seed arrays are the
    O(sqrt(N)) base powers from which any slot can be regenerated with a
    single modular multiplication. n1 marks the two-kernel phase split:
    phase 1 covers the first log2(n1) forward stages.
    """

    modulus: Modulus
    n: int
    n1: int
    fwd: np.ndarray
    inv: np.ndarray
    n_inv: int
    seed_block: int
    fwd_seed_lo: np.ndarray
    fwd_seed_hi: np.ndarray
    inv_seed_lo: np.ndarray
    inv_seed_hi: np.ndarray

    @property
    def seed_size(self) -> int:
        return len(self.fwd_seed_lo) + len(self.fwd_seed_hi)

    def dump_text(self) -> str:
        lines = [f"# twiddles q={self.modulus.q} n={self.n} n1={self.n1}"]
        lines += [f"{t} {int(self.fwd[t])} {int(self.inv[t])}" for t in range(self.n)]
        return "\n".join(lines)


def build_twiddle_table(m: Modulus, n: int | None = None, n1: int | None = None) -> TwiddleTable:
    n = m.n if n is None else n
    if n < 2 or n & (n - 1):
        raise ValueError("ring degree must be a power of two >= 2")
    if (m.q - 1) % (2 * n) != 0:
        raise StructureError(f"modulus {m.q} is not NTT-friendly for degree {n}")
    lg = n.bit_length() - 1
    if n1 is None:
        n1 = 1 << ((lg + 1) // 2)
    if n1 < 2 or n1 > n or n1 & (n1 - 1):
        raise ValueError("phase split n1 must be a power of two in [2, N]")
    q = m.q
    # psi of order exactly 2n: reuse m.psi when m.n == n, else derive by
    # squaring down from the stored root.
    psi = m.psi
    order = 2 * m.n
    while order > 2 * n:
        psi = psi * psi % q
        order //= 2
    if order != 2 * n or pow(psi, n, q) != q - 1:
        raise StructureError(f"cannot derive a primitive {2 * n}-th root for q={q}")
    psi_inv = pow(psi, -1, q)
    rev = _bit_reverse_indices(lg)
    fwd = _power_table(psi, n, q)[rev]
    inv = _power_table(psi_inv, n, q)[rev]

    h = lg // 2
    block = 1 << h
    hi_step_fwd = pow(psi, 1 << (lg - h), q) if h else psi
    hi_step_inv = pow(psi_inv, 1 << (lg - h), q) if h else psi_inv
    return TwiddleTable(
        modulus=m,
        n=n,
        n1=n1,
        fwd=fwd,
        inv=inv,
        n_inv=pow(n, -1, q),
        seed_block=block,
        fwd_seed_lo=_power_table(hi_step_fwd, block, q),
        fwd_seed_hi=_power_table(psi, n >> h, q),
        inv_seed_lo=_power_table(hi_step_inv, block, q),
        inv_seed_hi=_power_table(psi_inv, n >> h, q),
    )


@functools.lru_cache(maxsize=512)
def twiddle_table(m: Modulus, n: int) -> TwiddleTable:
    return build_twiddle_table(m, n)


def generate_twiddle(table: TwiddleTable, stage: int, index: int, m: Modulus, direction: str = FORWARD) -> int:
    """Regenerate the schedule slot (stage * seed_block + index) from seeds.

    Costs exactly one modular multiplication. `stage` selects a
    seed_block-sized block of consecutive table slots; `index` is the
    offset inside it. Equals the precomputed table entry bit-exactly.
    """
    if m.q != table.modulus.q:
        raise StructureError("modulus does not match twiddle table")
    block = table.seed_block
    if not (0 <= stage < table.n // block):
        raise ValueError(f"stage {stage} out of range")
    if not (0 <= index < block):
        raise ValueError(f"index {index} out of range")
    h = block.bit_length() - 1
    lg = table.n.bit_length() - 1
    lo_rev = int(_bit_reverse_indices(h)[index]) if h else 0
    hi_rev = int(_bit_reverse_indices(lg - h)[stage]) if lg - h else 0
    lo, hi = (
        (table.fwd_seed_lo, table.fwd_seed_hi)
        if direction == FORWARD
        else (table.inv_seed_lo, table.inv_seed_hi)
    )
    counters.seed_reads += 2
    counters.otf_mults += 1
    return int(lo[lo_rev]) * int(hi[hi_rev]) % m.q


def _otf_slot_values(table: TwiddleTable, slots: np.ndarray, direction: str) -> np.ndarray:
    """Vectorized seed-based regeneration of a range of table slots."""
    h = table.seed_block.bit_length() - 1
    lg = table.n.bit_length() - 1
    lo_idx = slots & (table.seed_block - 1)
    hi_idx = slots >> h
    lo_rev = _bit_reverse_indices(h)[lo_idx] if h else np.zeros_like(slots)
    hi_rev = _bit_reverse_indices(lg - h)[hi_idx] if lg - h else np.zeros_like(slots)
    lo, hi = (
        (table.fwd_seed_lo, table.fwd_seed_hi)
        if direction == FORWARD
        else (table.inv_seed_lo, table.inv_seed_hi)
    )
    counters.seed_reads += 2 * len(slots)
    counters.otf_mults += len(slots)
    return lo[lo_rev] * hi[hi_rev] % np.uint64(table.modulus.q)


class _StackedTables:
    """Per-row twiddle data for a whole basis, for row-vectorized transforms."""

    def __init__(self, tables: tuple[TwiddleTable, ...]):
        self.tables = tables
        self.n = tables[0].n
        self.fwd = np.stack([t.fwd for t in tables])
        self.inv = np.stack([t.inv for t in tables])
        self.q = np.array([t.modulus.q for t in tables], dtype=np.uint64)[:, None, None]
        self.n_inv = np.array([t.n_inv for t in tables], dtype=np.uint64)[:, None, None]


@functools.lru_cache(maxsize=256)
def _stacked_tables(moduli: tuple[Modulus, ...], n: int) -> _StackedTables:
    return _StackedTables(tuple(twiddle_table(m, n) for m in moduli))


def _twiddles_for_stage(
    stacked: _StackedTables, slots: np.ndarray, direction: str, on_the_fly: bool, phase: int
) -> np.ndarray:
    if on_the_fly:
        vals = [_otf_slot_values(t, slots, direction) for t in stacked.tables]
        return np.stack(vals)
    if phase == 1:
        counters.twiddle_slots_phase1 += len(slots)
    else:
        counters.twiddle_slots_phase2 += len(slots)
    src = stacked.fwd if direction == FORWARD else stacked.inv
    return src[:, slots]


def _run_stages(
    a: np.ndarray,
    stacked: _StackedTables,
    direction: str,
    stages: range,
    on_the_fly: bool = False,
    phase: int = 1,
) -> np.ndarray:
    """Execute butterfly stages `stages` in place on an (R, N) block.

    Rows may have distinct moduli (stacked tables). Stage s of the forward
    transform has 2^s groups; stage s of the inverse has N/2^(s+1) groups,
    and the last inverse stage folds in the N^-1 normalization.
    """
    rows, n = a.shape
    lg = n.bit_length() - 1
    q = stacked.q
    for s in stages:
        if direction == FORWARD:
            groups = 1 << s
            t = n >> (s + 1)
            slots = np.arange(groups, 2 * groups, dtype=np.int64)
            w = _twiddles_for_stage(stacked, slots, direction, on_the_fly, phase)[:, :, None]
            blk = a.reshape(rows, groups, 2 * t)
            x = blk[:, :, :t]
            y = blk[:, :, t:]
            v = y * w % q
            hi = (x + q - v) % q
            blk[:, :, :t] = (x + v) % q
            blk[:, :, t:] = hi
        else:
            groups = n >> (s + 1)
            t = 1 << s
            slots = np.arange(groups, 2 * groups, dtype=np.int64)
            w = _twiddles_for_stage(stacked, slots, direction, on_the_fly, phase)[:, :, None]
            blk = a.reshape(rows, groups, 2 * t)
            x = blk[:, :, :t]
            y = blk[:, :, t:]
            total = (x + y) % q
            diff = (x + q - y) % q
            if s == lg - 1:
                # Final Gentleman-Sande stage: merge the N^-1 scaling.
                total = total * stacked.n_inv % q
                w = w * stacked.n_inv % q
            blk[:, :, :t] = total
            blk[:, :, t:] = diff * w % q
        counters.butterflies += rows * (n // 2)
    return a


def ntt(
    limb: np.ndarray,
    m: Modulus,
    table: TwiddleTable | None = None,
    direction: str = FORWARD,
) -> np.ndarray:
    """Transform one limb (or a stack of limbs sharing a modulus).

    Forward input is coefficient-domain, inverse input evaluation-domain;
    inverse(forward(x)) == x exactly.
    """
    arr = np.asarray(limb, dtype=np.uint64)
    single = arr.ndim == 1
    a = arr.reshape(1, -1).copy() if single else arr.copy()
    n = a.shape[1]
    if table is None:
        table = twiddle_table(m, n)
    if table.n != n or table.modulus.q != m.q:
        raise StructureError(f"twiddle table for n={table.n}, q={table.modulus.q} "
                             f"does not match limb of length {n} mod {m.q}")
    stacked = _StackedTables((table,))  # leading axis broadcasts over rows
    lg = n.bit_length() - 1
    out = _run_stages(a, stacked, direction, range(lg))
    return out[0] if single else out


def ntt_polynomial(p: Polynomial, direction: str = FORWARD) -> Polynomial:
    """Whole-polynomial transform; flips the domain tag."""
    want = COEFFICIENT if direction == FORWARD else EVALUATION
    if p.domain != want:
        raise StructureError(f"{direction} transform expects {want}-domain input")
    stacked = _stacked_tables(p.basis, p.n)
    lg = p.n.bit_length() - 1
    out = _run_stages(p.coeffs.copy(), stacked, direction, range(lg))
    return Polynomial(p.basis, out, EVALUATION if direction == FORWARD else COEFFICIENT)


def ntt_two_phase(
    p: Polynomial,
    direction: str = FORWARD,
    n1: int | None = None,
    on_the_fly: bool = True,
) -> Polynomial:
    """Two-kernel NTT: phase 1, an explicit inter-phase exchange, phase 2.

    Bit-identical to ntt_polynomial. Phase 1 of the forward transform is
    the first log2(n1) stages and reads n1 - 1 table twiddles per limb;
    the bulk phase (forward phase 2, inverse phase 1) regenerates its
    twiddles from the seed set when on_the_fly is set, touching no table
    slots. The inter-phase exchange is materialized as a buffer handoff so
    the cost model may charge two kernels with full read/write traffic.
    """
    want = COEFFICIENT if direction == FORWARD else EVALUATION
    if p.domain != want:
        raise StructureError(f"{direction} transform expects {want}-domain input")
    stacked = _stacked_tables(p.basis, p.n)
    lg = p.n.bit_length() - 1
    if n1 is None:
        n1 = stacked.tables[0].n1
    if n1 < 2 or n1 > p.n or n1 & (n1 - 1):
        raise ValueError("phase split n1 must be a power of two in [2, N]")
    h1 = n1.bit_length() - 1
    split = h1 if direction == FORWARD else lg - h1
    bulk_first = direction == INVERSE
    a = p.coeffs.copy()
    a = _run_stages(a, stacked, direction, range(split),
                    on_the_fly=on_the_fly and bulk_first, phase=1)
    a = a.copy()  # inter-phase data exchange
    a = _run_stages(a, stacked, direction, range(split, lg),
                    on_the_fly=on_the_fly and not bulk_first, phase=2)
    return Polynomial(p.basis, a, EVALUATION if direction == FORWARD else COEFFICIENT)
