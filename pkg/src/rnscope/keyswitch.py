"""Three-stage key-switching with a minimal keygen/encrypt/decrypt harness.

Stage 1 raises each digit of the input polynomial to the extended basis
Q||P (INTT -> pre-scale + base conversion -> NTT, original digit limbs
carried through). Stage 2 is the element-wise inner product of the raised
digits with the switching-key pairs. Stage 3 scales the accumulator back
down by P (ModDown) and folds in the ciphertext b-part.

Every operation is deterministic given a seed, and all batched variants
are bit-identical to sequential execution: batching only changes how rows
are grouped into vectorized calls.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import baseconv, transform
from .instrument import counters
from .params import ParameterSet
from .rns import (
    COEFFICIENT,
    EVALUATION,
    Modulus,
    Polynomial,
    RnsError,
    StructureError,
    poly_elementwise,
)

NOISE_WIDTH = 3.2  # centered discrete Gaussian width for fresh noise


@dataclass
class SecretKey:
    """Ternary secret with exactly h nonzero coefficients in {-1, +1}."""

    ternary: np.ndarray  # (N,) int8
    n: int
    _eval_cache: dict = field(default_factory=dict, repr=False)

    @property
    def hamming_weight(self) -> int:
        return int(np.count_nonzero(self.ternary))

    def residue_rows(self, basis: tuple[Modulus, ...]) -> np.ndarray:
        """Coefficient-domain rows: -1 maps to q-1 on every limb."""
        s = self.ternary.astype(np.int64)
        rows = [np.where(s < 0, m.q + s, s).astype(np.uint64) for m in basis]
        return np.stack(rows)

    def eval_polynomial(self, basis: tuple[Modulus, ...]) -> Polynomial:
        key = tuple(m.q for m in basis)
        if key not in self._eval_cache:
            coeff = Polynomial(basis, self.residue_rows(basis), COEFFICIENT)
            self._eval_cache[key] = transform.ntt_polynomial(coeff)
        return self._eval_cache[key]


@dataclass
class Ciphertext:
    """Pair (a, b) in the evaluation domain; decrypt(ct, s) = b + a*s."""

    a: Polynomial
    b: Polynomial
    scale: int

    def __post_init__(self) -> None:
        if self.a.domain != EVALUATION or self.b.domain != EVALUATION:
            raise StructureError("ciphertext polynomials live in the evaluation domain")


@dataclass
class PolyPair:
    """Two polynomials sharing a basis: the (2, D) shapes of the pipeline."""

    a: Polynomial
    b: Polynomial


@dataclass
class SwitchingKey:
    """dnum gadget-encryption pairs over the extended basis Q||P."""

    pairs: tuple[PolyPair, ...]
    params: ParameterSet

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * len(self.pairs), self.pairs[0].a.num_limbs)


def _gaussian_rows(
    basis: tuple[Modulus, ...], n: int, rng: np.random.Generator, width: float = NOISE_WIDTH
) -> tuple[np.ndarray, np.ndarray]:
    """Centered discrete Gaussian noise and its per-limb residue rows."""
    e = np.rint(rng.normal(0.0, width, size=n)).astype(np.int64)
    rows = [(e % np.int64(m.q)).astype(np.uint64) for m in basis]
    return e, np.stack(rows)


def _uniform_polynomial(
    basis: tuple[Modulus, ...], n: int, rng: np.random.Generator, domain: str
) -> Polynomial:
    rows = [rng.integers(0, m.q, size=n, dtype=np.uint64) for m in basis]
    return Polynomial(basis, np.stack(rows), domain)


def keygen(params: ParameterSet, h: int | None = None, seed: int = 0) -> SecretKey:
    """Sample a ternary secret of Hamming weight h (default: dense weight)."""
    h = params.h_dense if h is None else h
    if not 0 < h <= params.n:
        raise RnsError(f"Hamming weight {h} out of range for N={params.n}")
    rng = np.random.default_rng(seed)
    support = rng.choice(params.n, size=h, replace=False)
    s = np.zeros(params.n, dtype=np.int8)
    s[support] = rng.choice(np.array([-1, 1], dtype=np.int8), size=h)
    return SecretKey(ternary=s, n=params.n)


def encrypt(
    msg: np.ndarray, sk: SecretKey, params: ParameterSet, seed: int = 0
) -> Ciphertext:
    """Encrypt a length-N integer row (already scaled by delta) under sk.

    b = -a*s + msg + e with a uniform and e a fresh Gaussian, so
    decrypt(encrypt(m, s), s) = m + e.
    """
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape != (params.n,):
        raise StructureError(f"message must be a length-{params.n} integer row")
    big_q = math.prod(m.q for m in params.q_basis)
    if 4 * int(np.abs(msg).max(initial=0)) >= big_q:
        raise RnsError("message magnitude exceeds the modulus budget")
    rng = np.random.default_rng(seed)
    basis = params.q_basis
    a = _uniform_polynomial(basis, params.n, rng, EVALUATION)
    _, e_rows = _gaussian_rows(basis, params.n, rng)
    msg_rows = np.stack([(msg % np.int64(m.q)).astype(np.uint64) for m in basis])
    q_col = np.array([m.q for m in basis], dtype=np.uint64)[:, None]
    payload = transform.ntt_polynomial(
        Polynomial(basis, (e_rows + msg_rows) % q_col, COEFFICIENT)
    )
    s_eval = sk.eval_polynomial(basis)
    b = poly_elementwise(payload, poly_elementwise(a, s_eval, "mul"), "sub")
    return Ciphertext(a=a, b=b, scale=params.delta)


@functools.lru_cache(maxsize=32)
def _crt_constants(qs: tuple[int, ...]) -> tuple[int, list[int], list[int]]:
    big_q = math.prod(qs)
    qhat = [big_q // q for q in qs]
    inv = [pow(h, -1, q) for h, q in zip(qhat, qs)]
    return big_q, qhat, inv


def _crt_center(rows: np.ndarray, qs: tuple[int, ...]) -> list[int]:
    """CRT-reconstruct each column and center into (-Q/2, Q/2]."""
    big_q, qhat, inv = _crt_constants(qs)
    half = big_q // 2
    scaled = [
        (rows[i].astype(object) * inv[i] % qs[i]) for i in range(len(qs))
    ]
    out = []
    for j in range(rows.shape[1]):
        v = sum(int(scaled[i][j]) * qhat[i] for i in range(len(qs))) % big_q
        out.append(v - big_q if v > half else v)
    return out


def decrypt(ct: Ciphertext, sk: SecretKey) -> np.ndarray:
    """Return the centered integer row b + a*s (message plus noise)."""
    basis = ct.a.basis
    s_eval = sk.eval_polynomial(basis)
    d = poly_elementwise(ct.b, poly_elementwise(ct.a, s_eval, "mul"), "add")
    coeff = transform.ntt_polynomial(d, "inverse")
    vals = _crt_center(coeff.coeffs, tuple(m.q for m in basis))
    if any(abs(v) >= 1 << 62 for v in vals):
        raise RnsError("decrypted value exceeds the int64 range; wrong key or overflow")
    return np.array(vals, dtype=np.int64)


class _KsTables:
    """Per-parameter-set conversion tables and constants for the pipeline."""

    def __init__(self, params: ParameterSet):
        self.params = params
        ext = params.ext_basis
        self.ext_basis = ext
        # Raise tables: digit t -> complementary (L - alpha) Q-limbs + alpha P-limbs.
        self.raise_tables = []
        self.raise_targets = []
        for t in range(params.dnum):
            digit = params.q_basis[params.digit_slice(t)]
            target = tuple(
                m for i, m in enumerate(params.q_basis) if i // params.alpha != t
            ) + params.p_basis
            self.raise_tables.append(baseconv.build_bconv_table(digit, target))
            self.raise_targets.append(target)
        # ModDown table: P -> Q, and P^-1 mod each Q_i.
        self.moddown_table = baseconv.build_bconv_table(params.p_basis, params.q_basis)
        p_prod = math.prod(m.q for m in params.p_basis)
        self.p_inv_col = np.array(
            [pow(p_prod, -1, m.q) for m in params.q_basis], dtype=np.uint64
        )[:, None]
        # Gadget residues: g_t = P * (Q/D_t) * ((Q/D_t)^-1 mod D_t) mod each
        # extended-basis modulus (P on digit-t limbs, 0 elsewhere).
        qs = [m.q for m in params.q_basis]
        big_q = math.prod(qs)
        self.gadget = np.zeros((params.dnum, len(ext)), dtype=np.uint64)
        for t in range(params.dnum):
            d_t = math.prod(qs[params.digit_slice(t)])
            q_hat = big_q // d_t
            g = p_prod * q_hat * pow(q_hat, -1, d_t)
            self.gadget[t] = [g % m.q for m in ext]


@functools.lru_cache(maxsize=8)
def _tables(params: ParameterSet) -> _KsTables:
    return _KsTables(params)


def switching_keygen(
    s_from: SecretKey, s_to: SecretKey, params: ParameterSet, seed: int = 0
) -> SwitchingKey:
    """Gadget-encrypt s_from digit-wise under s_to over the extended basis.

    Pair t satisfies b_t + a_t * s_to = e_t + g_t * s_from where g_t is the
    RNS gadget factor for digit t; shape (2 * dnum, L + alpha).
    """
    tabs = _tables(params)
    ext = tabs.ext_basis
    rng = np.random.default_rng(seed)
    s_to_eval = s_to.eval_polynomial(ext)
    s_from_eval = s_from.eval_polynomial(ext)
    q_col = s_to_eval.q_column()
    pairs = []
    for t in range(params.dnum):
        a = _uniform_polynomial(ext, params.n, rng, EVALUATION)
        _, e_rows = _gaussian_rows(ext, params.n, rng)
        e_eval = transform.ntt_polynomial(Polynomial(ext, e_rows, COEFFICIENT))
        g_col = tabs.gadget[t][:, None]
        b_coeffs = (
            e_eval.coeffs
            + (g_col * s_from_eval.coeffs % q_col)
            + (q_col - a.coeffs * s_to_eval.coeffs % q_col)
        ) % q_col
        counters.elementwise += 3 * b_coeffs.size
        pairs.append(PolyPair(a=a, b=Polynomial(ext, b_coeffs, EVALUATION)))
    return SwitchingKey(pairs=tuple(pairs), params=params)


def _raise_group(d: Polynomial, group: list[int], tabs: _KsTables) -> list[Polynomial]:
    """INTT -> pre-scale + convert -> NTT for a batch of digits.

    The group's digit limbs go through the INTT and the final NTT as one
    row-stacked unit; each digit's conversion GEMM runs on its own table.
    Original digit limbs are carried through in the evaluation domain.
    """
    params = tabs.params
    alpha, l = params.alpha, params.l
    digit_bases = [params.q_basis[params.digit_slice(t)] for t in group]
    stack_basis = tuple(m for b in digit_bases for m in b)
    rows = np.concatenate([d.coeffs[params.digit_slice(t)] for t in group], axis=0)
    coeff = transform.ntt_polynomial(
        Polynomial(stack_basis, rows, EVALUATION), "inverse"
    )
    conv_blocks = []
    for i, t in enumerate(group):
        block = Polynomial(
            digit_bases[i], coeff.coeffs[i * alpha : (i + 1) * alpha], COEFFICIENT
        )
        conv_blocks.append(baseconv.convert(block, tabs.raise_tables[t]).coeffs)
    conv_basis = tuple(m for t in group for m in tabs.raise_targets[t])
    conv_eval = transform.ntt_polynomial(
        Polynomial(conv_basis, np.concatenate(conv_blocks, axis=0), COEFFICIENT)
    )
    ext = tabs.ext_basis
    raised = []
    for i, t in enumerate(group):
        block = conv_eval.coeffs[i * l : (i + 1) * l]
        out = np.empty((len(ext), d.n), dtype=np.uint64)
        src = 0
        for row in range(len(ext)):
            if row < l and row // alpha == t:
                out[row] = d.coeffs[row]
            else:
                out[row] = block[src]
                src += 1
        raised.append(Polynomial(ext, out, EVALUATION))
    return raised


def keyswitch_stage1(
    d: Polynomial, params: ParameterSet, batch: int | None = None
) -> list[Polynomial]:
    """Raise all beta digits of d to the extended basis; returns (beta, L+alpha).

    batch groups digit pipelines into jointly vectorized units (B = beta by
    default); the output is bit-identical for every grouping.
    """
    if d.domain != EVALUATION:
        raise StructureError("stage 1 input lives in the evaluation domain")
    if tuple(m.q for m in d.basis) != tuple(m.q for m in params.q_basis):
        raise StructureError("stage 1 input basis must match the parameter q-basis")
    tabs = _tables(params)
    batch = params.beta if batch is None else max(1, batch)
    raised: list[Polynomial] = []
    for start in range(0, params.beta, batch):
        group = list(range(start, min(start + batch, params.beta)))
        raised.extend(_raise_group(d, group, tabs))
    return raised


def _stage2_accumulate(
    raised: list[Polynomial], evk: SwitchingKey, rows: slice
) -> tuple[np.ndarray, np.ndarray]:
    ext = evk.pairs[0].a.basis
    q_col = np.array([m.q for m in ext], dtype=np.uint64)[rows][:, None]
    n = raised[0].n
    width = len(range(*rows.indices(len(ext))))
    acc_a = np.zeros((width, n), dtype=np.uint64)
    acc_b = np.zeros((width, n), dtype=np.uint64)
    for t, digit in enumerate(raised):
        pair = evk.pairs[t]
        acc_a = (acc_a + digit.coeffs[rows] * pair.a.coeffs[rows] % q_col) % q_col
        acc_b = (acc_b + digit.coeffs[rows] * pair.b.coeffs[rows] % q_col) % q_col
        counters.elementwise += 2 * acc_a.size
    return acc_a, acc_b


def keyswitch_stage2(
    raised: list[Polynomial], evk: SwitchingKey
) -> tuple[PolyPair, PolyPair]:
    """Element-wise multiply-accumulate against the key pairs.

    Returns the (2, L) Q-part accumulator and the (2, alpha) P-part.
    """
    params = evk.params
    if len(raised) != params.beta:
        raise StructureError(f"expected {params.beta} raised digits, got {len(raised)}")
    ext = evk.pairs[0].a.basis
    acc_a, acc_b = _stage2_accumulate(raised, evk, slice(0, len(ext)))
    q_part = PolyPair(
        a=Polynomial(params.q_basis, acc_a[: params.l], EVALUATION),
        b=Polynomial(params.q_basis, acc_b[: params.l], EVALUATION),
    )
    p_part = PolyPair(
        a=Polynomial(params.p_basis, acc_a[params.l :], EVALUATION),
        b=Polynomial(params.p_basis, acc_b[params.l :], EVALUATION),
    )
    return q_part, p_part


def keyswitch_stage2_split(
    raised: list[Polynomial], evk: SwitchingKey
) -> tuple[PolyPair, PolyPair]:
    """Split stage 2: the (2, alpha) P-part is produced first so stage-3
    work may begin while the (2, L) half is still being computed.
    Bit-identical to keyswitch_stage2."""
    p_part = stage2_p_part(raised, evk)
    q_part = stage2_q_part(raised, evk)
    return p_part, q_part


def stage2_p_part(raised: list[Polynomial], evk: SwitchingKey) -> PolyPair:
    params = evk.params
    acc_a, acc_b = _stage2_accumulate(raised, evk, slice(params.l, params.l + params.alpha))
    return PolyPair(
        a=Polynomial(params.p_basis, acc_a, EVALUATION),
        b=Polynomial(params.p_basis, acc_b, EVALUATION),
    )


def stage2_q_part(raised: list[Polynomial], evk: SwitchingKey) -> PolyPair:
    params = evk.params
    acc_a, acc_b = _stage2_accumulate(raised, evk, slice(0, params.l))
    return PolyPair(
        a=Polynomial(params.q_basis, acc_a, EVALUATION),
        b=Polynomial(params.q_basis, acc_b, EVALUATION),
    )


def _moddown_group(
    p_blocks: list[np.ndarray], q_blocks: list[np.ndarray], tabs: _KsTables
) -> list[np.ndarray]:
    """(x_Q - BConv(INTT(x_P)) in eval domain) * P^-1 for a batched group.

    The group's P-parts go through the INTT and the final NTT as one
    row-stacked unit; base conversion runs per polynomial (its columns are
    independent either way).
    """
    params = tabs.params
    k = len(p_blocks)
    alpha, l = params.alpha, params.l
    p_stack = Polynomial(
        params.p_basis * k, np.concatenate(p_blocks, axis=0), EVALUATION
    )
    p_coeff = transform.ntt_polynomial(p_stack, "inverse")
    conv_rows = []
    for i in range(k):
        block = Polynomial(
            params.p_basis, p_coeff.coeffs[i * alpha : (i + 1) * alpha], COEFFICIENT
        )
        conv_rows.append(baseconv.convert(block, tabs.moddown_table).coeffs)
    conv_eval = transform.ntt_polynomial(
        Polynomial(params.q_basis * k, np.concatenate(conv_rows, axis=0), COEFFICIENT)
    )
    q_col = np.array([m.q for m in params.q_basis], dtype=np.uint64)[:, None]
    outputs = []
    for i in range(k):
        conv = conv_eval.coeffs[i * l : (i + 1) * l]
        out = (q_blocks[i] + q_col - conv) % q_col * tabs.p_inv_col % q_col
        counters.elementwise += 2 * out.size
        outputs.append(out)
    return outputs


def keyswitch_stage3(
    q_part: PolyPair, p_part: PolyPair, params: ParameterSet, batch: int = 2
) -> PolyPair:
    """ModDown both accumulator polynomials back to the Q basis.

    batch=2 processes the pair as one stacked unit; batch=1 runs the two
    polynomials sequentially. Outputs are bit-identical either way.
    """
    tabs = _tables(params)
    if batch >= 2:
        out_a, out_b = _moddown_group(
            [p_part.a.coeffs, p_part.b.coeffs], [q_part.a.coeffs, q_part.b.coeffs], tabs
        )
    else:
        (out_a,) = _moddown_group([p_part.a.coeffs], [q_part.a.coeffs], tabs)
        (out_b,) = _moddown_group([p_part.b.coeffs], [q_part.b.coeffs], tabs)
    return PolyPair(
        a=Polynomial(params.q_basis, out_a, EVALUATION),
        b=Polynomial(params.q_basis, out_b, EVALUATION),
    )


def keyswitch(ct: Ciphertext, evk: SwitchingKey) -> Ciphertext:
    """Full three-stage pipeline: re-encrypt ct's a-part under the new key
    and fold the original b-part into the result."""
    params = evk.params
    raised = keyswitch_stage1(ct.a, params)
    q_part, p_part = keyswitch_stage2(raised, evk)
    delta = keyswitch_stage3(q_part, p_part, params)
    return Ciphertext(
        a=delta.a, b=poly_elementwise(delta.b, ct.b, "add"), scale=ct.scale
    )


def keyswitch_batched(cts: list[Ciphertext], evk: SwitchingKey) -> list[Ciphertext]:
    """Outer batching dimension over independent ciphertexts; bit-identical
    to switching each ciphertext on its own."""
    return [keyswitch(ct, evk) for ct in cts]


def dump_pipeline_vectors(directory, ct: Ciphertext, evk: SwitchingKey) -> list[str]:
    """Write every stage's input/output polynomials as binary test vectors.

    Files use the portable layout in rnscope.vectors (little-endian 32-bit
    residues, row-major). Returns the file names written, in pipeline order.
    """
    from pathlib import Path

    from .vectors import save_polynomial

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    params = evk.params
    raised = keyswitch_stage1(ct.a, params)
    q_part, p_part = keyswitch_stage2(raised, evk)
    delta = keyswitch_stage3(q_part, p_part, params)
    files: list[tuple[str, Polynomial]] = [("stage1_input_a.rnsv", ct.a)]
    files += [(f"stage1_raised_digit{t}.rnsv", r) for t, r in enumerate(raised)]
    files += [
        ("stage2_acc_q_a.rnsv", q_part.a),
        ("stage2_acc_q_b.rnsv", q_part.b),
        ("stage2_acc_p_a.rnsv", p_part.a),
        ("stage2_acc_p_b.rnsv", p_part.b),
        ("stage3_out_a.rnsv", delta.a),
        ("stage3_out_b.rnsv", delta.b),
    ]
    for name, poly in files:
        save_polynomial(directory / name, poly)
    return [name for name, _ in files]
