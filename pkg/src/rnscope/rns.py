"""Word-size modular arithmetic, NTT-friendly prime search, and the RNS
polynomial data model (limb matrix, element-wise ops, automorphism).

Residues are kept in the canonical range [0, q) at every operation
boundary. All polynomial storage is uint64 even though residues fit in
32 bits; this keeps products of two residues exact inside numpy.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .instrument import counters

COEFFICIENT = "coefficient"
EVALUATION = "evaluation"


class RnsError(Exception):
    """Base class for engine errors."""


class InsufficientPrimesError(RnsError):
    """Prime search exhausted its space before finding enough moduli."""


class StructureError(RnsError):
    """Operands disagree on basis, degree, or domain."""


# Deterministic Miller-Rabin witness set for n < 3.3 * 10^24 (covers u64).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _find_primitive_2n_root(q: int, n: int) -> int:
    """Smallest psi >= 2 with psi^n = -1 mod q (order exactly 2n for 2-power n).

    Finds one solution by exponentiating small bases, then minimizes over
    the full solution coset psi0 * <psi0^2>, which enumerates every root.
    """
    psi0 = 0
    exp = (q - 1) // (2 * n)
    for g in range(2, q):
        x = pow(g, exp, q)
        if pow(x, n, q) == q - 1:
            psi0 = x
            break
    if not psi0:
        raise RnsError(f"no primitive {2 * n}-th root of unity mod {q}")
    omega = psi0 * psi0 % q
    best, cur = psi0, psi0
    for _ in range(n - 1):
        cur = cur * omega % q
        if cur < best:
            best = cur
    return best


@dataclass(frozen=True)
class Modulus:
    """A word-size NTT-friendly prime with precomputed reduction constants.

    q < 2^32 is prime with q = 1 (mod 2n); psi is a primitive 2n-th root of
    unity mod q. barrett_mu = floor(2^barrett_shift / q) supports scalar
    Barrett reduction of any x < 2^barrett_shift.
    """

    q: int
    n: int
    psi: int
    barrett_mu: int
    barrett_shift: int

    @classmethod
    def for_prime(cls, q: int, n: int, psi: int | None = None) -> "Modulus":
        if not is_prime(q):
            raise RnsError(f"{q} is not prime")
        if q >= 1 << 32:
            raise RnsError(f"{q} does not fit the 32-bit element representation")
        if (q - 1) % (2 * n) != 0:
            raise RnsError(f"{q} is not NTT-friendly for ring degree {n}")
        if psi is None:
            psi = _find_primitive_2n_root(q, n)
        elif pow(psi, n, q) != q - 1 or pow(psi, 2 * n, q) != 1:
            raise RnsError(f"{psi} is not a primitive {2 * n}-th root mod {q}")
        shift = 2 * q.bit_length()
        return cls(q=q, n=n, psi=psi, barrett_mu=(1 << shift) // q, barrett_shift=shift)

    @property
    def bits(self) -> int:
        return self.q.bit_length()

    def reduce(self, x: int) -> int:
        """Barrett-reduce x < 2^barrett_shift into [0, q)."""
        t = (x * self.barrett_mu) >> self.barrett_shift
        r = x - t * self.q
        while r >= self.q:
            r -= self.q
        return r


def mod_arith(x: int, y: int, m: Modulus, kind: str) -> int:
    """Exact (x op y) mod q for canonical inputs; result canonical."""
    if kind == "add":
        r = x + y
        return r - m.q if r >= m.q else r
    if kind == "sub":
        r = x - y
        return r + m.q if r < 0 else r
    if kind == "mul":
        return m.reduce(x * y)
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def find_ntt_primes(
    count: int, bitwidth: int, n: int, floor_bits: int | None = None
) -> list[Modulus]:
    """Find `count` primes p < 2^bitwidth with p = 1 (mod 2n), largest first.

    Scans downward from 2^bitwidth so that moduli stay close to the word
    size; stops at 2^(bitwidth-2) by default.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if n < 1 or n & (n - 1):
        raise ValueError("ring degree must be a power of two")
    if bitwidth > 32:
        raise ValueError("bitwidth must be at most 32")
    step = 2 * n
    if step > (1 << bitwidth):
        raise ValueError("2n must divide 2^bitwidth")
    floor = 1 << (floor_bits if floor_bits is not None else bitwidth - 2)
    found: list[Modulus] = []
    p = ((1 << bitwidth) - 2) // step * step + 1
    while p >= floor and len(found) < count:
        if is_prime(p):
            found.append(Modulus.for_prime(p, n))
        p -= step
    if len(found) < count:
        raise InsufficientPrimesError(
            f"insufficient primes: found {len(found)} of {count} primes "
            f"= 1 (mod {step}) in [{floor}, 2^{bitwidth})"
        )
    return found


@dataclass
class Polynomial:
    """An L x N residue matrix over an ordered modulus basis.

    Row i is reduced mod basis[i].q; N is a power of two; domain records
    whether the columns are coefficients or evaluation-point values.
    """

    basis: tuple[Modulus, ...]
    coeffs: np.ndarray
    domain: str

    def __post_init__(self) -> None:
        self.basis = tuple(self.basis)
        self.coeffs = np.asarray(self.coeffs, dtype=np.uint64)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != len(self.basis):
            raise StructureError(
                f"coefficient matrix {self.coeffs.shape} does not match "
                f"basis of length {len(self.basis)}"
            )
        if self.domain not in (COEFFICIENT, EVALUATION):
            raise StructureError(f"unknown domain {self.domain!r}")

    @property
    def num_limbs(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def q_column(self) -> np.ndarray:
        return np.array([m.q for m in self.basis], dtype=np.uint64)[:, None]

    def copy(self) -> "Polynomial":
        return Polynomial(self.basis, self.coeffs.copy(), self.domain)

    def validate(self) -> None:
        if np.any(self.coeffs >= self.q_column()):
            raise StructureError("residue out of canonical range [0, q)")


def zero_polynomial(basis: tuple[Modulus, ...], n: int, domain: str = COEFFICIENT) -> Polynomial:
    return Polynomial(tuple(basis), np.zeros((len(basis), n), dtype=np.uint64), domain)


def random_polynomial(
    basis: tuple[Modulus, ...], n: int, rng: np.random.Generator, domain: str = COEFFICIENT
) -> Polynomial:
    rows = [rng.integers(0, m.q, size=n, dtype=np.uint64) for m in basis]
    return Polynomial(tuple(basis), np.stack(rows), domain)


def poly_equal(a: Polynomial, b: Polynomial) -> bool:
    return (
        tuple(m.q for m in a.basis) == tuple(m.q for m in b.basis)
        and a.domain == b.domain
        and np.array_equal(a.coeffs, b.coeffs)
    )


def _check_compatible(a: Polynomial, b: Polynomial) -> None:
    if tuple(m.q for m in a.basis) != tuple(m.q for m in b.basis):
        raise StructureError("operands use different modulus bases")
    if a.n != b.n:
        raise StructureError(f"ring degrees differ: {a.n} vs {b.n}")
    if a.domain != b.domain:
        raise StructureError(f"domains differ: {a.domain} vs {b.domain}")


def poly_elementwise(a: Polynomial, b: Polynomial, kind: str) -> Polynomial:
    """Element-wise add/sub/mul; mul requires the evaluation domain."""
    _check_compatible(a, b)
    q = a.q_column()
    if kind == "add":
        out = (a.coeffs + b.coeffs) % q
    elif kind == "sub":
        out = (a.coeffs + q - b.coeffs) % q
    elif kind == "mul":
        if a.domain != EVALUATION:
            raise StructureError("element-wise mul is only convolution in the evaluation domain")
        out = (a.coeffs * b.coeffs) % q
    else:
        raise ValueError(f"unknown arithmetic kind {kind!r}")
    counters.elementwise += a.coeffs.size
    return Polynomial(a.basis, out, a.domain)


def _coefficient_maps(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Destination index and negation mask for X -> X^k on degree-n negacyclic ring."""
    i = np.arange(n, dtype=np.int64)
    j = (i * k) % (2 * n)
    return (j % n).astype(np.int64), j >= n


@functools.lru_cache(maxsize=256)
def _evaluation_permutation(n: int, k: int, q: int, psi: int) -> tuple[int, ...]:
    """Column permutation induced on evaluation-domain data by X -> X^k.

    Derived from the coefficient-domain definition through the transform
    itself: push a probe vector with distinct entries through
    INTT -> coefficient automorphism -> NTT and read off the source index
    of every output column. The permutation depends only on (n, k), not on
    the probe modulus.
    """
    from . import transform  # deferred: transform builds on this module

    m = Modulus.for_prime(q, n, psi)
    table = transform.build_twiddle_table(m, n)
    probe = np.arange(n, dtype=np.uint64)
    coeff = transform.ntt(probe, m, table, direction="inverse")
    dest, negate = _coefficient_maps(n, k)
    shuffled = np.zeros(n, dtype=np.uint64)
    vals = np.where(negate, (np.uint64(q) - coeff) % np.uint64(q), coeff)
    shuffled[dest] = vals
    out = transform.ntt(shuffled, m, table, direction="forward")
    perm = out.astype(np.int64)
    if sorted(perm.tolist()) != list(range(n)):
        raise RnsError("evaluation-domain automorphism did not reduce to a permutation")
    return tuple(int(x) for x in perm)


def automorphism(a: Polynomial, k: int) -> Polynomial:
    """Apply the ring automorphism X -> X^k (k odd, coprime to 2N).

    Coefficient domain: index i moves to i*k mod 2N with negacyclic sign
    handling. Evaluation domain: the induced column permutation, derived
    once per k via the transform and cached.
    """
    if k % 2 == 0:
        raise ValueError("automorphism index must be odd (coprime to 2N)")
    n = a.n
    k = k % (2 * n)
    if a.domain == COEFFICIENT:
        dest, negate = _coefficient_maps(n, k)
        q = a.q_column()
        vals = np.where(negate[None, :], (q - a.coeffs) % q, a.coeffs)
        out = np.zeros_like(a.coeffs)
        out[:, dest] = vals
        return Polynomial(a.basis, out, a.domain)
    probe = next((m for m in a.basis if m.n == n and m.q > n), None)
    if probe is None:
        raise StructureError(
            "evaluation-domain automorphism needs a basis modulus that is "
            "NTT-friendly for the polynomial's own degree"
        )
    perm = np.array(_evaluation_permutation(n, k, probe.q, probe.psi), dtype=np.int64)
    return Polynomial(a.basis, a.coeffs[:, perm], a.domain)
