"""Portable binary dump format for polynomials (test vectors).

Layout, all little-endian:

    magic   4 bytes  b"RNSV"
    version u16
    domain  u8       0 = coefficient, 1 = evaluation
    _pad    u8
    L       u32      limb count
    N       u32      ring degree
    then L modulus records: q u64, psi u64, n u64
    then L*N residues as u32, row-major

Residues are 32-bit on the wire (every modulus is < 2^32).
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .rns import COEFFICIENT, EVALUATION, Modulus, Polynomial, RnsError

MAGIC = b"RNSV"
VERSION = 1

_HEADER = struct.Struct("<4sHBBII")
_MODREC = struct.Struct("<QQQ")


def polynomial_to_bytes(poly: Polynomial) -> bytes:
    parts = [
        _HEADER.pack(
            MAGIC, VERSION, 0 if poly.domain == COEFFICIENT else 1, 0,
            poly.num_limbs, poly.n,
        )
    ]
    parts += [_MODREC.pack(m.q, m.psi, m.n) for m in poly.basis]
    parts.append(np.ascontiguousarray(poly.coeffs, dtype="<u4").tobytes())
    return b"".join(parts)


def polynomial_from_bytes(blob: bytes) -> Polynomial:
    magic, version, domain_code, _, limbs, n = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise RnsError("not a polynomial test-vector blob")
    if version != VERSION:
        raise RnsError(f"unsupported test-vector version {version}")
    offset = _HEADER.size
    basis = []
    for _ in range(limbs):
        q, psi, deg = _MODREC.unpack_from(blob, offset)
        offset += _MODREC.size
        basis.append(Modulus.for_prime(q, deg, psi))
    data = np.frombuffer(blob, dtype="<u4", count=limbs * n, offset=offset)
    coeffs = data.reshape(limbs, n).astype(np.uint64)
    return Polynomial(
        tuple(basis), coeffs, COEFFICIENT if domain_code == 0 else EVALUATION
    )


def save_polynomial(path: str | Path, poly: Polynomial) -> None:
    Path(path).write_bytes(polynomial_to_bytes(poly))


def load_polynomial(path: str | Path) -> Polynomial:
    return polynomial_from_bytes(Path(path).read_bytes())
