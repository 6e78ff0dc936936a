"""CKKS parameter sets with explicit modulus bases, serializable to JSON.

Moduli are listed explicitly in the config files so that every test
vector is reproducible from the file alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .rns import Modulus, RnsError, find_ntt_primes

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ParameterSet:
    """Ring degree N, limb budget L, key-switching digit structure, and bases.

    alpha is the digit size in limbs, dnum the decomposition number
    (L = dnum * alpha), beta = ceil(L / alpha) the active digit count.
    q_basis has L moduli, p_basis has alpha.
    """

    n: int
    l: int
    dnum: int
    alpha: int
    beta: int
    delta: int
    log_pq: int
    h_dense: int
    h_sparse: int
    q_basis: tuple[Modulus, ...]
    p_basis: tuple[Modulus, ...]

    def __post_init__(self) -> None:
        if self.l != self.dnum * self.alpha:
            raise RnsError(f"L={self.l} must equal dnum*alpha={self.dnum * self.alpha}")
        if self.beta != math.ceil(self.l / self.alpha):
            raise RnsError(f"beta={self.beta} must be ceil(L/alpha)")
        if len(self.q_basis) != self.l or len(self.p_basis) != self.alpha:
            raise RnsError("basis lengths must be L and alpha")
        qs = [m.q for m in self.q_basis + self.p_basis]
        if len(set(qs)) != len(qs):
            raise RnsError("moduli must be distinct")
        if sum(m.bits for m in self.q_basis + self.p_basis) > self.log_pq:
            raise RnsError("sum of moduli bit-widths exceeds logPQ")
        for m in self.q_basis + self.p_basis:
            if (m.q - 1) % (2 * self.n) != 0:
                raise RnsError(f"modulus {m.q} is not NTT-friendly for N={self.n}")

    @property
    def ext_basis(self) -> tuple[Modulus, ...]:
        return self.q_basis + self.p_basis

    def digit_slice(self, t: int) -> slice:
        if not 0 <= t < self.dnum:
            raise ValueError(f"digit index {t} out of range")
        return slice(t * self.alpha, (t + 1) * self.alpha)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "l": self.l,
            "dnum": self.dnum,
            "alpha": self.alpha,
            "beta": self.beta,
            "delta": self.delta,
            "log_pq": self.log_pq,
            "h_dense": self.h_dense,
            "h_sparse": self.h_sparse,
            "q_basis": [{"q": m.q, "psi": m.psi} for m in self.q_basis],
            "p_basis": [{"q": m.q, "psi": m.psi} for m in self.p_basis],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        n = int(data["n"])
        mk = lambda e: Modulus.for_prime(int(e["q"]), n, int(e["psi"]))
        return cls(
            n=n,
            l=int(data["l"]),
            dnum=int(data["dnum"]),
            alpha=int(data["alpha"]),
            beta=int(data["beta"]),
            delta=int(data["delta"]),
            log_pq=int(data["log_pq"]),
            h_dense=int(data["h_dense"]),
            h_sparse=int(data["h_sparse"]),
            q_basis=tuple(mk(e) for e in data["q_basis"]),
            p_basis=tuple(mk(e) for e in data["p_basis"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ParameterSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def generate_parameter_set(
    n: int,
    l: int,
    dnum: int,
    delta: int,
    h_dense: int,
    h_sparse: int,
    bitwidth: int = 31,
) -> ParameterSet:
    """Build a parameter set from freshly searched NTT-friendly primes.

    The q basis takes the largest primes; the p (digit-raise) basis takes
    the next alpha below them.
    """
    if l % dnum:
        raise RnsError(f"dnum={dnum} must divide L={l}")
    alpha = l // dnum
    moduli = find_ntt_primes(l + alpha, bitwidth, n)
    q_basis, p_basis = tuple(moduli[:l]), tuple(moduli[l:])
    return ParameterSet(
        n=n,
        l=l,
        dnum=dnum,
        alpha=alpha,
        beta=math.ceil(l / alpha),
        delta=delta,
        log_pq=sum(m.bits for m in moduli),
        h_dense=h_dense,
        h_sparse=h_sparse,
        q_basis=q_basis,
        p_basis=p_basis,
    )
