"""Operation counters used to check arithmetic-complexity claims.

The hot loops increment these as they execute, so tests can compare the
instrumented totals against closed-form counts. Single-threaded use only.
"""
from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class OpCounters:
    butterflies: int = 0
    mads: int = 0
    reductions: int = 0
    elementwise: int = 0
    # Unique twiddle-table slots fetched per transform phase (same set for
    # every limb of a call, so these are per-limb figures).
    twiddle_slots_phase1: int = 0
    twiddle_slots_phase2: int = 0
    seed_reads: int = 0
    otf_mults: int = 0

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, 0)

    def snapshot(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


counters = OpCounters()
