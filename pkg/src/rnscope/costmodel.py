"""Analytical GPU memory-hierarchy cost model.

Traffic is counted limb-granularly at the global-memory (L2) boundary:
every kernel reads its input limbs once and writes its output limbs once,
a limb being N * 4 bytes. An NTT is two kernels, each with a full
read+write pass. Reported MB are decimal (10^6 bytes).

Key-switching kernel sequence (per digit / per ModDown polynomial):

  stage 1: [INTT k1: reads the whole (1, L) input per digit (the
           decompose gather), writes alpha] [INTT k2: alpha -> alpha]
           [BConv: reads alpha, writes L] [NTT k1, k2: L -> L each]
           => 6L + 4alpha limb transfers per digit
  stage 2: one element-wise kernel reading the (beta, L+alpha) raised
           digits, the (2*beta, L+alpha) switching key and the (1, L)
           ciphertext b-part (key and b-part stream from DRAM), writing
           the (2, L+alpha) accumulators
  stage 3: [INTT k1, k2: alpha -> alpha] [BConv: alpha -> L]
           [NTT k1: L -> L] [NTT k2: reads L plus the resident (2, L)
           accumulator, writes L, with the subtract/rescale fused]
           => 6L + 5alpha limb transfers per polynomial, twice

These conventions reproduce the reference footprint and per-stage traffic
figures for (L, alpha, beta) in {(48,12,4), (24,12,2), (12,12,1)} that the
acceptance suite pins down.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .params import ParameterSet

SCHEMA_VERSION = 1

NTT_PHASE1 = "ntt_phase1"
NTT_PHASE2 = "ntt_phase2"
BCONV = "bconv"
ELEMENTWISE = "elementwise"
KINDS = (NTT_PHASE1, NTT_PHASE2, BCONV, ELEMENTWISE)

RESOURCES = ("l2_read", "l2_write", "dram", "compute")


class CostModelError(Exception):
    pass


@dataclass(frozen=True)
class MachineModel:
    """Capacities and bandwidths of the modeled memory hierarchy.

    l2_read_bw / l2_write_bw are the L2->SM and SM->L2 network ceilings in
    bytes/s, dram_bw the DRAM ceiling; fma_tput / alu_tput are integer-op
    throughputs in ops/s; launch_overhead is seconds per kernel launch.
    saturation_limbs is the active-limb count at which a kernel reaches
    full bandwidth utilization (hardware saturates only for wide grids).
    """

    name: str
    l2_capacity: int
    l2_read_bw: float
    l2_write_bw: float
    dram_bw: float
    fma_tput: float
    alu_tput: float
    launch_overhead: float
    saturation_limbs: int = 64

    def __post_init__(self) -> None:
        for fname in ("l2_capacity", "l2_read_bw", "l2_write_bw", "dram_bw",
                      "fma_tput", "alu_tput", "launch_overhead", "saturation_limbs"):
            if getattr(self, fname) <= 0:
                raise CostModelError(f"{fname} must be positive")
        if self.l2_write_bw > self.l2_read_bw:
            raise CostModelError("l2_write_bw must not exceed l2_read_bw")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "l2_capacity": self.l2_capacity,
            "l2_read_bw": self.l2_read_bw,
            "l2_write_bw": self.l2_write_bw,
            "dram_bw": self.dram_bw,
            "fma_tput": self.fma_tput,
            "alu_tput": self.alu_tput,
            "launch_overhead": self.launch_overhead,
            "saturation_limbs": self.saturation_limbs,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MachineModel":
        kwargs = {k: data[k] for k in (
            "name", "l2_capacity", "l2_read_bw", "l2_write_bw", "dram_bw",
            "fma_tput", "alu_tput", "launch_overhead")}
        if "saturation_limbs" in data:
            kwargs["saturation_limbs"] = data["saturation_limbs"]
        kwargs["l2_capacity"] = int(kwargs["l2_capacity"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "MachineModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def builtin_machine(name: str) -> MachineModel:
    """Load one of the shipped machine profiles (rtx5090, a100, h100)."""
    from importlib import resources

    ref = resources.files("rnscope").joinpath(f"data/profiles/{name}.json")
    if not ref.is_file():
        raise CostModelError(f"no builtin machine profile named {name!r}")
    return MachineModel.from_dict(json.loads(ref.read_text()))


def builtin_machine_names() -> list[str]:
    from importlib import resources

    root = resources.files("rnscope").joinpath("data/profiles")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


@dataclass(frozen=True)
class KernelDescriptor:
    """One modeled kernel: kind, dimensions, and non-resident operand bytes.

    limbs is the output limb count per batch element (L_out for bconv,
    with l_in the input limb count); batch multiplies every dimension.
    extra_read_bytes are operand bytes beyond the primary input (counted
    at the L2 boundary); dram_bytes is the subset that streams from DRAM.
    write_limbs overrides the output width of element-wise kernels whose
    output shape differs from the input. fused_ops counts additional
    element-wise operations folded into the kernel. stages is the number
    of butterfly stages an NTT phase executes (default: an even split).
    """

    kind: str
    n: int
    limbs: int
    l_in: int | None = None
    batch: int = 1
    stages: int | None = None
    extra_read_bytes: int = 0
    dram_bytes: int = 0
    write_limbs: int | None = None
    fused_ops: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CostModelError(f"unknown kernel kind {self.kind!r}")
        if self.n <= 0 or self.limbs <= 0 or self.batch <= 0:
            raise CostModelError("kernel dimensions must be positive")
        if self.kind == BCONV and not self.l_in:
            raise CostModelError("bconv kernels need l_in")

    @property
    def limb_bytes(self) -> int:
        return self.n * 4

    def _stage_count(self) -> int:
        lg = self.n.bit_length() - 1
        if self.stages is not None:
            return self.stages
        half = (lg + 1) // 2
        return half if self.kind == NTT_PHASE1 else lg - half


def kernel_traffic(k: KernelDescriptor) -> tuple[int, int]:
    """Bytes (read, written) at the global-memory boundary."""
    limb = k.limb_bytes
    if k.kind == BCONV:
        read = k.batch * k.l_in * limb
    else:
        read = k.batch * k.limbs * limb
    read += k.extra_read_bytes
    if k.write_limbs is not None:
        write = k.write_limbs * limb
    else:
        write = k.batch * k.limbs * limb
    return read, write


def kernel_core_ops(k: KernelDescriptor) -> int:
    """Core IMAD count: butterflies for NTT phases, MADs for BConv, one op
    per element (plus fused ops) for element-wise kernels."""
    per_poly = k.batch * k.limbs
    fused = per_poly * k.n * k.fused_ops
    if k.kind in (NTT_PHASE1, NTT_PHASE2):
        return per_poly * (k.n // 2) * k._stage_count() + fused
    if k.kind == BCONV:
        return k.batch * k.l_in * k.limbs * k.n + fused
    return per_poly * k.n + fused


@dataclass(frozen=True)
class KernelTraffic:
    """Resolved accounting row for one kernel."""

    kind: str
    label: str
    read_bytes: int
    write_bytes: int
    dram_bytes: int
    core_ops: int
    active_limbs: int

    @classmethod
    def of(cls, k: KernelDescriptor) -> "KernelTraffic":
        read, write = kernel_traffic(k)
        return cls(
            kind=k.kind,
            label=k.label or k.kind,
            read_bytes=read,
            write_bytes=write,
            dram_bytes=k.dram_bytes,
            core_ops=kernel_core_ops(k),
            active_limbs=k.batch * k.limbs,
        )


@dataclass
class TrafficReport:
    """Per-kernel and aggregate bytes at the global-memory boundary."""

    kernels: list[KernelTraffic] = field(default_factory=list)
    label: str = ""

    @classmethod
    def of(cls, descriptors: list[KernelDescriptor], label: str = "") -> "TrafficReport":
        return cls(kernels=[KernelTraffic.of(k) for k in descriptors], label=label)

    @classmethod
    def from_totals(
        cls, read_bytes: int = 0, write_bytes: int = 0, dram_bytes: int = 0,
        core_ops: int = 0, label: str = "totals",
    ) -> "TrafficReport":
        row = KernelTraffic(
            kind=ELEMENTWISE, label=label, read_bytes=int(read_bytes),
            write_bytes=int(write_bytes), dram_bytes=int(dram_bytes),
            core_ops=int(core_ops), active_limbs=0,
        )
        return cls(kernels=[row], label=label)

    @property
    def read_bytes(self) -> int:
        return sum(k.read_bytes for k in self.kernels)

    @property
    def write_bytes(self) -> int:
        return sum(k.write_bytes for k in self.kernels)

    @property
    def dram_bytes(self) -> int:
        return sum(k.dram_bytes for k in self.kernels)

    @property
    def core_ops(self) -> int:
        return sum(k.core_ops for k in self.kernels)

    @property
    def total_bytes(self) -> int:
        return self.read_bytes + self.write_bytes


@dataclass(frozen=True)
class RooflineBound:
    latency: float
    bottleneck: str
    terms: dict[str, float]


def _resource_terms(
    read: int, write: int, dram: int, ops: int, machine: MachineModel
) -> dict[str, float]:
    return {
        "l2_read": read / machine.l2_read_bw,
        "l2_write": write / machine.l2_write_bw,
        "dram": dram / machine.dram_bw,
        "compute": ops / machine.fma_tput,
    }


def roofline(traffic: TrafficReport, machine: MachineModel) -> RooflineBound:
    """Latency lower bound: max over resources of demand / bandwidth."""
    terms = _resource_terms(
        traffic.read_bytes, traffic.write_bytes, traffic.dram_bytes,
        traffic.core_ops, machine,
    )
    bottleneck = max(terms, key=terms.get)
    return RooflineBound(latency=terms[bottleneck], bottleneck=bottleneck, terms=terms)


def kernel_time(
    kt: KernelTraffic, machine: MachineModel, utilization: bool = False
) -> float:
    """Bottleneck time of one kernel; optionally derated by the active-limb
    utilization ramp (narrow kernels cannot saturate the NoCs)."""
    u = 1.0
    if utilization and kt.active_limbs:
        u = min(1.0, kt.active_limbs / machine.saturation_limbs)
    return max(
        kt.read_bytes / (machine.l2_read_bw * u),
        kt.write_bytes / (machine.l2_write_bw * u),
        kt.dram_bytes / machine.dram_bw,
        kt.core_ops / (machine.fma_tput * u),
    )


# --- key-switching sequence -------------------------------------------------


def keyswitch_footprint(params: ParameterSet, stage: int, batch: int = 1) -> int:
    """Maximum live working set of a key-switching stage, in bytes.

    Stage 1 holds the (beta, L+alpha) raised digits per sequence; stage 3
    holds 4L limbs per sequence (the inherent B=2 polynomial pair with its
    inputs and outputs). batch counts independent sequences.
    """
    limb = params.n * 4
    if stage == 1:
        return batch * params.beta * (params.l + params.alpha) * limb
    if stage == 3:
        return batch * 4 * params.l * limb
    raise CostModelError("footprint is defined for stages 1 and 3")


def keyswitch_kernels(
    params: ParameterSet, batch: int = 1
) -> dict[int, list[KernelDescriptor]]:
    """The three-stage key-switching kernel sequence under the documented
    counting conventions, keyed by stage. batch adds an outer dimension of
    independent key-switching sequences."""
    n, l, alpha, beta = params.n, params.l, params.alpha, params.beta
    limb = n * 4
    b1 = batch * beta
    stage1 = [
        KernelDescriptor(NTT_PHASE1, n, alpha, batch=b1,
                         extra_read_bytes=b1 * (l - alpha) * limb,
                         label="s1.intt1+decompose"),
        KernelDescriptor(NTT_PHASE2, n, alpha, batch=b1, label="s1.intt2"),
        KernelDescriptor(BCONV, n, l, l_in=alpha, batch=b1, label="s1.bconv"),
        KernelDescriptor(NTT_PHASE1, n, l, batch=b1, label="s1.ntt1"),
        KernelDescriptor(NTT_PHASE2, n, l, batch=b1, label="s1.ntt2"),
    ]
    hint_bytes = batch * (2 * beta * (l + alpha) + l) * limb
    stage2 = [
        KernelDescriptor(
            ELEMENTWISE, n, l + alpha, batch=b1,
            extra_read_bytes=hint_bytes, dram_bytes=hint_bytes,
            write_limbs=batch * 2 * (l + alpha), fused_ops=1,
            label="s2.inner-product",
        ),
    ]
    b3 = batch * 2
    stage3 = [
        KernelDescriptor(NTT_PHASE1, n, alpha, batch=b3, label="s3.intt1"),
        KernelDescriptor(NTT_PHASE2, n, alpha, batch=b3, label="s3.intt2"),
        KernelDescriptor(BCONV, n, l, l_in=alpha, batch=b3, label="s3.bconv"),
        KernelDescriptor(NTT_PHASE1, n, l, batch=b3, label="s3.ntt1"),
        KernelDescriptor(NTT_PHASE2, n, l, batch=b3,
                         extra_read_bytes=b3 * l * limb, fused_ops=2,
                         label="s3.ntt2+moddown"),
    ]
    return {1: stage1, 2: stage2, 3: stage3}


def keyswitch_traffic(params: ParameterSet, batch: int = 1) -> dict[int, TrafficReport]:
    """Per-stage traffic reports for one (or batch) key-switching sequences."""
    return {
        stage: TrafficReport.of(kernels, label=f"keyswitch-stage{stage}")
        for stage, kernels in keyswitch_kernels(params, batch).items()
    }


# --- batching ----------------------------------------------------------------


@dataclass(frozen=True)
class BatchPlan:
    sequence: str
    b_star: int
    footprint_per_sequence: int
    footprint_at_b_star: int
    l2_capacity: int
    spill: bool


def _sequence_footprint(params: ParameterSet, sequence: str, batch: int) -> int:
    if sequence == "ks_stage1":
        return keyswitch_footprint(params, 1, batch)
    if sequence == "ks_stage3":
        return keyswitch_footprint(params, 3, batch)
    if sequence == "ks_full":
        return max(keyswitch_footprint(params, 1, batch),
                   keyswitch_footprint(params, 3, batch))
    raise CostModelError(f"unknown sequence {sequence!r}")


def plan_batch(params: ParameterSet, sequence: str, machine: MachineModel) -> BatchPlan:
    """Largest batch whose working set stays L2-resident (B* >= 1).

    Returns B* = 1 with the spill flag when even a single sequence
    overflows the cache.
    """
    per_seq = _sequence_footprint(params, sequence, 1)
    if per_seq > machine.l2_capacity:
        return BatchPlan(sequence, 1, per_seq, per_seq, machine.l2_capacity, True)
    b_star = machine.l2_capacity // per_seq
    return BatchPlan(
        sequence, int(b_star), per_seq, int(b_star) * per_seq,
        machine.l2_capacity, False,
    )


def _sequence_kernels(params: ParameterSet, sequence: str, batch: int) -> list[KernelDescriptor]:
    stages = keyswitch_kernels(params, batch)
    if sequence == "ks_stage1":
        return stages[1]
    if sequence == "ks_stage3":
        return stages[3]
    if sequence == "ks_full":
        return stages[1] + stages[2] + stages[3]
    raise CostModelError(f"unknown sequence {sequence!r}")


def amortized_batch_latency(
    params: ParameterSet, sequence: str, machine: MachineModel, batch: int
) -> float:
    """Modeled latency per sequence when `batch` sequences run together.

    Kernel times use the utilization ramp (batching widens kernels), plus
    per-kernel launch overhead. Working-set bytes beyond the L2 capacity
    are charged to DRAM once per kernel touch.
    """
    kernels = _sequence_kernels(params, sequence, batch)
    spill = max(0, _sequence_footprint(params, sequence, batch) - machine.l2_capacity)
    total = 0.0
    for k in kernels:
        kt = KernelTraffic.of(k)
        total += kernel_time(kt, machine, utilization=True)
        total += spill / machine.dram_bw
        total += machine.launch_overhead
    return total / batch


def batch_latency_curve(
    params: ParameterSet, sequence: str, machine: MachineModel, b_max: int
) -> list[dict]:
    rows = []
    for b in range(1, b_max + 1):
        rows.append({
            "b": b,
            "amortized_latency": amortized_batch_latency(params, sequence, machine, b),
            "footprint_bytes": _sequence_footprint(params, sequence, b),
        })
    return rows


# --- pipelining and sequence estimation --------------------------------------


@dataclass(frozen=True)
class GroupSummary:
    label: str
    demands: dict[str, float]
    bottleneck: str
    latency: float


@dataclass(frozen=True)
class Schedule:
    """Two co-scheduled kernel groups with their overlap estimate."""

    groups: tuple[GroupSummary, ...]
    overlapped_latency: float
    sequential_latency: float
    combined_bottleneck: str
    warnings: tuple[str, ...] = ()


def _group_summary(kernels: list[KernelDescriptor], machine: MachineModel, label: str) -> GroupSummary:
    read = write = dram = ops = 0
    for k in kernels:
        kt = KernelTraffic.of(k)
        read += kt.read_bytes
        write += kt.write_bytes
        dram += kt.dram_bytes
        ops += kt.core_ops
    terms = _resource_terms(read, write, dram, ops, machine)
    bottleneck = max(terms, key=terms.get) if kernels else "l2_read"
    return GroupSummary(
        label=label,
        demands={"read_bytes": read, "write_bytes": write,
                 "dram_bytes": dram, "core_ops": ops},
        bottleneck=bottleneck,
        latency=max(terms.values()) if kernels else 0.0,
    )


def schedule_pipeline(
    group_a: list[KernelDescriptor],
    group_b: list[KernelDescriptor],
    machine: MachineModel,
) -> Schedule:
    """Co-schedule a DRAM-bound group with an L2-bound group.

    Overlapped latency is the bound on the combined demands; sequential
    latency is the sum of per-group bottleneck times. Overlapped <=
    sequential always holds. Emits a warning when the groups do not have
    the expected complementary bottlenecks.
    """
    a = _group_summary(group_a, machine, "A")
    b = _group_summary(group_b, machine, "B")
    combined = _resource_terms(
        a.demands["read_bytes"] + b.demands["read_bytes"],
        a.demands["write_bytes"] + b.demands["write_bytes"],
        a.demands["dram_bytes"] + b.demands["dram_bytes"],
        a.demands["core_ops"] + b.demands["core_ops"],
        machine,
    )
    bottleneck = max(combined, key=combined.get)
    warnings = []
    if group_a and a.bottleneck != "dram":
        warnings.append(f"group A bottleneck is {a.bottleneck}, expected dram")
    if group_b and not b.bottleneck.startswith("l2"):
        warnings.append(f"group B bottleneck is {b.bottleneck}, expected l2")
    return Schedule(
        groups=(a, b),
        overlapped_latency=max(combined.values()),
        sequential_latency=a.latency + b.latency,
        combined_bottleneck=bottleneck,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class TraceKernel:
    """A kernel instance inside a trace DAG."""

    descriptor: KernelDescriptor
    kernel_id: str = ""
    deps: tuple[str, ...] = ()
    overlap_group: str | None = None
    overlap_role: str = "A"


def _check_dag(entries: list[TraceKernel]) -> None:
    ids = [e.kernel_id for e in entries if e.kernel_id]
    if len(set(ids)) != len(ids):
        raise CostModelError("duplicate kernel ids in trace")
    known = set(ids)
    order = {e.kernel_id: i for i, e in enumerate(entries) if e.kernel_id}
    for i, e in enumerate(entries):
        for d in e.deps:
            if d not in known:
                raise CostModelError(f"kernel {e.kernel_id or i} depends on unknown {d!r}")
            if order[d] >= i:
                raise CostModelError(f"dependency {d!r} does not precede {e.kernel_id or i}")


def estimate_sequence(
    dag: list[TraceKernel] | list[KernelDescriptor],
    machine: MachineModel,
    mode: str = "eager",
) -> float:
    """Latency of a static kernel DAG under eager or static-graph launch.

    Kernels execute back-to-back at their per-kernel bottleneck times;
    kernels sharing an overlap_group are co-scheduled via the pipelining
    model instead. Eager mode adds launch_overhead per kernel; a static
    graph submits the whole DAG once and drops that term.
    """
    if mode not in ("eager", "static_graph"):
        raise CostModelError(f"unknown execution mode {mode!r}")
    entries = [
        e if isinstance(e, TraceKernel) else TraceKernel(descriptor=e)
        for e in dag
    ]
    _check_dag(entries)
    plain = [e.descriptor for e in entries if e.overlap_group is None]
    groups: dict[str, dict[str, list[KernelDescriptor]]] = {}
    for e in entries:
        if e.overlap_group is not None:
            role = "B" if e.overlap_role.upper() == "B" else "A"
            groups.setdefault(e.overlap_group, {"A": [], "B": []})[role].append(e.descriptor)
    total = sum(kernel_time(KernelTraffic.of(k), machine) for k in plain)
    for parts in groups.values():
        total += schedule_pipeline(parts["A"], parts["B"], machine).overlapped_latency
    if mode == "eager":
        total += machine.launch_overhead * len(entries)
    return total


# --- trace and report I/O -----------------------------------------------------


def trace_to_dict(entries: list[TraceKernel]) -> dict:
    kernels = []
    for i, e in enumerate(entries):
        d = e.descriptor
        kernels.append({
            "id": e.kernel_id or f"k{i}",
            "kind": d.kind,
            "n": d.n,
            "limbs": d.limbs,
            "l_in": d.l_in,
            "batch": d.batch,
            "stages": d.stages,
            "extra_read_bytes": d.extra_read_bytes,
            "dram_bytes": d.dram_bytes,
            "write_limbs": d.write_limbs,
            "fused_ops": d.fused_ops,
            "label": d.label,
            "deps": list(e.deps),
            "overlap_group": e.overlap_group,
            "overlap_role": e.overlap_role,
        })
    return {"schema_version": SCHEMA_VERSION, "kernels": kernels}


def trace_from_dict(data: dict) -> list[TraceKernel]:
    entries = []
    for item in data.get("kernels", []):
        desc = KernelDescriptor(
            kind=item["kind"],
            n=int(item["n"]),
            limbs=int(item["limbs"]),
            l_in=item.get("l_in"),
            batch=int(item.get("batch", 1)),
            stages=item.get("stages"),
            extra_read_bytes=int(item.get("extra_read_bytes", 0)),
            dram_bytes=int(item.get("dram_bytes", 0)),
            write_limbs=item.get("write_limbs"),
            fused_ops=int(item.get("fused_ops", 0)),
            label=item.get("label", ""),
        )
        entries.append(TraceKernel(
            descriptor=desc,
            kernel_id=str(item.get("id", "")),
            deps=tuple(item.get("deps", []) or ()),
            overlap_group=item.get("overlap_group"),
            overlap_role=item.get("overlap_role", "A"),
        ))
    return entries


def load_trace(path: str | Path) -> list[TraceKernel]:
    return trace_from_dict(json.loads(Path(path).read_text()))


def save_trace(path: str | Path, entries: list[TraceKernel]) -> None:
    Path(path).write_text(json.dumps(trace_to_dict(entries), indent=2) + "\n")


def traffic_report_csv(report: TrafficReport, machine: MachineModel | None = None) -> str:
    buf = io.StringIO()
    cols = ["label", "kind", "read_bytes", "write_bytes", "dram_bytes", "core_ops"]
    if machine is not None:
        cols += ["latency_s", "bottleneck"]
    writer = csv.writer(buf)
    writer.writerow(cols)
    for kt in report.kernels:
        row = [kt.label, kt.kind, kt.read_bytes, kt.write_bytes, kt.dram_bytes, kt.core_ops]
        if machine is not None:
            terms = _resource_terms(
                kt.read_bytes, kt.write_bytes, kt.dram_bytes, kt.core_ops, machine)
            bottleneck = max(terms, key=terms.get)
            row += [f"{terms[bottleneck]:.9f}", bottleneck]
        writer.writerow(row)
    return buf.getvalue()


def roofline_series(machine: MachineModel, points: int = 33) -> list[dict]:
    """(x, y) roofline plot data: attainable op throughput vs operational
    intensity for each memory resource ceiling."""
    rows = []
    for i in range(points):
        intensity = 2.0 ** (-6 + 12 * i / (points - 1))  # ops per byte
        for resource, bw in (
            ("l2_read", machine.l2_read_bw),
            ("l2_write", machine.l2_write_bw),
            ("dram", machine.dram_bw),
        ):
            rows.append({
                "series": resource,
                "x_ops_per_byte": intensity,
                "y_ops_per_s": min(machine.fma_tput, intensity * bw),
            })
    return rows
