"""Pydantic request/response models for the HTTP service.

Every response carries schema_version so clients can detect format
changes. Parameter sets, machine profiles, and traces are passed inline
as their JSON file contents (the CLI reads the files and forwards them),
or by the name of a shipped builtin.
"""
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class ModulusOut(BaseModel):
    q: int
    psi: int
    n: int
    bits: int


class PrimesRequest(BaseModel):
    n: int = Field(gt=0, description="ring degree (power of two)")
    bitwidth: int = Field(default=31, le=32, gt=2)
    count: int = Field(gt=0)


class PrimesResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    moduli: list[ModulusOut]


class MachineSpec(BaseModel):
    """Either the name of a builtin profile or an inline profile document."""

    name: str | None = None
    profile: dict[str, Any] | None = None


class ParamsSpec(BaseModel):
    """Either the name of a shipped parameter config or an inline document."""

    name: str | None = None
    config: dict[str, Any] | None = None


class VerifyRequest(BaseModel):
    params: ParamsSpec = ParamsSpec(name="verify_small")
    seed: int = 0
    fault: Literal["none", "twiddle"] = "none"
    keyswitch_trials: int = Field(default=20, gt=0, le=200)
    bconv_degree: int = Field(default=1 << 16, gt=1)


class SuiteResultOut(BaseModel):
    name: str
    passed: bool
    checks: int
    failures: int
    stats: dict[str, Any]


class VerifyResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    all_passed: bool
    suites: list[SuiteResultOut]


class PlanRequest(BaseModel):
    params: ParamsSpec
    machine: MachineSpec = MachineSpec(name="rtx5090")
    sequence: Literal["ks_stage1", "ks_stage3", "ks_full"] = "ks_stage3"
    b_max: int = Field(default=12, gt=0, le=1024)


class CurvePoint(BaseModel):
    b: int
    amortized_latency: float
    footprint_bytes: int


class FootprintOut(BaseModel):
    stage: int
    bytes: int
    mb: float


class PlanResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    sequence: str
    b_star: int
    spill: bool
    footprint_per_sequence: int
    l2_capacity: int
    footprints: list[FootprintOut]
    curve: list[CurvePoint]


class TrafficTotals(BaseModel):
    read_bytes: float = 0
    write_bytes: float = 0
    dram_bytes: float = 0
    core_ops: float = 0


class RooflineRequest(BaseModel):
    machine: MachineSpec = MachineSpec(name="rtx5090")
    totals: TrafficTotals | None = None
    trace: dict[str, Any] | None = None
    plot_data: bool = False


class RooflineResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    latency: float
    bottleneck: str
    terms: dict[str, float]
    series: list[dict[str, Any]] | None = None


class AnalyzeRequest(BaseModel):
    trace: dict[str, Any]
    machine: MachineSpec = MachineSpec(name="rtx5090")
    mode: Literal["eager", "static_graph"] = "eager"


class KernelRow(BaseModel):
    label: str
    kind: str
    read_bytes: int
    write_bytes: int
    dram_bytes: int
    core_ops: int
    latency: float
    bottleneck: str


class AnalyzeResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    mode: str
    latency: float
    kernel_count: int
    launch_overhead_total: float
    kernels: list[KernelRow]


class KsTrafficRequest(BaseModel):
    params: ParamsSpec
    batch: int = Field(default=1, gt=0)


class StageTraffic(BaseModel):
    stage: int
    read_bytes: int
    write_bytes: int
    dram_bytes: int
    total_bytes: int
    mb: float


class KsTrafficResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    stages: list[StageTraffic]
    footprints: list[FootprintOut]


class ProfilesResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    machines: list[str]
    params: list[str]
