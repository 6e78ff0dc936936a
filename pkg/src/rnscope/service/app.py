"""FastAPI service wrapping the engine and the cost model.

The CLI is a thin client of these endpoints; they are also directly
usable by any HTTP client for long-running or multi-client deployments.
"""
from __future__ import annotations

import json
from importlib import resources

from fastapi import FastAPI, HTTPException

from .. import costmodel as cm
from .. import verify as verify_mod
from ..params import ParameterSet
from ..rns import InsufficientPrimesError, RnsError, find_ntt_primes
from . import schemas as sch


def builtin_params_names() -> list[str]:
    root = resources.files("rnscope").joinpath("data/params")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_params(spec: sch.ParamsSpec) -> ParameterSet:
    if spec.config is not None:
        return ParameterSet.from_dict(spec.config)
    name = spec.name or "verify_small"
    ref = resources.files("rnscope").joinpath(f"data/params/{name}.json")
    if not ref.is_file():
        raise HTTPException(400, f"unknown parameter config {name!r}")
    return ParameterSet.from_dict(json.loads(ref.read_text()))


def resolve_machine(spec: sch.MachineSpec) -> cm.MachineModel:
    if spec.profile is not None:
        try:
            return cm.MachineModel.from_dict(spec.profile)
        except (KeyError, cm.CostModelError) as exc:
            raise HTTPException(400, f"bad machine profile: {exc}") from exc
    try:
        return cm.builtin_machine(spec.name or "rtx5090")
    except cm.CostModelError as exc:
        raise HTTPException(400, str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(
        title="rnscope",
        description="RNS-CKKS polynomial engine and GPU memory-hierarchy cost model",
        version="0.1.0",
    )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "schema_version": sch.SCHEMA_VERSION}

    @app.get("/v1/profiles", response_model=sch.ProfilesResponse)
    def profiles() -> sch.ProfilesResponse:
        return sch.ProfilesResponse(
            machines=cm.builtin_machine_names(), params=builtin_params_names()
        )

    @app.post("/v1/primes", response_model=sch.PrimesResponse)
    def primes(req: sch.PrimesRequest) -> sch.PrimesResponse:
        try:
            moduli = find_ntt_primes(req.count, req.bitwidth, req.n)
        except InsufficientPrimesError as exc:
            raise HTTPException(404, str(exc)) from exc
        except (ValueError, RnsError) as exc:
            raise HTTPException(400, str(exc)) from exc
        return sch.PrimesResponse(
            moduli=[sch.ModulusOut(q=m.q, psi=m.psi, n=m.n, bits=m.bits) for m in moduli]
        )

    @app.post("/v1/verify", response_model=sch.VerifyResponse)
    def verify(req: sch.VerifyRequest) -> sch.VerifyResponse:
        params = resolve_params(req.params)
        try:
            results = verify_mod.run_all(
                params,
                seed=req.seed,
                fault=req.fault,
                keyswitch_trials=req.keyswitch_trials,
                bconv_n=req.bconv_degree,
            )
        except RnsError as exc:
            raise HTTPException(400, str(exc)) from exc
        suites = [
            sch.SuiteResultOut(
                name=r.name, passed=r.passed, checks=r.checks,
                failures=r.failures, stats=r.stats,
            )
            for r in results
        ]
        return sch.VerifyResponse(
            all_passed=all(r.passed for r in results), suites=suites
        )

    @app.post("/v1/plan", response_model=sch.PlanResponse)
    def plan(req: sch.PlanRequest) -> sch.PlanResponse:
        params = resolve_params(req.params)
        machine = resolve_machine(req.machine)
        try:
            result = cm.plan_batch(params, req.sequence, machine)
            curve = cm.batch_latency_curve(params, req.sequence, machine, req.b_max)
        except cm.CostModelError as exc:
            raise HTTPException(400, str(exc)) from exc
        footprints = [
            sch.FootprintOut(
                stage=s,
                bytes=cm.keyswitch_footprint(params, s),
                mb=cm.keyswitch_footprint(params, s) / 1e6,
            )
            for s in (1, 3)
        ]
        return sch.PlanResponse(
            sequence=req.sequence,
            b_star=result.b_star,
            spill=result.spill,
            footprint_per_sequence=result.footprint_per_sequence,
            l2_capacity=result.l2_capacity,
            footprints=footprints,
            curve=[sch.CurvePoint(**row) for row in curve],
        )

    @app.post("/v1/roofline", response_model=sch.RooflineResponse)
    def roofline(req: sch.RooflineRequest) -> sch.RooflineResponse:
        machine = resolve_machine(req.machine)
        if req.trace is not None:
            entries = cm.trace_from_dict(req.trace)
            report = cm.TrafficReport(
                kernels=[cm.KernelTraffic.of(e.descriptor) for e in entries]
            )
        elif req.totals is not None:
            report = cm.TrafficReport.from_totals(
                read_bytes=req.totals.read_bytes,
                write_bytes=req.totals.write_bytes,
                dram_bytes=req.totals.dram_bytes,
                core_ops=req.totals.core_ops,
            )
        else:
            raise HTTPException(400, "provide either totals or a trace")
        bound = cm.roofline(report, machine)
        series = cm.roofline_series(machine) if req.plot_data else None
        return sch.RooflineResponse(
            latency=bound.latency, bottleneck=bound.bottleneck,
            terms=bound.terms, series=series,
        )

    @app.post("/v1/analyze", response_model=sch.AnalyzeResponse)
    def analyze(req: sch.AnalyzeRequest) -> sch.AnalyzeResponse:
        machine = resolve_machine(req.machine)
        try:
            entries = cm.trace_from_dict(req.trace)
            latency = cm.estimate_sequence(entries, machine, mode=req.mode)
        except cm.CostModelError as exc:
            raise HTTPException(400, str(exc)) from exc
        rows = []
        for e in entries:
            kt = cm.KernelTraffic.of(e.descriptor)
            t = cm.kernel_time(kt, machine)
            terms = {
                "l2_read": kt.read_bytes / machine.l2_read_bw,
                "l2_write": kt.write_bytes / machine.l2_write_bw,
                "dram": kt.dram_bytes / machine.dram_bw,
                "compute": kt.core_ops / machine.fma_tput,
            }
            rows.append(sch.KernelRow(
                label=kt.label, kind=kt.kind, read_bytes=kt.read_bytes,
                write_bytes=kt.write_bytes, dram_bytes=kt.dram_bytes,
                core_ops=kt.core_ops, latency=t,
                bottleneck=max(terms, key=terms.get),
            ))
        return sch.AnalyzeResponse(
            mode=req.mode,
            latency=latency,
            kernel_count=len(entries),
            launch_overhead_total=machine.launch_overhead * len(entries),
            kernels=rows,
        )

    @app.post("/v1/keyswitch-traffic", response_model=sch.KsTrafficResponse)
    def ks_traffic(req: sch.KsTrafficRequest) -> sch.KsTrafficResponse:
        params = resolve_params(req.params)
        reports = cm.keyswitch_traffic(params, batch=req.batch)
        stages = [
            sch.StageTraffic(
                stage=s,
                read_bytes=r.read_bytes,
                write_bytes=r.write_bytes,
                dram_bytes=r.dram_bytes,
                total_bytes=r.total_bytes,
                mb=r.total_bytes / 1e6,
            )
            for s, r in sorted(reports.items())
        ]
        footprints = [
            sch.FootprintOut(
                stage=s,
                bytes=cm.keyswitch_footprint(params, s, req.batch),
                mb=cm.keyswitch_footprint(params, s, req.batch) / 1e6,
            )
            for s in (1, 3)
        ]
        return sch.KsTrafficResponse(stages=stages, footprints=footprints)

    return app


app = create_app()
