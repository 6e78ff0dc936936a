"""Command-line front end: a thin client of the HTTP service.

Every subcommand builds a request model, posts it to the service (an
in-process instance by default, or a remote one with --server), and
renders the JSON response as text, CSV, or raw structured output.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2


class _Client:
    """POSTs to a remote server when given, else to the in-process app."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None
        self._http = None

    def _backend(self):
        if self._http is None:
            if self.server:
                import httpx

                self._http = httpx.Client(base_url=self.server, timeout=600.0)
            else:
                import warnings

                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    from fastapi.testclient import TestClient

                from .service.app import app

                self._http = TestClient(app)
        return self._http

    def call(self, method: str, path: str, payload: dict | None = None) -> dict:
        backend = self._backend()
        resp = backend.request(method, path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            exc = click.ClickException(f"service error ({resp.status_code}): {detail}")
            # Rejected requests are input errors by the exit-code convention.
            exc.exit_code = EXIT_INPUT_ERROR if resp.status_code < 500 else 1
            raise exc
        return resp.json()


def _read_json_file(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        click.echo(f"error: {what} file not found: {path}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except json.JSONDecodeError as exc:
        click.echo(f"error: {what} file {path} is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


def _params_spec(params: str | None) -> dict:
    if params is None:
        return {"name": "verify_small"}
    if Path(params).exists() or params.endswith(".json"):
        return {"config": _read_json_file(params, "parameter")}
    return {"name": params}


def _machine_spec(machine: str | None) -> dict:
    if machine is None:
        return {"name": "rtx5090"}
    if Path(machine).exists() or machine.endswith(".json"):
        return {"profile": _read_json_file(machine, "machine profile")}
    return {"name": machine}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


def _csv_from_rows(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


_common = [
    click.option("--server", default=None, help="base URL of a running service "
                 "(default: run the service in-process)"),
    click.option("--format", "fmt", type=click.Choice(["text", "csv", "structured"]),
                 default="text", show_default=True),
    click.option("--out", default=None, help="write the report to a file"),
]


def _with_common(fn):
    for deco in reversed(_common):
        fn = deco(fn)
    return fn


@click.group()
def main() -> None:
    """RNS-CKKS engine and GPU memory-hierarchy cost model."""


@main.command()
@click.option("--n", "degree", type=int, required=True, help="ring degree (power of two)")
@click.option("--bitwidth", type=int, default=31, show_default=True)
@click.option("--count", type=int, required=True)
@_with_common
def primes(degree: int, bitwidth: int, count: int, server, fmt, out) -> None:
    """Search NTT-friendly primes downward from 2^bitwidth."""
    client = _Client(server)
    data = client.call("POST", "/v1/primes",
                       {"n": degree, "bitwidth": bitwidth, "count": count})
    rows = data["moduli"]
    if fmt == "structured":
        _emit(json.dumps(data, indent=2), out)
    elif fmt == "csv":
        _emit(_csv_from_rows(rows), out)
    else:
        lines = [f"{r['q']}  psi={r['psi']}  bits={r['bits']}  (2n={2 * r['n']})"
                 for r in rows]
        _emit("\n".join(lines), out)


@main.command()
@click.option("--params", default=None, help="parameter config file or builtin name")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fault", type=click.Choice(["none", "twiddle"]), default="none",
              help="inject a fault as a negative control")
@click.option("--trials", type=int, default=20, show_default=True,
              help="key-switching trials")
@click.option("--bconv-degree", type=int, default=1 << 16, show_default=True,
              help="ring degree for the base-conversion suite search")
@_with_common
def verify(params, seed, fault, trials, bconv_degree, server, fmt, out) -> None:
    """Run the oracle suites; exit 0 only if every suite passes."""
    client = _Client(server)
    data = client.call("POST", "/v1/verify", {
        "params": _params_spec(params),
        "seed": seed,
        "fault": fault,
        "keyswitch_trials": trials,
        "bconv_degree": bconv_degree,
    })
    if fmt == "structured":
        _emit(json.dumps(data, indent=2), out)
    elif fmt == "csv":
        rows = [{k: (json.dumps(v) if isinstance(v, dict) else v) for k, v in s.items()}
                for s in data["suites"]]
        _emit(_csv_from_rows(rows), out)
    else:
        lines = []
        for s in data["suites"]:
            status = "PASS" if s["passed"] else "FAIL"
            stats = ", ".join(f"{k}={v}" for k, v in s["stats"].items())
            lines.append(f"[{status}] {s['name']}: {s['checks']} checks, "
                         f"{s['failures']} failures; {stats}")
        lines.append("all suites passed" if data["all_passed"] else "SUITE FAILURES")
        _emit("\n".join(lines), out)
    if not data["all_passed"]:
        sys.exit(EXIT_VERIFY_FAILED)


@main.command()
@click.option("--params", required=True, help="parameter config file or builtin name")
@click.option("--machine", default=None, help="machine profile file or builtin name")
@click.option("--sequence", type=click.Choice(["ks_stage1", "ks_stage3", "ks_full"]),
              default="ks_stage3", show_default=True)
@click.option("--b-max", type=int, default=12, show_default=True)
@_with_common
def plan(params, machine, sequence, b_max, server, fmt, out) -> None:
    """L2-aware batch plan: B*, footprints, and the amortized-latency curve."""
    client = _Client(server)
    data = client.call("POST", "/v1/plan", {
        "params": _params_spec(params),
        "machine": _machine_spec(machine),
        "sequence": sequence,
        "b_max": b_max,
    })
    if fmt == "structured":
        _emit(json.dumps(data, indent=2), out)
    elif fmt == "csv":
        _emit(_csv_from_rows(data["curve"]), out)
    else:
        lines = [
            f"sequence: {data['sequence']}",
            f"B* = {data['b_star']}"
            + ("  (single sequence already exceeds L2: spill)" if data["spill"] else ""),
            f"footprint per sequence: {data['footprint_per_sequence'] / 1e6:.2f} MB "
            f"of {data['l2_capacity'] / 1e6:.1f} MB L2",
        ]
        for f in data["footprints"]:
            lines.append(f"stage {f['stage']} footprint: {f['mb']:.2f} MB")
        lines.append(f"{'B':>4} {'amortized (us)':>16} {'footprint (MB)':>16}")
        for row in data["curve"]:
            lines.append(f"{row['b']:>4} {row['amortized_latency'] * 1e6:>16.2f} "
                         f"{row['footprint_bytes'] / 1e6:>16.2f}")
        _emit("\n".join(lines), out)


@main.command()
@click.option("--machine", default=None, help="machine profile file or builtin name")
@click.option("--read-gb", type=float, default=None, help="global-memory read volume")
@click.option("--write-gb", type=float, default=0.0)
@click.option("--dram-gb", type=float, default=0.0)
@click.option("--core-ops", type=float, default=0.0)
@click.option("--trace", default=None, help="kernel trace file (JSON)")
@click.option("--plot-data", is_flag=True, help="emit roofline (x, y) series")
@_with_common
def roofline(machine, read_gb, write_gb, dram_gb, core_ops, trace,
             plot_data, server, fmt, out) -> None:
    """Roofline bound for traffic totals or a kernel trace."""
    if trace is None and read_gb is None and not (write_gb or dram_gb or core_ops):
        click.echo("error: provide --trace or traffic totals (--read-gb ...)", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    payload: dict = {"machine": _machine_spec(machine), "plot_data": plot_data}
    if trace is not None:
        payload["trace"] = _read_json_file(trace, "trace")
    else:
        payload["totals"] = {
            "read_bytes": (read_gb or 0.0) * 1e9,
            "write_bytes": write_gb * 1e9,
            "dram_bytes": dram_gb * 1e9,
            "core_ops": core_ops,
        }
    client = _Client(server)
    data = client.call("POST", "/v1/roofline", payload)
    if fmt == "structured":
        _emit(json.dumps(data, indent=2), out)
    elif fmt == "csv":
        if plot_data and data.get("series"):
            _emit(_csv_from_rows(data["series"]), out)
        else:
            _emit(_csv_from_rows([{"latency_s": data["latency"],
                                   "bottleneck": data["bottleneck"], **data["terms"]}]), out)
    else:
        lines = [f"bound latency: {data['latency'] * 1e3:.3f} ms",
                 f"bottleneck: {data['bottleneck']}"]
        lines += [f"  {k}: {v * 1e3:.3f} ms" for k, v in data["terms"].items()]
        if plot_data and data.get("series"):
            lines.append("series rows: use --format csv to export")
        _emit("\n".join(lines), out)


@main.command()
@click.option("--trace", required=True, help="kernel trace file (JSON)")
@click.option("--machine", default=None, help="machine profile file or builtin name")
@click.option("--mode", type=click.Choice(["eager", "static_graph"]), default="eager",
              show_default=True)
@_with_common
def analyze(trace, machine, mode, server, fmt, out) -> None:
    """Latency estimate for a kernel DAG, with a per-kernel breakdown."""
    client = _Client(server)
    data = client.call("POST", "/v1/analyze", {
        "trace": _read_json_file(trace, "trace"),
        "machine": _machine_spec(machine),
        "mode": mode,
    })
    if fmt == "structured":
        _emit(json.dumps(data, indent=2), out)
    elif fmt == "csv":
        _emit(_csv_from_rows(data["kernels"]), out)
    else:
        lines = [
            f"mode: {data['mode']}",
            f"estimated latency: {data['latency'] * 1e3:.3f} ms "
            f"({data['kernel_count']} kernels)",
            f"launch overhead in eager mode: "
            f"{data['launch_overhead_total'] * 1e3:.3f} ms",
        ]
        for k in data["kernels"]:
            lines.append(f"  {k['label']:<24} {k['kind']:<12} "
                         f"{k['latency'] * 1e6:>10.2f} us  {k['bottleneck']}")
        _emit("\n".join(lines), out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
