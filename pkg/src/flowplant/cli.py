"""Command-line entry point: operator and developer commands for the platform.

Exit codes: 0 success, 1 diagnostics or runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import signal
import sys
import threading
import time
from pathlib import Path

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

STATE_FILE = ".flowplant-up.json"


class UsageError(Exception):
    pass


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _emit(doc: dict, as_json: bool, lines=None) -> None:
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in lines if lines is not None else [json.dumps(doc)]:
            print(line)


# -- validate / instantiate / deploy ---------------------------------------


def cmd_validate(args) -> int:
    from .configmodel.model import load_app_spec
    from .configmodel.validate import validate

    spec = load_app_spec(_require_file(args.config, "config"))
    diagnostics = validate(spec)
    doc = {"diagnostics": [vars(d) for d in diagnostics], "ok": not diagnostics}
    _emit(doc, args.json, [f"{d.code} at {d.location}: {d.message}" for d in diagnostics] or ["ok"])
    return EXIT_OK if not diagnostics else EXIT_FAIL


def cmd_instantiate(args) -> int:
    from .configmodel.generate import InvalidSpec, instantiate
    from .configmodel.model import load_app_spec

    spec = load_app_spec(_require_file(args.config, "config"))
    try:
        artifacts = instantiate(spec, args.out)
    except InvalidSpec as exc:
        doc = {"diagnostics": [vars(d) for d in exc.diagnostics], "ok": False}
        _emit(doc, args.json, [f"{d.code} at {d.location}: {d.message}" for d in exc.diagnostics])
        return EXIT_FAIL
    files = [str(p) for p in artifacts.all_paths]
    _emit({"ok": True, "files": files}, args.json, files)
    return EXIT_OK


def cmd_deploy(args) -> int:
    from .configmodel.model import load_app_spec, load_devices
    from .configmodel.plan import CapacityExceeded, PlacementHeuristicFailure, plan_deployment

    spec = load_app_spec(_require_file(args.config, "config"))
    devices = load_devices(_require_file(args.devices, "devices file"))
    try:
        plan = plan_deployment(spec, devices)
    except CapacityExceeded as exc:
        _emit(
            {"ok": False, "error": "CapacityExceeded", "service": exc.service, "resource": exc.resource},
            args.json,
            [f"capacity exceeded: service {exc.service!r} does not fit ({exc.resource})"],
        )
        return EXIT_FAIL
    except PlacementHeuristicFailure as exc:
        _emit(
            {"ok": False, "error": "PlacementHeuristicFailure", "service": exc.service},
            args.json,
            [f"heuristic failed on service {exc.service!r}; a feasible plan exists"],
        )
        return EXIT_FAIL
    assignments = dict(sorted(plan.assignments.items()))
    _emit(
        {"ok": True, "assignments": assignments},
        args.json,
        [f"{svc} -> {dev}" for svc, dev in assignments.items()],
    )
    return EXIT_OK


# -- dataset and AAS generation ---------------------------------------------


def cmd_gen_dataset(args) -> int:
    from .vision.render import gen_dataset, stage_dataset

    started = time.perf_counter()
    pids = gen_dataset(args.n, args.seed, args.out, augment=args.augment)
    if args.stage:
        stage_dataset(args.out, args.stage, ids=pids)
    elapsed = time.perf_counter() - started
    _emit(
        {"ok": True, "samples": len(pids), "outDir": str(args.out), "seconds": round(elapsed, 3)},
        args.json,
        [f"generated {len(pids)} samples in {elapsed:.2f}s under {args.out}"],
    )
    return EXIT_OK


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_products_csv(path) -> list:
    """CSV header: productId,wheelColor,engraving,windows (booleans true/false)."""
    from .connectors.product import ProductSpec

    specs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"productId", "wheelColor", "engraving", "windows"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise UsageError(f"products CSV must have header {sorted(required)}")
        for row in reader:
            specs.append(
                ProductSpec(
                    productId=row["productId"].strip(),
                    wheelColor=row["wheelColor"].strip(),
                    engraving=_parse_bool(row["engraving"]),
                    windows=int(row["windows"]),
                )
            )
    return specs


def cmd_gen_aas(args) -> int:
    from .connectors.product import product_shell

    specs = load_products_csv(_require_file(args.products, "products CSV"))
    started = time.perf_counter()
    if args.registry:
        from .aas.client import RegistryClient

        target = RegistryClient(args.registry)
        for spec in specs:
            target.register(product_shell(spec))
    else:
        from .aas.registry import Registry

        local = Registry()
        for spec in specs:
            local.register(product_shell(spec))
    elapsed = time.perf_counter() - started
    _emit(
        {"ok": True, "registered": len(specs), "seconds": round(elapsed, 3)},
        args.json,
        [f"registered {len(specs)} product shells in {elapsed:.2f}s"],
    )
    return EXIT_OK


# -- running platform commands ----------------------------------------------


def _platform_options(args, http_registry: bool = True):
    from .platform import PlatformOptions

    ai = args.ai if args.ai == "baseline" or args.ai.startswith("external:") else None
    if ai is None:
        raise UsageError(f"--ai must be 'baseline' or 'external:<command>', got {args.ai!r}")
    return PlatformOptions(
        transport="in_memory" if args.in_process else "tcp",
        stage_dir=args.stage,
        ai=ai,
        sla_ms=args.sla_ms,
        http_registry=http_registry,
    )


def _write_state(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _read_state(args) -> dict:
    if args.registry:
        return {"registry": args.registry}
    state = Path(args.state)
    if not state.is_file():
        raise UsageError(f"no running platform found ({state} missing); pass --registry host:port")
    return json.loads(state.read_text())


def _serve_ui(directory: str, port: int):
    import functools
    from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer

    handler = functools.partial(SimpleHTTPRequestHandler, directory=directory)
    httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd


def cmd_up(args) -> int:
    from .platform import Platform

    if args.devices:
        from .configmodel.model import load_devices

        device_defs = load_devices(_require_file(args.devices, "devices file"))
    else:
        device_defs = []
    platform = Platform(_platform_options(args)).start()
    agents = []
    try:
        for definition in device_defs:
            from .runtime.devices import DeviceAgent

            agent = DeviceAgent(definition, platform.transport_stack.client())
            agent.start()
            agents.append(agent)
        ui_server = None
        if args.ui:
            ui_dir = Path(args.ui_dir)
            if not ui_dir.is_dir():
                raise UsageError(f"UI assets not found: {ui_dir} (build the frontend first)")
            # the panel reads the registry endpoint from its own origin
            (ui_dir / "config.json").write_text(
                json.dumps({"registry": platform.registry_server.endpoint}) + "\n"
            )
            ui_server = _serve_ui(str(ui_dir), args.ui_port)
        state = {
            "registry": platform.registry_server.endpoint,
            "transport": platform.options.transport,
            "broker": platform.transport_stack.endpoint,
            "machine": platform.machine_server.endpoint,
            "ui": f"127.0.0.1:{args.ui_port}" if args.ui else None,
        }
        _write_state(Path(args.state), state)
        _emit(state, args.json, [f"{k}: {v}" for k, v in state.items() if v])
        done = threading.Event()
        signal.signal(signal.SIGTERM, lambda *_: done.set())
        signal.signal(signal.SIGINT, lambda *_: done.set())
        done.wait()
    finally:
        for agent in agents:
            agent.stop()
        if args.ui and ui_server is not None:
            ui_server.shutdown()
        platform.stop()
        Path(args.state).unlink(missing_ok=True)
    return EXIT_OK


def cmd_status(args) -> int:
    from .aas.client import RegistryClient
    from .platform import PLATFORM_SHELL_ID

    state = _read_state(args)
    client = RegistryClient(state["registry"])
    shell = client.get_shell(PLATFORM_SHELL_ID)
    services = {p.idShort: p.value for p in shell.submodel("services").elements}
    devices = {p.idShort: p.value for p in shell.submodel("devices").elements}
    doc = {"registry": state["registry"], "services": services, "devices": devices}
    lines = [f"registry: {state['registry']}"]
    lines += [f"service {name}: {value}" for name, value in sorted(services.items())]
    lines += [f"device {name}: {value}" for name, value in sorted(devices.items())]
    _emit(doc, args.json, lines)
    return EXIT_OK


def cmd_trigger(args) -> int:
    from .aas.client import RegistryClient
    from .app.appshell import APP_SHELL_ID, CONTROL_SUBMODEL, RUNS_SUBMODEL, START_OPERATION

    state = _read_state(args)
    client = RegistryClient(state["registry"])
    result = client.invoke(APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, {"productHint": args.product})
    if not result.get("accepted"):
        _emit({"ok": False, "result": result}, args.json, [f"rejected: {result.get('reason')}"])
        return EXIT_FAIL
    run_id = result["runId"]
    deadline = time.monotonic() + args.timeout
    run = None
    while time.monotonic() < deadline:
        shell = client.get_shell(APP_SHELL_ID)
        runs = shell.submodel(RUNS_SUBMODEL)
        run = next((c for c in runs.elements if c.idShort == run_id), None)
        if run is not None:
            break
        time.sleep(0.2)
    if run is None:
        _emit({"ok": False, "runId": run_id, "error": "timeout"}, args.json, [f"{run_id}: timed out"])
        return EXIT_FAIL
    steps = []
    report = None
    for element in run.elements:
        props = {p.idShort: p.value for p in element.elements}
        if element.idShort == "report":
            report = props
        else:
            steps.append(props.get("stage"))
    doc = {"ok": report is not None, "runId": run_id, "stages": steps, "report": report}
    lines = [f"{run_id}: {' -> '.join(s for s in steps if s)}"]
    if report is not None:
        lines.append(
            f"conformance={report['conformance']} productionQualityOk={report['productionQualityOk']}"
        )
    _emit(doc, args.json, lines)
    return EXIT_OK if report is not None else EXIT_FAIL


def cmd_bench(args) -> int:
    import tempfile

    from .connectors.product import ProductSpec
    from .platform import Platform, PlatformOptions
    from .vision.render import gen_dataset, load_truth, stage_dataset

    with tempfile.TemporaryDirectory() as tmp:
        dataset = Path(tmp) / "dataset"
        stage = Path(tmp) / "stage"
        pids = gen_dataset(max(args.n, 1), args.seed, dataset)
        stage_dataset(dataset, stage, ids=pids)
        options = PlatformOptions(
            stage_dir=str(stage),
            move_latency_s=0.01,
            ai=args.ai,
            sla_ms=args.sla_ms,
        )
        with Platform(options) as platform:
            for pid in pids:
                truth = load_truth(dataset, pid)
                platform.add_product(
                    ProductSpec(pid, truth["wheelColor"], truth["engraving"], truth["windows"])
                )
            failures = 0
            for i in range(args.n):
                outcome = platform.trigger(product_hint=pids[i % len(pids)], timeout_s=60)
                if outcome.error is not None:
                    failures += 1
            records = platform.monitoring.all_records()
    stages = {}
    for name, record in sorted(records.items()):
        if record.messageCount == 0:
            continue
        stages[name] = {
            "count": record.messageCount,
            "meanMs": round(record.meanLatencyMs, 3),
            "maxMs": round(record.maxLatencyMs, 3),
        }
    ai_max = stages.get("aiResult", {}).get("maxMs", 0.0)
    sla_met = None if args.sla_ms is None else ai_max <= args.sla_ms
    doc = {"ok": failures == 0, "runs": args.n, "failures": failures, "stages": stages, "slaMs": args.sla_ms, "slaMet": sla_met}
    lines = [f"{args.n} runs, {failures} failures"]
    for name, stat in stages.items():
        lines.append(f"{name}: n={stat['count']} mean={stat['meanMs']}ms max={stat['maxMs']}ms")
    if args.sla_ms is not None:
        lines.append(f"AI stage max {ai_max}ms vs SLA {args.sla_ms}ms: {'met' if sla_met else 'exceeded'}")
    _emit(doc, args.json, lines)
    return EXIT_OK if failures == 0 else EXIT_FAIL


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowplant", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=False, devices=False, out=False):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if config:
            p.add_argument("-c", "--config", required=True, help="application spec YAML")
        if devices:
            p.add_argument("--devices", required=devices == "required", help="devices YAML")
        if out:
            p.add_argument("-o", "--out", required=True, help="output directory")

    def runtimeish(p):
        p.add_argument("--ai", default="baseline", help="baseline or external:<command>")
        p.add_argument("--sla-ms", type=float, default=None)
        p.add_argument("--in-process", action="store_true", help="in-memory transport, no TCP")
        p.add_argument("--stage", default="stage", help="staged-image directory")

    p = sub.add_parser("validate", help="check an application spec")
    common(p, config=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("instantiate", help="generate wiring, interface and harness artifacts")
    common(p, config=True, out=True)
    p.set_defaults(fn=cmd_instantiate)

    p = sub.add_parser("deploy", help="compute a service-to-device placement")
    common(p, config=True, devices="required")
    p.set_defaults(fn=cmd_deploy)

    p = sub.add_parser("gen-dataset", help="generate the synthetic inspection dataset")
    common(p, out=True)
    p.add_argument("-n", type=int, default=48)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--augment", action="store_true")
    p.add_argument("--stage", default=None, help="also stage the samples into this directory")
    p.set_defaults(fn=cmd_gen_dataset)

    p = sub.add_parser("gen-aas", help="register one product shell per CSV row")
    common(p)
    p.add_argument("--products", required=True, help="CSV: productId,wheelColor,engraving,windows")
    p.add_argument("--registry", default=None, help="host:port of a running registry (default: local)")
    p.set_defaults(fn=cmd_gen_aas)

    p = sub.add_parser("up", help="start registry, broker, machine sim and services")
    common(p, devices=True)
    runtimeish(p)
    p.add_argument("--ui", action="store_true", help="serve the operator panel")
    p.add_argument("--ui-dir", default="frontend/dist")
    p.add_argument("--ui-port", type=int, default=8321)
    p.add_argument("--state", default=STATE_FILE)
    p.set_defaults(fn=cmd_up)

    p = sub.add_parser("status", help="show services and devices of a running platform")
    common(p)
    p.add_argument("--registry", default=None, help="host:port (default: read state file)")
    p.add_argument("--state", default=STATE_FILE)
    p.set_defaults(fn=cmd_status)

    p = sub.add_parser("trigger", help="run one inspection and print the report")
    common(p)
    p.add_argument("--product", default="", help="product hint for image staging")
    p.add_argument("--registry", default=None)
    p.add_argument("--state", default=STATE_FILE)
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(fn=cmd_trigger)

    p = sub.add_parser("bench", help="run N inspections and report per-stage latency")
    common(p)
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ai", default="baseline")
    p.add_argument("--sla-ms", type=float, default=None)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
