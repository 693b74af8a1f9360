"""Platform assembly: wires registry, transport, machine, camera, decider,
supervisor, monitoring and device management into one runnable kernel.

Everything runs in-process by default; the HTTP registry facade and the TCP
transport backend are opt-in so the same assembly serves both tests and the
desk demonstrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .aas import Property, Shell, Submodel
from .aas.registry import Registry
from .aas.server import RegistryServer
from .app.appshell import APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, AppShellPublisher, build_app_shell
from .app.camsource import CamSource
from .app.decider import ActionDecider, BaselineAnalyzer, Busy, NotReady, PolyglotAnalyzer
from .clock import Clock
from .connectors.bridge import ConnectorSpec, MachineConnector
from .connectors.machine import CobotSim, MachineModel, MachineServer
from .connectors.product import ProductSpec, register_product
from .runtime.devices import DeviceManager
from .runtime.lifecycle import ServiceHandle, ServiceState, Supervisor
from .runtime.monitor import MonitoringSink
from .runtime.polyglot import spawn
from .transport import TransportStack

PLATFORM_SHELL_ID = "platform"
PLATFORM_SUBMODELS = ("platform", "devices", "services", "applications", "monitoring")
APP_NAME = "quality-inspection"
BUTTON_TOPIC = f"{APP_NAME}/machine_connector/buttonEvents"

SERVICE_NAMES = ("cam_source", "machine_connector", "aas_connector", "ai", "action_decider", "app_aas")


def build_platform_shell(transport_backend: str) -> Shell:
    return Shell(
        PLATFORM_SHELL_ID,
        "platform",
        [
            Submodel(
                "platform",
                [
                    Property("name", "string", "flowplant"),
                    Property("transport", "string", transport_backend),
                ],
            ),
            Submodel("devices", []),
            Submodel("services", []),
            Submodel("applications", [Property(APP_NAME, "string", APP_SHELL_ID)]),
            Submodel("monitoring", []),
        ],
    )


@dataclass
class PlatformOptions:
    transport: str = "in_memory"
    stage_dir: str = "stage"
    machine_tree: dict | None = None
    move_latency_s: float = 0.5
    ai: str = "baseline"  # "baseline" or "external:<command>"
    ai_fallback: bool = True  # fall back to the baseline when the AI stage dies
    http_registry: bool = False
    sla_ms: float | None = None
    history_cap: int = 50
    heartbeat_interval_ms: int = 2000
    clock: Clock = field(default_factory=Clock)


class Platform:
    """One platform instance plus the quality-inspection application."""

    def __init__(self, options: PlatformOptions | None = None):
        self.options = options or PlatformOptions()
        self.registry = Registry(clock=self.options.clock)
        self.registry_server: RegistryServer | None = None
        self.transport_stack: TransportStack | None = None
        self.transport = None
        self.machine_model: MachineModel | None = None
        self.cobot: CobotSim | None = None
        self.machine_server: MachineServer | None = None
        self.machine_connector: MachineConnector | None = None
        self.cam: CamSource | None = None
        self.publisher: AppShellPublisher | None = None
        self.decider: ActionDecider | None = None
        self.supervisor: Supervisor | None = None
        self.monitoring: MonitoringSink | None = None
        self.device_manager: DeviceManager | None = None
        self._ai_handle = None
        self._button_sub = None
        self._running = False

    # -- assembly ----------------------------------------------------------

    def start(self) -> "Platform":
        if self._running:
            return self
        opts = self.options

        self.registry.register(build_platform_shell(opts.transport))
        if opts.http_registry:
            self.registry_server = RegistryServer(self.registry).start()

        self.transport_stack = TransportStack(opts.transport)
        self.transport = self.transport_stack.client()

        self.monitoring = MonitoringSink(
            clock=opts.clock, registry=self.registry, platform_shell_id=PLATFORM_SHELL_ID
        )
        self.device_manager = DeviceManager(
            self.registry,
            self.transport_stack.client(),
            PLATFORM_SHELL_ID,
            clock=opts.clock,
            heartbeat_interval_ms=opts.heartbeat_interval_ms,
        )

        self.machine_model = MachineModel(tree=opts.machine_tree, clock=opts.clock)
        self.cobot = CobotSim(self.machine_model, move_latency_s=opts.move_latency_s)
        self.machine_server = MachineServer(self.machine_model).start()
        self.machine_connector = MachineConnector(
            ConnectorSpec(
                kind="machine",
                endpoint=self.machine_server.endpoint,
                output_topic=BUTTON_TOPIC,
                subscriptions=(("Button", "Pressed"),),
            ),
            self.transport_stack.client(),
        )

        self.cam = CamSource(opts.stage_dir)
        self.publisher = AppShellPublisher(self.registry, history_cap=opts.history_cap)
        self.publisher.ensure_registered()

        analyzer, fallback = self._build_analyzer()
        self.decider = ActionDecider(
            self.machine_connector.machine,
            self.cam,
            self.registry,
            self.publisher,
            analyzer=analyzer,
            fallback_analyzer=fallback,
            clock=opts.clock,
            monitoring=self.monitoring,
        )
        self._button_sub = self.transport.subscribe(BUTTON_TOPIC, self.decider.on_button_event)
        self.registry.bind_handler(APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, self._start_inspection)

        self.supervisor = Supervisor(clock=opts.clock, heartbeat_interval_ms=opts.heartbeat_interval_ms)
        self._register_services()
        self._running = True
        return self

    def _build_analyzer(self):
        opts = self.options
        baseline = BaselineAnalyzer()
        if opts.ai == "baseline":
            return baseline, None
        if opts.ai.startswith("external:"):
            command = opts.ai.split(":", 1)[1]
            self._ai_handle = spawn("ai", command)
            return PolyglotAnalyzer(self._ai_handle), (baseline if opts.ai_fallback else None)
        raise ValueError(f"unknown ai mode {opts.ai!r}")

    def _register_services(self) -> None:
        def start_decider():
            self.decider.start()
            return True

        def stop_decider():
            self.decider.stop()
            return True

        start_fns = {"action_decider": start_decider}
        stop_fns = {"action_decider": stop_decider}
        if self._ai_handle is not None:
            stop_fns["ai"] = lambda: self._ai_handle.shutdown()
        for name in SERVICE_NAMES:
            self.supervisor.add(
                ServiceHandle(name, start_fn=start_fns.get(name), stop_fn=stop_fns.get(name))
            )
            self.supervisor.ensure_started(name)
            self.registry.upsert_element(
                PLATFORM_SHELL_ID,
                "services",
                Property(name, "string", self.supervisor.state(name).value),
            )
            self.monitoring.register_service(name)

    # -- application API ---------------------------------------------------

    def _start_inspection(self, args: dict) -> dict:
        hint = str(args.get("productHint", "") or "")
        try:
            run_id = self.decider.trigger_inspection(source="operation", product_hint=hint)
        except (Busy, NotReady) as exc:
            return {"accepted": False, "runId": "", "reason": type(exc).__name__}
        return {"accepted": True, "runId": run_id}

    def trigger(self, product_hint: str = "", wait: bool = True, timeout_s: float = 60.0):
        """Trigger one inspection; returns the RunOutcome (or runId if wait=False)."""
        run_id = self.decider.trigger_inspection(source="api", product_hint=product_hint)
        if not wait:
            return run_id
        outcome = self.decider.wait_run(run_id, timeout_s=timeout_s)
        if self.options.sla_ms is not None and outcome.trace.steps:
            elapsed = outcome.trace.steps[-1].timestamp - outcome.trace.steps[0].timestamp
            if elapsed > self.options.sla_ms:
                outcome.trace.steps[-1].payload.setdefault("slaMs", self.options.sla_ms)
                outcome.trace.steps[-1].payload["slaExceeded"] = True
        return outcome

    def add_product(self, spec: ProductSpec) -> None:
        register_product(self.registry, spec)

    def status(self) -> dict:
        states = {n: s.value for n, s in (self.supervisor.states() if self.supervisor else {}).items()}
        return {
            "running": self._running,
            "transport": self.options.transport,
            "registryEndpoint": self.registry_server.endpoint if self.registry_server else None,
            "services": states,
            "devices": self.device_manager.device_names() if self.device_manager else [],
            "shells": sorted(e.id for e in self.registry.list_entries()),
        }

    # -- teardown ----------------------------------------------------------

    def stop(self) -> None:
        if not self._running:
            return
        self._running = False
        for name in SERVICE_NAMES:
            try:
                if self.supervisor.state(name) is ServiceState.Running:
                    self.supervisor.stop_service(name)
            except Exception:  # noqa: BLE001 - best-effort teardown
                pass
        self.supervisor.shutdown()
        if self._button_sub is not None:
            self._button_sub.unsubscribe()
        if self.machine_connector is not None:
            self.machine_connector.close()
        if self.machine_server is not None:
            self.machine_server.close()
        if self.cobot is not None:
            self.cobot.cancel()
        if self.transport is not None:
            self.transport.close()
        if self.transport_stack is not None:
            self.transport_stack.close()
        if self.registry_server is not None:
            self.registry_server.stop()
        if self._ai_handle is not None:
            try:
                self._ai_handle.shutdown()
            except Exception:  # noqa: BLE001
                pass

    def __enter__(self) -> "Platform":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
