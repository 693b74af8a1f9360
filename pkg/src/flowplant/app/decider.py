"""Action Decider: the single state machine driving one inspection run.

Sequence: move to the tag position, capture and decode the tag, capture and
analyze both sides, fetch the product AAS, compare, publish. Every step is
appended to the run's trace; any failure terminates the run with an
aborted(reason) step.
"""

from __future__ import annotations

import base64
import queue
import threading
import time

from ..aas.errors import NotFound
from ..clock import Clock
from ..connectors.product import MalformedSpec, fetch_product
from ..vision import baseline as vision_baseline
from ..vision import minitag
from ..vision.color import Unrecognized, classify_wheel_color
from ..vision.image import ImageFrame
from .appshell import AppShellPublisher
from .camsource import CamSource, NoImageStaged, NotAtPosition
from .records import ComparisonReport, DetectionResult, InspectionTrace, compare

STATES = (
    "Idle",
    "MovingToTag",
    "DecodingTag",
    "MovingLeft",
    "CaptureLeft",
    "MovingRight",
    "CaptureRight",
    "AwaitingAi",
    "FetchingSpec",
    "Comparing",
    "Publishing",
)

STAGE_NAMES = (
    "triggered",
    "moved",
    "captured",
    "tagDecoded",
    "aiResult",
    "specFetched",
    "compared",
    "published",
)


class Busy(Exception):
    pass


class NotReady(Exception):
    pass


class AiUnavailable(Exception):
    pass


class BaselineAnalyzer:
    """Classical analyzer: the per-side findings of the vision baseline."""

    def __init__(self, params: vision_baseline.BaselineParams | None = None):
        self.params = params or vision_baseline.BaselineParams()

    def _scratch(self, frame: ImageFrame) -> bool:
        p = self.params
        return vision_baseline._roi_fraction(frame, p.scratch_roi, p) > p.tau_scratch

    def analyze(self, position: str, frame: ImageFrame) -> dict:
        p = self.params
        if position == "left":
            return {
                "wheelColor": classify_wheel_color(frame, p.wheel_roi, p.color_ranges),
                "windows": vision_baseline.count_windows(frame, p),
                "scratch": self._scratch(frame),
            }
        if position == "right":
            return {
                "engraving": vision_baseline.detect_engraving(frame, p),
                "scratch": self._scratch(frame),
            }
        raise ValueError(f"unknown position {position!r}")


class PolyglotAnalyzer:
    """AI stage backed by an external polyglot service."""

    def __init__(self, handle, timeout_s: float = 30.0):
        self.handle = handle
        self.timeout_s = timeout_s

    def analyze(self, position: str, frame: ImageFrame) -> dict:
        header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
        blob = base64.b64encode(header + frame.pixels.tobytes()).decode("ascii")
        try:
            reply = self.handle.request(
                {"position": position, "images": {position: blob}},
                timeout_s=self.timeout_s,
            )
        except Exception as exc:  # noqa: BLE001 - any transport failure means no AI
            raise AiUnavailable(str(exc)) from exc
        if not isinstance(reply, dict) or not isinstance(reply.get("findings", None), dict):
            raise AiUnavailable(f"malformed AI reply: {reply!r}")
        return reply["findings"]


class RunOutcome:
    def __init__(self, run_id: str):
        self.run_id = run_id
        self.trace = InspectionTrace(run_id)
        self.report: ComparisonReport | None = None
        self.detection: DetectionResult | None = None
        self.error: str | None = None
        self.done = threading.Event()


class ActionDecider:
    def __init__(
        self,
        machine,
        cam: CamSource,
        registry,
        publisher: AppShellPublisher,
        analyzer=None,
        fallback_analyzer=None,
        clock: Clock | None = None,
        monitoring=None,
        queue_depth: int = 1,
        move_timeout_s: float = 10.0,
        move_poll_s: float = 0.002,
    ):
        if not 0 <= queue_depth <= 10:
            raise ValueError("queue depth must be in [0, 10]")
        self.machine = machine
        self.cam = cam
        self.registry = registry
        self.publisher = publisher
        self.analyzer = analyzer or BaselineAnalyzer()
        self.fallback_analyzer = fallback_analyzer
        self.clock = clock or Clock()
        self.monitoring = monitoring
        self.move_timeout_s = move_timeout_s
        self.move_poll_s = move_poll_s
        self.state = "Idle"
        self.state_log: list[str] = ["Idle"]
        self._queue: queue.Queue = queue.Queue(maxsize=max(queue_depth, 0) + 1)
        self._lock = threading.Lock()
        self._outcomes: dict[str, RunOutcome] = {}
        self._run_seq = 0
        self._running = False
        self._worker: threading.Thread | None = None

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            if self._running:
                return
            self._running = True
        self._worker = threading.Thread(target=self._work_loop, daemon=True)
        self._worker.start()

    def stop(self) -> None:
        with self._lock:
            self._running = False
        self._queue.put(None)
        if self._worker is not None:
            self._worker.join(timeout=10)
            self._worker = None

    # -- triggering --------------------------------------------------------

    def trigger_inspection(self, source: str = "ui", product_hint: str = "") -> str:
        with self._lock:
            if not self._running:
                raise NotReady("decider not started")
            self._run_seq += 1
            run_id = f"run-{self._run_seq:04d}"
            outcome = RunOutcome(run_id)
            self._outcomes[run_id] = outcome
        try:
            self._queue.put_nowait((run_id, source, product_hint))
        except queue.Full:
            with self._lock:
                del self._outcomes[run_id]
            raise Busy("trigger queue full") from None
        return run_id

    def on_button_event(self, _topic, payload) -> None:
        """Transport handler for machine connector button events."""
        if payload.get("path") == ["Button", "Pressed"] and payload.get("value") is True:
            try:
                self.trigger_inspection(source="button")
            except (Busy, NotReady):
                pass

    def wait_run(self, run_id: str, timeout_s: float = 60.0) -> RunOutcome:
        outcome = self._outcomes.get(run_id)
        if outcome is None:
            raise KeyError(run_id)
        if not outcome.done.wait(timeout_s):
            raise TimeoutError(f"run {run_id} not finished within {timeout_s}s")
        return outcome

    def outcome(self, run_id: str) -> RunOutcome | None:
        return self._outcomes.get(run_id)

    # -- run machinery -----------------------------------------------------

    def _set_state(self, state: str) -> None:
        self.state = state
        self.state_log.append(state)

    def _record_stage(self, stage_base: str, latency_ms: float) -> None:
        if self.monitoring is not None:
            self.monitoring.register_service(stage_base)
            self.monitoring.record_latency(stage_base, latency_ms)

    def _step(self, outcome: RunOutcome, stage: str, stage_base: str, started: float, payload: dict | None = None):
        latency_ms = (time.perf_counter() - started) * 1000.0
        doc = dict(payload or {})
        doc["latencyMs"] = round(latency_ms, 3)
        outcome.trace.append(self.clock.now_ms(), stage, doc)
        self._record_stage(stage_base, latency_ms)

    def _move_to(self, position: str) -> None:
        current = self.machine.read(["Cobot", "Position"])
        moving = self.machine.read(["Cobot", "Moving"])
        if current == position and not moving:
            return
        self.machine.write(["Cobot", "TargetPosition"], position)
        deadline = time.monotonic() + self.move_timeout_s
        while time.monotonic() < deadline:
            if (
                self.machine.read(["Cobot", "Position"]) == position
                and self.machine.read(["Cobot", "Moving"]) is False
            ):
                return
            time.sleep(self.move_poll_s)
        raise TimeoutError(f"cobot did not reach {position!r}")

    def _analyze(self, position: str, frame: ImageFrame) -> dict:
        try:
            return self.analyzer.analyze(position, frame)
        except AiUnavailable:
            if self.fallback_analyzer is None:
                raise
            return self.fallback_analyzer.analyze(position, frame)

    def _work_loop(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            with self._lock:
                if not self._running:
                    return
            run_id, source, product_hint = item
            outcome = self._outcomes[run_id]
            try:
                self._execute(outcome, source, product_hint)
            except Exception as exc:  # noqa: BLE001 - belt and braces: always terminate the trace
                if outcome.trace.terminal is None:
                    outcome.trace.append(self.clock.now_ms(), f"aborted({type(exc).__name__})", {"message": str(exc)})
                outcome.error = outcome.error or str(exc)
            finally:
                self._set_state("Idle")
                outcome.done.set()

    def _abort(self, outcome: RunOutcome, reason: str, message: str) -> None:
        outcome.error = f"{reason}: {message}"
        outcome.trace.append(self.clock.now_ms(), f"aborted({reason})", {"message": message})
        self.publisher.publish(outcome.trace, None)  # aborted runs stay auditable

    def _execute(self, outcome: RunOutcome, source: str, product_hint: str) -> None:
        trace = outcome.trace
        trace.append(self.clock.now_ms(), "triggered", {"source": source, "productHint": product_hint})
        if product_hint:
            self.cam.set_current_product(product_hint)

        # tag position: capture and decode
        self._set_state("MovingToTag")
        started = time.perf_counter()
        try:
            self._move_to("qr")
        except TimeoutError as exc:
            self._abort(outcome, "MoveTimeout", str(exc))
            return
        self._step(outcome, "moved(qr)", "moved", started)

        started = time.perf_counter()
        try:
            tag_frame = self.cam.capture("qr", at_position="qr")
        except (NoImageStaged, NotAtPosition) as exc:
            self._abort(outcome, "NoImageStaged", str(exc))
            return
        self._step(outcome, "captured(qr)", "captured", started)

        self._set_state("DecodingTag")
        started = time.perf_counter()
        try:
            decoded = minitag.decode(tag_frame)
        except minitag.TagNotFound as exc:
            self._abort(outcome, "TagNotFound", str(exc))
            return
        except minitag.ChecksumMismatch as exc:
            self._abort(outcome, "ChecksumMismatch", str(exc))
            return
        product_id = f"{int(decoded):04d}"
        self._step(outcome, "tagDecoded", "tagDecoded", started, {"productId": product_id})

        findings: dict = {}
        provenance: dict = {}
        ai_latency_total = 0.0
        for position, move_state, capture_state in (
            ("left", "MovingLeft", "CaptureLeft"),
            ("right", "MovingRight", "CaptureRight"),
        ):
            self._set_state(move_state)
            started = time.perf_counter()
            try:
                self._move_to(position)
            except TimeoutError as exc:
                self._abort(outcome, "MoveTimeout", str(exc))
                return
            self._step(outcome, f"moved({position})", "moved", started)

            self._set_state(capture_state)
            started = time.perf_counter()
            try:
                frame = self.cam.capture(position, at_position=position)
            except (NoImageStaged, NotAtPosition) as exc:
                self._abort(outcome, "NoImageStaged", str(exc))
                return
            self._step(outcome, f"captured({position})", "captured", started)

            self._set_state("AwaitingAi")
            started = time.perf_counter()
            try:
                side = self._analyze(position, frame)
            except AiUnavailable as exc:
                self._abort(outcome, "AiUnavailable", str(exc))
                return
            except (Unrecognized, vision_baseline.WindowCountOutOfRange) as exc:
                self._abort(outcome, type(exc).__name__, str(exc))
                return
            ai_ms = (time.perf_counter() - started) * 1000.0
            ai_latency_total += ai_ms
            for key, value in side.items():
                if key == "scratch":
                    findings["scratch"] = bool(findings.get("scratch")) or bool(value)
                    provenance.setdefault("scratch", position)
                    if value:
                        provenance["scratch"] = position
                else:
                    findings[key] = value
                    provenance[key] = position
            self._step(outcome, f"aiResult({position})", "aiResult", started, {"findings": side})

        try:
            detection = DetectionResult(
                wheelColor=findings["wheelColor"],
                engraving=bool(findings["engraving"]),
                windows=int(findings["windows"]),
                scratch=bool(findings.get("scratch", False)),
                perImage=provenance,
                latencyMs=round(ai_latency_total, 3),
            )
        except KeyError as exc:
            self._abort(outcome, "IncompleteDetection", f"missing finding {exc}")
            return
        outcome.detection = detection

        self._set_state("FetchingSpec")
        started = time.perf_counter()
        try:
            spec = fetch_product(self.registry, product_id)
        except NotFound as exc:
            self._abort(outcome, "NotFound", str(exc))
            return
        except MalformedSpec as exc:
            self._abort(outcome, "MalformedSpec", str(exc))
            return
        self._step(outcome, "specFetched", "specFetched", started, {"productId": product_id})

        self._set_state("Comparing")
        started = time.perf_counter()
        report = compare(spec, detection)
        outcome.report = report
        self._step(outcome, "compared", "compared", started, report.to_json_dict())

        self._set_state("Publishing")
        started = time.perf_counter()
        trace.append(self.clock.now_ms(), "published", {})
        self.publisher.retry_pending()
        self.publisher.publish(trace, report)
        self._record_stage("published", (time.perf_counter() - started) * 1000.0)
