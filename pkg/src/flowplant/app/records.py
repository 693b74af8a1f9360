"""Inspection records: detection, two-axis comparison, audit trace."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..connectors.product import ProductSpec

__all__ = ["ProductSpec", "DetectionResult", "ComparisonReport", "compare", "InspectionTrace", "TraceStep"]


@dataclass(frozen=True)
class DetectionResult:
    wheelColor: str
    engraving: bool
    windows: int
    scratch: bool
    perImage: dict = field(default_factory=dict)  # finding -> position that produced it
    latencyMs: float = 0.0


@dataclass(frozen=True)
class ComparisonReport:
    matchColor: bool
    matchEngraving: bool
    matchWindows: bool
    conformance: bool
    productionQualityOk: bool

    def to_json_dict(self) -> dict:
        return {
            "matchColor": self.matchColor,
            "matchEngraving": self.matchEngraving,
            "matchWindows": self.matchWindows,
            "conformance": self.conformance,
            "productionQualityOk": self.productionQualityOk,
        }


def compare(spec: ProductSpec, det: DetectionResult) -> ComparisonReport:
    """Two independent axes: spec conformance and production quality.

    Conformance depends only on the three specified properties; quality only
    on the scratch finding.
    """
    match_color = spec.wheelColor == det.wheelColor
    match_engraving = spec.engraving == det.engraving
    match_windows = spec.windows == det.windows
    return ComparisonReport(
        matchColor=match_color,
        matchEngraving=match_engraving,
        matchWindows=match_windows,
        conformance=match_color and match_engraving and match_windows,
        productionQualityOk=not det.scratch,
    )


@dataclass(frozen=True)
class TraceStep:
    timestamp: int
    stage: str  # e.g. "triggered", "moved(left)", "aiResult(right)", "published"
    payload: dict = field(default_factory=dict)


@dataclass
class InspectionTrace:
    runId: str
    steps: list = field(default_factory=list)

    def append(self, timestamp: int, stage: str, payload: dict | None = None) -> TraceStep:
        if self.steps and timestamp < self.steps[-1].timestamp:
            timestamp = self.steps[-1].timestamp  # clock must never run backwards in a trace
        step = TraceStep(timestamp, stage, payload or {})
        self.steps.append(step)
        return step

    @property
    def terminal(self) -> str | None:
        if not self.steps:
            return None
        last = self.steps[-1].stage
        if last == "published" or last.startswith("aborted("):
            return last
        return None

    def stages(self) -> list[str]:
        return [s.stage for s in self.steps]
