/**
 * Builders that mirror the registry's JSON exactly: a run collection is
 * step00..stepNN collections (timestamp/stage/payload properties, payload
 * JSON-encoded) plus an optional report collection of booleans.
 */

import type { AasCollection, AasProperty, AasSubmodel } from "../src/model.js";

export function prop(idShort: string, valueType: string, value: unknown): AasProperty {
  return { idShort, kind: "Property", valueType, value };
}

export interface StepSpec {
  stage: string;
  payload?: Record<string, unknown>;
  timestamp?: number;
}

export interface ReportFlags {
  matchColor: boolean;
  matchEngraving: boolean;
  matchWindows: boolean;
  conformance: boolean;
  productionQualityOk: boolean;
}

export function makeRun(
  runId: string,
  steps: StepSpec[],
  report: ReportFlags | null,
): AasCollection {
  const elements: AasCollection[] = steps.map((step, index) => ({
    idShort: `step${String(index).padStart(2, "0")}`,
    kind: "Collection",
    elements: [
      prop("timestamp", "int", step.timestamp ?? 1000 + index),
      prop("stage", "string", step.stage),
      prop("payload", "string", JSON.stringify(step.payload ?? {})),
    ],
  }));
  if (report) {
    elements.push({
      idShort: "report",
      kind: "Collection",
      elements: Object.entries(report).map(([key, value]) => prop(key, "bool", value)),
    });
  }
  return { idShort: runId, kind: "Collection", elements };
}

export interface RunOptions {
  productId?: string;
  wheelColor?: string;
  engraving?: boolean;
  windows?: number;
  scratch?: boolean;
  report?: ReportFlags | null;
}

/** A complete happy-path run with the full 13-stage trace. */
export function fullRun(runId: string, options: RunOptions = {}): AasCollection {
  const pid = options.productId ?? "0001";
  const wheelColor = options.wheelColor ?? "red";
  const engraving = options.engraving ?? false;
  const windows = options.windows ?? 2;
  const scratch = options.scratch ?? false;
  const report =
    options.report === undefined
      ? {
          matchColor: true,
          matchEngraving: true,
          matchWindows: true,
          conformance: true,
          productionQualityOk: !scratch,
        }
      : options.report;
  return makeRun(
    runId,
    [
      { stage: "triggered", payload: { source: "ui", productHint: pid } },
      { stage: "moved(qr)" },
      { stage: "captured(qr)" },
      { stage: "tagDecoded", payload: { productId: pid } },
      { stage: "moved(left)" },
      { stage: "captured(left)" },
      {
        stage: "aiResult(left)",
        payload: { findings: { scratch, windows, wheelColor } },
      },
      { stage: "moved(right)" },
      { stage: "captured(right)" },
      { stage: "aiResult(right)", payload: { findings: { scratch: false, engraving } } },
      { stage: "specFetched", payload: { productId: pid } },
      { stage: "compared", payload: report ?? {} },
      { stage: "published" },
    ],
    report,
  );
}

export function runsSubmodel(runs: AasCollection[]): AasSubmodel {
  return { idShort: "runs", elements: runs };
}
