/**
 * Pure parsing of registry JSON documents into view records. No fetching,
 * no DOM: everything here is a function of the AAS content.
 */

export interface AasProperty {
  idShort: string;
  kind: "Property";
  valueType: string;
  value: unknown;
}

export interface AasOperation {
  idShort: string;
  kind: "Operation";
  inputs: string[];
  outputs: string[];
}

export interface AasCollection {
  idShort: string;
  kind: "Collection";
  elements: AasElement[];
}

export type AasElement = AasProperty | AasOperation | AasCollection;

export interface AasSubmodel {
  idShort: string;
  elements: AasElement[];
}

export interface AasShell {
  id: string;
  assetKind: string;
  submodels: AasSubmodel[];
}

export interface RunStep {
  timestamp: number;
  stage: string;
  payload: Record<string, unknown>;
}

export interface RunReport {
  matchColor: boolean;
  matchEngraving: boolean;
  matchWindows: boolean;
  conformance: boolean;
  productionQualityOk: boolean;
}

export interface DetectedView {
  wheelColor: string | null;
  engraving: boolean | null;
  windows: number | null;
  scratch: boolean | null;
}

export interface ProductSpecView {
  productId: string;
  wheelColor: string;
  engraving: boolean;
  windows: number;
}

export interface UiRunView {
  runId: string;
  steps: RunStep[];
  report: RunReport | null;
  detected: DetectedView;
  productId: string | null;
  /** "published", "aborted(Reason)" or null while the run is still live. */
  terminal: string | null;
}

function propertyMap(collection: AasCollection): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const element of collection.elements) {
    if (element.kind === "Property") {
      out[element.idShort] = element.value;
    }
  }
  return out;
}

function parseStep(collection: AasCollection): RunStep {
  const props = propertyMap(collection);
  let payload: Record<string, unknown> = {};
  if (typeof props.payload === "string") {
    try {
      payload = JSON.parse(props.payload) as Record<string, unknown>;
    } catch {
      payload = {};
    }
  }
  return {
    timestamp: Number(props.timestamp ?? 0),
    stage: String(props.stage ?? ""),
    payload,
  };
}

function mergeFindings(detected: DetectedView, findings: Record<string, unknown>): void {
  if ("wheelColor" in findings) detected.wheelColor = String(findings.wheelColor);
  if ("engraving" in findings) detected.engraving = Boolean(findings.engraving);
  if ("windows" in findings) detected.windows = Number(findings.windows);
  if ("scratch" in findings) {
    detected.scratch = Boolean(detected.scratch) || Boolean(findings.scratch);
  }
}

/** Parse one run collection (step00..stepNN plus optional report). */
export function parseRun(collection: AasCollection): UiRunView {
  const stepCollections = collection.elements
    .filter((el): el is AasCollection => el.kind === "Collection" && el.idShort.startsWith("step"))
    .sort((a, b) => a.idShort.localeCompare(b.idShort));
  const steps = stepCollections.map(parseStep);

  const detected: DetectedView = {
    wheelColor: null,
    engraving: null,
    windows: null,
    scratch: null,
  };
  let productId: string | null = null;
  for (const step of steps) {
    if (step.stage.startsWith("aiResult(") && typeof step.payload.findings === "object") {
      mergeFindings(detected, step.payload.findings as Record<string, unknown>);
    }
    if (step.stage === "tagDecoded" && typeof step.payload.productId === "string") {
      productId = step.payload.productId;
    }
  }

  const reportCollection = collection.elements.find(
    (el): el is AasCollection => el.kind === "Collection" && el.idShort === "report",
  );
  let report: RunReport | null = null;
  if (reportCollection) {
    const flags = propertyMap(reportCollection);
    report = {
      matchColor: Boolean(flags.matchColor),
      matchEngraving: Boolean(flags.matchEngraving),
      matchWindows: Boolean(flags.matchWindows),
      conformance: Boolean(flags.conformance),
      productionQualityOk: Boolean(flags.productionQualityOk),
    };
  }

  const lastStage = steps.length ? steps[steps.length - 1].stage : "";
  const terminal =
    lastStage === "published" || lastStage.startsWith("aborted(") ? lastStage : null;

  return { runId: collection.idShort, steps, report, detected, productId, terminal };
}

/** Parse the whole runs submodel, oldest run first (registry insertion order). */
export function parseRuns(submodel: AasSubmodel): UiRunView[] {
  return submodel.elements
    .filter((el): el is AasCollection => el.kind === "Collection")
    .map(parseRun);
}

export type SpecField = "wheelColor" | "engraving" | "windows";

/**
 * Which specified fields disagree between spec and detection. The published
 * report is authoritative when present; otherwise fall back to comparing the
 * values directly (live runs that have findings but no report yet).
 */
export function mismatchedFields(run: UiRunView, spec: ProductSpecView | null): Set<SpecField> {
  const out = new Set<SpecField>();
  if (run.report) {
    if (!run.report.matchColor) out.add("wheelColor");
    if (!run.report.matchEngraving) out.add("engraving");
    if (!run.report.matchWindows) out.add("windows");
    return out;
  }
  if (!spec) return out;
  const det = run.detected;
  if (det.wheelColor !== null && det.wheelColor !== spec.wheelColor) out.add("wheelColor");
  if (det.engraving !== null && det.engraving !== spec.engraving) out.add("engraving");
  if (det.windows !== null && det.windows !== spec.windows) out.add("windows");
  return out;
}
