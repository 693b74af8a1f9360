/**
 * Pure HTML/SVG renderers. Every function maps view records to a markup
 * string; there is no state and no fetching, so identical input yields
 * identical markup (snapshot-tested).
 */

import type {
  AasElement,
  AasShell,
  AasSubmodel,
  ProductSpecView,
  RunStep,
  SpecField,
  UiRunView,
} from "./model.js";
import { mismatchedFields } from "./model.js";

export function escapeHtml(raw: unknown): string {
  return String(raw)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const WHEEL_FILL: Record<string, string> = {
  red: "#c0392b",
  green: "#27ae60",
  yellow: "#f1c40f",
  black: "#111111",
};

interface CarFigure {
  wheelColor: string | null;
  engraving: boolean | null;
  windows: number | null;
  scratch: boolean;
}

/** Schematic side view of one toy car (the "spec picture" has no photo). */
export function carSvg(figure: CarFigure): string {
  const wheelFill = WHEEL_FILL[figure.wheelColor ?? ""] ?? "#bbbbbb";
  const parts: string[] = [
    '<svg viewBox="0 0 200 100" class="car" role="img">',
    '<rect x="20" y="40" width="160" height="35" rx="6" class="body"/>',
    '<rect x="55" y="18" width="85" height="30" rx="6" class="cabin"/>',
  ];
  const windowCount = figure.windows ?? 0;
  for (let i = 0; i < windowCount; i++) {
    const x = 62 + i * 25;
    parts.push(`<rect x="${x}" y="24" width="18" height="18" class="window"/>`);
  }
  if (figure.engraving) {
    parts.push('<text x="160" y="62" class="engraving" text-anchor="middle">&#9670;</text>');
  }
  parts.push(
    `<circle cx="60" cy="78" r="13" class="wheel" fill="${wheelFill}"/>`,
    `<circle cx="145" cy="78" r="13" class="wheel" fill="${wheelFill}"/>`,
  );
  if (figure.scratch) {
    parts.push(
      '<path d="M70 48 L95 66 M82 46 L104 62" class="scratch"/>',
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

function fieldRow(
  name: SpecField,
  specValue: unknown,
  detectedValue: unknown,
  mismatched: boolean,
): string {
  const cls = mismatched ? "field mismatch" : "field";
  return (
    `<tr class="${cls}" data-field="${name}">` +
    `<th>${escapeHtml(name)}</th>` +
    `<td class="spec-value">${escapeHtml(specValue ?? "?")}</td>` +
    `<td class="detected-value">${escapeHtml(detectedValue ?? "?")}</td>` +
    "</tr>"
  );
}

export function renderBadges(run: UiRunView): string {
  if (!run.report) {
    return '<span class="badge pending">in progress</span>';
  }
  const conformance = run.report.conformance;
  const quality = run.report.productionQualityOk;
  return (
    `<span class="badge conformance ${conformance ? "ok" : "bad"}">` +
    `conformance: ${conformance ? "pass" : "fail"}</span>` +
    `<span class="badge quality ${quality ? "ok" : "bad"}">` +
    `quality: ${quality ? "ok" : "scratched"}</span>`
  );
}

export function renderTrace(steps: RunStep[]): string {
  const items = steps
    .map(
      (step) =>
        `<li class="step"><span class="ts">${step.timestamp}</span> ` +
        `<span class="stage">${escapeHtml(step.stage)}</span></li>`,
    )
    .join("");
  return `<ol class="trace">${items}</ol>`;
}

/** Side-by-side spec vs. detection for one run. */
export function renderRun(run: UiRunView, spec: ProductSpecView | null): string {
  const bad = mismatchedFields(run, spec);
  const det = run.detected;
  const specFigure = spec
    ? carSvg({ ...spec, scratch: false })
    : '<p class="empty">specification unavailable</p>';
  const detectedFigure = carSvg({
    wheelColor: det.wheelColor,
    engraving: det.engraving,
    windows: det.windows,
    scratch: Boolean(det.scratch),
  });
  const rows = [
    fieldRow("wheelColor", spec?.wheelColor, det.wheelColor, bad.has("wheelColor")),
    fieldRow("engraving", spec?.engraving, det.engraving, bad.has("engraving")),
    fieldRow("windows", spec?.windows, det.windows, bad.has("windows")),
  ].join("");
  return (
    `<section class="run" data-run-id="${escapeHtml(run.runId)}">` +
    `<header><h2>${escapeHtml(run.runId)}</h2>${renderBadges(run)}</header>` +
    '<div class="panes">' +
    `<figure class="pane spec-pane"><figcaption>specified</figcaption>${specFigure}</figure>` +
    `<figure class="pane detected-pane"><figcaption>detected</figcaption>${detectedFigure}</figure>` +
    "</div>" +
    `<table class="fields"><thead><tr><th></th><th>spec</th><th>detected</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    renderTrace(run.steps) +
    "</section>"
  );
}

export function renderEmptyState(): string {
  return '<section class="run empty-state"><p>No runs yet. Press Start to inspect a product.</p></section>';
}

export function renderBanner(kind: "info" | "warn" | "error", text: string): string {
  return `<div class="banner ${kind}">${escapeHtml(text)}</div>`;
}

function renderElement(element: AasElement): string {
  if (element.kind === "Property") {
    return (
      `<li class="aas-property"><span class="id">${escapeHtml(element.idShort)}</span>` +
      ` = <span class="value">${escapeHtml(JSON.stringify(element.value))}</span></li>`
    );
  }
  if (element.kind === "Operation") {
    return (
      `<li class="aas-operation"><span class="id">${escapeHtml(element.idShort)}</span>` +
      `(${element.inputs.map(escapeHtml).join(", ")})</li>`
    );
  }
  const children = element.elements.map(renderElement).join("");
  return (
    `<li class="aas-collection"><span class="id">${escapeHtml(element.idShort)}</span>` +
    `<ul>${children}</ul></li>`
  );
}

function renderSubmodel(submodel: AasSubmodel): string {
  const children = submodel.elements.map(renderElement).join("");
  return (
    `<li class="aas-submodel"><span class="id">${escapeHtml(submodel.idShort)}</span>` +
    `<ul>${children}</ul></li>`
  );
}

/** Read-only tree of one shell document. */
export function renderAasBrowser(shell: AasShell | null): string {
  if (!shell) {
    return '<p class="empty">platform shell not available</p>';
  }
  const submodels = shell.submodels.map(renderSubmodel).join("");
  return (
    `<div class="aas-browser"><h3>${escapeHtml(shell.id)}</h3>` +
    `<ul class="aas-tree">${submodels}</ul></div>`
  );
}
