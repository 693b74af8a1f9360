import { describe, expect, it } from "vitest";

import { parseRun } from "../src/model.js";
import {
  carSvg,
  renderAasBrowser,
  renderBadges,
  renderEmptyState,
  renderRun,
} from "../src/render.js";
import { fullRun, prop } from "./fixtures.js";

const SPEC = { productId: "0001", wheelColor: "red", engraving: false, windows: 2 };

describe("carSvg", () => {
  it("draws one window rect per specified window", () => {
    const svg = carSvg({ wheelColor: "red", engraving: false, windows: 3, scratch: false });
    expect(svg.match(/class="window"/g)).toHaveLength(3);
  });

  it("fills wheels with the spec color and marks engraving", () => {
    const svg = carSvg({ wheelColor: "yellow", engraving: true, windows: 1, scratch: false });
    expect(svg).toContain('fill="#f1c40f"');
    expect(svg).toContain('class="engraving"');
  });

  it("adds a scratch overlay only when scratched", () => {
    const clean = carSvg({ wheelColor: "red", engraving: false, windows: 1, scratch: false });
    const scratched = carSvg({ wheelColor: "red", engraving: false, windows: 1, scratch: true });
    expect(clean).not.toContain('class="scratch"');
    expect(scratched).toContain('class="scratch"');
  });
});

describe("renderRun", () => {
  it("is a pure function of the run collection (snapshot)", () => {
    const run = parseRun(fullRun("run-0001"));
    const first = renderRun(run, SPEC);
    expect(first).toBe(renderRun(parseRun(fullRun("run-0001")), SPEC));
    expect(first).toMatchSnapshot();
  });

  it("matching run renders zero highlighted fields", () => {
    const html = renderRun(parseRun(fullRun("run-0001")), SPEC);
    expect(html).not.toContain("mismatch");
  });

  it("windows mismatch 2 vs 3 highlights the windows field only", () => {
    const run = parseRun(
      fullRun("run-0001", {
        windows: 3,
        report: {
          matchColor: true,
          matchEngraving: true,
          matchWindows: false,
          conformance: false,
          productionQualityOk: true,
        },
      }),
    );
    const html = renderRun(run, SPEC);
    expect(html).toContain('class="field mismatch" data-field="windows"');
    expect(html).toContain('class="field" data-field="wheelColor"');
    expect(html).toContain('class="field" data-field="engraving"');
  });

  it("scratch run: quality badge red, conformance badge unaffected", () => {
    const run = parseRun(fullRun("run-0001", { scratch: true }));
    const html = renderRun(run, SPEC);
    expect(html).toContain('class="badge quality bad"');
    expect(html).toContain('class="badge conformance ok"');
    expect(html).not.toContain("mismatch"); // scratch is not a spec field
    expect(html).toContain('class="scratch"'); // overlay on the detected pane
  });

  it("renders the trace stages in order", () => {
    const html = renderRun(parseRun(fullRun("run-0001")), SPEC);
    const triggered = html.indexOf("triggered");
    const published = html.indexOf("published");
    expect(triggered).toBeGreaterThan(-1);
    expect(published).toBeGreaterThan(triggered);
  });

  it("missing run renders the empty state", () => {
    expect(renderEmptyState()).toContain("No runs yet");
  });
});

describe("renderBadges", () => {
  it("shows in-progress while no report exists", () => {
    const run = parseRun(fullRun("run-0001", { report: null }));
    expect(renderBadges(run)).toContain("in progress");
  });
});

describe("renderAasBrowser", () => {
  it("renders a read-only tree over submodels, collections and properties", () => {
    const html = renderAasBrowser({
      id: "platform",
      assetKind: "platform",
      submodels: [
        { idShort: "services", elements: [prop("camera-adapter", "string", "Running")] },
        {
          idShort: "monitoring",
          elements: [
            {
              idShort: "moved",
              kind: "Collection",
              elements: [prop("messageCount", "int", 12)],
            },
          ],
        },
      ],
    });
    expect(html).toContain("platform");
    expect(html).toContain("camera-adapter");
    expect(html).toContain("&quot;Running&quot;");
    expect(html).toContain("messageCount");
    expect(html).not.toContain("<input");
    expect(html).not.toContain("<button");
  });

  it("escapes markup in AAS values", () => {
    const html = renderAasBrowser({
      id: "platform",
      assetKind: "platform",
      submodels: [
        { idShort: "platform", elements: [prop("note", "string", "<script>alert(1)</script>")] },
      ],
    });
    expect(html).not.toContain("<script>");
  });
});
