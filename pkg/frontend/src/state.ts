/**
 * Client state store: run history navigation, 1 s polling with at most one
 * in-flight refresh, and the start-inspection action. User actions and poll
 * results are serialized through this single object; the DOM layer only
 * subscribes and re-renders.
 */

import { ApiError, RegistryApi } from "./api.js";
import type { AasShell, ProductSpecView, UiRunView } from "./model.js";
import { parseRuns } from "./model.js";

export const APP_SHELL_ID = "app-quality-inspection";
export const RUNS_SUBMODEL = "runs";
export const CONTROL_SUBMODEL = "control";
export const START_OPERATION = "startInspection";
export const PLATFORM_SHELL_ID = "platform";
export const POLL_INTERVAL_MS = 1000;

export interface Banner {
  kind: "info" | "warn" | "error";
  text: string;
}

interface StartResult {
  accepted: boolean;
  runId: string;
  reason?: string;
}

export class Store {
  runs: UiRunView[] = [];
  /** Index into runs[]; -1 while no run is published. */
  index = -1;
  /** Follow the newest run (live view); cleared by browsing back. */
  follow = true;
  registryDown = false;
  banner: Banner | null = null;
  platformShell: AasShell | null = null;
  specs = new Map<string, ProductSpecView | null>();

  private refreshing = false;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: Array<() => void> = [];

  constructor(public readonly api: RegistryApi) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  current(): UiRunView | null {
    return this.index >= 0 && this.index < this.runs.length ? this.runs[this.index] : null;
  }

  currentSpec(): ProductSpecView | null {
    const run = this.current();
    if (!run || !run.productId) return null;
    return this.specs.get(run.productId) ?? null;
  }

  /** The start button stays disabled while the registry is unreachable. */
  startDisabled(): boolean {
    return this.registryDown;
  }

  back(): void {
    if (this.runs.length === 0) return;
    this.index = Math.max(0, this.index - 1);
    this.follow = false;
    this.notify();
  }

  forward(): void {
    if (this.runs.length === 0) return;
    this.index = Math.min(this.runs.length - 1, this.index + 1);
    if (this.index === this.runs.length - 1) this.follow = true;
    this.notify();
  }

  async startInspection(productHint = ""): Promise<void> {
    let result: StartResult;
    try {
      result = (await this.api.invoke(APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, {
        productHint,
      })) as StartResult;
    } catch (err) {
      this.registryDown = !(err instanceof ApiError);
      this.banner = { kind: "error", text: `start failed: ${(err as Error).message}` };
      this.notify();
      return;
    }
    this.registryDown = false;
    if (result.accepted) {
      this.follow = true;
      this.banner = { kind: "info", text: `run ${result.runId} started` };
    } else {
      const reason = result.reason ?? "rejected";
      const text = reason === "Busy" ? "busy: run queued or rejected" : `not accepted: ${reason}`;
      this.banner = { kind: "warn", text };
    }
    this.notify();
    await this.refresh();
  }

  async refresh(): Promise<void> {
    try {
      const runsDoc = await this.api.getSubmodel(APP_SHELL_ID, RUNS_SUBMODEL);
      this.runs = parseRuns(runsDoc);
      if (this.follow || this.index >= this.runs.length) {
        this.index = this.runs.length - 1;
      }
      const run = this.current();
      if (run && run.productId && !this.specs.has(run.productId)) {
        try {
          this.specs.set(run.productId, await this.api.getProductSpec(run.productId));
        } catch {
          this.specs.set(run.productId, null);
        }
      }
      try {
        this.platformShell = await this.api.getShell(PLATFORM_SHELL_ID);
      } catch {
        this.platformShell = null;
      }
      if (this.registryDown) this.banner = null;
      this.registryDown = false;
    } catch (err) {
      if (err instanceof ApiError) {
        // the registry answered; the app shell may simply not exist yet
        this.runs = [];
        this.index = -1;
      } else {
        this.registryDown = true;
        this.banner = { kind: "error", text: "registry unreachable" };
      }
    }
    this.notify();
  }

  /** Poll every intervalMs; skip a tick while the previous one is in flight. */
  startPolling(intervalMs: number = POLL_INTERVAL_MS): void {
    if (this.timer !== null) return;
    const tick = () => {
      if (this.refreshing) return;
      this.refreshing = true;
      void this.refresh().finally(() => {
        this.refreshing = false;
      });
    };
    this.timer = setInterval(tick, intervalMs);
    tick();
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
