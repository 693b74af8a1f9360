/**
 * DOM bootstrap: read ./config.json (written by the CLI when it serves these
 * assets), wire the store to the page, start polling.
 */

import { RegistryApi } from "./api.js";
import { renderAasBrowser, renderBanner, renderEmptyState, renderRun } from "./render.js";
import { Store } from "./state.js";

interface UiConfig {
  registry: string; // host:port of the registry HTTP facade
}

function renderAll(store: Store): void {
  const bannerHost = document.getElementById("banner")!;
  const runHost = document.getElementById("run")!;
  const browserHost = document.getElementById("aas-browser")!;
  const startButton = document.getElementById("start") as HTMLButtonElement;
  const position = document.getElementById("position")!;

  bannerHost.innerHTML = store.banner
    ? renderBanner(store.banner.kind, store.banner.text)
    : "";
  const run = store.current();
  runHost.innerHTML = run ? renderRun(run, store.currentSpec()) : renderEmptyState();
  browserHost.innerHTML = renderAasBrowser(store.platformShell);
  startButton.disabled = store.startDisabled();
  position.textContent = store.runs.length
    ? `run ${store.index + 1} of ${store.runs.length}${store.follow ? " (live)" : ""}`
    : "no runs";
}

async function boot(): Promise<void> {
  const response = await fetch("./config.json");
  const config = (await response.json()) as UiConfig;
  const api = new RegistryApi(`http://${config.registry}`);
  const store = new Store(api);

  store.subscribe(() => renderAll(store));
  document.getElementById("start")!.addEventListener("click", () => {
    const hint = (document.getElementById("product-hint") as HTMLInputElement).value.trim();
    void store.startInspection(hint);
  });
  document.getElementById("back")!.addEventListener("click", () => store.back());
  document.getElementById("forward")!.addEventListener("click", () => store.forward());

  store.startPolling();
}

void boot();
