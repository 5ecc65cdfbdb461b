import { ApiClient } from "./api.js";
import { ReviewStore } from "./state.js";
import { bindKeys } from "./keyboard.js";
import { renderApp, renderSummary, renderChangelog } from "./render.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? window.location.origin;
}

function reviewerName(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("reviewer") ?? "expert";
}

async function refreshSummary(api: ApiClient, panel: HTMLElement): Promise<void> {
  try {
    panel.replaceChildren(renderSummary(await api.getSummary()));
  } catch (err) {
    panel.textContent = err instanceof Error ? err.message : String(err);
  }
}

export function boot(): void {
  const api = new ApiClient(baseUrl());
  const store = new ReviewStore(api, reviewerName());
  const main = document.getElementById("app");
  const summaryPanel = document.getElementById("summary");
  const applyButton = document.getElementById("apply");
  const applyLog = document.getElementById("apply-log");
  if (!main || !summaryPanel || !applyButton || !applyLog) {
    throw new Error("missing app containers in index.html");
  }

  store.subscribe(() => {
    renderApp(store, main);
    void refreshSummary(api, summaryPanel);
  });
  bindKeys(document, store);

  applyButton.addEventListener("click", async () => {
    try {
      const result = await api.apply([1]);
      applyLog.replaceChildren(renderChangelog(result.changelog));
      await store.reload();
    } catch (err) {
      applyLog.textContent = err instanceof Error ? err.message : String(err);
    }
  });

  void store.reload();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
