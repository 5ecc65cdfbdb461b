// DOM rendering. The code labels shown next to the rating buttons come
// straight from the server's /codes payload and are inserted as text nodes,
// so they render byte-identical to the API's descriptions.

import { Summary, ChangelogEntry } from "./api.js";
import { ReviewStore, CandidateView } from "./state.js";

function el(tag: string, className: string, text = ""): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

function reviewBadge(view: CandidateView): string {
  switch (view.review.kind) {
    case "rated":
      return `rated ${view.review.code}`;
    case "skipped":
      return "skipped";
    default:
      return "unrated";
  }
}

export function renderQueue(store: ReviewStore): HTMLElement {
  const root = el("div", "queue");
  const progress = el("div", "progress", store.progress());
  root.appendChild(progress);
  if (store.error) {
    root.appendChild(el("div", "error-banner", store.error));
  }
  if (store.views.length === 0) {
    root.appendChild(el("div", "empty-state", "No candidates to review."));
    return root;
  }
  const list = el("ol", "candidate-list");
  store.views.forEach((view, i) => {
    const item = el("li", i === store.focusIndex ? "candidate focused" : "candidate");
    item.appendChild(el("span", "rule", view.candidate.rule_id));
    item.appendChild(el("span", "factor", view.candidate.factor_id));
    item.appendChild(el("span", "score", view.candidate.score.toFixed(3)));
    item.appendChild(el("span", "badge", reviewBadge(view)));
    list.appendChild(item);
  });
  root.appendChild(list);
  return root;
}

export function renderDetail(store: ReviewStore): HTMLElement {
  const root = el("div", "detail");
  const view = store.focused;
  if (!view) {
    root.appendChild(el("div", "empty-state", "No candidate focused."));
    return root;
  }
  const c = view.candidate;
  root.appendChild(el("h2", "detail-title", `${c.rule_id} → ${c.factor_id}`));
  root.appendChild(el("div", "disease", c.disease_label));
  const evidence = el("dl", "evidence");
  const rows: Array<[string, string]> = [
    ["score", c.score.toFixed(4)],
    ["supporting patients", String(c.support)],
    ["parameter evaluations", String(c.evaluation_count)],
  ];
  for (const [term, value] of rows) {
    evidence.appendChild(el("dt", "evidence-term", term));
    evidence.appendChild(el("dd", "evidence-value", value));
  }
  root.appendChild(evidence);
  root.appendChild(renderCodeButtons(store));
  return root;
}

export function renderCodeButtons(store: ReviewStore): HTMLElement {
  const root = el("div", "code-buttons");
  for (const code of Object.keys(store.codes).sort()) {
    const button = el("button", "code-button") as HTMLButtonElement;
    button.dataset.code = code;
    button.appendChild(el("span", "code-number", code));
    // verbatim server description; do not rephrase or truncate
    button.appendChild(el("span", "code-label", store.codes[code]));
    button.addEventListener("click", () => void store.rate(Number(code)));
    root.appendChild(button);
  }
  return root;
}

export function renderSummary(summary: Summary): HTMLElement {
  const root = el("div", "summary");
  root.appendChild(el("div", "summary-total", `${summary.rated} rated`));
  const table = el("table", "summary-matrix");
  const head = el("tr", "");
  head.appendChild(el("th", "", "disease"));
  for (const code of Object.keys(summary.codes).sort()) {
    head.appendChild(el("th", "", code));
  }
  table.appendChild(head);
  for (const disease of Object.keys(summary.per_disease).sort()) {
    const row = el("tr", "");
    row.appendChild(el("td", "disease-cell", disease));
    for (const code of Object.keys(summary.codes).sort()) {
      row.appendChild(el("td", "count-cell", String(summary.per_disease[disease][code] ?? 0)));
    }
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}

export function renderChangelog(entries: ChangelogEntry[]): HTMLElement {
  const root = el("div", "changelog");
  if (entries.every((e) => !e.applied)) {
    root.appendChild(el("div", "empty-state", "No new edges to apply."));
    return root;
  }
  const list = el("ul", "changelog-list");
  for (const entry of entries) {
    if (!entry.applied) continue;
    list.appendChild(el("li", "changelog-entry",
      `${entry.rule_id} → ${entry.factor_id} (code ${entry.code}, ${entry.reviewer})`));
  }
  root.appendChild(list);
  return root;
}

export function renderApp(store: ReviewStore, container: HTMLElement): void {
  container.replaceChildren(renderQueue(store), renderDetail(store));
}
