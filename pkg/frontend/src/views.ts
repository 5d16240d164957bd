import type { AnswerPayload, CorpusSummary, Interpretation } from "./api.js";
import type { SlotName } from "./state.js";
import { SLOT_NAMES } from "./state.js";

const NOT_DETECTED_PLACEHOLDER = "not detected";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

// The server's answer markdown is mechanical: bold runs, "## " headings,
// "- " bullets, plain paragraph lines. That closed subset is rendered
// here; anything else stays literal text.
function inlineHtml(line: string, markerCount: number): string {
  let html = escapeHtml(line).replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>");
  if (markerCount > 0) {
    html = html.replace(/\[(\d+)\]/g, (whole, digits: string) => {
      const n = Number(digits);
      if (n < 1 || n > markerCount) return whole;
      return (
        `<a class="citation-marker" data-ref="${n}" href="#ref-${n}">[${n}]</a>`
      );
    });
  }
  return html;
}

export function renderMarkdown(markdown: string, markerCount = 0): HTMLElement {
  const root = el("div", "markdown");
  let bullets: HTMLUListElement | null = null;
  for (const line of markdown.split("\n")) {
    if (line.startsWith("- ")) {
      if (!bullets) {
        bullets = el("ul");
        root.appendChild(bullets);
      }
      const item = el("li");
      item.innerHTML = inlineHtml(line.slice(2), markerCount);
      bullets.appendChild(item);
      continue;
    }
    bullets = null;
    if (line.startsWith("## ")) {
      root.appendChild(el("h2", undefined, line.slice(3)));
    } else if (line.trim() !== "") {
      const p = el("p");
      p.innerHTML = inlineHtml(line, markerCount);
      root.appendChild(p);
    }
  }
  return root;
}

// ---------------------------------------------------------------------------
// confirmation card

export interface ConfirmationHandlers {
  onEdit(slot: SlotName, value: string): void;
  onConfirm(): void;
  onCancel(): void;
}

const SLOT_LABELS: Record<SlotName, string> = {
  policy: "Policy",
  standard: "Standard",
  subject: "Subject",
};

/** Three editable slot fields plus Confirm/Cancel. */
export function renderConfirmationCard(
  interpretation: Interpretation,
  handlers: ConfirmationHandlers,
): HTMLElement {
  const card = el("form", "confirmation-card");
  card.appendChild(el("h2", undefined, "Confirm interpretation"));
  card.appendChild(
    el("p", "confirmation-hint", `Interpreted via ${interpretation.source}. Adjust before retrieval if needed.`),
  );
  for (const slot of SLOT_NAMES) {
    const field = el("label", "slot-field");
    field.appendChild(el("span", "slot-label", SLOT_LABELS[slot]));
    const input = el("input", "slot-input");
    input.name = slot;
    input.value = interpretation[slot] ?? "";
    input.placeholder = NOT_DETECTED_PLACEHOLDER;
    input.addEventListener("input", () => handlers.onEdit(slot, input.value));
    field.appendChild(input);
    card.appendChild(field);
  }
  const actions = el("div", "confirmation-actions");
  const confirm = el("button", "confirm-button", "Confirm");
  confirm.type = "submit";
  const cancel = el("button", "cancel-button", "Cancel");
  cancel.type = "button";
  cancel.addEventListener("click", () => handlers.onCancel());
  actions.append(confirm, cancel);
  card.appendChild(actions);
  card.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onConfirm();
  });
  return card;
}

// ---------------------------------------------------------------------------
// answer view

export interface AnswerViewOptions {
  docTitles?: ReadonlyMap<string, string>;
}

function referencePanel(
  answer: AnswerPayload,
  rank: number,
  docTitles: ReadonlyMap<string, string>,
): HTMLDetailsElement {
  const finding = answer.findings[rank];
  const panel = el("details", "reference-panel");
  panel.id = `ref-${rank + 1}`;
  const title = docTitles.get(finding.doc_id) ?? finding.doc_id;
  const summary = el(
    "summary",
    undefined,
    `[${rank + 1}] ${title} › ${finding.heading_path.join(" › ")}`,
  );
  panel.appendChild(summary);
  const body = el("div", "reference-body");
  if (finding.control_id) {
    body.appendChild(el("p", "reference-control", `Control ${finding.control_id}`));
  }
  body.appendChild(el("p", "reference-score", `Score ${finding.score.toFixed(4)}`));
  const tags = answer.tags[finding.chunk_id] ?? [];
  if (tags.length > 0) {
    body.appendChild(el("p", "reference-tags", `Tags: ${tags.join(", ")}`));
  }
  body.appendChild(el("blockquote", "reference-excerpt", finding.excerpt));
  panel.appendChild(body);
  return panel;
}

/**
 * Render one answer: the markdown body with [n] markers linkified, then
 * one expandable reference panel per finding. Clicking a marker opens
 * its panel. The references block of the raw markdown is dropped in
 * favor of the structured panels.
 */
export function renderAnswer(
  answer: AnswerPayload,
  options: AnswerViewOptions = {},
): HTMLElement {
  const view = el("article", "answer");
  const bodyMarkdown = answer.markdown.split("\n## References")[0];
  view.appendChild(renderMarkdown(bodyMarkdown, answer.findings.length));
  if (answer.findings.length > 0) {
    const refs = el("section", "references");
    refs.appendChild(el("h2", undefined, "References"));
    const docTitles = options.docTitles ?? new Map();
    for (let rank = 0; rank < answer.findings.length; rank++) {
      refs.appendChild(referencePanel(answer, rank, docTitles));
    }
    view.appendChild(refs);
  }
  view.querySelectorAll<HTMLAnchorElement>("a.citation-marker").forEach((marker) => {
    marker.addEventListener("click", () => {
      const panel = view.querySelector<HTMLDetailsElement>(`#ref-${marker.dataset.ref}`);
      if (panel) panel.open = true;
    });
  });
  return view;
}

// ---------------------------------------------------------------------------
// corpus browser

export function renderCorpusBrowser(summary: CorpusSummary): HTMLElement {
  const browser = el("section", "corpus-browser");
  browser.appendChild(el("h2", undefined, "Corpus"));
  browser.appendChild(
    el(
      "p",
      "corpus-counts",
      `${summary.documents.length} document(s), ${summary.chunk_count} chunk(s)`,
    ),
  );
  if (summary.documents.length === 0) {
    browser.appendChild(el("p", "corpus-empty", "no documents ingested"));
    return browser;
  }
  const table = el("table", "corpus-table");
  const head = el("tr");
  head.append(el("th", undefined, "Title"), el("th", undefined, "Standard"));
  table.appendChild(head);
  for (const doc of summary.documents) {
    const row = el("tr", "corpus-row");
    row.append(el("td", undefined, doc.title), el("td", undefined, doc.standard_name));
    table.appendChild(row);
  }
  browser.appendChild(table);
  return browser;
}

export function renderRetryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "retry-banner");
  banner.appendChild(el("span", undefined, message));
  const retry = el("button", "retry-button", "Retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}
