/**
 * DOM builders for the review console. All document text goes through
 * textContent, never innerHTML.
 */

import type { Arm, PendingDoc, Snapshot } from "./api.js";
import type { BatchJudgments } from "./judgments.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function counterBar(snapshot: Snapshot): HTMLElement {
  const bar = el("div", "counters");
  const items: [string, string][] = [
    ["reviewed", `${snapshot.reviewed} / ${snapshot.budget_count}`],
    ["relevant found", String(snapshot.relevant_found)],
    ["batch size", String(snapshot.batch_size)],
    ["round", String(snapshot.round)],
  ];
  for (const [label, value] of items) {
    const item = el("div", "counter");
    item.appendChild(el("span", "counter-value", value));
    item.appendChild(el("span", "counter-label", label));
    bar.appendChild(item);
  }
  return bar;
}

/** Cumulative found-count sparkline (never recall: recall is unknowable live). */
export function foundSparkline(curve: [number, number][], width = 220, height = 48): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("class", "sparkline");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  if (curve.length > 0) {
    const lastPoint = curve[curve.length - 1];
    const maxX = Math.max(lastPoint ? lastPoint[0] : 1, 1);
    const maxY = Math.max(...curve.map((p) => p[1]), 1);
    const points = curve
      .map(([x, y]) => `${(x / maxX) * (width - 4) + 2},${height - 2 - (y / maxY) * (height - 6)}`)
      .join(" ");
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    line.setAttribute("stroke-width", "1.5");
    svg.appendChild(line);
  }
  return svg;
}

/** One bar per cluster arm: posterior mean with the (S, F) pair as title. */
export function armBars(arms: Arm[]): HTMLElement {
  const wrap = el("div", "arms");
  for (const arm of arms) {
    const mean = arm.s / (arm.s + arm.f);
    const row = el("div", "arm-row");
    row.title = `cluster ${arm.cluster}: S=${arm.s.toFixed(3)} F=${arm.f.toFixed(3)}`;
    row.appendChild(el("span", "arm-label", String(arm.cluster)));
    const track = el("div", "arm-track");
    const fill = el("div", "arm-fill");
    fill.style.width = `${(mean * 100).toFixed(1)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "arm-mean", mean.toFixed(2)));
    wrap.appendChild(row);
  }
  return wrap;
}

export interface CardHandlers {
  onJudge: (docId: string, value: 0 | 1) => void;
  onFocus: (docId: string) => void;
}

export function documentCard(
  doc: PendingDoc,
  judgments: BatchJudgments,
  handlers: CardHandlers,
): HTMLElement {
  const card = el("article", "doc-card");
  card.dataset.docId = doc.id;
  const judged = judgments.valueOf(doc.id);
  if (judged !== undefined) card.classList.add(judged === 1 ? "judged-yes" : "judged-no");
  if (judgments.cursor === doc.id) card.classList.add("focused");

  const head = el("header", "doc-head");
  head.appendChild(el("span", "doc-id", doc.id));
  head.appendChild(el("span", "doc-pi", `pi ${doc.pi.toFixed(3)}`));
  card.appendChild(head);
  card.appendChild(el("p", "doc-text", doc.text));

  const actions = el("div", "doc-actions");
  const yes = el("button", "btn-yes", "relevant (r)");
  yes.addEventListener("click", (event) => {
    event.stopPropagation(); // keep the card's focus handler out of it
    handlers.onJudge(doc.id, 1);
  });
  const no = el("button", "btn-no", "not relevant (n)");
  no.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onJudge(doc.id, 0);
  });
  actions.appendChild(yes);
  actions.appendChild(no);
  card.appendChild(actions);
  card.addEventListener("click", () => handlers.onFocus(doc.id));
  return card;
}

export function errorBanner(message: string, retryable: boolean, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-text", message));
  if (retryable) {
    const retry = el("button", "btn-retry", "retry");
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
  }
  return banner;
}
