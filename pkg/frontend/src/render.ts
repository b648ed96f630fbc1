/** DOM renderers for the six report panels.
 *
 * Every renderer rebuilds its container from scratch, so the visible DOM
 * is always a pure function of the latest state snapshot.  No templating
 * library is involved; the panels are small enough that direct element
 * construction stays readable and keeps the bundle dependency-free.
 */

import type { AnalysisReport, ChunkResult, ClassifyResponse } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

/* Difficulty scores are probability-weighted stage indices, so they live
 * on the fixed 2..5 scale regardless of the text being analyzed. */
const SCORE_MIN = 2;
const SCORE_MAX = 5;
const STAGE_BY_SCORE: Record<number, string> = { 2: "KS2", 3: "KS3", 4: "KS4", 5: "KS5" };

function clear(container: Element): void {
  container.textContent = "";
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function formatPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

/** Panel 1: one bar per key stage, widths proportional to share of text. */
export function renderDistribution(
  container: Element,
  distribution: Record<string, number>,
  stages: string[],
): void {
  clear(container);
  const doc = container.ownerDocument;
  for (const stage of stages) {
    const share = distribution[stage] ?? 0;
    const row = el(doc, "div", "distribution-row");
    row.appendChild(el(doc, "span", "stage-label", stage));
    const track = el(doc, "div", "bar-track");
    const bar = el(doc, "div", "bar");
    bar.style.width = `${share * 100}%`;
    bar.title = `${stage}: ${(share * 100).toFixed(4)}%`;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el(doc, "span", "percent-label", formatPercent(share)));
    container.appendChild(row);
  }
}

/** Panel 2: overall difficulty score with the matching reading-age range. */
export function renderScore(container: Element, report: AnalysisReport): void {
  clear(container);
  const doc = container.ownerDocument;
  container.appendChild(el(doc, "div", "score-value", report.overall_score.toFixed(2)));
  container.appendChild(el(doc, "div", "score-stage", report.reading_age.stage));
  container.appendChild(
    el(doc, "div", "reading-age", `typical readers: ${report.reading_age.text}`),
  );
}

/** Panel 3: difficulty curve across chunks; clicking a point selects it. */
export function renderDifficulty(
  container: Element,
  detail: Element,
  response: ClassifyResponse,
  selected: number | null,
  onSelect: (index: number) => void,
): void {
  clear(container);
  const doc = container.ownerDocument;
  const series = response.report.difficulty_series;
  if (series.length === 0) {
    container.appendChild(el(doc, "p", "empty-note", "no chunks to plot"));
    clear(detail);
    return;
  }

  const width = 600;
  const height = 160;
  const pad = 24;
  const x = (i: number): number =>
    series.length === 1 ? width / 2 : pad + (i * (width - 2 * pad)) / (series.length - 1);
  const y = (score: number): number => {
    const t = (score - SCORE_MIN) / (SCORE_MAX - SCORE_MIN);
    return height - pad - t * (height - 2 * pad);
  };

  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "difficulty-chart");
  svg.setAttribute("role", "img");

  for (let score = SCORE_MIN; score <= SCORE_MAX; score += 1) {
    const line = doc.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(pad));
    line.setAttribute("x2", String(width - pad));
    line.setAttribute("y1", String(y(score)));
    line.setAttribute("y2", String(y(score)));
    line.setAttribute("class", "gridline");
    svg.appendChild(line);
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "0");
    label.setAttribute("y", String(y(score) + 4));
    label.setAttribute("class", "axis-label");
    label.textContent = STAGE_BY_SCORE[score] ?? String(score);
    svg.appendChild(label);
  }

  const polyline = doc.createElementNS(SVG_NS, "polyline");
  polyline.setAttribute(
    "points",
    series.map(([i, score]) => `${x(i)},${y(score)}`).join(" "),
  );
  polyline.setAttribute("class", "difficulty-line");
  svg.appendChild(polyline);

  for (const [i, score] of series) {
    const point = doc.createElementNS(SVG_NS, "circle");
    point.setAttribute("cx", String(x(i)));
    point.setAttribute("cy", String(y(score)));
    point.setAttribute("r", "6");
    point.setAttribute("class", i === selected ? "point selected" : "point");
    point.setAttribute("data-index", String(i));
    const title = doc.createElementNS(SVG_NS, "title");
    title.textContent = `chunk ${i + 1}: ${score.toFixed(2)}`;
    point.appendChild(title);
    point.addEventListener("click", () => onSelect(i));
    svg.appendChild(point);
  }
  container.appendChild(svg);

  clear(detail);
  const chunk = selected === null ? undefined : response.chunks[selected];
  if (chunk === undefined) {
    detail.appendChild(
      el(doc, "p", "empty-note", "Select a point to see that chunk's text."),
    );
    return;
  }
  const heading = el(doc, "p", "chunk-heading");
  heading.appendChild(el(doc, "span", "badge", chunk.key_stage));
  heading.appendChild(
    el(
      doc,
      "span",
      "chunk-meta",
      ` chunk ${(selected as number) + 1} of ${response.chunks.length}, ` +
        `confidence ${formatPercent(chunk.confidence)}`,
    ),
  );
  detail.appendChild(heading);
  detail.appendChild(el(doc, "blockquote", "chunk-text", chunk.text));
}

/** Panel 4: ranked vocabulary with the ranking mode spelled out. */
export function renderVocabulary(container: Element, report: AnalysisReport): void {
  clear(container);
  const doc = container.ownerDocument;
  const note =
    report.vocabulary_mode === "attention"
      ? "ranked by aggregated model attention"
      : "ranked by term frequency (attention unavailable)";
  container.appendChild(el(doc, "p", "vocab-mode", note));
  const list = el(doc, "ol", "vocab-list");
  for (const [word, weight] of report.top_vocabulary) {
    const item = el(doc, "li");
    item.appendChild(el(doc, "span", "word", word));
    item.appendChild(el(doc, "span", "weight", weight.toFixed(2)));
    list.appendChild(item);
  }
  container.appendChild(list);
}

/** Panel 5: curriculum feature counts grouped by key stage band. */
export function renderCurriculum(container: Element, report: AnalysisReport): void {
  clear(container);
  const doc = container.ownerDocument;
  for (const [band, counts] of Object.entries(report.curriculum)) {
    const section = el(doc, "section", "band");
    section.appendChild(el(doc, "h3", undefined, band.toUpperCase()));
    const listing = el(doc, "dl", "feature-counts");
    for (const [feature, count] of Object.entries(counts)) {
      const term = el(doc, "dt", count === 0 ? "feature absent" : "feature");
      term.textContent = feature.replace(/_/g, " ");
      const value = el(doc, "dd", count === 0 ? "count absent" : "count");
      value.textContent = String(count);
      listing.appendChild(term);
      listing.appendChild(value);
    }
    section.appendChild(listing);
    container.appendChild(section);
  }
}

function excerptCard(
  doc: Document,
  label: string,
  kind: string,
  chunk: ChunkResult | null,
): HTMLElement {
  const card = el(doc, "article", "excerpt-card");
  card.setAttribute("data-kind", kind);
  card.appendChild(el(doc, "h3", undefined, label));
  if (chunk === null) {
    card.appendChild(el(doc, "p", "empty-note", "no chunks analyzed"));
    return card;
  }
  const meta = el(doc, "p", "excerpt-meta");
  meta.appendChild(el(doc, "span", "badge", chunk.key_stage));
  meta.appendChild(
    el(doc, "span", "confidence", ` confidence ${formatPercent(chunk.confidence)}`),
  );
  card.appendChild(meta);
  card.appendChild(el(doc, "blockquote", "excerpt-text", chunk.text));
  return card;
}

/** Panel 6: the most and least complex excerpts side by side. */
export function renderExcerpts(container: Element, report: AnalysisReport): void {
  clear(container);
  const doc = container.ownerDocument;
  container.appendChild(excerptCard(doc, "Most complex", "most", report.most_complex));
  container.appendChild(excerptCard(doc, "Least complex", "least", report.least_complex));
}

export interface PanelRefs {
  distribution: Element;
  score: Element;
  difficulty: Element;
  chunkDetail: Element;
  vocabulary: Element;
  curriculum: Element;
  excerpts: Element;
}

export function findPanels(root: ParentNode): PanelRefs {
  const body = (name: string): Element => {
    const node = root.querySelector(`[data-panel="${name}"] .panel-body`);
    if (node === null) {
      throw new Error(`panel "${name}" is missing from the document`);
    }
    return node;
  };
  const chunkDetail = root.querySelector('[data-panel="difficulty"] .chunk-detail');
  if (chunkDetail === null) {
    throw new Error("chunk detail container is missing from the document");
  }
  return {
    distribution: body("distribution"),
    score: body("score"),
    difficulty: body("difficulty"),
    chunkDetail,
    vocabulary: body("vocabulary"),
    curriculum: body("curriculum"),
    excerpts: body("excerpts"),
  };
}

/** Repaint all six panels from one response snapshot. */
export function renderResults(
  panels: PanelRefs,
  response: ClassifyResponse,
  stages: string[],
  selected: number | null,
  onSelect: (index: number) => void,
): void {
  renderDistribution(panels.distribution, response.report.distribution, stages);
  renderScore(panels.score, response.report);
  renderDifficulty(panels.difficulty, panels.chunkDetail, response, selected, onSelect);
  renderVocabulary(panels.vocabulary, response.report);
  renderCurriculum(panels.curriculum, response.report);
  renderExcerpts(panels.excerpts, response.report);
}
