// Stacked-area SVG rendering. Pure display math only: the stack offsets
// are cumulative sums of the series exactly as the API returned them,
// and scaling maps data units onto pixels. Nothing is re-aggregated.

export interface OverlayLine {
  label: string;
  values: number[];
  dashed?: boolean;
}

export interface StackedAreaOptions {
  months: string[];
  labels: string[];
  values: number[][]; // one row per month, one column per label
  overlays?: OverlayLine[]; // drawn against their own right-hand scale
  width?: number;
  height?: number;
}

const PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
  "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac",
];

const MARGIN = { top: 12, right: 56, bottom: 32, left: 56 };

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length] as string;
}

/** Per-month cumulative lower/upper bounds for each stacked column. */
export function stackOffsets(values: number[][]): { lower: number[][]; upper: number[][] } {
  const lower: number[][] = [];
  const upper: number[][] = [];
  for (const row of values) {
    const lo: number[] = [];
    const up: number[] = [];
    let running = 0;
    for (const v of row) {
      lo.push(running);
      running += v;
      up.push(running);
    }
    lower.push(lo);
    upper.push(up);
  }
  return { lower, upper };
}

function maxStackTotal(values: number[][]): number {
  let max = 0;
  for (const row of values) {
    let total = 0;
    for (const v of row) total += v;
    if (total > max) max = total;
  }
  return max;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  doc: Document,
  tag: K,
): SVGElementTagNameMap[K] {
  return doc.createElementNS("http://www.w3.org/2000/svg", tag);
}

/** Evenly spaced ticks from zero to max, rounded to a tidy step. */
export function axisTicks(max: number, count = 4): number[] {
  if (max <= 0) return [0];
  const rough = max / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rough) ?? magnitude * 10;
  const ticks: number[] = [];
  for (let v = 0; v <= max + 1e-9; v += step) ticks.push(Number(v.toFixed(10)));
  return ticks;
}

export function buildStackedArea(doc: Document, options: StackedAreaOptions): SVGSVGElement {
  const width = options.width ?? 760;
  const height = options.height ?? 320;
  const { months, labels, values } = options;
  const overlays = options.overlays ?? [];

  const svg = svgEl(doc, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("role", "img");
  svg.classList.add("trend-chart");

  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  const yMax = maxStackTotal(values) || 1;
  const overlayMax = Math.max(1, ...overlays.flatMap((o) => o.values));

  const x = (i: number) =>
    MARGIN.left + (months.length <= 1 ? innerW / 2 : (i * innerW) / (months.length - 1));
  const y = (v: number) => MARGIN.top + innerH - (v / yMax) * innerH;
  const yOverlay = (v: number) => MARGIN.top + innerH - (v / overlayMax) * innerH;

  const { lower, upper } = stackOffsets(values);

  labels.forEach((label, j) => {
    const forward = months.map((_, i) => `${x(i)},${y(upper[i]![j]!)}`);
    const backward = months
      .map((_, i) => `${x(i)},${y(lower[i]![j]!)}`)
      .reverse();
    const polygon = svgEl(doc, "polygon");
    polygon.setAttribute("points", [...forward, ...backward].join(" "));
    polygon.setAttribute("fill", seriesColor(j));
    polygon.setAttribute("fill-opacity", "0.82");
    polygon.dataset.series = label;
    const title = svgEl(doc, "title");
    title.textContent = label;
    polygon.appendChild(title);
    svg.appendChild(polygon);
  });

  overlays.forEach((overlay, idx) => {
    const line = svgEl(doc, "polyline");
    line.setAttribute(
      "points",
      overlay.values.map((v, i) => `${x(i)},${yOverlay(v)}`).join(" "),
    );
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", idx === 0 ? "#444" : "#999");
    line.setAttribute("stroke-width", "1.5");
    if (overlay.dashed !== false) line.setAttribute("stroke-dasharray", "5 3");
    line.dataset.overlay = overlay.label;
    svg.appendChild(line);
  });

  for (const tick of axisTicks(yMax)) {
    const text = svgEl(doc, "text");
    text.setAttribute("x", String(MARGIN.left - 6));
    text.setAttribute("y", String(y(tick) + 4));
    text.setAttribute("text-anchor", "end");
    text.classList.add("axis-label");
    text.textContent = String(tick);
    svg.appendChild(text);
  }
  if (overlays.length > 0) {
    for (const tick of axisTicks(overlayMax)) {
      const text = svgEl(doc, "text");
      text.setAttribute("x", String(width - MARGIN.right + 6));
      text.setAttribute("y", String(yOverlay(tick) + 4));
      text.classList.add("axis-label");
      text.textContent = String(tick);
      svg.appendChild(text);
    }
  }

  months.forEach((month, i) => {
    // thin the x labels when months are dense
    const every = Math.max(1, Math.ceil(months.length / 12));
    if (i % every !== 0 && i !== months.length - 1) return;
    const text = svgEl(doc, "text");
    text.setAttribute("x", String(x(i)));
    text.setAttribute("y", String(height - 10));
    text.setAttribute("text-anchor", "middle");
    text.classList.add("axis-label");
    text.textContent = month;
    svg.appendChild(text);
  });

  return svg;
}

/**
 * Data table mirroring the chart, one cell per API value, verbatim.
 * This is the place tests and screen readers confirm the numbers.
 */
export function buildSeriesTable(
  doc: Document,
  months: string[],
  labels: string[],
  values: number[][],
): HTMLTableElement {
  const table = doc.createElement("table");
  table.classList.add("series-table");
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "month";
  for (const label of labels) head.insertCell().textContent = label;
  const body = table.createTBody();
  months.forEach((month, i) => {
    const row = body.insertRow();
    row.insertCell().textContent = month;
    labels.forEach((label, j) => {
      const cell = row.insertCell();
      cell.textContent = String(values[i]![j]!);
      cell.dataset.month = month;
      cell.dataset.series = label;
    });
  });
  return table;
}
