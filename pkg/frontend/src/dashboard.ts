// Trend dashboard: stacked area per topic group, external overlays on a
// secondary axis, and the correlation table exactly as reported.

import { ApiClient, ApiError } from "./api.js";
import { buildSeriesTable, buildStackedArea, seriesColor } from "./charts.js";
import type {
  CorrelationEntry,
  ExternalPayload,
  TrendSource,
  TrendsPayload,
} from "./types.js";

export class DashboardView {
  source: TrendSource = "lda";
  normalize = false;
  /** latest in-flight refresh; awaited by tests */
  pending: Promise<void> = Promise.resolve();

  private readonly banner: HTMLElement;
  private readonly sourceSelect: HTMLSelectElement;
  private readonly normalizeBox: HTMLInputElement;
  private readonly chartHost: HTMLElement;
  private readonly legendHost: HTMLElement;
  private readonly tableHost: HTMLElement;
  private readonly correlationHost: HTMLElement;
  private readonly snapshotNote: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    root: HTMLElement,
  ) {
    const doc = root.ownerDocument;
    root.innerHTML = "";

    this.banner = doc.createElement("div");
    this.banner.className = "error-banner";
    this.banner.hidden = true;
    root.appendChild(this.banner);

    const controls = doc.createElement("div");
    controls.className = "controls";

    const sourceLabel = doc.createElement("label");
    sourceLabel.textContent = "series ";
    this.sourceSelect = doc.createElement("select");
    this.sourceSelect.id = "trend-source";
    for (const [value, text] of [
      ["lda", "topic model mass"],
      ["lexicon", "lexicon counts"],
    ] as const) {
      const option = doc.createElement("option");
      option.value = value;
      option.textContent = text;
      this.sourceSelect.appendChild(option);
    }
    this.sourceSelect.addEventListener("change", () => {
      this.source = this.sourceSelect.value as TrendSource;
      this.pending = this.load();
    });
    sourceLabel.appendChild(this.sourceSelect);
    controls.appendChild(sourceLabel);

    const normalizeLabel = doc.createElement("label");
    this.normalizeBox = doc.createElement("input");
    this.normalizeBox.type = "checkbox";
    this.normalizeBox.id = "trend-normalize";
    this.normalizeBox.addEventListener("change", () => {
      this.normalize = this.normalizeBox.checked;
      this.pending = this.load();
    });
    normalizeLabel.appendChild(this.normalizeBox);
    normalizeLabel.append(" show monthly proportions");
    controls.appendChild(normalizeLabel);

    this.snapshotNote = doc.createElement("span");
    this.snapshotNote.className = "snapshot-note";
    controls.appendChild(this.snapshotNote);

    root.appendChild(controls);

    this.chartHost = doc.createElement("div");
    this.chartHost.className = "chart-host";
    root.appendChild(this.chartHost);

    this.legendHost = doc.createElement("div");
    this.legendHost.className = "legend";
    root.appendChild(this.legendHost);

    const tableCaption = doc.createElement("h3");
    tableCaption.textContent = "Series values";
    root.appendChild(tableCaption);
    this.tableHost = doc.createElement("div");
    this.tableHost.className = "table-host";
    root.appendChild(this.tableHost);

    const corrCaption = doc.createElement("h3");
    corrCaption.textContent = "Cross-method correlation";
    root.appendChild(corrCaption);
    this.correlationHost = doc.createElement("div");
    this.correlationHost.className = "table-host";
    root.appendChild(this.correlationHost);
  }

  async load(): Promise<void> {
    this.banner.hidden = true;
    let trends: TrendsPayload;
    let correlations: CorrelationEntry[];
    let external: ExternalPayload | null;
    try {
      trends = await this.api.trends(this.source, this.normalize);
      correlations = (await this.api.correlations()).correlations;
      external = await this.fetchExternal();
    } catch (err) {
      this.showError(err);
      return;
    }
    this.render(trends, external, correlations);
  }

  private async fetchExternal(): Promise<ExternalPayload | null> {
    try {
      return await this.api.external();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }

  private showError(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.banner.textContent = `failed to load dashboard: ${message}`;
    this.banner.hidden = false;
    // never leave stale numbers on screen next to an error
    this.chartHost.innerHTML = "";
    this.legendHost.innerHTML = "";
    this.tableHost.innerHTML = "";
    this.correlationHost.innerHTML = "";
    this.snapshotNote.textContent = "";
  }

  private render(
    trends: TrendsPayload,
    external: ExternalPayload | null,
    correlations: CorrelationEntry[],
  ): void {
    const doc = this.chartHost.ownerDocument;
    this.snapshotNote.textContent = `snapshot ${trends.snapshot_id}`;

    const overlays =
      external === null || this.normalize
        ? []
        : [
            { label: "total cases", values: external.total_cases },
            { label: "people vaccinated", values: external.people_vaccinated },
          ];
    this.chartHost.innerHTML = "";
    this.chartHost.appendChild(
      buildStackedArea(doc, {
        months: trends.months,
        labels: trends.labels,
        values: trends.values,
        overlays,
      }),
    );

    this.legendHost.innerHTML = "";
    trends.labels.forEach((label, j) => {
      const item = doc.createElement("span");
      item.className = "legend-item";
      const swatch = doc.createElement("span");
      swatch.className = "swatch";
      swatch.style.backgroundColor = seriesColor(j);
      item.appendChild(swatch);
      item.append(` ${label}`);
      this.legendHost.appendChild(item);
    });
    for (const overlay of overlays) {
      const item = doc.createElement("span");
      item.className = "legend-item";
      item.textContent = `--- ${overlay.label} (right axis)`;
      this.legendHost.appendChild(item);
    }

    this.tableHost.innerHTML = "";
    this.tableHost.appendChild(
      buildSeriesTable(doc, trends.months, trends.labels, trends.values),
    );

    this.correlationHost.innerHTML = "";
    this.correlationHost.appendChild(this.correlationTable(doc, correlations));
  }

  private correlationTable(
    doc: Document,
    correlations: CorrelationEntry[],
  ): HTMLTableElement {
    const table = doc.createElement("table");
    table.className = "correlation-table";
    const head = table.createTHead().insertRow();
    for (const caption of ["model group", "lexicon topic", "pearson r"]) {
      head.insertCell().textContent = caption;
    }
    const body = table.createTBody();
    for (const entry of correlations) {
      const row = body.insertRow();
      row.insertCell().textContent = entry.lda_group;
      row.insertCell().textContent = entry.lexicon_topic;
      const cell = row.insertCell();
      if (entry.r !== undefined) {
        cell.textContent = String(entry.r);
      } else {
        cell.textContent = entry.error ?? "unavailable";
        cell.classList.add("correlation-error");
      }
    }
    return table;
  }
}
