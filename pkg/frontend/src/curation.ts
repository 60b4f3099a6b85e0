// Curation workspace: rename topics, regroup them, tune the include and
// exclude token lists, read review samples, and kick off retrains.

import { ApiClient, ApiError } from "./api.js";
import { pollJob, type JobPoller } from "./poll.js";
import type {
  FeatureLists,
  FeatureUpdate,
  JobPayload,
  SamplesPayload,
  TopicsPayload,
} from "./types.js";

export class CurationView {
  selectedTopic = 0;
  seed = 1;
  /** latest in-flight refresh; awaited by tests */
  pending: Promise<void> = Promise.resolve();

  private topics: TopicsPayload | null = null;
  private features: FeatureLists = { include_tokens: [], exclude_tokens: [] };
  private poller: JobPoller | null = null;

  private readonly banner: HTMLElement;
  private readonly notice: HTMLElement;
  private readonly lineage: HTMLElement;
  private readonly topicsHost: HTMLElement;
  private readonly includeEditor: HTMLElement;
  private readonly excludeEditor: HTMLElement;
  private readonly featureError: HTMLElement;
  private readonly samplesHost: HTMLElement;
  private readonly seedInput: HTMLInputElement;
  private readonly retrainButton: HTMLButtonElement;
  private readonly jobStatus: HTMLElement;

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

    this.notice = doc.createElement("div");
    this.notice.className = "notice";
    this.notice.hidden = true;
    root.appendChild(this.notice);

    this.lineage = doc.createElement("p");
    this.lineage.className = "lineage";
    root.appendChild(this.lineage);

    const retrainRow = doc.createElement("div");
    retrainRow.className = "controls";
    this.retrainButton = doc.createElement("button");
    this.retrainButton.id = "retrain-btn";
    this.retrainButton.textContent = "Retrain model";
    this.retrainButton.addEventListener("click", () => {
      this.pending = this.retrain();
    });
    retrainRow.appendChild(this.retrainButton);
    this.jobStatus = doc.createElement("span");
    this.jobStatus.id = "job-status";
    retrainRow.appendChild(this.jobStatus);
    root.appendChild(retrainRow);

    const topicsCaption = doc.createElement("h3");
    topicsCaption.textContent = "Topics";
    root.appendChild(topicsCaption);
    this.topicsHost = doc.createElement("div");
    this.topicsHost.className = "table-host";
    root.appendChild(this.topicsHost);

    const featuresCaption = doc.createElement("h3");
    featuresCaption.textContent = "Vocabulary overrides";
    root.appendChild(featuresCaption);
    this.featureError = doc.createElement("div");
    this.featureError.className = "field-error";
    this.featureError.hidden = true;
    root.appendChild(this.featureError);
    const editors = doc.createElement("div");
    editors.className = "feature-editors";
    this.includeEditor = doc.createElement("div");
    this.includeEditor.className = "token-editor include-editor";
    this.excludeEditor = doc.createElement("div");
    this.excludeEditor.className = "token-editor exclude-editor";
    editors.appendChild(this.includeEditor);
    editors.appendChild(this.excludeEditor);
    root.appendChild(editors);

    const samplesCaption = doc.createElement("h3");
    samplesCaption.textContent = "Review samples";
    root.appendChild(samplesCaption);
    const seedRow = doc.createElement("div");
    seedRow.className = "controls";
    const seedLabel = doc.createElement("label");
    seedLabel.append("sample seed ");
    this.seedInput = doc.createElement("input");
    this.seedInput.type = "number";
    this.seedInput.id = "seed-input";
    this.seedInput.value = String(this.seed);
    this.seedInput.addEventListener("change", () => {
      const parsed = Number.parseInt(this.seedInput.value, 10);
      if (Number.isFinite(parsed)) {
        this.seed = parsed;
        this.pending = this.loadSamples();
      }
    });
    seedLabel.appendChild(this.seedInput);
    seedRow.appendChild(seedLabel);
    root.appendChild(seedRow);
    this.samplesHost = doc.createElement("div");
    this.samplesHost.id = "samples-host";
    root.appendChild(this.samplesHost);
  }

  async load(): Promise<void> {
    this.banner.hidden = true;
    try {
      const snap = await this.api.snapshot();
      this.lineage.textContent =
        snap.parent_snapshot_id === null
          ? `snapshot ${snap.snapshot_id} (no parent)`
          : `snapshot ${snap.snapshot_id} (parent ${snap.parent_snapshot_id})`;
      this.topics = await this.api.topics();
      this.features = await this.api.features();
      if (!this.topics.topics.some((t) => t.topic === this.selectedTopic)) {
        this.selectedTopic = this.topics.topics[0]?.topic ?? 0;
      }
    } catch (err) {
      this.showError(err);
      return;
    }
    this.renderTopics();
    this.renderFeatures();
    await this.loadSamples();
  }

  private showError(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.banner.textContent = `failed to load curation data: ${message}`;
    this.banner.hidden = false;
    this.topicsHost.innerHTML = "";
    this.samplesHost.innerHTML = "";
  }

  private showNotice(text: string): void {
    this.notice.textContent = text;
    this.notice.hidden = false;
  }

  private renderTopics(): void {
    if (this.topics === null) return;
    const doc = this.topicsHost.ownerDocument;
    this.topicsHost.innerHTML = "";
    const table = doc.createElement("table");
    table.className = "topics-table";
    const head = table.createTHead().insertRow();
    for (const caption of ["topic", "name", "group", "top terms", ""]) {
      head.insertCell().textContent = caption;
    }
    const body = table.createTBody();
    for (const entry of this.topics.topics) {
      const row = body.insertRow();
      row.className = "topic-row";
      row.dataset.topic = String(entry.topic);

      row.insertCell().textContent = String(entry.topic);

      const nameCell = row.insertCell();
      const nameInput = doc.createElement("input");
      nameInput.className = "rename-input";
      nameInput.value = entry.name ?? "";
      nameInput.placeholder = "(unnamed)";
      nameInput.addEventListener("change", () => {
        this.pending = this.rename(entry.topic, nameInput.value);
      });
      nameCell.appendChild(nameInput);

      const groupCell = row.insertCell();
      const groupSelect = doc.createElement("select");
      groupSelect.className = "group-select";
      this.topics.groups.forEach((group, idx) => {
        const option = doc.createElement("option");
        option.value = String(idx);
        option.textContent = group;
        option.selected = idx === entry.group_index;
        groupSelect.appendChild(option);
      });
      groupSelect.addEventListener("change", () => {
        this.pending = this.regroup(entry.topic, Number(groupSelect.value));
      });
      groupCell.appendChild(groupSelect);

      const termsCell = row.insertCell();
      termsCell.className = "top-terms";
      termsCell.textContent = entry.top_terms.map((t) => t.term).join(", ");

      const actionCell = row.insertCell();
      const button = doc.createElement("button");
      button.className = "samples-btn";
      button.textContent = "samples";
      button.addEventListener("click", () => {
        this.selectedTopic = entry.topic;
        this.pending = this.loadSamples();
      });
      actionCell.appendChild(button);
    }
    this.topicsHost.appendChild(table);
  }

  private async rename(topic: number, name: string): Promise<void> {
    try {
      await this.api.renameTopic(topic, name);
      this.topics = await this.api.topics();
      this.renderTopics();
    } catch (err) {
      this.showNotice(
        `rename failed: ${err instanceof Error ? err.message : String(err)}`,
      );
    }
  }

  private async regroup(topic: number, groupIndex: number): Promise<void> {
    if (this.topics === null) return;
    const assignment: Record<string, number> = {};
    for (const entry of this.topics.topics) {
      assignment[String(entry.topic)] =
        entry.topic === topic ? groupIndex : entry.group_index;
    }
    try {
      await this.api.setGroups({ groups: [...this.topics.groups], assignment });
      this.topics = await this.api.topics();
      this.renderTopics();
    } catch (err) {
      this.showNotice(
        `group update failed: ${err instanceof Error ? err.message : String(err)}`,
      );
      this.renderTopics();
    }
  }

  private renderFeatures(): void {
    this.renderTokenEditor(this.includeEditor, "include", "Always keep");
    this.renderTokenEditor(this.excludeEditor, "exclude", "Always drop");
  }

  private renderTokenEditor(
    host: HTMLElement,
    kind: "include" | "exclude",
    caption: string,
  ): void {
    const doc = host.ownerDocument;
    const tokens =
      kind === "include"
        ? this.features.include_tokens
        : this.features.exclude_tokens;
    host.innerHTML = "";
    const title = doc.createElement("h4");
    title.textContent = caption;
    host.appendChild(title);
    const list = doc.createElement("ul");
    list.className = "token-list";
    for (const token of tokens) {
      const item = doc.createElement("li");
      item.className = "token-chip";
      item.append(token + " ");
      const remove = doc.createElement("button");
      remove.className = "token-remove";
      remove.textContent = "x";
      remove.addEventListener("click", () => {
        this.pending = this.updateTokens({ remove: [token] });
      });
      item.appendChild(remove);
      list.appendChild(item);
    }
    host.appendChild(list);
    const input = doc.createElement("input");
    input.className = "token-input";
    input.placeholder = "token";
    const add = doc.createElement("button");
    add.className = "token-add";
    add.textContent = "add";
    add.addEventListener("click", () => {
      const value = input.value.trim();
      if (value === "") return;
      this.pending = this.updateTokens(
        kind === "include" ? { add_include: [value] } : { add_exclude: [value] },
      );
    });
    host.appendChild(input);
    host.appendChild(add);
  }

  private async updateTokens(update: FeatureUpdate): Promise<void> {
    try {
      this.features = await this.api.updateFeatures(update);
      this.featureError.hidden = true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        // leave the stored lists untouched; the server rejected the edit
        this.featureError.textContent = err.message;
        this.featureError.hidden = false;
      } else {
        this.showNotice(
          `vocabulary update failed: ${err instanceof Error ? err.message : String(err)}`,
        );
      }
    }
    this.renderFeatures();
  }

  private async loadSamples(): Promise<void> {
    const doc = this.samplesHost.ownerDocument;
    let payload: SamplesPayload;
    try {
      payload = await this.api.samples(this.selectedTopic, this.seed);
    } catch (err) {
      this.samplesHost.textContent = `samples unavailable: ${
        err instanceof Error ? err.message : String(err)
      }`;
      return;
    }
    this.samplesHost.innerHTML = "";
    const heading = doc.createElement("p");
    heading.textContent = `topic ${payload.topic}, seed ${payload.seed}`;
    if (payload.flagged) {
      heading.textContent += " (model predates current document subset)";
    }
    this.samplesHost.appendChild(heading);
    const list = doc.createElement("ol");
    list.className = "sample-list";
    for (const sample of payload.samples) {
      const item = doc.createElement("li");
      item.className = "sample";
      const meta = doc.createElement("p");
      meta.className = "sample-meta";
      meta.textContent = `${sample.selection} | ${sample.month} | weight ${sample.theta_value}`;
      const text = doc.createElement("blockquote");
      text.className = "sample-text";
      text.textContent = sample.text ?? "(text unavailable)";
      item.appendChild(meta);
      item.appendChild(text);
      list.appendChild(item);
    }
    this.samplesHost.appendChild(list);
  }

  private setJobStatus(job: JobPayload): void {
    let text = `job ${job.job_id}: ${job.state}`;
    if (job.state === "Failed" && job.error) text += ` (${job.error})`;
    this.jobStatus.textContent = text;
  }

  private async retrain(): Promise<void> {
    this.notice.hidden = true;
    let jobId: string;
    try {
      const accepted = await this.api.retrain();
      jobId = accepted.job_id;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // another retrain is already in flight; keep the page usable
        this.showNotice(err.message);
      } else {
        this.showNotice(
          `retrain failed to start: ${err instanceof Error ? err.message : String(err)}`,
        );
      }
      return;
    }

    this.retrainButton.disabled = true;
    this.jobStatus.textContent = `job ${jobId}: Queued`;
    this.poller = pollJob(this.api, jobId, (job) => this.setJobStatus(job));
    try {
      const finished = await this.poller.done;
      if (finished.state === "Done") {
        await this.load();
      } else {
        this.showNotice(`retrain failed: ${finished.error ?? "unknown error"}`);
      }
    } catch (err) {
      this.showNotice(
        `lost track of retrain job: ${err instanceof Error ? err.message : String(err)}`,
      );
    } finally {
      this.retrainButton.disabled = false;
      this.poller = null;
    }
  }
}
