/**
 * Inference page: prompt-based / template-based modes, placeholder
 * validation before any network call, sampling controls, a streaming
 * response pane, and sweep submission.
 */

import { ApiClient, ApiError, EndpointPayload, SamplingPayload, TemplatePayload } from "./api.js";
import { renderTemplate, TemplateIssue, unresolvedPlaceholders } from "./template.js";

export class InferencePage {
  doc: Document;
  root: HTMLElement;
  mode: "prompt_based" | "template_based" = "template_based";
  record: Record<string, unknown> = {};
  datasetId: string | null = null;

  private status!: HTMLElement;
  private preview!: HTMLElement;
  private response!: HTMLElement;
  private validation!: HTMLElement;
  private streaming = false;

  constructor(
    private api: ApiClient,
    container: HTMLElement,
  ) {
    this.doc = container.ownerDocument;
    this.root = container;
    this.build();
  }

  private build(): void {
    this.root.innerHTML = `
      <div class="controls">
        <div class="control-row">
          <label><input type="radio" name="mode" id="mode-template" checked /> Templates-based</label>
          <label><input type="radio" name="mode" id="mode-prompt" /> Prompt-based</label>
          <input id="endpoint-url" placeholder="endpoint base url, e.g. http://localhost:8000/v1" />
          <input id="endpoint-model" placeholder="model name" />
        </div>
        <div class="control-row">
          <textarea id="template-text" rows="5"
            placeholder="Problem: {question}; Solution:"></textarea>
        </div>
        <div class="control-row">
          <input id="record-json" placeholder='record JSON, e.g. {"question": "2+2?"}' />
          <input id="question-dataset" placeholder="or: dataset path for questions" />
          <input id="question-row" type="number" value="0" min="0" style="width:5em" />
          <button id="pick-btn" type="button">Pick record</button>
        </div>
        <div class="control-row params">
          <label>temperature <input id="p-temperature" type="number" step="0.05" value="0.7" /></label>
          <label>top_p <input id="p-top-p" type="number" step="0.05" value="0.95" /></label>
          <label>seed <input id="p-seed" type="number" placeholder="none" /></label>
          <label>max_tokens <input id="p-max-tokens" type="number" value="1024" /></label>
          <label>stop <input id="p-stop" placeholder="comma-separated" /></label>
        </div>
        <div class="control-row">
          <button id="preview-btn" type="button">Preview</button>
          <button id="send-btn" type="button">Send</button>
          <button id="cancel-btn" type="button" disabled>Cancel</button>
          <input id="sweep-seeds" placeholder="sweep seeds, e.g. 0..4" />
          <input id="sweep-out" placeholder="output dir" value="sweeps/run1" />
          <button id="sweep-btn" type="button">Send to sweep</button>
        </div>
      </div>
      <div id="inference-status" class="status"></div>
      <div id="validation" class="validation"></div>
      <h3>Prompt preview</h3>
      <pre id="preview" class="preview"></pre>
      <h3>Response</h3>
      <pre id="response" class="response"></pre>
      <div id="jobs" class="jobs"></div>`;

    this.status = this.query("#inference-status");
    this.preview = this.query("#preview");
    this.response = this.query("#response");
    this.validation = this.query("#validation");

    this.query<HTMLInputElement>("#mode-template").addEventListener("change", () => {
      this.mode = "template_based";
      this.validate();
    });
    this.query<HTMLInputElement>("#mode-prompt").addEventListener("change", () => {
      this.mode = "prompt_based";
      this.validate();
    });
    this.query<HTMLTextAreaElement>("#template-text").addEventListener("input", () => {
      this.validate();
    });
    this.query<HTMLInputElement>("#record-json").addEventListener("input", () => {
      this.readInlineRecord();
      this.validate();
    });
    this.query<HTMLButtonElement>("#pick-btn").addEventListener("click", () => {
      void this.pickRecord();
    });
    this.query<HTMLButtonElement>("#preview-btn").addEventListener("click", () => {
      this.showPreview();
    });
    this.query<HTMLButtonElement>("#send-btn").addEventListener("click", () => {
      void this.send();
    });
    this.query<HTMLButtonElement>("#cancel-btn").addEventListener("click", () => {
      this.streaming = false;
    });
    this.query<HTMLButtonElement>("#sweep-btn").addEventListener("click", () => {
      void this.sendToSweep();
    });
  }

  query<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
  }

  setStatus(text: string, isError = false): void {
    this.status.textContent = text;
    this.status.className = isError ? "status error" : "status";
  }

  private readInlineRecord(): void {
    const raw = this.query<HTMLInputElement>("#record-json").value.trim();
    if (!raw) return;
    try {
      const parsed = JSON.parse(raw);
      if (parsed && typeof parsed === "object") this.record = parsed;
    } catch {
      /* keep previous record until the JSON parses */
    }
  }

  async pickRecord(path?: string, row?: number): Promise<void> {
    const datasetPath = path ?? this.query<HTMLInputElement>("#question-dataset").value;
    const rowIndex = row ?? Number(this.query<HTMLInputElement>("#question-row").value);
    if (!datasetPath) return;
    try {
      if (this.datasetId === null) {
        const ds = await this.api.registerDataset(datasetPath);
        this.datasetId = ds.id;
      }
      const rows = await this.api.datasetRows(this.datasetId, {
        page: rowIndex + 1,
        pageSize: 1,
      });
      this.record = rows.rows[0].record;
      this.query<HTMLInputElement>("#record-json").value = JSON.stringify(this.record);
      this.validate();
      this.setStatus(`picked row ${rowIndex}`);
    } catch (error) {
      if (error instanceof ApiError) this.setStatus(`${error.code}: ${error.message}`, true);
      else throw error;
    }
  }

  templateText(): string {
    return this.query<HTMLTextAreaElement>("#template-text").value;
  }

  /** Client-side placeholder validation; highlights before any network call. */
  validate(): string[] {
    this.validation.innerHTML = "";
    if (this.mode === "prompt_based") return [];
    try {
      const missing = unresolvedPlaceholders(this.templateText(), this.record);
      for (const name of missing) {
        const chip = this.doc.createElement("span");
        chip.className = "missing-placeholder";
        chip.textContent = `{${name}}`;
        this.validation.append(chip);
      }
      if (missing.length) {
        this.validation.prepend(this.doc.createTextNode("unresolved: "));
      }
      return missing;
    } catch (error) {
      if (error instanceof TemplateIssue) {
        this.validation.textContent = error.message;
        this.validation.className = "validation error";
        return ["<syntax>"];
      }
      throw error;
    }
  }

  /** The exact prompt that Send would transmit (client-rendered). */
  builtPrompt(): string {
    if (this.mode === "prompt_based") return this.templateText();
    return renderTemplate(this.templateText(), this.record);
  }

  showPreview(): string | null {
    const missing = this.validate();
    if (missing.length) {
      this.setStatus("fix unresolved placeholders before sending", true);
      return null;
    }
    const prompt = this.builtPrompt();
    this.preview.textContent = prompt;
    return prompt;
  }

  params(): Partial<SamplingPayload> {
    const seedRaw = this.query<HTMLInputElement>("#p-seed").value;
    const stopRaw = this.query<HTMLInputElement>("#p-stop").value;
    return {
      temperature: Number(this.query<HTMLInputElement>("#p-temperature").value),
      top_p: Number(this.query<HTMLInputElement>("#p-top-p").value),
      seed: seedRaw === "" ? null : Number(seedRaw),
      max_tokens: Number(this.query<HTMLInputElement>("#p-max-tokens").value),
      stop: stopRaw ? stopRaw.split(",").map((s) => s.trim()).filter(Boolean) : [],
    };
  }

  endpoint(): EndpointPayload | undefined {
    const url = this.query<HTMLInputElement>("#endpoint-url").value.trim();
    const model = this.query<HTMLInputElement>("#endpoint-model").value.trim();
    if (!url || !model) return undefined;
    return { base_url: url, model };
  }

  async send(): Promise<string | null> {
    const prompt = this.showPreview();
    if (prompt === null) return null;
    this.response.textContent = "";
    this.streaming = true;
    this.query<HTMLButtonElement>("#cancel-btn").disabled = false;
    let collected = "";
    try {
      for await (const chunk of this.api.completeStream({
        prompt,
        params: this.params(),
        endpoint: this.endpoint(),
      })) {
        if (!this.streaming) break;
        collected += chunk;
        this.response.textContent = collected;
      }
      this.setStatus("completed");
      return collected;
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(`${error.code}: ${error.message} (retry?)`, true);
        return null;
      }
      throw error;
    } finally {
      this.streaming = false;
      this.query<HTMLButtonElement>("#cancel-btn").disabled = true;
    }
  }

  templatePayload(): TemplatePayload {
    return { mode: this.mode, text: this.templateText(), few_shot: null };
  }

  async sendToSweep(): Promise<string | null> {
    const seedsRaw = this.query<HTMLInputElement>("#sweep-seeds").value.trim();
    const outDir = this.query<HTMLInputElement>("#sweep-out").value.trim();
    if (!seedsRaw || !outDir) {
      this.setStatus("sweep needs seeds and an output dir", true);
      return null;
    }
    const seeds = seedsRaw.includes("..")
      ? (() => {
          const [lo, hi] = seedsRaw.split("..").map(Number);
          return Array.from({ length: hi - lo + 1 }, (_, i) => lo + i);
        })()
      : seedsRaw.split(",").map((s) => Number(s.trim()));
    try {
      const job = await this.api.createJob({
        template: this.templatePayload(),
        params: this.params(),
        seeds,
        dataset_id: this.datasetId ?? undefined,
        questions: this.datasetId ? undefined : [this.record],
        out_dir: outDir,
        endpoint: this.endpoint(),
      });
      this.setStatus(`sweep ${job.job_id}: ${job.status}`);
      this.query("#jobs").textContent = JSON.stringify(job);
      return job.job_id;
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(`${error.code}: ${error.message}`, true);
        return null;
      }
      throw error;
    }
  }
}
