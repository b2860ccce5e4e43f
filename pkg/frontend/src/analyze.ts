/**
 * Analyze page: sample browsing with filter/sort, labeling, notes,
 * manual edits, per-question stats, and side-by-side comparison.
 *
 * The page holds no data of its own: every refresh re-reads server
 * state, so reloading reproduces the same view.
 */

import { ApiClient, ApiError, ComparisonRow, RowOut, StatReport } from "./api.js";
import { renderDiff } from "./diffview.js";
import { buildFieldView, fieldText } from "./render.js";

export class AnalyzePage {
  doc: Document;
  root: HTMLElement;
  datasetId: string | null = null;
  groupId: string | null = null;
  comparisonId: string | null = null;
  page = 1;
  pageSize = 20;
  total = 0;
  statSort: string | null = null;

  private rowsBody!: HTMLElement;
  private detail!: HTMLElement;
  private statsPane!: HTMLElement;
  private comparePane!: HTMLElement;
  private status!: HTMLElement;

  constructor(
    private api: ApiClient,
    container: HTMLElement,
  ) {
    this.doc = container.ownerDocument;
    this.root = container;
    this.build();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    cls?: string,
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (cls) node.className = cls;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private build(): void {
    this.root.innerHTML = "";
    const controls = this.el("div", "controls");
    controls.innerHTML = `
      <div class="control-row">
        <input id="dataset-path" placeholder="dataset path (inside data root)" />
        <button id="register-btn" type="button">Load dataset</button>
        <input id="group-paths" placeholder="run files, comma-separated (optional)" />
        <button id="group-btn" type="button">Load run group</button>
      </div>
      <div class="control-row">
        <input id="filter-input" placeholder='filter, e.g. count(question, "?") >= 2' />
        <input id="sort-input" placeholder="sort, e.g. stat.persistence:desc" />
        <button id="apply-btn" type="button">Apply</button>
        <button id="prev-btn" type="button">&laquo;</button>
        <span id="page-label"></span>
        <button id="next-btn" type="button">&raquo;</button>
      </div>`;
    this.status = this.el("div", "status");
    this.rowsBody = this.el("div", "rows");
    this.detail = this.el("div", "detail");
    this.statsPane = this.el("div", "stats-pane");
    this.comparePane = this.el("div", "compare-pane");

    const main = this.el("div", "analyze-main");
    main.append(this.rowsBody, this.detail);
    this.root.append(controls, this.status, main, this.statsPane, this.comparePane);

    this.query<HTMLButtonElement>("#register-btn").addEventListener("click", () => {
      void this.registerDataset();
    });
    this.query<HTMLButtonElement>("#group-btn").addEventListener("click", () => {
      void this.registerGroup();
    });
    this.query<HTMLButtonElement>("#apply-btn").addEventListener("click", () => {
      this.page = 1;
      void this.refreshRows();
    });
    this.query<HTMLButtonElement>("#prev-btn").addEventListener("click", () => {
      if (this.page > 1) {
        this.page -= 1;
        void this.refreshRows();
      }
    });
    this.query<HTMLButtonElement>("#next-btn").addEventListener("click", () => {
      if (this.page * this.pageSize < this.total) {
        this.page += 1;
        void this.refreshRows();
      }
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

  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      return await work();
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(`${error.code}: ${error.message}`, true);
        return undefined;
      }
      throw error;
    }
  }

  async registerDataset(path?: string): Promise<void> {
    const input = this.query<HTMLInputElement>("#dataset-path");
    const raw = path ?? input.value;
    await this.guard(async () => {
      const body = await this.api.registerDataset(raw);
      this.datasetId = body.id;
      this.total = body.rows;
      this.page = 1;
      this.setStatus(`dataset ${body.id}: ${body.rows} rows`);
      await this.refreshRows();
    });
  }

  async registerGroup(paths?: string[]): Promise<void> {
    const input = this.query<HTMLInputElement>("#group-paths");
    const list = paths ?? input.value.split(",").map((p) => p.trim()).filter(Boolean);
    if (!list.length) return;
    await this.guard(async () => {
      const ids: string[] = [];
      for (const p of list) {
        const ds = await this.api.registerDataset(p);
        ids.push(ds.id);
      }
      if (this.datasetId === null) this.datasetId = ids[0];
      const group = await this.api.createGroup(ids);
      this.groupId = group.id;
      this.setStatus(`group ${group.id}: ${group.question_count} questions`);
      await this.refreshStats();
      await this.refreshRows();
    });
  }

  async refreshRows(): Promise<void> {
    if (!this.datasetId) return;
    const filter = this.query<HTMLInputElement>("#filter-input").value || undefined;
    const sort = this.query<HTMLInputElement>("#sort-input").value || undefined;
    await this.guard(async () => {
      const body = await this.api.datasetRows(this.datasetId!, {
        filter,
        sort,
        page: this.page,
        pageSize: this.pageSize,
        groupId: this.groupId ?? undefined,
      });
      this.total = body.total;
      this.query("#page-label").textContent =
        `page ${body.page} / ${Math.max(1, Math.ceil(body.total / body.page_size))} (${body.total} rows)`;
      this.renderRows(body.rows);
    });
  }

  private renderRows(rows: RowOut[]): void {
    this.rowsBody.innerHTML = "";
    const table = this.el("table", "row-table");
    const head = this.el("tr");
    head.append(this.el("th", "", "#"), this.el("th", "", "sample"), this.el("th", "", "labels"));
    table.append(head);
    for (const row of rows) {
      const tr = this.el("tr", "row-line");
      tr.dataset.rowIndex = String(row.row_index);
      const preview = fieldText(
        row.record.question ?? row.record.generation ?? Object.values(row.record)[0] ?? "",
      ).slice(0, 120);
      const labels = Array.isArray(row.record._labels) ? (row.record._labels as string[]) : [];
      tr.append(
        this.el("td", "", String(row.row_index)),
        this.el("td", "", preview),
        this.el("td", "row-labels", labels.join(", ")),
      );
      tr.addEventListener("click", () => {
        void this.showDetail(row.row_index);
      });
      table.append(tr);
    }
    this.rowsBody.append(table);
  }

  async showDetail(rowIndex: number): Promise<void> {
    if (!this.datasetId) return;
    await this.guard(async () => {
      const body = await this.api.datasetRows(this.datasetId!, {
        filter: undefined,
        page: rowIndex + 1,
        pageSize: 1,
      });
      const row = body.rows[0];
      this.renderDetail(row);
    });
  }

  private renderDetail(row: RowOut): void {
    this.detail.innerHTML = "";
    this.detail.append(this.el("h3", "", `sample ${row.row_index}`));

    for (const [key, value] of Object.entries(row.record)) {
      if (key === "_labels" || key === "_notes") continue;
      this.detail.append(buildFieldView(this.doc, key, fieldText(value)));
    }

    const labels = Array.isArray(row.record._labels) ? (row.record._labels as string[]) : [];
    const labelBox = this.el("div", "label-box");
    labelBox.append(this.el("span", "field-name", "labels"));
    for (const label of labels) {
      const chip = this.el("span", "chip", label);
      const remove = this.el("button", "chip-remove", "x");
      remove.type = "button";
      remove.addEventListener("click", () => {
        void this.changeLabel(row.row_index, label, "remove");
      });
      chip.append(remove);
      labelBox.append(chip);
    }
    const labelInput = this.el("input", "label-input") as HTMLInputElement;
    labelInput.placeholder = "add label";
    labelInput.id = "label-input";
    const labelButton = this.el("button", "", "label");
    labelButton.id = "label-add";
    labelButton.type = "button";
    labelButton.addEventListener("click", () => {
      if (labelInput.value.trim()) {
        void this.changeLabel(row.row_index, labelInput.value.trim(), "add");
      }
    });
    labelBox.append(labelInput, labelButton);
    this.detail.append(labelBox);

    const notes = Array.isArray(row.record._notes) ? (row.record._notes as string[]) : [];
    const noteBox = this.el("div", "note-box");
    noteBox.append(this.el("span", "field-name", "notes"));
    for (const note of notes) noteBox.append(this.el("div", "note", note));
    const noteInput = this.el("input", "note-input") as HTMLInputElement;
    noteInput.placeholder = "add note";
    noteInput.id = "note-input";
    const noteButton = this.el("button", "", "note");
    noteButton.id = "note-add";
    noteButton.type = "button";
    noteButton.addEventListener("click", () => {
      if (noteInput.value.trim()) {
        void this.addNote(row.row_index, noteInput.value.trim());
      }
    });
    noteBox.append(noteInput, noteButton);
    this.detail.append(noteBox);

    const editBox = this.el("div", "edit-box");
    editBox.append(this.el("span", "field-name", "edit field"));
    const fieldInput = this.el("input") as HTMLInputElement;
    fieldInput.placeholder = "field";
    fieldInput.id = "edit-field";
    const valueInput = this.el("input") as HTMLInputElement;
    valueInput.placeholder = "new value (JSON or text)";
    valueInput.id = "edit-value";
    const editButton = this.el("button", "", "save");
    editButton.id = "edit-save";
    editButton.type = "button";
    editButton.addEventListener("click", () => {
      void this.saveField(row.row_index, fieldInput.value, valueInput.value);
    });
    editBox.append(fieldInput, valueInput, editButton);
    this.detail.append(editBox);
  }

  async changeLabel(rowIndex: number, label: string, mode: "add" | "remove"): Promise<void> {
    if (!this.datasetId) return;
    await this.guard(async () => {
      await this.api.setLabels(this.datasetId!, [label], mode, [rowIndex]);
      this.setStatus(`label ${mode}: ${label}`);
      await this.refreshRows();
      await this.showDetail(rowIndex);
    });
  }

  async addNote(rowIndex: number, note: string): Promise<void> {
    if (!this.datasetId) return;
    await this.guard(async () => {
      await this.api.addNote(this.datasetId!, rowIndex, note);
      this.setStatus("note added");
      await this.showDetail(rowIndex);
    });
  }

  async saveField(rowIndex: number, field: string, rawValue: string): Promise<void> {
    if (!this.datasetId || !field) return;
    let value: unknown = rawValue;
    try {
      value = JSON.parse(rawValue);
    } catch {
      /* plain string */
    }
    await this.guard(async () => {
      await this.api.setField(this.datasetId!, rowIndex, field, value);
      this.setStatus(`field ${field} updated`);
      await this.showDetail(rowIndex);
    });
  }

  /** Stats dashboard: per-question table, header click sorts via the API. */
  async refreshStats(): Promise<void> {
    if (!this.groupId) return;
    await this.guard(async () => {
      const { reports } = await this.api.groupStats(this.groupId!);
      let order: number[] | null = null;
      if (this.statSort) {
        const sorted = await this.api.groupRows(this.groupId!, {
          sort: this.statSort,
          pageSize: 1000,
        });
        order = sorted.rows.map((r) => r.row_index);
      }
      this.renderStats(reports, order);
    });
  }

  private renderStats(reports: Record<string, StatReport>, order: number[] | null): void {
    this.statsPane.innerHTML = "";
    this.statsPane.append(this.el("h3", "", "per-question statistics"));
    const names = Object.keys(reports);
    if (!names.length) return;
    const table = this.el("table", "stats-table");
    const head = this.el("tr");
    head.append(this.el("th", "", "question"));
    for (const name of names) {
      const th = this.el("th", "stat-col", name);
      th.dataset.stat = name;
      th.addEventListener("click", () => {
        this.statSort =
          this.statSort === `stat.${name}:desc` ? `stat.${name}:asc` : `stat.${name}:desc`;
        void this.refreshStats();
      });
      head.append(th);
    }
    table.append(head);
    const count = reports[names[0]].per_question.length;
    const rows = order ?? Array.from({ length: count }, (_, i) => i);
    for (const q of rows) {
      const tr = this.el("tr");
      tr.append(this.el("td", "", String(q)));
      for (const name of names) {
        const value = reports[name].per_question[q];
        tr.append(
          this.el(
            "td",
            "",
            typeof value === "number" ? (Number.isInteger(value) ? String(value) : value.toFixed(3)) : String(value ?? "-"),
          ),
        );
      }
      table.append(tr);
    }
    const aggregate = this.el("tr", "aggregate-row");
    aggregate.append(this.el("td", "", "mean"));
    for (const name of names) {
      const agg = reports[name].aggregate;
      aggregate.append(this.el("td", "", agg === null ? "-" : agg.toFixed(4)));
    }
    table.append(aggregate);
    this.statsPane.append(table);
  }

  async showComparison(runA: string, runB: string, row: number): Promise<ComparisonRow | undefined> {
    return this.guard(async () => {
      const a = await this.api.registerDataset(runA);
      const b = await this.api.registerDataset(runB);
      const cmp = await this.api.createComparison({
        runs: [
          { name: "a", dataset_id: a.id },
          { name: "b", dataset_id: b.id },
        ],
      });
      this.comparisonId = cmp.id;
      const data = await this.api.comparisonRow(cmp.id, row);
      this.renderComparison(data);
      return data;
    });
  }

  private renderComparison(data: ComparisonRow): void {
    this.comparePane.innerHTML = "";
    this.comparePane.append(this.el("h3", "", `comparison row ${data.row}`));
    const flags = this.el("div", "flags");
    flags.textContent =
      `same_generation: ${data.flags.same_generation}; ` +
      `disagreeing_correctness: ${data.flags.disagreeing_correctness}` +
      (data.flags.suspect ? "; SUSPECT (likely wrong expected answer)" : "");
    this.comparePane.append(flags);
    const grid = this.el("div", "compare-grid");
    for (const run of data.runs) {
      const col = this.el("div", "compare-col");
      col.append(this.el("h4", "", run.run));
      for (const [field, spans] of Object.entries(run.diffs)) {
        col.append(this.el("div", "field-name", field));
        col.append(renderDiff(this.doc, spans));
      }
      if (!Object.keys(run.diffs).length) {
        const gen = run.record.generation;
        col.append(this.el("pre", "field-source", fieldText(gen ?? run.record)));
      }
      grid.append(col);
    }
    this.comparePane.append(grid);
  }
}
