/**
 * Typed client for the genlens HTTP API. Every page action goes through
 * one method here; nothing else in the UI talks to the network.
 */

export interface RowOut {
  row_index: number;
  record: Record<string, unknown>;
}

export interface RowsResponse {
  total: number;
  page: number;
  page_size: number;
  rows: RowOut[];
}

export interface StatReport {
  stat: string;
  aggregate: number | null;
  per_question: (number | string | null)[];
  errors?: { question_index: number; message: string }[];
}

export interface DiffSpan {
  kind: "equal" | "insert" | "delete";
  text: string;
}

export interface ComparisonRow {
  row: number;
  runs: {
    run: string;
    row_index: number;
    record: Record<string, unknown>;
    diffs: Record<string, DiffSpan[]>;
  }[];
  flags: {
    same_generation: boolean;
    disagreeing_correctness: boolean;
    suspect: boolean;
  };
}

export interface OverlayEntry {
  file_id: string;
  row_index: number;
  field: string;
  op: string;
  value: unknown;
  timestamp: string;
}

export interface TemplatePayload {
  mode: "prompt_based" | "template_based";
  text: string;
  few_shot?: {
    example_template: string;
    examples: Record<string, unknown>[];
    separator: string;
  } | null;
}

export interface SamplingPayload {
  temperature: number;
  top_p: number;
  seed?: number | null;
  max_tokens: number;
  stop: string[];
}

export interface EndpointPayload {
  base_url: string;
  model: string;
  max_retries?: number;
  backoff_base_s?: number;
}

export interface JobStatus {
  job_id: string;
  status: "pending" | "running" | "done" | "failed";
  seeds: number[];
  question_count: number;
  seed_status: Record<string, string>;
  outputs: string[];
  error: string | null;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "HttpError";
  let message = response.statusText;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? JSON.stringify(body);
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(public base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, { method: "POST", body: JSON.stringify(body) });
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("/health");
  }

  registerDataset(path: string): Promise<{ id: string; rows: number; path: string }> {
    return this.post("/datasets", { path });
  }

  datasetRows(
    id: string,
    opts: { filter?: string; sort?: string; page?: number; pageSize?: number; groupId?: string } = {},
  ): Promise<RowsResponse> {
    const params = new URLSearchParams();
    if (opts.filter) params.set("filter", opts.filter);
    if (opts.sort) params.set("sort", opts.sort);
    if (opts.page) params.set("page", String(opts.page));
    if (opts.pageSize) params.set("page_size", String(opts.pageSize));
    if (opts.groupId) params.set("group_id", opts.groupId);
    const query = params.toString();
    return this.request(`/datasets/${id}/rows${query ? "?" + query : ""}`);
  }

  createGroup(datasetIds: string[], alignmentKey?: string): Promise<{ id: string; question_count: number }> {
    return this.post("/groups", { dataset_ids: datasetIds, alignment_key: alignmentKey ?? null });
  }

  groupRows(
    id: string,
    opts: { filter?: string; sort?: string; page?: number; pageSize?: number } = {},
  ): Promise<RowsResponse> {
    const params = new URLSearchParams();
    if (opts.filter) params.set("filter", opts.filter);
    if (opts.sort) params.set("sort", opts.sort);
    if (opts.page) params.set("page", String(opts.page));
    if (opts.pageSize) params.set("page_size", String(opts.pageSize));
    const query = params.toString();
    return this.request(`/groups/${id}/rows${query ? "?" + query : ""}`);
  }

  groupStats(id: string, names?: string[]): Promise<{ reports: Record<string, StatReport> }> {
    const query = names?.length ? `?names=${encodeURIComponent(names.join(","))}` : "";
    return this.request(`/groups/${id}/stats${query}`);
  }

  createScript(source: string): Promise<{ id: string; exports: string[] }> {
    return this.post("/scripts", { source });
  }

  customStat(groupId: string, scriptId: string, exportName: string, name?: string): Promise<StatReport> {
    return this.post(`/groups/${groupId}/custom-stats`, {
      script_id: scriptId,
      export: exportName,
      name: name ?? null,
    });
  }

  batchEdit(
    datasetId: string,
    body: { field: string; find: string; replace: string; filter?: string; row_indices?: number[] },
  ): Promise<{ changed: number; warnings: number }> {
    return this.post(`/datasets/${datasetId}/edits`, body);
  }

  setLabels(
    datasetId: string,
    labels: string[],
    mode: "add" | "remove",
    rowIndices: number[],
  ): Promise<{ count: number }> {
    return this.post(`/datasets/${datasetId}/labels`, {
      labels,
      mode,
      row_indices: rowIndices,
    });
  }

  addNote(datasetId: string, rowIndex: number, note: string): Promise<{ entry: OverlayEntry }> {
    return this.post(`/datasets/${datasetId}/notes`, { row_index: rowIndex, note });
  }

  setField(
    datasetId: string,
    rowIndex: number,
    field: string,
    value: unknown,
    del = false,
  ): Promise<{ entry: OverlayEntry }> {
    return this.post(`/datasets/${datasetId}/fields`, {
      row_index: rowIndex,
      field,
      value,
      delete: del,
    });
  }

  overlay(datasetId: string): Promise<{ entries: OverlayEntry[] }> {
    return this.request(`/datasets/${datasetId}/overlay`);
  }

  createComparison(body: {
    runs: { name: string; dataset_id: string }[];
    pairing_key?: string;
    expected_field?: string;
  }): Promise<{ id: string; rows: number }> {
    return this.post("/comparisons", body);
  }

  comparisonRow(id: string, row: number): Promise<ComparisonRow> {
    return this.request(`/comparisons/${id}/rows/${row}`);
  }

  renderTemplate(template: TemplatePayload, record: Record<string, unknown>): Promise<{ prompt: string }> {
    return this.post("/inference/render", { template, record });
  }

  complete(body: {
    prompt?: string;
    params?: Partial<SamplingPayload>;
    endpoint?: EndpointPayload;
  }): Promise<{ text: string; finish_reason: string | null; attempts: number }> {
    return this.post("/inference/complete", body);
  }

  /** Streaming completion; yields text chunks as the server sends them. */
  async *completeStream(body: {
    prompt?: string;
    params?: Partial<SamplingPayload>;
    endpoint?: EndpointPayload;
  }): AsyncGenerator<string> {
    const response = await fetch(this.base + "/inference/complete", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ...body, stream: true }),
    });
    if (!response.ok || response.body === null) throw await parseError(response);
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        const piece = decoder.decode(value, { stream: true });
        if (piece) yield piece;
      }
    } finally {
      reader.releaseLock();
    }
  }

  createJob(body: {
    template: TemplatePayload;
    params?: Partial<SamplingPayload>;
    seeds: number[];
    dataset_id?: string;
    questions?: Record<string, unknown>[];
    out_dir: string;
    endpoint?: EndpointPayload;
  }): Promise<JobStatus> {
    return this.post("/inference/jobs", body);
  }

  pollJob(jobId: string): Promise<JobStatus> {
    return this.request(`/inference/jobs/${jobId}`);
  }

  exportView(body: {
    dataset_id: string;
    dest: string;
    mode: "raw" | "resolved";
    filter?: string;
    sort?: string;
  }): Promise<{ written: number; dest: string }> {
    return this.post("/export", body);
  }
}
