// @vitest-environment jsdom
/**
 * End-to-end: the real HTTP service plus a mock OpenAI endpoint, driven
 * through the actual page objects mounted in jsdom.
 */

import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnalyzePage } from "../src/analyze.js";
import { ApiClient } from "../src/api.js";
import { InferencePage } from "../src/inference.js";
import { renderTemplate } from "../src/template.js";
import {
  CUBIC_PROBLEM,
  LiveServer,
  MockOpenAI,
  startGenlensServer,
  startMockOpenAI,
  VIETA_FACTS,
  writeJsonl,
} from "./helpers.js";

let server: LiveServer;
let mock: MockOpenAI;
let api: ApiClient;

const flush = () => new Promise((resolve) => setTimeout(resolve, 50));

beforeAll(async () => {
  server = await startGenlensServer();
  mock = await startMockOpenAI();
  api = new ApiClient(server.base);
  writeJsonl(join(server.dataRoot, "samples.jsonl"), [
    {
      question: CUBIC_PROBLEM,
      expected_answer: "11/3",
      generation: "The model fails to recall Vieta's formula here.",
    },
    { question: "Plain question?", expected_answer: 4, generation: "It is 4." },
  ]);
}, 60_000);

afterAll(async () => {
  server?.stop();
  await mock?.close();
});

describe("analyze page", () => {
  it("adds a label that lands in GET /overlay", async () => {
    const container = document.createElement("div");
    document.body.append(container);
    const page = new AnalyzePage(api, container);
    await page.registerDataset("samples.jsonl");
    await page.showDetail(0);

    const input = page.query<HTMLInputElement>("#label-input");
    input.value = "bad quality";
    page.query<HTMLButtonElement>("#label-add").click();
    await flush();
    await flush();

    const overlay = await api.overlay(page.datasetId!);
    const labelEntries = overlay.entries.filter((e) => e.op === "label");
    expect(labelEntries).toHaveLength(1);
    expect(labelEntries[0].row_index).toBe(0);
    expect(labelEntries[0].value).toEqual({ label: "bad quality", mode: "add" });

    await page.showDetail(0);
    const chip = container.querySelector(".chip");
    expect(chip?.textContent).toContain("bad quality");
    container.remove();
  });

  it("renders the cubic-equation sample as math with the source intact", async () => {
    const container = document.createElement("div");
    document.body.append(container);
    const page = new AnalyzePage(api, container);
    await page.registerDataset("samples.jsonl");
    await page.showDetail(0);

    const rendered = container.querySelector(".field-rendered") as HTMLElement;
    expect(rendered.innerHTML).toContain("katex");
    const source = container.querySelector(".field-source") as HTMLElement;
    expect(source.textContent).toBe(CUBIC_PROBLEM);
    (container.querySelector(".source-toggle") as HTMLButtonElement).click();
    expect(source.style.display).toBe("");
    container.remove();
  });

  it("shows comparison diffs and agreement flags", async () => {
    writeJsonl(join(server.dataRoot, "cmp_a.jsonl"), [
      {
        question: "numerical substitution",
        expected_answer: 90,
        predicted_answer: "71",
        generation: "Ali has 21 + 50 = 71.",
      },
    ]);
    writeJsonl(join(server.dataRoot, "cmp_b.jsonl"), [
      {
        question: "original",
        expected_answer: 71,
        predicted_answer: "71",
        generation: "Ali has  21 + 50 = 71.",
      },
    ]);
    const container = document.createElement("div");
    document.body.append(container);
    const page = new AnalyzePage(api, container);
    const row = await page.showComparison("cmp_a.jsonl", "cmp_b.jsonl", 0);
    expect(row?.flags.suspect).toBe(true);
    expect(container.querySelector(".flags")?.textContent).toContain("SUSPECT");
    container.remove();
  });
});

describe("inference page", () => {
  it("template preview matches the server render byte-for-byte", async () => {
    const cases: [string, Record<string, unknown>][] = [
      ["Problem: {question}; Solution: {solution}", { question: CUBIC_PROBLEM, solution: "11/3" }],
      ["{{keep}} {a} / {b}", { a: 71, b: 2.5 }],
      ["unicode {s}", { s: "π — résumé" }],
      ["json {obj}", { obj: { k: [1, "two"] } }],
    ];
    for (const [text, record] of cases) {
      const local = renderTemplate(text, record);
      const remote = await api.renderTemplate(
        { mode: "template_based", text, few_shot: null },
        record,
      );
      expect(local).toBe(remote.prompt);
    }
  });

  it("few-shot preview matches the server render", async () => {
    const fewShot = {
      example_template: "Problem: {question}; Solution: {solution}",
      examples: [
        { question: "1+1?", solution: 2 },
        { question: "2+2?", solution: 4 },
      ],
      separator: "\n\n",
    };
    const text = "Problem: {question}; Solution:";
    const record = { question: "3+3?" };
    const local = renderTemplate(text, record, fewShot);
    const remote = await api.renderTemplate(
      { mode: "template_based", text, few_shot: fewShot },
      record,
    );
    expect(local).toBe(remote.prompt);
  });

  it("flags unresolved placeholders before any network call", async () => {
    const container = document.createElement("div");
    document.body.append(container);
    const page = new InferencePage(api, container);
    page.query<HTMLTextAreaElement>("#template-text").value = "{missing} placeholder";
    const requestsBefore = mock.requests.length;

    const missing = page.validate();
    expect(missing).toEqual(["missing"]);
    expect(container.querySelector(".missing-placeholder")?.textContent).toBe("{missing}");

    const sent = await page.send();
    expect(sent).toBeNull();
    expect(mock.requests.length).toBe(requestsBefore);
    container.remove();
  });

  it("completes the prompt-edit-resend loop against the mock endpoint", async () => {
    const container = document.createElement("div");
    document.body.append(container);
    const page = new InferencePage(api, container);

    page.query<HTMLInputElement>("#mode-prompt").checked = true;
    page.query<HTMLInputElement>("#mode-prompt").dispatchEvent(new Event("change"));
    page.query<HTMLInputElement>("#endpoint-url").value = `http://127.0.0.1:${mock.port}/v1`;
    page.query<HTMLInputElement>("#endpoint-model").value = "mock-model";

    // first attempt: the bare problem
    page.query<HTMLTextAreaElement>("#template-text").value = CUBIC_PROBLEM;
    const first = await page.send();
    expect(first).toBe(CUBIC_PROBLEM);

    // edit the prompt: prepend the missing fact, resend
    const enriched = `${VIETA_FACTS}\n\n${CUBIC_PROBLEM}`;
    page.query<HTMLTextAreaElement>("#template-text").value = enriched;
    const second = await page.send();
    expect(second).toBe(enriched);
    expect(page.query("#response").textContent).toBe(enriched);

    // the mock saw both prompts verbatim, facts included
    const contents = mock.requests.map(
      (r) => (r as { messages: { content: string }[] }).messages[0].content,
    );
    expect(contents).toContain(CUBIC_PROBLEM);
    expect(contents).toContain(enriched);
    const bodies = mock.requests as { temperature: number; top_p: number }[];
    expect(bodies.at(-1)?.temperature).toBe(0.7);
    expect(bodies.at(-1)?.top_p).toBe(0.95);
    container.remove();
  });

  it("submits a sweep job that produces aligned outputs", async () => {
    writeJsonl(join(server.dataRoot, "sweep_questions.jsonl"), [
      { question: "q0" },
      { question: "q1" },
    ]);
    const ds = await api.registerDataset("sweep_questions.jsonl");
    const job = await api.createJob({
      template: { mode: "template_based", text: "Solve: {question}", few_shot: null },
      seeds: [0, 1, 2],
      dataset_id: ds.id,
      out_dir: "ui_sweep",
      endpoint: { base_url: `http://127.0.0.1:${mock.port}/v1`, model: "mock-model" },
    });
    const deadline = Date.now() + 30_000;
    let status = await api.pollJob(job.job_id);
    while (status.status !== "done" && status.status !== "failed") {
      if (Date.now() > deadline) throw new Error("sweep timed out");
      await new Promise((resolve) => setTimeout(resolve, 100));
      status = await api.pollJob(job.job_id);
    }
    expect(status.status).toBe("done");
    expect(status.outputs).toHaveLength(3);

    const seedFiles = status.outputs.map((p) => p.split("/").pop());
    const ids: string[] = [];
    for (const name of seedFiles) {
      const registered = await api.registerDataset(`ui_sweep/${name}`);
      expect(registered.rows).toBe(2);
      ids.push(registered.id);
    }
    const group = await api.createGroup(ids, "question");
    expect(group.question_count).toBe(2);
  });

  it("reload reproduces the same view from server state alone", async () => {
    const containerA = document.createElement("div");
    document.body.append(containerA);
    const pageA = new AnalyzePage(api, containerA);
    await pageA.registerDataset("samples.jsonl");
    await pageA.showDetail(0);
    const labelsA = containerA.querySelector(".label-box")?.textContent;
    containerA.remove(); // reload: the old page is gone

    // a fresh mount with no shared state sees the same data
    const containerB = document.createElement("div");
    document.body.append(containerB);
    const pageB = new AnalyzePage(api, containerB);
    await pageB.registerDataset("samples.jsonl");
    await pageB.showDetail(0);
    const labelsB = containerB.querySelector(".label-box")?.textContent;
    expect(labelsB).toBe(labelsA);
    containerB.remove();
  });
});
