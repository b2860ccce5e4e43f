/** Shared e2e plumbing: a live genlens server and a mock OpenAI endpoint. */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import http from "node:http";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

export async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

export interface MockOpenAI {
  port: number;
  requests: Record<string, unknown>[];
  close: () => Promise<void>;
}

/** Minimal OpenAI-compatible echo server (SSE when stream=true). */
export async function startMockOpenAI(): Promise<MockOpenAI> {
  const port = await freePort();
  const requests: Record<string, unknown>[] = [];
  const server = http.createServer((req, res) => {
    if (req.method !== "POST" || req.url !== "/v1/chat/completions") {
      res.writeHead(404).end();
      return;
    }
    let raw = "";
    req.on("data", (chunk) => (raw += chunk));
    req.on("end", () => {
      const body = JSON.parse(raw);
      requests.push(body);
      const messages: { role: string; content: string }[] = body.messages ?? [];
      const content = [...messages].reverse().find((m) => m.role === "user")?.content ?? "";
      if (body.stream) {
        res.writeHead(200, { "Content-Type": "text/event-stream" });
        const words: string[] = content.split(" ");
        words.forEach((word, i) => {
          const piece = i === words.length - 1 ? word : word + " ";
          res.write(`data: ${JSON.stringify({ choices: [{ index: 0, delta: { content: piece } }] })}\n\n`);
        });
        res.write("data: [DONE]\n\n");
        res.end();
      } else {
        res.writeHead(200, { "Content-Type": "application/json" });
        res.end(
          JSON.stringify({
            choices: [{ index: 0, message: { role: "assistant", content }, finish_reason: "stop" }],
            usage: null,
          }),
        );
      }
    });
  });
  await new Promise<void>((resolve) => server.listen(port, "127.0.0.1", resolve));
  return {
    port,
    requests,
    close: () => new Promise((resolve) => server.close(() => resolve())),
  };
}

export interface LiveServer {
  base: string;
  dataRoot: string;
  proc: ChildProcess;
  stop: () => void;
}

export async function startGenlensServer(): Promise<LiveServer> {
  const dataRoot = mkdtempSync(join(tmpdir(), "genlens-e2e-"));
  const port = await freePort();
  const proc = spawn(
    "python3",
    ["-m", "genlens.cli", "serve", "--port", String(port), "--data-root", dataRoot],
    { stdio: "ignore" },
  );
  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("genlens server did not start");
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  return { base, dataRoot, proc, stop: () => proc.kill() };
}

export function writeJsonl(path: string, records: Record<string, unknown>[]): void {
  writeFileSync(path, records.map((r) => JSON.stringify(r)).join("\n") + "\n");
}

export const CUBIC_PROBLEM =
  "Let $a,$ $b,$ $c$ be the roots of $3x^3 - 3x^2 + 11x - 8 = 0.$ Find $ab + ac + bc.$";

export const VIETA_FACTS =
  "You can use the following facts to solve the problem: Vieta's Formula " +
  "for the Cubic Equation: for roots alpha, beta, gamma the sum of products " +
  "of two roots equals a1/a3.";
