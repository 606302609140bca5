import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";
import { AddressInfo } from "node:net";

import type { AdapterConfig } from "../src/config.js";

export interface CapturedRequest {
  url: string;
  body: any;
}

export interface MockEndpoint {
  server: Server;
  url: string;
  captured: CapturedRequest[];
  close(): Promise<void>;
}

/** OpenAI-compatible chat endpoint stub; `respond` decides each reply. */
export async function startMockEndpoint(
  respond: (body: any, res: ServerResponse) => void,
): Promise<MockEndpoint> {
  const captured: CapturedRequest[] = [];
  const server = createServer((req: IncomingMessage, res: ServerResponse) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => {
      const body = JSON.parse(Buffer.concat(chunks).toString("utf8"));
      captured.push({ url: req.url ?? "", body });
      respond(body, res);
    });
  });
  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const { port } = server.address() as AddressInfo;
  return {
    server,
    url: `http://127.0.0.1:${port}/v1`,
    captured,
    close: () => new Promise((resolve) => server.close(() => resolve())),
  };
}

export function completionReply(res: ServerResponse, content: string): void {
  res.writeHead(200, { "Content-Type": "application/json" });
  res.end(JSON.stringify({ choices: [{ message: { role: "assistant", content } }] }));
}

export function errorReply(res: ServerResponse, status = 500): void {
  res.writeHead(status, { "Content-Type": "application/json" });
  res.end(JSON.stringify({ error: "boom" }));
}

export function testConfig(endpoint: string, overrides: Partial<AdapterConfig> = {}): AdapterConfig {
  return {
    endpoint,
    model: "test-model",
    temperature: 0.7,
    topP: 0.95,
    timeoutMs: 2_000,
    maxRetries: 0,
    retryDelayMs: 10,
    ...overrides,
  };
}

export const VALID_ANSWER = "<reasoning>mock</reasoning>\n<answer>\n(1, -1)\n</answer>";
export const TINY_DIMACS = "p cnf 2 2\n1 2 0\n-1 2 0\n";
