/** End-to-end: the Python toolkit drives the built adapter over stdio while
 * the adapter talks to a scripted chat endpoint. The bench process must run
 * asynchronously so the in-process mock endpoint can keep serving. */

import { spawn } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterEach, describe, expect, it } from "vitest";

import {
  completionReply,
  errorReply,
  MockEndpoint,
  startMockEndpoint,
  TINY_DIMACS,
  VALID_ANSWER,
} from "./helpers.js";

const ADAPTER_DIR = resolve(__dirname, "..");
const ADAPTER_CMD = `node ${join(ADAPTER_DIR, "dist", "main.js")}`;

let endpoint: MockEndpoint | undefined;

afterEach(async () => {
  await endpoint?.close();
  endpoint = undefined;
});

interface BenchRun {
  status: number | null;
  records: any[];
  stderr: string;
}

async function runBench(endpointUrl: string): Promise<BenchRun> {
  const dir = mkdtempSync(join(tmpdir(), "cubekit-e2e-"));
  const cnf = join(dir, "tiny.cnf");
  writeFileSync(cnf, TINY_DIMACS);
  const manifest = join(dir, "manifest.tsv");
  writeFileSync(manifest, `${cnf}\tSAT\n`);
  const out = join(dir, "runs.jsonl");

  const child = spawn(
    "python3",
    [
      "-m", "cubekit", "bench", manifest,
      "--out", out,
      "--runs", "1",
      "--workers", "1",
      "--deterministic",
      "--rollout-conflicts", "2000",
      "--heuristic", "external",
      "--external-cmd", ADAPTER_CMD,
    ],
    {
      cwd: ADAPTER_DIR,
      env: {
        ...process.env,
        CUBEKIT_ENDPOINT: endpointUrl,
        CUBEKIT_MAX_RETRIES: "0",
        CUBEKIT_TIMEOUT_MS: "5000",
      },
    },
  );
  let stderr = "";
  child.stderr.on("data", (chunk) => (stderr += chunk.toString()));
  const status = await new Promise<number | null>((resolveExit) => {
    child.on("close", (code) => resolveExit(code));
  });
  const records = readFileSync(out, "utf8")
    .trim()
    .split("\n")
    .filter(Boolean)
    .map((line) => JSON.parse(line));
  return { status, records, stderr };
}

describe("end-to-end bench through the adapter", () => {
  it("solves a tiny benchmark when the endpoint answers well", async () => {
    endpoint = await startMockEndpoint((_, res) => completionReply(res, VALID_ANSWER));
    const run = await runBench(endpoint.url);
    expect(run.status).toBe(0);
    expect(run.records).toHaveLength(1);
    expect(run.records[0].solved).toBe(true);
    expect(run.records[0].aborted_nodes).toBe(0);
    expect(run.records[0].first_cube_variable).toBe(1);
    expect(endpoint.captured.length).toBeGreaterThan(0);
  }, 60_000);

  it("ten endpoint failures abandon the node, not the run", async () => {
    endpoint = await startMockEndpoint((_, res) => errorReply(res, 500));
    const run = await runBench(endpoint.url);
    expect(run.status).toBe(0); // abort, never crash
    expect(run.records).toHaveLength(1);
    expect(run.records[0].solved).toBe(false);
    expect(run.records[0].status).toBe("UNKNOWN");
    expect(run.records[0].aborted_nodes).toBeGreaterThan(0);
    // the toolkit retried its full attempt budget against the dead endpoint
    expect(endpoint.captured.length).toBe(10);
  }, 60_000);
});
