/** Adapter configuration, resolved from the environment. */

export interface AdapterConfig {
  /** Base URL of the OpenAI-compatible API, e.g. http://127.0.0.1:8000/v1 */
  endpoint: string;
  model: string;
  temperature: number;
  topP: number;
  apiKey?: string;
  /** Per-request timeout in milliseconds. */
  timeoutMs: number;
  /** Transport-level retries on top of the toolkit's own attempt loop. */
  maxRetries: number;
  /** Base backoff delay between transport retries. */
  retryDelayMs: number;
  /** Optional directory holding system_prompt.txt / task_prompt.txt /
   * reasoning_prompt.txt overrides (shared with the toolkit's assets). */
  promptDir?: string;
}

function numberFrom(name: string, fallback: number): number {
  const raw = process.env[name];
  if (raw === undefined || raw === "") return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`${name} must be a number, got ${JSON.stringify(raw)}`);
  }
  return value;
}

export function configFromEnv(env = process.env): AdapterConfig {
  const endpoint = env.CUBEKIT_ENDPOINT;
  if (!endpoint) {
    throw new Error("CUBEKIT_ENDPOINT is required (OpenAI-compatible base URL)");
  }
  const timeoutMs = numberFrom("CUBEKIT_TIMEOUT_MS", 120_000);
  if (timeoutMs <= 0) throw new Error("CUBEKIT_TIMEOUT_MS must be positive");
  return {
    endpoint,
    model: env.CUBEKIT_MODEL ?? "default",
    temperature: numberFrom("CUBEKIT_TEMPERATURE", 0.7),
    topP: numberFrom("CUBEKIT_TOP_P", 0.95),
    apiKey: env.CUBEKIT_API_KEY,
    timeoutMs,
    maxRetries: numberFrom("CUBEKIT_MAX_RETRIES", 2),
    retryDelayMs: numberFrom("CUBEKIT_RETRY_DELAY_MS", 500),
    promptDir: env.CUBEKIT_PROMPT_DIR,
  };
}
