/** Minimal chat-completions client with per-request timeout and
 * transport-level retries (exponential backoff). */

import type { AdapterConfig } from "./config.js";

export interface ChatMessage {
  role: "system" | "user" | "assistant";
  content: string;
}

export class EndpointError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "EndpointError";
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class ChatClient {
  constructor(private readonly config: AdapterConfig) {}

  /** One completion; retries transport failures, never inspects the text. */
  async complete(messages: ChatMessage[]): Promise<string> {
    let lastError: Error = new EndpointError("no attempt made");
    for (let attempt = 0; attempt <= this.config.maxRetries; attempt++) {
      if (attempt > 0) {
        await sleep(this.config.retryDelayMs * 2 ** (attempt - 1));
      }
      try {
        return await this.request(messages);
      } catch (error) {
        lastError = error instanceof Error ? error : new EndpointError(String(error));
      }
    }
    throw lastError;
  }

  private async request(messages: ChatMessage[]): Promise<string> {
    const url = `${this.config.endpoint.replace(/\/$/, "")}/chat/completions`;
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.config.apiKey) {
      headers.Authorization = `Bearer ${this.config.apiKey}`;
    }
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), this.config.timeoutMs);
    let response: Response;
    try {
      response = await fetch(url, {
        method: "POST",
        headers,
        signal: controller.signal,
        body: JSON.stringify({
          model: this.config.model,
          messages,
          temperature: this.config.temperature,
          top_p: this.config.topP,
        }),
      });
    } catch (error) {
      throw new EndpointError(`endpoint unreachable: ${(error as Error).message}`);
    } finally {
      clearTimeout(timer);
    }
    if (!response.ok) {
      throw new EndpointError(`endpoint returned HTTP ${response.status}`, response.status);
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch {
      throw new EndpointError("endpoint returned invalid JSON");
    }
    const content = (payload as any)?.choices?.[0]?.message?.content;
    if (typeof content !== "string") {
      throw new EndpointError("completion payload has no message content");
    }
    return content;
  }
}
