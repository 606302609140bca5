/** The request loop: one JSON document per line in, one per line out.
 *
 * Cubing requests carry {id, dimacs, num_vars, num_clauses, attempt} and are
 * answered with {id, raw_text} holding the completion verbatim; reasoning
 * requests use kind="explain" with a cube field. Any failure, including an
 * unreachable endpoint or a malformed request line, produces a protocol-level
 * {id, error} reply; the loop itself never dies on bad input.
 *
 * The adapter is stateless per request and does not parse or validate the
 * model's answer; that stays on the toolkit side so retry accounting is
 * uniform across heuristics.
 */

import { createInterface } from "node:readline";
import type { Readable, Writable } from "node:stream";

import { ChatClient, ChatMessage } from "./client.js";
import type { AdapterConfig } from "./config.js";
import { cubeUserMessage, explainUserMessage, loadPrompts, PromptSet } from "./prompts.js";

interface CubeRequest {
  id: unknown;
  kind?: string;
  dimacs?: unknown;
  cube?: unknown;
}

export interface ServeOptions {
  input: Readable;
  output: Writable;
  client?: ChatClient;
  prompts?: PromptSet;
}

function messagesFor(request: CubeRequest, prompts: PromptSet): ChatMessage[] {
  if (typeof request.dimacs !== "string" || request.dimacs.length === 0) {
    throw new Error("request has no dimacs text");
  }
  if (request.kind === "explain") {
    if (typeof request.cube !== "string") {
      throw new Error("explain request has no cube");
    }
    return [
      { role: "system", content: prompts.reasoning },
      { role: "user", content: explainUserMessage(request.dimacs, request.cube) },
    ];
  }
  return [
    { role: "system", content: prompts.system },
    { role: "user", content: cubeUserMessage(prompts.task, request.dimacs) },
  ];
}

export async function handleLine(
  line: string,
  client: ChatClient,
  prompts: PromptSet,
): Promise<string> {
  let id: unknown = null;
  try {
    const request = JSON.parse(line) as CubeRequest;
    if (request === null || typeof request !== "object") {
      throw new Error("request is not a JSON object");
    }
    id = request.id ?? null;
    const rawText = await client.complete(messagesFor(request, prompts));
    return JSON.stringify({ id, raw_text: rawText });
  } catch (error) {
    return JSON.stringify({ id, error: (error as Error).message });
  }
}

/** Run the loop until the input stream ends. Requests are handled strictly
 * in order: one in-flight completion per connection. */
export async function serve(config: AdapterConfig, options: ServeOptions): Promise<void> {
  const client = options.client ?? new ChatClient(config);
  const prompts = options.prompts ?? loadPrompts(config.promptDir);
  const lines = createInterface({ input: options.input, crlfDelay: Infinity });
  for await (const line of lines) {
    if (!line.trim()) continue;
    const reply = await handleLine(line, client, prompts);
    options.output.write(reply + "\n");
  }
}
