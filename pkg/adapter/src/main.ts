#!/usr/bin/env node
/** Entry point: serve the line protocol on stdio against the endpoint
 * named by CUBEKIT_ENDPOINT. */

import { configFromEnv } from "./config.js";
import { serve } from "./serve.js";

async function main(): Promise<void> {
  const config = configFromEnv();
  await serve(config, { input: process.stdin, output: process.stdout });
}

main().catch((error) => {
  process.stderr.write(`cubekit-adapter: ${(error as Error).message}\n`);
  process.exit(1);
});
