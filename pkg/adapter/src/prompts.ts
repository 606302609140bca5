/** Prompt templates. Embedded copies of the toolkit's shared assets;
 * CUBEKIT_PROMPT_DIR points at the asset files to override them. */

import { readFileSync } from "node:fs";
import { join } from "node:path";

export const SYSTEM_PROMPT = `You are a SAT solving expert focusing on Cube and Conquer algorithm.
You are known to follow unconventional thinking patterns in order to derive
the best cube. Your goal is to suggest the best cube that reduces a given formula
to the easiest subformulas. A cube is a pair of a variable and its negation,
like (v, -v) or (-v, v). You are allowed to respond only in the following format
and do not forget to include all opening and closing XML tags in your response:
<reasoning>
reasoning
</reasoning>
<answer>
answer
</answer>
`;

export const TASK_PROMPT = `Read the DIMACS CNF input. The first line is in the format
'p cnf <num_vars> <num_clauses>'. Each subsequent line represents a clause,
ending with a '0' which marks the end of that clause. Clauses consist of boolean
variables, notated as numbers in the range [-num_vars, num_vars]. The cube you
choose will be used as part of the Cube and Conquer algorithm to reduce the
problem to two subformulas. Your task is to read the CNF input and select the
cube that creates the easiest to solve subformulas. For the reasoning respond
with as few sentences as possible and for the answer respond with exactly one
cube, like (v, -v) or (-v, v).
`;

export const REASONING_PROMPT = `You are a SAT solving expert focusing on Cube and Conquer algorithm. You are to
take a CNF formula and a cube and reason about why the cube is a good cube to
consider. Structure your reasoning output as though you have chosen the cube to
be the best cube for formula simplification. Be thorough in your reasoning and
consider all possible implications of the cube, potentially with specific
examples/explanations/reductions that are impactful.
`;

export interface PromptSet {
  system: string;
  task: string;
  reasoning: string;
}

export function loadPrompts(promptDir?: string): PromptSet {
  if (!promptDir) {
    return { system: SYSTEM_PROMPT, task: TASK_PROMPT, reasoning: REASONING_PROMPT };
  }
  const read = (name: string) => readFileSync(join(promptDir, `${name}.txt`), "utf8");
  return {
    system: read("system_prompt"),
    task: read("task_prompt"),
    reasoning: read("reasoning_prompt"),
  };
}

/** The cubing user message: task text with the DIMACS body appended. */
export function cubeUserMessage(task: string, dimacs: string): string {
  return task.replace(/\n+$/, "") + "\n\n" + dimacs;
}

/** The reasoning-generation user message: formula plus the cube under review. */
export function explainUserMessage(dimacs: string, cube: string): string {
  return `CNF formula:\n${dimacs}\nCube: ${cube}\n`;
}
