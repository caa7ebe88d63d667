// Client-side structural lint for edited artifacts. This is a cheap
// gate that catches obvious breakage before a request is sent; the
// server remains the authority and may still answer 422.

export interface LintResult {
  ok: boolean;
  message: string;
}

const OK: LintResult = { ok: true, message: "" };

function fail(message: string): LintResult {
  return { ok: false, message };
}

export function lintParens(text: string): LintResult {
  let depth = 0;
  for (const line of text.split("\n")) {
    const code = line.split(";")[0];
    for (const ch of code) {
      if (ch === "(") depth += 1;
      if (ch === ")") depth -= 1;
      if (depth < 0) return fail("unbalanced parentheses: ')' without '('");
    }
  }
  return depth === 0 ? OK : fail("unbalanced parentheses: missing ')'");
}

export function lintPddl(text: string, kind: "domain" | "problem"): LintResult {
  const trimmed = text.trim();
  if (!trimmed.startsWith("(define")) {
    return fail("PDDL must start with '(define'");
  }
  if (!trimmed.includes(`(${kind} `)) {
    return fail(`expected a '(${kind} <name>)' header`);
  }
  return lintParens(trimmed);
}

export function lintTypesBlock(text: string): LintResult {
  const lines = text.split("\n").filter((l) => l.trim());
  if (lines.length === 0) return fail("the type list is empty");
  for (const line of lines) {
    const name = line.split(":")[0].trim();
    if (!/^[a-z][a-z0-9_-]*$/i.test(name)) {
      return fail(`'${name}' is not a valid type name`);
    }
  }
  return OK;
}

export function lintHierarchyBlock(text: string): LintResult {
  const lines = text.split("\n").filter((l) => l.trim());
  if (lines.length === 0) return fail("the hierarchy is empty");
  for (const line of lines) {
    const indent = line.length - line.trimStart().length;
    if (indent % 2 !== 0) {
      return fail("indentation must use two spaces per level");
    }
    const name = line.trim().split(":")[0].trim();
    if (!/^[a-z][a-z0-9_-]*$/i.test(name)) {
      return fail(`'${name}' is not a valid type name`);
    }
  }
  return OK;
}

export function lintActionsBlock(text: string): LintResult {
  const groups = text.split(/\n\s*\n/).filter((g) => g.trim());
  if (groups.length === 0) return fail("no actions listed");
  for (const group of groups) {
    for (const key of ["name:", "description:", "usage:"]) {
      if (!group.includes(key)) {
        return fail(`an action group is missing '${key}'`);
      }
    }
  }
  return OK;
}

export function lintArtifact(step: number, text: string): LintResult {
  switch (step) {
    case 1:
      return lintTypesBlock(text);
    case 2:
      return lintHierarchyBlock(text);
    case 3:
      return lintActionsBlock(text);
    case 4:
      return lintPddl(text, "domain");
    case 5:
      return lintPddl(text, "problem");
    default:
      return fail("the planning step has no editable artifact");
  }
}
