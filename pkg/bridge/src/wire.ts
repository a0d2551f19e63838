/**
 * Line protocol shared with the Python toolkit: one JSON object per
 * line in each direction. Requests carry an `op` field; replies are
 * `{ok: true, payload}` on success and `{ok: false, error}` on
 * failure, always in request order.
 */

export const OPS = [
  "train",
  "continue_train",
  "score",
  "save",
  "load",
  "shutdown",
] as const;

export type Op = (typeof OPS)[number];

export class WireError extends Error {}

export interface OkReply {
  ok: true;
  payload: unknown;
}

export interface ErrorReply {
  ok: false;
  error: string;
}

export type Reply = OkReply | ErrorReply;

/** Canonical reply line: sorted keys, tight separators, trailing newline. */
export function canonicalLine(value: unknown): string {
  return `${stringifySorted(value)}\n`;
}

function stringifySorted(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(stringifySorted).join(",")}]`;
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${stringifySorted(v)}`);
  return `{${entries.join(",")}}`;
}

export function okReply(payload: unknown): OkReply {
  return { ok: true, payload };
}

export function errorReply(message: string): ErrorReply {
  return { ok: false, error: message };
}

/** Values quoted the way the reference server quotes them in errors. */
function reprify(value: unknown): string {
  if (typeof value === "string") return `'${value}'`;
  if (value === undefined) return "null";
  return JSON.stringify(value);
}

export function parseRequest(line: string): Record<string, unknown> {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (exc) {
    throw new WireError(`invalid JSON request (${(exc as Error).message})`);
  }
  if (parsed === null || typeof parsed !== "object" || Array.isArray(parsed)) {
    throw new WireError("request must be a JSON object");
  }
  const obj = parsed as Record<string, unknown>;
  const op = obj.op;
  if (typeof op !== "string" || !(OPS as readonly string[]).includes(op)) {
    throw new WireError(
      `unknown op ${reprify(op)} (known: [${OPS.map((o) => `'${o}'`).join(", ")}])`,
    );
  }
  return obj;
}

export function requireField<T>(
  obj: Record<string, unknown>,
  field: string,
  kind: "str" | "int" | "list",
): T {
  if (!(field in obj)) {
    throw new WireError(`op ${reprify(obj.op)} requires field '${field}'`);
  }
  const value = obj[field];
  const bad = () => new WireError(`field '${field}' must be ${kind}`);
  if (kind === "list") {
    if (!Array.isArray(value)) throw bad();
  } else if (kind === "int") {
    if (typeof value !== "number" || !Number.isInteger(value)) throw bad();
  } else if (typeof value !== "string") {
    throw bad();
  }
  return value as T;
}
