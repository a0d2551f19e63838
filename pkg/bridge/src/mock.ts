#!/usr/bin/env node
/**
 * Transcript replayer: serves a recorded wire session back verbatim.
 * Each incoming request must match the next recorded request when both
 * are compared as parsed JSON (so key order and number formatting are
 * free to differ); the recorded reply bytes are then emitted unchanged.
 * A request that does not match gets an error reply and the cursor
 * stays put. Useful for byte-level conformance checks and for driving
 * clients without training anything.
 */

import { readFileSync } from "node:fs";
import { createInterface } from "node:readline";
import process from "node:process";
import { pathToFileURL } from "node:url";

import { canonicalLine, errorReply } from "./wire.js";

export interface Exchange {
  request: string;
  reply: string;
}

export interface Transcript {
  buckets: number;
  exchanges: Exchange[];
}

export function deepEqual(a: unknown, b: unknown): boolean {
  if (a === b) {
    return true;
  }
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((item, i) => deepEqual(item, b[i]));
  }
  if (
    a === null ||
    b === null ||
    typeof a !== "object" ||
    typeof b !== "object" ||
    Array.isArray(a) ||
    Array.isArray(b)
  ) {
    return false;
  }
  const left = a as Record<string, unknown>;
  const right = b as Record<string, unknown>;
  const leftKeys = Object.keys(left).sort();
  const rightKeys = Object.keys(right).sort();
  if (
    leftKeys.length !== rightKeys.length ||
    leftKeys.some((k, i) => k !== rightKeys[i])
  ) {
    return false;
  }
  return leftKeys.every((k) => deepEqual(left[k], right[k]));
}

export function loadTranscript(path: string): Transcript {
  const parsed = JSON.parse(readFileSync(path, "utf-8")) as Transcript;
  if (!Array.isArray(parsed.exchanges)) {
    throw new Error(`${path} is not a transcript: no exchanges array`);
  }
  for (const [i, exchange] of parsed.exchanges.entries()) {
    if (typeof exchange.request !== "string" || typeof exchange.reply !== "string") {
      throw new Error(`${path} is not a transcript: exchange ${i} malformed`);
    }
  }
  return parsed;
}

/** Stateful matcher over one recorded session. */
export class Replayer {
  private readonly expected: { parsed: unknown; exchange: Exchange }[];
  private cursor = 0;

  constructor(transcript: Transcript) {
    this.expected = transcript.exchanges.map((exchange) => ({
      parsed: JSON.parse(exchange.request),
      exchange,
    }));
  }

  /** Reply line for one request line, plus whether to keep serving. */
  handleLine(line: string): [reply: string, keepGoing: boolean] {
    if (this.cursor >= this.expected.length) {
      return [
        canonicalLine(errorReply("transcript exhausted: no recorded exchanges left")),
        true,
      ];
    }
    let incoming: unknown;
    try {
      incoming = JSON.parse(line);
    } catch {
      return [
        canonicalLine(
          errorReply(`exchange ${this.cursor}: request is not valid JSON`),
        ),
        true,
      ];
    }
    const { parsed, exchange } = this.expected[this.cursor];
    if (!deepEqual(incoming, parsed)) {
      return [
        canonicalLine(
          errorReply(
            `exchange ${this.cursor}: request does not match the recorded session`,
          ),
        ),
        true,
      ];
    }
    this.cursor += 1;
    const op = (parsed as Record<string, unknown>).op;
    return [exchange.reply, op !== "shutdown"];
  }
}

export async function main(argv: string[]): Promise<number> {
  let transcriptPath: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    let flag = argv[i];
    let value: string | undefined;
    const eq = flag.indexOf("=");
    if (eq >= 0) {
      value = flag.slice(eq + 1);
      flag = flag.slice(0, eq);
    }
    if (flag !== "--transcript") {
      process.stderr.write(`unknown flag '${flag}'\n`);
      return 2;
    }
    if (value === undefined) {
      i += 1;
      value = argv[i];
    }
    if (value === undefined) {
      process.stderr.write("--transcript needs a path\n");
      return 2;
    }
    transcriptPath = value;
  }
  if (transcriptPath === undefined) {
    process.stderr.write("usage: entailkit-bridge-mock --transcript <path>\n");
    return 2;
  }
  let replayer: Replayer;
  try {
    replayer = new Replayer(loadTranscript(transcriptPath));
  } catch (exc) {
    process.stderr.write(`${(exc as Error).message}\n`);
    return 2;
  }
  const lines = createInterface({ input: process.stdin, crlfDelay: Infinity });
  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    const [reply, keepGoing] = replayer.handleLine(line);
    process.stdout.write(reply);
    if (!keepGoing) {
      break;
    }
  }
  lines.close();
  return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  main(process.argv.slice(2)).then(
    (code) => {
      process.exitCode = code;
      process.stdin.destroy();
    },
    (exc) => {
      console.error(exc);
      process.exitCode = 1;
      process.stdin.destroy();
    },
  );
}
