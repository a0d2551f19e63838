#!/usr/bin/env node
/**
 * Scoring server speaking the line protocol over stdio: one JSON
 * request per line in, one JSON reply per line out, in request order.
 * A bad request gets an error reply; the process only exits on a
 * shutdown op or end of input.
 */

import { createInterface } from "node:readline";
import process from "node:process";
import { pathToFileURL } from "node:url";

import { ModelStore } from "./backend.js";
import { parseInstanceList } from "./instances.js";
import { defaultConfig, hyperparamsFromObj, ModelConfig } from "./model.js";
import {
  canonicalLine,
  errorReply,
  okReply,
  parseRequest,
  Reply,
  requireField,
  WireError,
} from "./wire.js";

function intFlag(flag: string, raw: string): number {
  const value = Number(raw);
  if (!Number.isInteger(value)) {
    throw new Error(`${flag} needs an integer, got '${raw}'`);
  }
  return value;
}

function floatFlag(flag: string, raw: string): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new Error(`${flag} needs a number, got '${raw}'`);
  }
  return value;
}

export function parseArgs(argv: string[]): ModelConfig {
  const config = defaultConfig();
  const setters: Record<string, (raw: string) => void> = {
    "--buckets": (raw) => {
      config.nBuckets = intFlag("--buckets", raw);
    },
    "--lr-scale": (raw) => {
      config.lrScale = floatFlag("--lr-scale", raw);
    },
    "--epoch-scale": (raw) => {
      config.epochScale = intFlag("--epoch-scale", raw);
    },
    "--cross-weight": (raw) => {
      config.crossWeight = floatFlag("--cross-weight", raw);
    },
  };
  for (let i = 0; i < argv.length; i++) {
    let flag = argv[i];
    let value: string | undefined;
    const eq = flag.indexOf("=");
    if (eq >= 0) {
      value = flag.slice(eq + 1);
      flag = flag.slice(0, eq);
    }
    const setter = setters[flag];
    if (!setter) {
      throw new Error(`unknown flag '${flag}'`);
    }
    if (value === undefined) {
      i += 1;
      value = argv[i];
      if (value === undefined) {
        throw new Error(`${flag} needs a value`);
      }
    }
    setter(value);
  }
  if (config.nBuckets < 2) {
    throw new Error("--buckets must be at least 2");
  }
  return config;
}

function parsePairs(obj: Record<string, unknown>): [string, string][] {
  const raw = requireField<unknown[]>(obj, "pairs", "list");
  return raw.map((item, i) => {
    if (
      !Array.isArray(item) ||
      item.length !== 2 ||
      typeof item[0] !== "string" ||
      typeof item[1] !== "string"
    ) {
      throw new WireError(`pairs[${i}] must be a [premise, hypothesis] string pair`);
    }
    return [item[0], item[1]];
  });
}

export class WireServer {
  readonly store: ModelStore;

  constructor(config: ModelConfig) {
    this.store = new ModelStore(config);
  }

  handle(obj: Record<string, unknown>): Reply {
    const op = obj.op as string;
    if (op === "shutdown") {
      return okReply({});
    }
    if (op === "train" || op === "continue_train") {
      const instances = parseInstanceList(
        requireField<unknown[]>(obj, "instances", "list"),
      );
      const headSize = requireField<number>(obj, "head_size", "int");
      const seed = requireField<number>(obj, "seed", "int");
      const hp = hyperparamsFromObj(obj.hyperparams);
      const modelId =
        op === "train"
          ? this.store.train(instances, headSize, seed, hp)
          : this.store.continueTrain(
              requireField<string>(obj, "model_id", "str"),
              instances,
              headSize,
              seed,
              hp,
            );
      return okReply({
        model_id: modelId,
        effective_hyperparams: this.store.effectiveHyperparams(modelId),
        n_instances: instances.length,
      });
    }
    if (op === "score") {
      const modelId = requireField<string>(obj, "model_id", "str");
      return okReply({ probs: this.store.score(modelId, parsePairs(obj)) });
    }
    if (op === "save") {
      const modelId = requireField<string>(obj, "model_id", "str");
      const path = requireField<string>(obj, "path", "str");
      this.store.save(modelId, path);
      return okReply({ path });
    }
    if (op === "load") {
      const path = requireField<string>(obj, "path", "str");
      return okReply({ model_id: this.store.load(path) });
    }
    throw new WireError(`unhandled op '${op}'`);
  }

  /** Reply line for one request line, plus whether to keep serving. */
  handleLine(line: string): [reply: string, keepGoing: boolean] {
    try {
      const obj = parseRequest(line);
      const reply = this.handle(obj);
      return [canonicalLine(reply), obj.op !== "shutdown"];
    } catch (exc) {
      // A request must never kill the server.
      if (exc instanceof WireError) {
        return [canonicalLine(errorReply(exc.message)), true];
      }
      const message =
        exc instanceof Error
          ? `${exc.constructor.name}: ${exc.message}`
          : String(exc);
      return [canonicalLine(errorReply(message)), true];
    }
  }
}

export async function main(argv: string[]): Promise<number> {
  let config: ModelConfig;
  try {
    config = parseArgs(argv);
  } catch (exc) {
    process.stderr.write(`${(exc as Error).message}\n`);
    return 2;
  }
  const server = new WireServer(config);
  const lines = createInterface({ input: process.stdin, crlfDelay: Infinity });
  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    const [reply, keepGoing] = server.handleLine(line);
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
      process.stdin.destroy(); // let stdout drain, then exit naturally
    },
    (exc) => {
      console.error(exc);
      process.exitCode = 1;
      process.stdin.destroy();
    },
  );
}
