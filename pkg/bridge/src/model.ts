/**
 * A small trainable scoring model: hashed sparse text features into a
 * linear layer, softmax cross-entropy for heads of two or more, squared
 * loss with clamping for the scalar head. Deterministic given
 * (instances, head size, seed, hyperparameters).
 */

import { Rng, bucketOf, deriveSeed, textKey } from "./hashing.js";
import type { EntailmentInstance } from "./instances.js";
import { WireError } from "./wire.js";

const SEP = "\x1f";

// Word boundary matching the reference featurizer, whose splitter
// treats the \x1c-\x1f separators and \x85 as whitespace too.
const WORD_SPLIT = /[\s\x1c-\x1f\x85]+/;

export interface Hyperparams {
  learning_rate: number;
  batch_size: number;
  max_epochs: number;
  weight_decay: number;
  warmup_frac: number;
}

export function fewShotDefaults(): Hyperparams {
  return {
    learning_rate: 1e-5,
    batch_size: 8,
    max_epochs: 10,
    weight_decay: 0.0,
    warmup_frac: 0.0,
  };
}

const HP_KEYS = Object.keys(fewShotDefaults()).sort();

export function hyperparamsFromObj(value: unknown): Hyperparams {
  if (value === null || value === undefined) {
    return fewShotDefaults();
  }
  if (typeof value !== "object" || Array.isArray(value)) {
    throw new WireError("hyperparams must be an object or null");
  }
  const obj = value as Record<string, unknown>;
  const unknown = Object.keys(obj).filter((k) => !HP_KEYS.includes(k));
  if (unknown.length > 0) {
    throw new WireError(`unknown hyperparameters [${unknown.sort().join(", ")}]`);
  }
  const base = fewShotDefaults();
  const out: Hyperparams = { ...base };
  for (const key of HP_KEYS as (keyof Hyperparams)[]) {
    if (key in obj) {
      const v = obj[key];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new WireError(`hyperparameter '${key}' must be a finite number`);
      }
      out[key] = v;
    }
  }
  if (out.learning_rate <= 0) throw new WireError("learning_rate must be positive");
  if (out.batch_size < 1 || !Number.isInteger(out.batch_size)) {
    throw new WireError("batch_size must be a positive integer");
  }
  if (out.max_epochs < 1 || !Number.isInteger(out.max_epochs)) {
    throw new WireError("max_epochs must be a positive integer");
  }
  if (out.weight_decay < 0) throw new WireError("weight_decay must be non-negative");
  if (out.warmup_frac < 0 || out.warmup_frac > 1) {
    throw new WireError("warmup_frac must be in [0, 1]");
  }
  return out;
}

export interface ModelConfig {
  nBuckets: number;
  lrScale: number;
  epochScale: number;
  crossWeight: number;
}

export function defaultConfig(): ModelConfig {
  return { nBuckets: 1 << 18, lrScale: 1e4, epochScale: 5, crossWeight: 8.0 };
}

/** Sparse hashed features for one premise/hypothesis pair, L2 normalized. */
export function featurize(
  premise: string,
  hypothesis: string,
  nBuckets: number,
  crossWeight: number,
): Map<number, number> {
  const row = new Map<number, number>();
  const add = (tag: string, weight: number) => {
    const bucket = bucketOf(tag, nBuckets);
    row.set(bucket, (row.get(bucket) ?? 0) + weight);
  };
  const premiseWords = premise.split(WORD_SPLIT).filter(Boolean);
  const hypothesisWords = hypothesis.split(WORD_SPLIT).filter(Boolean);
  const joinedWords = `${premise}${SEP}${hypothesis}`.split(WORD_SPLIT).filter(Boolean);
  for (const w of premiseWords) add(`P${SEP}${w}`, 1);
  for (const w of hypothesisWords) add(`H${SEP}${w}`, 1);
  for (const w of joinedWords) add(`J${SEP}${w}`, 1);
  const charGrams = (prefix: string, text: string) => {
    for (let n = 2; n <= 4; n++) {
      for (let i = 0; i + n <= text.length; i++) {
        add(`${prefix}c${n}${SEP}${text.slice(i, i + n)}`, 1);
      }
    }
  };
  charGrams("P", premise);
  charGrams("H", hypothesis);
  charGrams("J", `${premise}${SEP}${hypothesis}`);
  for (const wp of premiseWords) {
    for (const wh of hypothesisWords) {
      add(`X${SEP}${wp}${SEP}${wh}`, crossWeight);
    }
  }
  const hypothesisSet = new Set(hypothesisWords);
  let shared = 0;
  for (const w of premiseWords) if (hypothesisSet.has(w)) shared += 1;
  if (shared > 0) add(`O${SEP}shared`, crossWeight * shared);

  let norm = 0;
  for (const v of row.values()) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (const [k, v] of row) row.set(k, v / norm);
  }
  return row;
}

function targetRows(instances: EntailmentInstance[], headSize: number): number[][] {
  return instances.map((inst, i) => {
    const t = inst.target;
    if (headSize === 1 || headSize === 2) {
      if (t < 0 || t > 1) {
        throw new WireError(
          `instances[${i}]: target ${t} out of range [0, 1] for a ${headSize}-way head`,
        );
      }
      return headSize === 1 ? [t] : [1 - t, t];
    }
    if (!Number.isInteger(t) || t < 0 || t >= headSize) {
      throw new WireError(
        `instances[${i}]: target ${t} is not a class index below ${headSize}`,
      );
    }
    const row = new Array<number>(headSize).fill(0);
    row[t] = 1;
    return row;
  });
}

function softmax(logits: number[]): number[] {
  const top = Math.max(...logits);
  const exps = logits.map((v) => Math.exp(v - top));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map((v) => v / total);
}

export class LinearModel {
  readonly headSize: number;
  readonly config: ModelConfig;
  /** bucket -> one weight per head row. */
  weights: Map<number, Float64Array>;
  intercept: Float64Array;

  constructor(headSize: number, config: ModelConfig) {
    if (!Number.isInteger(headSize) || headSize < 1) {
      throw new WireError(`head_size must be a positive integer, got ${headSize}`);
    }
    this.headSize = headSize;
    this.config = config;
    this.weights = new Map();
    this.intercept = new Float64Array(headSize);
  }

  clone(headSize: number): LinearModel {
    const out = new LinearModel(headSize, this.config);
    if (headSize === this.headSize) {
      for (const [bucket, row] of this.weights) {
        out.weights.set(bucket, Float64Array.from(row));
      }
      out.intercept = Float64Array.from(this.intercept);
    }
    // A changed head size keeps the fresh zero head.
    return out;
  }

  private outputs(feats: Map<number, number>): number[] {
    const logits = Array.from(this.intercept);
    for (const [bucket, value] of feats) {
      const row = this.weights.get(bucket);
      if (row) {
        for (let h = 0; h < this.headSize; h++) logits[h] += row[h] * value;
      }
    }
    return logits;
  }

  scoreRow(feats: Map<number, number>): number[] {
    const raw = this.outputs(feats);
    if (this.headSize === 1) {
      return [Math.min(1, Math.max(0, raw[0]))];
    }
    return softmax(raw);
  }

  train(instances: EntailmentInstance[], seed: bigint | number, hp: Hyperparams): void {
    if (instances.length === 0) {
      throw new WireError("cannot train on an empty instance list");
    }
    const rows = targetRows(instances, this.headSize);
    const feats = instances.map((inst) =>
      featurize(inst.premise, inst.hypothesis, this.config.nBuckets, this.config.crossWeight),
    );
    const lr0 = hp.learning_rate * this.config.lrScale;
    const epochs = hp.max_epochs * this.config.epochScale;
    const batchSize = hp.batch_size;
    const nBatches = Math.ceil(instances.length / batchSize);
    const totalSteps = epochs * nBatches;
    const warmupSteps = Math.floor(hp.warmup_frac * totalSteps + 0.5);
    const rng = new Rng(deriveSeed(seed, textKey("sgd-order")));
    const order = instances.map((_, i) => i);
    let step = 0;
    for (let epoch = 0; epoch < epochs; epoch++) {
      rng.shuffle(order);
      for (let start = 0; start < order.length; start += batchSize) {
        const batch = order.slice(start, start + batchSize);
        step += 1;
        let lr = lr0;
        if (warmupSteps > 0 && step <= warmupSteps) {
          lr = (lr0 * step) / warmupSteps;
        }
        this.batchStep(batch, feats, rows, lr, hp.weight_decay);
      }
    }
  }

  private batchStep(
    batch: number[],
    feats: Map<number, number>[],
    rows: number[][],
    lr: number,
    weightDecay: number,
  ): void {
    const n = batch.length;
    const gradW = new Map<number, Float64Array>();
    const gradB = new Float64Array(this.headSize);
    for (const idx of batch) {
      const x = feats[idx];
      const raw = this.outputs(x);
      const out = this.headSize === 1 ? raw : softmax(raw);
      const delta = new Float64Array(this.headSize);
      for (let h = 0; h < this.headSize; h++) {
        // Squared loss for the scalar head, cross entropy otherwise:
        // both reduce to (output - target) / n on the logit scale.
        delta[h] = ((out[h] - rows[idx][h]) * (this.headSize === 1 ? 2 : 1)) / n;
      }
      for (let h = 0; h < this.headSize; h++) gradB[h] += delta[h];
      for (const [bucket, value] of x) {
        let g = gradW.get(bucket);
        if (!g) {
          g = new Float64Array(this.headSize);
          gradW.set(bucket, g);
        }
        for (let h = 0; h < this.headSize; h++) g[h] += delta[h] * value;
      }
    }
    for (const [bucket, g] of gradW) {
      let w = this.weights.get(bucket);
      if (!w) {
        w = new Float64Array(this.headSize);
        this.weights.set(bucket, w);
      }
      for (let h = 0; h < this.headSize; h++) {
        w[h] -= lr * (g[h] + weightDecay * w[h]);
      }
    }
    for (let h = 0; h < this.headSize; h++) {
      this.intercept[h] -= lr * gradB[h];
    }
  }

  toObj(): object {
    const weights: Record<string, number[]> = {};
    const buckets = Array.from(this.weights.keys()).sort((a, b) => a - b);
    for (const bucket of buckets) {
      weights[String(bucket)] = Array.from(this.weights.get(bucket)!);
    }
    return {
      format: "entailkit-bridge-linear",
      head_size: this.headSize,
      n_buckets: this.config.nBuckets,
      lr_scale: this.config.lrScale,
      epoch_scale: this.config.epochScale,
      cross_weight: this.config.crossWeight,
      intercept: Array.from(this.intercept),
      weights,
    };
  }

  static fromObj(value: unknown): LinearModel {
    if (value === null || typeof value !== "object" || Array.isArray(value)) {
      throw new WireError("not a saved model: expected a JSON object");
    }
    const obj = value as Record<string, unknown>;
    if (obj.format !== "entailkit-bridge-linear") {
      throw new WireError("not a saved model: unknown format");
    }
    const headSize = obj.head_size;
    const nBuckets = obj.n_buckets;
    if (
      !Number.isInteger(headSize) || (headSize as number) < 1 ||
      !Number.isInteger(nBuckets) || (nBuckets as number) < 2
    ) {
      throw new WireError("not a saved model: bad head_size or n_buckets");
    }
    const model = new LinearModel(headSize as number, {
      nBuckets: nBuckets as number,
      lrScale: typeof obj.lr_scale === "number" ? obj.lr_scale : 1e4,
      epochScale: typeof obj.epoch_scale === "number" ? obj.epoch_scale : 5,
      crossWeight: typeof obj.cross_weight === "number" ? obj.cross_weight : 8.0,
    });
    const intercept = obj.intercept;
    if (!Array.isArray(intercept) || intercept.length !== model.headSize) {
      throw new WireError("not a saved model: bad intercept");
    }
    model.intercept = Float64Array.from(intercept as number[]);
    const weights = obj.weights;
    if (weights === null || typeof weights !== "object" || Array.isArray(weights)) {
      throw new WireError("not a saved model: bad weights");
    }
    for (const [key, row] of Object.entries(weights as Record<string, unknown>)) {
      const bucket = Number(key);
      if (!Number.isInteger(bucket) || !Array.isArray(row) || row.length !== model.headSize) {
        throw new WireError(`not a saved model: bad weight row for bucket ${key}`);
      }
      model.weights.set(bucket, Float64Array.from(row as number[]));
    }
    return model;
  }
}
