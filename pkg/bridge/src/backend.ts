/**
 * Model store behind the wire ops: sequential m0001-style ids,
 * warm-start continuation, JSON save/load, hyperparameter echo.
 */

import { readFileSync, writeFileSync } from "node:fs";

import type { EntailmentInstance } from "./instances.js";
import {
  featurize,
  fewShotDefaults,
  Hyperparams,
  LinearModel,
  ModelConfig,
} from "./model.js";
import { WireError } from "./wire.js";

export class ModelStore {
  private readonly config: ModelConfig;
  private readonly models = new Map<string, LinearModel>();
  private readonly hyperparams = new Map<string, Hyperparams>();
  private counter = 0;

  constructor(config: ModelConfig) {
    this.config = config;
  }

  private nextId(): string {
    this.counter += 1;
    return `m${String(this.counter).padStart(4, "0")}`;
  }

  private get(modelId: string): LinearModel {
    const model = this.models.get(modelId);
    if (!model) {
      throw new WireError(`unknown model id '${modelId}'`);
    }
    return model;
  }

  train(
    instances: EntailmentInstance[],
    headSize: number,
    seed: number,
    hp: Hyperparams,
  ): string {
    if (instances.length === 0) {
      throw new WireError("cannot train on an empty instance list");
    }
    const model = new LinearModel(headSize, this.config);
    model.train(instances, seed, hp);
    const id = this.nextId();
    this.models.set(id, model);
    this.hyperparams.set(id, hp);
    return id;
  }

  continueTrain(
    modelId: string,
    instances: EntailmentInstance[],
    headSize: number,
    seed: number,
    hp: Hyperparams,
  ): string {
    const source = this.get(modelId);
    if (instances.length === 0) {
      return modelId; // nothing to learn: the source is the result
    }
    const model = source.clone(headSize);
    model.train(instances, seed, hp);
    const id = this.nextId();
    this.models.set(id, model);
    this.hyperparams.set(id, hp);
    return id;
  }

  score(modelId: string, pairs: [string, string][]): number[][] {
    const model = this.get(modelId);
    // Featurize with the model's own settings so saved/loaded models
    // keep their bucket count and cross weight.
    return pairs.map(([premise, hypothesis]) =>
      model.scoreRow(
        featurize(premise, hypothesis, model.config.nBuckets, model.config.crossWeight),
      ),
    );
  }

  save(modelId: string, path: string): void {
    const model = this.get(modelId);
    writeFileSync(path, `${JSON.stringify(model.toObj())}\n`, "utf-8");
  }

  load(path: string): string {
    let text: string;
    try {
      text = readFileSync(path, "utf-8");
    } catch (exc) {
      throw new WireError(`cannot load model from ${path}: ${(exc as Error).message}`);
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(text);
    } catch {
      throw new WireError(`${path} is not a saved model (invalid JSON)`);
    }
    const model = LinearModel.fromObj(parsed);
    const id = this.nextId();
    this.models.set(id, model);
    this.hyperparams.set(id, fewShotDefaults());
    return id;
  }

  effectiveHyperparams(modelId: string): Hyperparams {
    const hp = this.hyperparams.get(modelId);
    if (!hp) {
      throw new WireError(`no hyperparameters recorded for '${modelId}'`);
    }
    return hp;
  }
}
