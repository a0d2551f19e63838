/**
 * The training-instance contract consumed over the wire: exactly six
 * fields per object, matching the JSONL files the toolkit writes.
 * Target ranges depend on the head being trained, so they are checked
 * at training time, not here.
 */

import { WireError } from "./wire.js";

export const PROVENANCES = [
  "original",
  "uca_positive",
  "uca_negative",
  "downsample_negative",
] as const;

export type Provenance = (typeof PROVENANCES)[number];

export interface EntailmentInstance {
  uid: string;
  premise: string;
  hypothesis: string;
  target: number;
  provenance: Provenance;
  sourceClass: number | null;
}

const FIELDS = ["uid", "premise", "hypothesis", "target", "provenance", "source_class"];

export function instanceFromObj(value: unknown, where: string): EntailmentInstance {
  if (value === null || typeof value !== "object" || Array.isArray(value)) {
    throw new WireError(`${where}: instance must be a JSON object`);
  }
  const obj = value as Record<string, unknown>;
  const keys = Object.keys(obj).sort();
  const expected = [...FIELDS].sort();
  if (keys.length !== expected.length || keys.some((k, i) => k !== expected[i])) {
    throw new WireError(
      `${where}: instance fields must be exactly {${FIELDS.join(", ")}}, got {${keys.join(", ")}}`,
    );
  }
  const { uid, premise, hypothesis, target, provenance } = obj;
  const sourceClass = obj.source_class;
  if (typeof uid !== "string") {
    throw new WireError(`${where}: uid must be a string`);
  }
  if (typeof premise !== "string") {
    throw new WireError(`${where}: premise must be a string`);
  }
  if (typeof hypothesis !== "string") {
    throw new WireError(`${where}: hypothesis must be a string`);
  }
  if (typeof target !== "number" || !Number.isFinite(target)) {
    throw new WireError(`${where}: target must be a finite number`);
  }
  if (
    typeof provenance !== "string" ||
    !(PROVENANCES as readonly string[]).includes(provenance)
  ) {
    throw new WireError(
      `${where}: provenance must be one of [${PROVENANCES.join(", ")}]`,
    );
  }
  if (sourceClass !== null && !Number.isInteger(sourceClass)) {
    throw new WireError(`${where}: source_class must be an integer or null`);
  }
  return {
    uid,
    premise,
    hypothesis,
    target,
    provenance: provenance as Provenance,
    sourceClass: sourceClass as number | null,
  };
}

export function parseInstanceList(items: unknown[]): EntailmentInstance[] {
  return items.map((item, i) => instanceFromObj(item, `instances[${i}]`));
}
