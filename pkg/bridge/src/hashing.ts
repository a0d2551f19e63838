/**
 * 64-bit primitives matching the Python toolkit: FNV-1a for stable
 * text keys and feature buckets, splitmix64 for reproducible draws.
 * BigInt keeps the arithmetic exact at 64 bits.
 */

const MASK64 = (1n << 64n) - 1n;
const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;

export function fnv1a64(data: Uint8Array): bigint {
  let hash = FNV_OFFSET;
  for (const byte of data) {
    hash ^= BigInt(byte);
    hash = (hash * FNV_PRIME) & MASK64;
  }
  return hash;
}

const ENCODER = new TextEncoder();

export function textKey(text: string): bigint {
  return fnv1a64(ENCODER.encode(text));
}

export function bucketOf(text: string, nBuckets: number): number {
  return Number(textKey(text) % BigInt(nBuckets));
}

const GAMMA = 0x9e3779b97f4a7c15n;

/** splitmix64 stream; every draw derives from `nextU64`. */
export class Rng {
  private state: bigint;

  constructor(seed: bigint | number) {
    this.state = BigInt(seed) & MASK64;
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return (z ^ (z >> 31n)) & MASK64;
  }

  randBelow(n: number): number {
    if (n <= 0) throw new RangeError(`randBelow needs a positive bound, got ${n}`);
    return Number(this.nextU64() % BigInt(n));
  }

  /** Uniform float in [0, 1) from the top 53 bits. */
  random(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  shuffle<T>(items: T[]): void {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.randBelow(i + 1);
      [items[i], items[j]] = [items[j], items[i]];
    }
  }
}

export function deriveSeed(base: bigint | number, ...keys: (bigint | number)[]): bigint {
  let seed = BigInt(base) & MASK64;
  for (const key of keys) {
    seed = new Rng((seed + (BigInt(key) & MASK64)) & MASK64).nextU64();
  }
  return seed;
}
