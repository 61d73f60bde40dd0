/** Deterministic 64-bit PRNG (splitmix64) used for crop sampling and the
 * built-in backbone weights. BigInt arithmetic keeps it exact and portable. */

const MASK64 = (1n << 64n) - 1n
const GAMMA = 0x9e3779b97f4a7c15n

export class SplitMix64 {
  private state: bigint

  constructor(seed: bigint | number) {
    this.state = BigInt(seed) & MASK64
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK64
    let z = this.state
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64
    return (z ^ (z >> 31n)) & MASK64
  }

  /** uniform double in [0, 1) with 53 random bits */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 9007199254740992
  }
}

/** One output of the splitmix64 stream: a pure function of (seed, index). */
export function deriveSeed(seed: bigint | number, index: number): bigint {
  const base = BigInt(seed) & MASK64
  let z = (base + BigInt(index + 1) * GAMMA) & MASK64
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64
  return (z ^ (z >> 31n)) & MASK64
}
