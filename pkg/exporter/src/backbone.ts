/** Frozen feature-extraction backbones.
 *
 * The built-in "toy-rp64" backbone is fully deterministic and offline: it
 * bilinearly resizes to 32x32, mean-centers the pixels and applies a fixed
 * seeded random projection to 64 dimensions. It exists so the export
 * pipeline (folder walking, cropping, grouping, FFSB layout) can be
 * exercised and tested without model downloads; hub-served model ids are
 * rejected with a clear error in offline environments.
 */

import { Image, resize } from './image.js'
import { SplitMix64 } from './rng.js'

export interface Backbone {
  id: string
  dim: number
  inputSize: number
  embed(img: Image): Float64Array
}

class RandomProjectionBackbone implements Backbone {
  readonly id: string
  readonly dim: number
  readonly inputSize: number
  private readonly weights: Float64Array

  constructor(id: string, dim: number, inputSize: number, seed: number) {
    this.id = id
    this.dim = dim
    this.inputSize = inputSize
    const rng = new SplitMix64(seed)
    const n = 3 * inputSize * inputSize
    this.weights = new Float64Array(dim * n)
    for (let i = 0; i < this.weights.length; i++) {
      this.weights[i] = (rng.nextFloat() - 0.5) / Math.sqrt(n)
    }
  }

  embed(img: Image): Float64Array {
    const sized = img.width === this.inputSize && img.height === this.inputSize
      ? img : resize(img, this.inputSize)
    const n = sized.data.length
    let mean = 0
    for (let i = 0; i < n; i++) mean += sized.data[i]
    mean /= n
    const out = new Float64Array(this.dim)
    for (let d = 0; d < this.dim; d++) {
      let acc = 0
      const row = d * n
      for (let i = 0; i < n; i++) acc += this.weights[row + i] * (sized.data[i] - mean)
      out[d] = acc
    }
    return out
  }
}

const REGISTRY: Record<string, () => Backbone> = {
  'toy-rp64': () => new RandomProjectionBackbone('toy-rp64', 64, 32, 0x51ab1e),
  'toy-rp16': () => new RandomProjectionBackbone('toy-rp16', 16, 16, 0xf00d),
}

export function loadBackbone(id: string): Backbone {
  const make = REGISTRY[id]
  if (!make) {
    throw new Error(
      `unknown model id '${id}' (available offline: ${Object.keys(REGISTRY).join(', ')})`)
  }
  return make()
}

export function availableBackbones(): string[] {
  return Object.keys(REGISTRY)
}
