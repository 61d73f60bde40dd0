/** FFSB v1 writer (and a reader used for self-checks).
 *
 * Layout, little-endian: magic "FFSB\x01", u32 n_samples, u32 dim,
 * u32 n_classes, u8 has_groups, u32 labels[n], u32 groups[n] when present,
 * f32 features[n*dim] row-major. Bit-exact and versioned: this is the
 * interchange contract with the analysis toolkit.
 */

export const FFSB_MAGIC = Buffer.from([0x46, 0x46, 0x53, 0x42, 0x01])

export interface FeatureSet {
  nSamples: number
  dim: number
  nClasses: number
  labels: Uint32Array
  groups: Uint32Array | null
  /** row-major n x dim */
  features: Float32Array
}

export function encodeFfsb(set: FeatureSet): Buffer {
  const { nSamples, dim, nClasses, labels, groups, features } = set
  if (labels.length !== nSamples) throw new Error('labels length mismatch')
  if (groups !== null && groups.length !== nSamples) {
    throw new Error('groups length mismatch')
  }
  if (features.length !== nSamples * dim) throw new Error('features length mismatch')
  for (let i = 0; i < nSamples; i++) {
    if (labels[i] >= nClasses) throw new Error(`label out of range at row ${i}`)
  }
  const header = Buffer.alloc(18)
  FFSB_MAGIC.copy(header, 0)
  header.writeUInt32LE(nSamples, 5)
  header.writeUInt32LE(dim, 9)
  header.writeUInt32LE(nClasses, 13)
  header.writeUInt8(groups === null ? 0 : 1, 17)
  const parts = [header, u32Buffer(labels)]
  if (groups !== null) parts.push(u32Buffer(groups))
  parts.push(f32Buffer(features))
  return Buffer.concat(parts)
}

export function decodeFfsbHeader(buf: Buffer): {
  nSamples: number; dim: number; nClasses: number; hasGroups: boolean
} {
  if (buf.length < 18 || !buf.subarray(0, 5).equals(FFSB_MAGIC)) {
    throw new Error('not an FFSB file')
  }
  return {
    nSamples: buf.readUInt32LE(5),
    dim: buf.readUInt32LE(9),
    nClasses: buf.readUInt32LE(13),
    hasGroups: buf.readUInt8(17) === 1,
  }
}

function u32Buffer(a: Uint32Array): Buffer {
  const buf = Buffer.alloc(4 * a.length)
  for (let i = 0; i < a.length; i++) buf.writeUInt32LE(a[i], 4 * i)
  return buf
}

function f32Buffer(a: Float32Array): Buffer {
  const buf = Buffer.alloc(4 * a.length)
  for (let i = 0; i < a.length; i++) buf.writeFloatLE(a[i], 4 * i)
  return buf
}
