/** The export pipeline: class-per-subfolder images -> FFSB feature file.
 *
 * Labels follow sorted subfolder order; images are processed in sorted
 * filename order. Every image yields one base embedding plus views_per_image
 * random-crop embeddings sharing its group id (groups are omitted entirely
 * when views_per_image is 0). Crops are seeded per (image, view) so repeated
 * runs are payload-identical.
 */

import { readdirSync, statSync, writeFileSync } from 'fs'
import { join, basename } from 'path'

import { Backbone, loadBackbone } from './backbone.js'
import { encodeFfsb, FeatureSet } from './ffsb.js'
import { cropRect, Image, loadImage } from './image.js'
import { deriveSeed, SplitMix64 } from './rng.js'

export interface ExportJob {
  model: string
  datasetRoot: string
  outPath: string
  viewsPerImage: number
  cropSeed: number
  /** random-crop area scale range, applied to each side independently */
  cropScaleMin: number
  cropScaleMax: number
  batchSize: number
}

export const DEFAULT_JOB: Omit<ExportJob, 'datasetRoot' | 'outPath'> = {
  model: 'toy-rp64',
  viewsPerImage: 0,
  cropSeed: 0,
  cropScaleMin: 0.6,
  cropScaleMax: 1.0,
  batchSize: 16,
}

const IMAGE_EXTENSIONS = ['.png', '.ppm']

export interface ExportResult {
  nSamples: number
  dim: number
  nClasses: number
  nImages: number
  classNames: string[]
}

export function exportFeatures(job: ExportJob): ExportResult {
  const backbone = loadBackbone(job.model)
  const classes = listClasses(job.datasetRoot)
  const rows: Float64Array[] = []
  const labels: number[] = []
  const groups: number[] = []
  let imageIndex = 0
  for (let label = 0; label < classes.length; label++) {
    const dir = join(job.datasetRoot, classes[label])
    const files = listImages(dir)
    if (files.length === 0) {
      throw new Error(`class folder '${classes[label]}' contains no images`)
    }
    for (const file of files) {
      const img = loadImage(join(dir, file))
      rows.push(backbone.embed(img))
      labels.push(label)
      groups.push(imageIndex)
      for (let v = 0; v < job.viewsPerImage; v++) {
        rows.push(backbone.embed(randomCrop(img, job, imageIndex, v)))
        labels.push(label)
        groups.push(imageIndex)
      }
      imageIndex++
    }
  }
  const set: FeatureSet = {
    nSamples: rows.length,
    dim: backbone.dim,
    nClasses: classes.length,
    labels: Uint32Array.from(labels),
    groups: job.viewsPerImage > 0 ? Uint32Array.from(groups) : null,
    features: packRows(rows, backbone.dim),
  }
  writeFileSync(job.outPath, encodeFfsb(set))
  writeSidecar(job, backbone, classes, set)
  return {
    nSamples: set.nSamples,
    dim: set.dim,
    nClasses: set.nClasses,
    nImages: imageIndex,
    classNames: classes,
  }
}

function listClasses(root: string): string[] {
  let entries: string[]
  try {
    entries = readdirSync(root)
  } catch (e) {
    throw new Error(`cannot read dataset root ${root}: ${(e as Error).message}`)
  }
  const classes = entries
    .filter((name) => statSync(join(root, name)).isDirectory())
    .sort()
  if (classes.length === 0) throw new Error(`no class subfolders under ${root}`)
  return classes
}

function listImages(dir: string): string[] {
  return readdirSync(dir)
    .filter((f) => IMAGE_EXTENSIONS.some((ext) => f.toLowerCase().endsWith(ext)))
    .sort()
}

/** Seeded random crop: each side scaled independently from the configured
 * range, position uniform over the valid offsets. */
function randomCrop(img: Image, job: ExportJob, imageIndex: number, view: number): Image {
  const rng = new SplitMix64(deriveSeed(job.cropSeed, imageIndex * 65536 + view))
  const span = job.cropScaleMax - job.cropScaleMin
  const w = Math.max(1, Math.round(img.width * (job.cropScaleMin + span * rng.nextFloat())))
  const h = Math.max(1, Math.round(img.height * (job.cropScaleMin + span * rng.nextFloat())))
  const x = Math.floor(rng.nextFloat() * (img.width - w + 1))
  const y = Math.floor(rng.nextFloat() * (img.height - h + 1))
  return cropRect(img, x, y, w, h)
}

function packRows(rows: Float64Array[], dim: number): Float32Array {
  const out = new Float32Array(rows.length * dim)
  rows.forEach((row, i) => {
    if (row.length !== dim) throw new Error('embedding dimension mismatch')
    out.set(Float32Array.from(row), i * dim)
  })
  return out
}

function writeSidecar(job: ExportJob, backbone: Backbone, classes: string[],
                      set: FeatureSet): void {
  const meta = {
    format: 'FFSB v1',
    model: backbone.id,
    embedding_dim: backbone.dim,
    input_size: backbone.inputSize,
    dataset_root: job.datasetRoot,
    class_names: classes,
    n_images: set.groups ? new Set(set.groups).size : set.nSamples,
    n_samples: set.nSamples,
    views_per_image: job.viewsPerImage,
    crop: {
      seed: job.cropSeed,
      scale_min: job.cropScaleMin,
      scale_max: job.cropScaleMax,
    },
  }
  writeFileSync(`${job.outPath}.meta.json`, JSON.stringify(meta, null, 2) + '\n')
}
