#!/usr/bin/env node
/** ffsb-export: image folder -> FFSB feature file.
 *
 * Usage:
 *   ffsb-export --dataset DIR --out FILE [--model toy-rp64] [--views N]
 *               [--seed N] [--crop-min 0.6] [--crop-max 1.0]
 */

import { pathToFileURL } from 'url'

import { availableBackbones } from './backbone.js'
import { DEFAULT_JOB, ExportJob, exportFeatures } from './exporter.js'

function usage(): never {
  console.error(
    'usage: ffsb-export --dataset DIR --out FILE [--model ID] [--views N] ' +
    '[--seed N] [--crop-min F] [--crop-max F]\n' +
    `models available offline: ${availableBackbones().join(', ')}`)
  process.exit(2)
}

export function parseArgs(argv: string[]): ExportJob {
  const opts: Record<string, string> = {}
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i]
    if (!key.startsWith('--') || i + 1 >= argv.length) usage()
    opts[key.slice(2)] = argv[i + 1]
  }
  const known = ['dataset', 'out', 'model', 'views', 'seed', 'crop-min', 'crop-max']
  for (const key of Object.keys(opts)) {
    if (!known.includes(key)) usage()
  }
  if (!opts.dataset || !opts.out) usage()
  return {
    ...DEFAULT_JOB,
    datasetRoot: opts.dataset,
    outPath: opts.out,
    model: opts.model ?? DEFAULT_JOB.model,
    viewsPerImage: opts.views !== undefined ? parseInt(opts.views, 10) : 0,
    cropSeed: opts.seed !== undefined ? parseInt(opts.seed, 10) : 0,
    cropScaleMin: opts['crop-min'] !== undefined ? parseFloat(opts['crop-min']) : 0.6,
    cropScaleMax: opts['crop-max'] !== undefined ? parseFloat(opts['crop-max']) : 1.0,
  }
}

function main(): void {
  const job = parseArgs(process.argv.slice(2))
  if (!(job.viewsPerImage >= 0)) {
    console.error('ffsb-export: --views must be >= 0')
    process.exit(2)
  }
  try {
    const res = exportFeatures(job)
    console.log(`wrote ${job.outPath}: n_samples=${res.nSamples} dim=${res.dim} ` +
                `n_classes=${res.nClasses} images=${res.nImages}`)
  } catch (e) {
    console.error(`ffsb-export: ${(e as Error).message}`)
    process.exit(1)
  }
}

if (process.argv[1] !== undefined &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  main()
}
