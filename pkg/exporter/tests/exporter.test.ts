import { execFileSync, spawnSync } from 'child_process'
import { mkdirSync, mkdtempSync, readFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'

import { describe, expect, it } from 'vitest'

import { loadBackbone } from '../src/backbone.js'
import { exportFeatures, DEFAULT_JOB } from '../src/exporter.js'
import { decodeFfsbHeader, FFSB_MAGIC } from '../src/ffsb.js'
import { Image, loadImage, resize, writePpm } from '../src/image.js'
import { parseArgs } from '../src/cli.js'

function syntheticImage(seedByte: number, width = 48, height = 40): Image {
  const data = new Float64Array(3 * width * height)
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = 3 * (y * width + x)
      data[i] = ((x * 7 + seedByte) % 256) / 255
      data[i + 1] = ((y * 13 + 2 * seedByte) % 256) / 255
      data[i + 2] = ((x + y + 3 * seedByte) % 256) / 255
    }
  }
  return { width, height, data }
}

/** 2 classes x 3 images toy folder, PPM encoded. */
function makeToyDataset(): string {
  const root = mkdtempSync(join(tmpdir(), 'ffsb-toy-'))
  let seed = 1
  for (const cls of ['alpha', 'beta']) {
    mkdirSync(join(root, cls))
    for (let i = 0; i < 3; i++) {
      writePpm(join(root, cls, `img${i}.ppm`), syntheticImage(seed * 40 + i * 9))
    }
    seed++
  }
  return root
}

function findPython(): string | null {
  for (const exe of ['python3', 'python']) {
    const probe = spawnSync(exe, ['-c', 'import fiprobe'], { encoding: 'utf-8' })
    if (probe.status === 0) return exe
  }
  return null
}

describe('image pipeline', () => {
  it('round-trips PPM images', () => {
    const root = mkdtempSync(join(tmpdir(), 'ppm-'))
    const img = syntheticImage(7)
    const path = join(root, 'x.ppm')
    writePpm(path, img)
    const back = loadImage(path)
    expect(back.width).toBe(img.width)
    expect(back.height).toBe(img.height)
    let maxDiff = 0
    for (let i = 0; i < img.data.length; i++) {
      maxDiff = Math.max(maxDiff, Math.abs(back.data[i] - img.data[i]))
    }
    expect(maxDiff).toBeLessThan(1 / 255)
  })

  it('resize preserves constant images', () => {
    const img: Image = { width: 10, height: 6, data: new Float64Array(180).fill(0.25) }
    const out = resize(img, 32)
    expect(out.data.every((v) => Math.abs(v - 0.25) < 1e-12)).toBe(true)
  })
})

describe('backbone', () => {
  it('is deterministic', () => {
    const a = loadBackbone('toy-rp64').embed(syntheticImage(3))
    const b = loadBackbone('toy-rp64').embed(syntheticImage(3))
    expect(Array.from(a)).toEqual(Array.from(b))
    expect(a.length).toBe(64)
  })

  it('rejects unknown model ids', () => {
    expect(() => loadBackbone('resnet50-hub')).toThrow(/unknown model id/)
  })
})

describe('exportFeatures', () => {
  it('writes a valid FFSB without groups when views = 0', () => {
    const root = makeToyDataset()
    const out = join(root, 'plain.ffsb')
    const res = exportFeatures({ ...DEFAULT_JOB, datasetRoot: root, outPath: out })
    expect(res).toMatchObject({ nSamples: 6, dim: 64, nClasses: 2, nImages: 6 })
    const blob = readFileSync(out)
    expect(blob.subarray(0, 5).equals(FFSB_MAGIC)).toBe(true)
    const header = decodeFfsbHeader(blob)
    expect(header).toEqual({ nSamples: 6, dim: 64, nClasses: 2, hasGroups: false })
    expect(blob.length).toBe(18 + 4 * 6 + 4 * 6 * 64)
  })

  it('labels follow sorted subfolder order', () => {
    const root = makeToyDataset()
    const out = join(root, 'labels.ffsb')
    exportFeatures({ ...DEFAULT_JOB, datasetRoot: root, outPath: out })
    const blob = readFileSync(out)
    const labels = []
    for (let i = 0; i < 6; i++) labels.push(blob.readUInt32LE(18 + 4 * i))
    expect(labels).toEqual([0, 0, 0, 1, 1, 1])
  })

  it('empty class folder is an error', () => {
    const root = makeToyDataset()
    mkdirSync(join(root, 'gamma'))
    expect(() => exportFeatures({
      ...DEFAULT_JOB, datasetRoot: root, outPath: join(root, 'x.ffsb'),
    })).toThrow(/gamma/)
  })

  it('acceptance: 2x3 toy folder with 5 views', () => {
    const root = makeToyDataset()
    const out = join(root, 'views.ffsb')
    const res = exportFeatures({
      ...DEFAULT_JOB, datasetRoot: root, outPath: out,
      viewsPerImage: 5, cropSeed: 42,
    })
    expect(res.nSamples).toBe(36)
    const blob = readFileSync(out)
    const header = decodeFfsbHeader(blob)
    expect(header).toEqual({ nSamples: 36, dim: 64, nClasses: 2, hasGroups: true })

    const labels: number[] = []
    const groups: number[] = []
    for (let i = 0; i < 36; i++) {
      labels.push(blob.readUInt32LE(18 + 4 * i))
      groups.push(blob.readUInt32LE(18 + 4 * 36 + 4 * i))
    }
    // 6 groups of 6 rows (base + 5 views), each group one label
    expect(new Set(groups).size).toBe(6)
    for (let g = 0; g < 6; g++) {
      const rows = groups.map((v, i) => [v, i]).filter(([v]) => v === g)
      expect(rows.length).toBe(6)
      const rowLabels = new Set(rows.map(([, i]) => labels[i]))
      expect(rowLabels.size).toBe(1)
    }
    expect(labels.slice(0, 18).every((l) => l === 0)).toBe(true)
    expect(labels.slice(18).every((l) => l === 1)).toBe(true)

    // the sidecar records crop parameters
    const meta = JSON.parse(readFileSync(`${out}.meta.json`, 'utf-8'))
    expect(meta.crop).toEqual({ seed: 42, scale_min: 0.6, scale_max: 1.0 })
    expect(meta.class_names).toEqual(['alpha', 'beta'])

    // validate through the analysis toolkit's CLI when it is importable
    const python = findPython()
    if (python === null) {
      console.warn('fiprobe CLI not importable; skipping ffsb-info cross-check')
    } else {
      const info = execFileSync(python, ['-m', 'fiprobe.cli', 'ffsb-info', out],
                                { encoding: 'utf-8' })
      expect(info).toContain('n_samples=36')
      expect(info).toContain('dim=64')
      expect(info).toContain('n_classes=2')
      expect(info).toContain('has_groups=1')
      expect(info).toContain('n_groups=6')
    }
  })

  it('acceptance: repeated runs are payload-identical', () => {
    const root = makeToyDataset()
    const a = join(root, 'a.ffsb')
    const b = join(root, 'b.ffsb')
    for (const out of [a, b]) {
      exportFeatures({
        ...DEFAULT_JOB, datasetRoot: root, outPath: out,
        viewsPerImage: 5, cropSeed: 7,
      })
    }
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true)
  })

  it('different crop seeds change the payload', () => {
    const root = makeToyDataset()
    const a = join(root, 'a.ffsb')
    const b = join(root, 'b.ffsb')
    exportFeatures({ ...DEFAULT_JOB, datasetRoot: root, outPath: a,
                     viewsPerImage: 2, cropSeed: 1 })
    exportFeatures({ ...DEFAULT_JOB, datasetRoot: root, outPath: b,
                     viewsPerImage: 2, cropSeed: 2 })
    expect(readFileSync(a).equals(readFileSync(b))).toBe(false)
  })
})

describe('cli parsing', () => {
  it('parses flags', () => {
    const job = parseArgs(['--dataset', '/d', '--out', '/o.ffsb',
                           '--views', '5', '--seed', '9'])
    expect(job.datasetRoot).toBe('/d')
    expect(job.viewsPerImage).toBe(5)
    expect(job.cropSeed).toBe(9)
    expect(job.model).toBe('toy-rp64')
  })
})
