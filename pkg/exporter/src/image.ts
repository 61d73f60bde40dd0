/** Image loading (PNG via pngjs, binary PPM natively) plus the resize and
 * crop primitives the backbones need. Pixels are float64 RGB in [0, 1]. */

import { readFileSync, writeFileSync } from 'fs'
import { PNG } from 'pngjs'

export interface Image {
  width: number
  height: number
  /** RGB interleaved, length 3*width*height, values in [0, 1] */
  data: Float64Array
}

export function loadImage(path: string): Image {
  const lower = path.toLowerCase()
  if (lower.endsWith('.png')) return loadPng(path)
  if (lower.endsWith('.ppm')) return loadPpm(path)
  throw new Error(`unsupported image format: ${path} (png and ppm supported)`)
}

function loadPng(path: string): Image {
  const png = PNG.sync.read(readFileSync(path))
  const data = new Float64Array(3 * png.width * png.height)
  for (let i = 0; i < png.width * png.height; i++) {
    data[3 * i] = png.data[4 * i] / 255
    data[3 * i + 1] = png.data[4 * i + 1] / 255
    data[3 * i + 2] = png.data[4 * i + 2] / 255
  }
  return { width: png.width, height: png.height, data }
}

/** Binary PPM (P6), maxval 255. */
function loadPpm(path: string): Image {
  const buf = readFileSync(path)
  let pos = 0
  const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d
  const token = (): string => {
    for (;;) {
      while (pos < buf.length && isSpace(buf[pos])) pos++
      if (pos < buf.length && buf[pos] === 0x23 /* # */) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++
        continue
      }
      break
    }
    const start = pos
    while (pos < buf.length && !isSpace(buf[pos])) pos++
    return buf.subarray(start, pos).toString('ascii')
  }
  const magic = token()
  if (magic !== 'P6') throw new Error(`${path}: not a binary PPM (P6) file`)
  const width = parseInt(token(), 10)
  const height = parseInt(token(), 10)
  const maxval = parseInt(token(), 10)
  if (!(width > 0 && height > 0) || maxval !== 255) {
    throw new Error(`${path}: unsupported PPM header`)
  }
  pos++ // single whitespace after maxval
  const need = 3 * width * height
  if (buf.length - pos < need) throw new Error(`${path}: truncated PPM payload`)
  const data = new Float64Array(need)
  for (let i = 0; i < need; i++) data[i] = buf[pos + i] / 255
  return { width, height, data }
}

export function writePpm(path: string, img: Image): void {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, 'ascii')
  const body = Buffer.alloc(3 * img.width * img.height)
  for (let i = 0; i < body.length; i++) {
    body[i] = Math.max(0, Math.min(255, Math.round(img.data[i] * 255)))
  }
  writeFileSync(path, Buffer.concat([header, body]))
}

/** Bilinear resize to size x size (align-corners-false convention). */
export function resize(img: Image, size: number): Image {
  const out = new Float64Array(3 * size * size)
  const sx = img.width / size
  const sy = img.height / size
  for (let y = 0; y < size; y++) {
    const fy = Math.min(Math.max((y + 0.5) * sy - 0.5, 0), img.height - 1)
    const y0 = Math.floor(fy)
    const y1 = Math.min(y0 + 1, img.height - 1)
    const wy = fy - y0
    for (let x = 0; x < size; x++) {
      const fx = Math.min(Math.max((x + 0.5) * sx - 0.5, 0), img.width - 1)
      const x0 = Math.floor(fx)
      const x1 = Math.min(x0 + 1, img.width - 1)
      const wx = fx - x0
      for (let c = 0; c < 3; c++) {
        const p00 = img.data[3 * (y0 * img.width + x0) + c]
        const p01 = img.data[3 * (y0 * img.width + x1) + c]
        const p10 = img.data[3 * (y1 * img.width + x0) + c]
        const p11 = img.data[3 * (y1 * img.width + x1) + c]
        out[3 * (y * size + x) + c] =
          (1 - wy) * ((1 - wx) * p00 + wx * p01) + wy * ((1 - wx) * p10 + wx * p11)
      }
    }
  }
  return { width: size, height: size, data: out }
}

export function cropRect(img: Image, x: number, y: number, w: number, h: number): Image {
  const out = new Float64Array(3 * w * h)
  for (let yy = 0; yy < h; yy++) {
    for (let xx = 0; xx < w; xx++) {
      for (let c = 0; c < 3; c++) {
        out[3 * (yy * w + xx) + c] = img.data[3 * ((y + yy) * img.width + (x + xx)) + c]
      }
    }
  }
  return { width: w, height: h, data: out }
}
