import { Series, pointCount } from "./series.js"

// fixed style table so regenerated figures stay comparable across runs
export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
]
export const MARKERS = ["circle", "square", "diamond", "triangle"] as const

export interface FigureOptions {
  title: string
  xLabel: string
  yLabel: string
  xScale: "log" | "linear"
  yScale: "log" | "linear"
  /** extra text lines drawn in the lower-left corner */
  annotations?: string[]
}

const W = 640
const H = 480
const M = { left: 78, right: 24, top: 40, bottom: 56 }

interface Scale {
  (v: number): number
  ticks: number[]
  format(v: number): string
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
}

function makeScale(values: number[], kind: "log" | "linear",
                   lo: number, hi: number): Scale {
  let min = Math.min(...values)
  let max = Math.max(...values)
  if (kind === "log") {
    // pad by a fixed factor; decade ticks
    min /= 1.3
    max *= 1.3
    const lmin = Math.log10(min)
    const lmax = Math.log10(max)
    const f = (v: number) =>
      lo + ((Math.log10(v) - lmin) / (lmax - lmin)) * (hi - lo)
    const ticks: number[] = []
    for (let e = Math.ceil(lmin); e <= Math.floor(lmax); e++) ticks.push(10 ** e)
    const scale = f as Scale
    scale.ticks = ticks
    scale.format = v => {
      const e = Math.round(Math.log10(v))
      return `1e${e}`
    }
    return scale
  }
  if (min === max) { min -= 1; max += 1 }
  const pad = 0.05 * (max - min)
  min -= pad
  max += pad
  const f = (v: number) => lo + ((v - min) / (max - min)) * (hi - lo)
  const step = niceStep(max - min)
  const ticks: number[] = []
  for (let t = Math.ceil(min / step) * step; t <= max + 1e-12; t += step)
    ticks.push(Number(t.toFixed(10)))
  const scale = f as Scale
  scale.ticks = ticks
  scale.format = v => String(v)
  return scale
}

function niceStep(span: number): number {
  const raw = span / 6
  const mag = 10 ** Math.floor(Math.log10(raw))
  for (const m of [1, 2, 5, 10]) if (raw <= m * mag) return m * mag
  return 10 * mag
}

function markerPath(kind: string, x: number, y: number, r: number): string {
  switch (kind) {
    case "square":
      return `<rect x="${x - r}" y="${y - r}" width="${2 * r}" height="${2 * r}"/>`
    case "diamond":
      return `<path d="M ${x} ${y - r} L ${x + r} ${y} L ${x} ${y + r} L ${x - r} ${y} Z"/>`
    case "triangle":
      return `<path d="M ${x} ${y - r} L ${x + r} ${y + r} L ${x - r} ${y + r} Z"/>`
    default:
      return `<circle cx="${x}" cy="${y}" r="${r}"/>`
  }
}

/** Render series into a standalone SVG document. */
export function renderFigure(series: Series[], opts: FigureOptions): string {
  const drawn = series.filter(s => pointCount(s) > 0)
  const xs = drawn.flatMap(s => s.runs.flat().map(p => p.x))
  const ys = drawn.flatMap(s => s.runs.flat().map(p => p.y))
  if (xs.length === 0) throw new Error("no plottable points")
  const sx = makeScale(xs, opts.xScale, M.left, W - M.right)
  const sy = makeScale(ys, opts.yScale, H - M.bottom, M.top)

  const parts: string[] = []
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif" font-size="12">`)
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`)
  parts.push(`<text x="${W / 2}" y="22" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`)

  // axes box and ticks
  parts.push(`<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="black"/>`)
  for (const t of sx.ticks) {
    const x = sx(t)
    parts.push(`<line x1="${x}" y1="${H - M.bottom}" x2="${x}" y2="${H - M.bottom + 5}" stroke="black"/>`)
    parts.push(`<line x1="${x}" y1="${M.top}" x2="${x}" y2="${H - M.bottom}" stroke="#dddddd"/>`)
    parts.push(`<text x="${x}" y="${H - M.bottom + 20}" text-anchor="middle">${sx.format(t)}</text>`)
  }
  for (const t of sy.ticks) {
    const y = sy(t)
    parts.push(`<line x1="${M.left - 5}" y1="${y}" x2="${M.left}" y2="${y}" stroke="black"/>`)
    parts.push(`<line x1="${M.left}" y1="${y}" x2="${W - M.right}" y2="${y}" stroke="#dddddd"/>`)
    parts.push(`<text x="${M.left - 9}" y="${y + 4}" text-anchor="end">${sy.format(t)}</text>`)
  }
  parts.push(`<text x="${(M.left + W - M.right) / 2}" y="${H - 14}" text-anchor="middle">${esc(opts.xLabel)}</text>`)
  parts.push(`<text x="20" y="${(M.top + H - M.bottom) / 2}" text-anchor="middle" transform="rotate(-90 20 ${(M.top + H - M.bottom) / 2})">${esc(opts.yLabel)}</text>`)

  drawn.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]
    const marker = MARKERS[i % MARKERS.length]
    for (const run of s.runs) {
      if (run.length > 1) {
        const pts = run.map(p => `${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`).join(" ")
        parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`)
      }
      parts.push(`<g fill="${color}" data-series="${esc(s.label)}">`)
      for (const p of run) parts.push(markerPath(marker, sx(p.x), sy(p.y), 3.5))
      parts.push(`</g>`)
    }
  })

  // legend, top-right inside the axes box
  const lx = W - M.right - 130
  let ly = M.top + 14
  for (let i = 0; i < drawn.length; i++) {
    const color = PALETTE[i % PALETTE.length]
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="1.5"/>`)
    parts.push(markerPath(MARKERS[i % MARKERS.length], lx + 11, ly - 4, 3.5)
      .replace("/>", ` fill="${color}"/>`))
    parts.push(`<text x="${lx + 28}" y="${ly}">${esc(drawn[i].label)}</text>`)
    ly += 16
  }

  let ay = H - M.bottom - 10 - 14 * ((opts.annotations?.length ?? 1) - 1)
  for (const note of opts.annotations ?? []) {
    parts.push(`<text x="${M.left + 8}" y="${ay}" fill="#444444">${esc(note)}</text>`)
    ay += 14
  }

  parts.push("</svg>")
  return parts.join("\n")
}
