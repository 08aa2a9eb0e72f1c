#!/usr/bin/env node
import { readFileSync, writeFileSync, existsSync } from "node:fs"

import { parseRows, Row, SchemaError } from "./schema.js"
import { buildSeries, pointCount, Series } from "./series.js"
import { renderFigure, FigureOptions } from "./svg.js"
import { benchTable } from "./table.js"

const KINDS = ["interp", "nnz", "evolve", "bench-table"] as const
type Kind = (typeof KINDS)[number]

interface Args {
  kind: Kind
  inputs: string[]
  out: string
}

export function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv
  if (!KINDS.includes(kind as Kind)) {
    throw new Error(`usage: plots <${KINDS.join("|")}> --in data.csv [--in more.csv] --out fig.svg`)
  }
  const inputs: string[] = []
  let out = ""
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === "--in") inputs.push(rest[++i])
    else if (rest[i] === "--out") out = rest[++i]
    else throw new Error(`unknown argument: ${rest[i]}`)
  }
  if (inputs.length === 0 || !out) throw new Error("need at least one --in and an --out path")
  if (/\.png$/i.test(out) && kind !== "bench-table") {
    throw new Error("PNG output is not supported by this renderer; use an .svg output path")
  }
  return { kind: kind as Kind, inputs, out }
}

function loadRows(paths: string[]): Row[] {
  return paths.flatMap(p => parseRows(readFileSync(p, "utf8")))
}

/** Fitted slopes from the sweep's sibling .json summaries, as annotation lines. */
export function slopeAnnotations(paths: string[], key: string): string[] {
  const notes: string[] = []
  for (const p of paths) {
    const jsonPath = p.replace(/\.csv$/i, ".json")
    if (!existsSync(jsonPath)) continue
    const summary = JSON.parse(readFileSync(jsonPath, "utf8"))
    const slopes = summary?.slopes?.[key] ?? {}
    for (const [label, slope] of Object.entries(slopes)) {
      if (typeof slope === "number") {
        notes.push(`fitted slope ${label}: ${slope.toFixed(2)}`)
      }
    }
  }
  return notes
}

function warnEmpty(series: Series[]): Series[] {
  for (const s of series) {
    if (pointCount(s) === 0) {
      console.warn(`warning: series "${s.label}" has no plottable rows, skipping`)
    }
  }
  return series
}

export function renderKind(kind: Kind, rows: Row[], inputs: string[]): string {
  if (kind === "bench-table") return benchTable(rows)
  let series: Series[]
  let opts: FigureOptions
  if (kind === "interp") {
    series = buildSeries(rows, "P", "mcerr")
    opts = {
      title: "Interpolation error vs coefficient count",
      xLabel: "coefficients P", yLabel: "Monte Carlo L2 error",
      xScale: "log", yScale: "log",
    }
  } else if (kind === "nnz") {
    series = buildSeries(rows, "P", "nnz")
    opts = {
      title: "Derivative operator nonzeros vs coefficient count",
      xLabel: "coefficients P", yLabel: "nnz",
      xScale: "log", yScale: "log",
      annotations: slopeAnnotations(inputs, "nnz_vs_P"),
    }
  } else {
    series = buildSeries(rows, "n", "mcerr")
    opts = {
      title: "Wave evolution error vs refinement level",
      xLabel: "level n", yLabel: "Monte Carlo L2 error",
      xScale: "linear", yScale: "log",
    }
  }
  return renderFigure(warnEmpty(series), opts)
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err))
    return 2
  }
  try {
    const rows = loadRows(args.inputs)
    writeFileSync(args.out, renderKind(args.kind, rows, args.inputs))
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`)
      return 2
    }
    console.error(String(err instanceof Error ? err.message : err))
    return 1
  }
  console.log(`wrote ${args.out}`)
  return 0
}

// invoke only when run as a script, not when imported by tests
if (process.argv[1] && /plots\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)))
}
