import { Row, seriesLabel } from "./schema.js"

export interface Point { x: number; y: number }

export interface Series {
  label: string
  /** Runs of consecutive ok rows; infeasible/skipped rows break the line. */
  runs: Point[][]
}

/**
 * Group rows into one series per (k, scheme), ordered by level n inside
 * each series. Non-ok rows are never plotted and leave a visible gap:
 * a run boundary, not an interpolated segment.
 */
export function buildSeries(rows: Row[], xcol: keyof Row, ycol: keyof Row): Series[] {
  const byLabel = new Map<string, Row[]>()
  for (const row of rows) {
    const label = seriesLabel(row)
    if (!byLabel.has(label)) byLabel.set(label, [])
    byLabel.get(label)!.push(row)
  }
  const out: Series[] = []
  for (const [label, group] of byLabel) {
    group.sort((a, b) => Number(a.n) - Number(b.n))
    const runs: Point[][] = []
    let run: Point[] = []
    for (const row of group) {
      const x = Number(row[xcol])
      const y = Number(row[ycol])
      if (row.status === "ok" && isFinite(x) && isFinite(y)) {
        run.push({ x, y })
      } else if (run.length > 0) {
        runs.push(run); run = []
      }
    }
    if (run.length > 0) runs.push(run)
    out.push({ label, runs })
  }
  return out
}

export function pointCount(s: Series): number {
  return s.runs.reduce((acc, r) => acc + r.length, 0)
}
