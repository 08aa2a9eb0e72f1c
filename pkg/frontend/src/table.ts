import { Row } from "./schema.js"

function fmtBytes(v: string): string {
  const b = Number(v)
  if (!isFinite(b) || v === "") return "-"
  if (b >= 1 << 30) return (b / (1 << 30)).toFixed(2) + " GiB"
  if (b >= 1 << 20) return (b / (1 << 20)).toFixed(2) + " MiB"
  if (b >= 1 << 10) return (b / (1 << 10)).toFixed(2) + " KiB"
  return b + " B"
}

function fmtMs(v: string): string {
  const ms = Number(v)
  if (!isFinite(ms) || v === "") return "-"
  return ms >= 1000 ? (ms / 1000).toFixed(2) + " s" : ms.toFixed(2) + " ms"
}

function fmtErr(v: string): string {
  const e = Number(v)
  return isFinite(e) && v !== "" ? e.toExponential(2) : "-"
}

/**
 * Benchmark rows as a markdown table: one row per level n, and a
 * (P, time, memory, error) column block per scheme. Infeasible or
 * skipped sweep rows show their status instead of numbers.
 */
export function benchTable(rows: Row[]): string {
  const schemes = [...new Set(rows.map(r => r.scheme))].sort()
  const levels = [...new Set(rows.map(r => Number(r.n)))].sort((a, b) => a - b)
  const byKey = new Map(rows.map(r => [`${r.n}|${r.scheme}`, r]))

  const header = ["n", ...schemes.flatMap(s =>
    [`P (${s})`, `time (${s})`, `memory (${s})`, `error (${s})`])]
  const lines = [
    "| " + header.join(" | ") + " |",
    "|" + header.map(() => " --- ").join("|") + "|",
  ]
  for (const n of levels) {
    const cells = [String(n)]
    for (const s of schemes) {
      const row = byKey.get(`${n}|${s}`)
      if (!row) {
        cells.push("-", "-", "-", "-")
      } else if (row.status !== "ok") {
        cells.push(row.P || "-", row.status, fmtBytes(row.mem_bytes), "-")
      } else {
        cells.push(row.P, fmtMs(row.wall_ms), fmtBytes(row.mem_bytes),
                   fmtErr(row.mcerr))
      }
    }
    lines.push("| " + cells.join(" | ") + " |")
  }
  return lines.join("\n") + "\n"
}
