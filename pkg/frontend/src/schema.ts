/** Fixed CSV schema shared with the sweep CLI. */

export const COLUMNS = [
  "experiment", "D", "k", "n", "scheme", "P", "nnz", "mcerr",
  "steps_accepted", "steps_rejected", "wall_ms", "mem_bytes",
  "status", "reason",
] as const

export type Row = Record<(typeof COLUMNS)[number], string>

export class SchemaError extends Error {}

/** Minimal RFC 4180 parser (quoted fields, doubled quotes, \r\n or \n). */
export function parseCsvText(text: string): string[][] {
  const rows: string[][] = []
  let field = ""
  let row: string[] = []
  let inQuotes = false
  for (let i = 0; i < text.length; i++) {
    const ch = text[i]
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') { field += '"'; i++ } else inQuotes = false
      } else field += ch
    } else if (ch === '"') {
      inQuotes = true
    } else if (ch === ",") {
      row.push(field); field = ""
    } else if (ch === "\n") {
      if (field.endsWith("\r")) field = field.slice(0, -1)
      row.push(field); field = ""
      rows.push(row); row = []
    } else field += ch
  }
  if (field.length > 0 || row.length > 0) { row.push(field); rows.push(row) }
  return rows
}

/** Parse a sweep CSV, checking that every schema column is present. */
export function parseRows(text: string, needed: readonly string[] = COLUMNS): Row[] {
  const raw = parseCsvText(text)
  if (raw.length === 0) throw new SchemaError("empty CSV")
  const header = raw[0]
  for (const col of needed) {
    if (!header.includes(col)) throw new SchemaError(`missing column: ${col}`)
  }
  return raw.slice(1).filter(r => r.length > 1 || r[0] !== "").map(r => {
    const out: Record<string, string> = {}
    header.forEach((name, j) => { out[name] = r[j] ?? "" })
    return out as Row
  })
}

export function seriesLabel(row: Row): string {
  return `k=${row.k} ${row.scheme}`
}
