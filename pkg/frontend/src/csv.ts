/**
 * Minimal reader for the numeric CSV files a solver run emits
 * (norms.csv and snapshot_<step>.csv). Header row of column names,
 * comma-separated numeric rows below.
 */

export class EmptyInput extends Error {
  constructor(source: string) {
    super(`no data rows in ${source}`);
    this.name = "EmptyInput";
  }
}

export class MissingColumn extends Error {
  readonly column: string;
  constructor(column: string, source: string) {
    super(`column '${column}' not found in ${source} `);
    this.name = "MissingColumn";
    this.column = column;
  }
}

export interface Table {
  source: string;
  header: string[];
  /** column-major numeric data, rows[i] aligned across columns */
  columns: Map<string, number[]>;
  rowCount: number;
}

export function parseCsv(text: string, source = "<string>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new EmptyInput(source);
  }
  const header = lines[0].split(",").map((name) => name.trim());
  if (lines.length === 1) {
    throw new EmptyInput(source);
  }
  const columns = new Map<string, number[]>(header.map((name) => [name, []]));
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new Error(`${source}:${i + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    for (let c = 0; c < header.length; c++) {
      const value = Number(parts[c]);
      if (Number.isNaN(value) && parts[c].trim() !== "nan") {
        throw new Error(`${source}:${i + 1}: cannot parse '${parts[c]}' as a number`);
      }
      columns.get(header[c])!.push(value);
    }
  }
  return { source, header, columns, rowCount: lines.length - 1 };
}

export function requireColumn(table: Table, name: string): number[] {
  const column = table.columns.get(name);
  if (column === undefined) {
    throw new MissingColumn(name, table.source);
  }
  return column;
}
