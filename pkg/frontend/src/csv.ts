/**
 * Minimal RFC-4180 CSV reading plus schema validation for the experiment
 * files this tool consumes. Headers are the schema: a file is accepted only
 * if its header row matches the expected column list exactly.
 */

export class SchemaError extends Error {}
export class EmptyDataError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

/** Expected header per input file kind, mirrored from the producer. */
export const SCHEMAS: Record<string, string[]> = {
  toy_gms_ipl_summary: [
    "schema_version", "experiment", "method", "budget", "replications",
    "ipl_mean", "ipl_std_err", "seed",
  ],
  ridge_curves: [
    "schema_version", "experiment", "method", "lambda", "value", "std_err",
    "selected",
  ],
  mnist_curve: ["lambda", "val_loss", "val_acc"],
};

export function parseCsv(text: string): Table {
  const rows: string[][] = [];
  let field = "";
  let row: string[] = [];
  let inQuotes = false;
  let i = 0;
  const pushField = () => {
    row.push(field);
    field = "";
  };
  const pushRow = () => {
    pushField();
    rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += c;
      i += 1;
      continue;
    }
    if (c === '"') {
      inQuotes = true;
    } else if (c === ",") {
      pushField();
    } else if (c === "\n") {
      pushRow();
    } else if (c !== "\r") {
      field += c;
    }
    i += 1;
  }
  if (field.length > 0 || row.length > 0) pushRow();
  if (rows.length === 0) throw new EmptyDataError("CSV has no content");
  return { header: rows[0], rows: rows.slice(1) };
}

export function validateSchema(table: Table, kind: string): void {
  const expected = SCHEMAS[kind];
  if (!expected) throw new SchemaError(`unknown input kind '${kind}'`);
  const got = table.header;
  const n = Math.max(expected.length, got.length);
  for (let i = 0; i < n; i++) {
    if (expected[i] !== got[i]) {
      throw new SchemaError(
        `schema mismatch for ${kind}: column ${i} is ` +
        `'${got[i] ?? "<missing>"}', expected '${expected[i] ?? "<none>"}'`);
    }
  }
  if (table.rows.length === 0) {
    throw new EmptyDataError(`${kind}: no data rows`);
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new SchemaError(`missing column '${name}'`);
  return table.rows.map((r) => r[idx]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((v, i) => {
    const x = Number(v);
    if (!Number.isFinite(x)) {
      throw new SchemaError(`column '${name}' row ${i}: '${v}' is not finite`);
    }
    return x;
  });
}
