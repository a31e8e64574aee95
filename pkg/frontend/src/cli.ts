#!/usr/bin/env node
/**
 * figures <kind> --in <csv...> --out <image.svg>
 *
 * kinds: ipl_vs_b, ridge_curves, mnist_paths
 * Exit codes: 0 ok, 1 data/render error, 2 usage or schema error.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";

import { EmptyDataError, SchemaError, parseCsv } from "./csv.js";
import { FigureKind, REQUIRED_INPUTS, render } from "./figures.js";

function usage(): string {
  return "usage: figures <ipl_vs_b|ridge_curves|mnist_paths> " +
         "--in <csv...> --out <image.svg>";
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  const inputs: string[] = [];
  let out: string | null = null;
  while (args.length > 0) {
    const a = args.shift()!;
    if (a === "--in") {
      while (args.length > 0 && !args[0].startsWith("--")) {
        inputs.push(args.shift()!);
      }
    } else if (a === "--out") {
      out = args.shift() ?? null;
    } else {
      console.error(`unknown argument '${a}'\n${usage()}`);
      return 2;
    }
  }
  if (!kind || !(kind in REQUIRED_INPUTS)) {
    console.error(usage());
    return 2;
  }
  const need = REQUIRED_INPUTS[kind as FigureKind];
  if (inputs.length < need.length || !out) {
    console.error(`${kind} needs ${need.length} input CSV(s) ` +
                  `(${need.join(", ")}) and --out\n${usage()}`);
    return 2;
  }
  try {
    const tables = inputs.map((p) => parseCsv(readFileSync(p, "utf-8")));
    const svg = render(kind as FigureKind, tables);
    mkdirSync(dirname(out), { recursive: true });
    writeFileSync(out, svg, "utf-8");
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    if (err instanceof EmptyDataError) {
      console.error(`empty data: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
