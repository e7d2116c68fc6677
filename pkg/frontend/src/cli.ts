#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";

import { renderFromContents } from "./render.js";
import { PlotKind, PlotSpec } from "./types.js";

const USAGE = `usage: tark-figures --kind <convergence|polyfit|ridge_compare> \\
    --input <trace.csv | sidecar.json> --out <figure.svg> [--labels <json>] [--title <text>]`;

export function parseArgs(argv: string[]): PlotSpec {
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let labels: Record<string, string> | undefined;
  let title: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`${arg} needs a value`);
      return argv[i];
    };
    switch (arg) {
      case "--kind":
        kind = next();
        break;
      case "--input":
        input = next();
        break;
      case "--out":
        output = next();
        break;
      case "--labels":
        labels = JSON.parse(next());
        break;
      case "--title":
        title = next();
        break;
      default:
        throw new Error(`unknown argument ${arg}\n${USAGE}`);
    }
  }
  if (!kind || !input || !output) {
    throw new Error(`--kind, --input and --out are required\n${USAGE}`);
  }
  if (!["convergence", "polyfit", "ridge_compare"].includes(kind)) {
    throw new Error(`unknown plot kind ${kind}`);
  }
  return { kind: kind as PlotKind, input, output, labels, title };
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const contents = readFileSync(spec.input, "utf8");
    const rendered = renderFromContents(spec, contents);
    writeFileSync(spec.output, rendered);
    console.error(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
