import { readFileSync, writeFileSync } from "node:fs";

import { FigureSpec, render } from "./plot.js";

/** CLI: render --spec <file.json> [--hash-out <file.json>]
 * The spec file holds one FigureSpec or an array of them. */
function main(argv: string[]): number {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      console.error("usage: render --spec <file.json> [--hash-out <file.json>]");
      return 2;
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  const specPath = args.get("spec");
  if (!specPath) {
    console.error("missing --spec");
    return 2;
  }
  let specs: FigureSpec[];
  try {
    const parsed = JSON.parse(readFileSync(specPath, "utf8"));
    specs = Array.isArray(parsed) ? parsed : [parsed];
  } catch (err) {
    console.error(`cannot parse spec: ${(err as Error).message}`);
    return 2;
  }
  const hashes: Record<string, string> = {};
  for (const spec of specs) {
    try {
      const result = render(spec);
      hashes[result.output] = result.dataHash;
      console.log(`wrote ${result.output} (${result.series.join(", ")})`);
    } catch (err) {
      console.error(`render failed: ${(err as Error).message}`);
      return 1;
    }
  }
  const hashOut = args.get("hash-out");
  if (hashOut) {
    writeFileSync(hashOut, JSON.stringify(hashes, null, 2) + "\n");
  }
  return 0;
}

process.exit(main(process.argv.slice(2)));
