#!/usr/bin/env node
/**
 * figures spectrum <report.json> -o <out.svg|png>
 * figures bands    <report.json> -o <out.svg|png>
 */

import { plotBands, plotSpectrum } from "./plots";

function usage(): never {
  process.stderr.write("usage: figures spectrum|bands <report.json> -o <out.svg|png>\n");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length < 2) usage();
  const [command, reportPath, ...rest] = argv;
  let outPath = "";
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === "-o" || rest[i] === "--out") {
      outPath = rest[i + 1] ?? "";
      i++;
    }
  }
  if (!outPath) usage();
  try {
    if (command === "spectrum") {
      plotSpectrum(reportPath, outPath);
    } else if (command === "bands") {
      plotBands(reportPath, outPath);
    } else {
      usage();
    }
  } catch (err) {
    process.stderr.write(`figures: ${err instanceof Error ? err.message : err}\n`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
