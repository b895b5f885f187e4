// Command line: profiles | rates | field

import { plotProfiles } from "./profiles.js";
import { formatRateTable, rateTable } from "./rates.js";
import { fieldMap } from "./vtk.js";

function usage(): never {
  console.error(
    [
      "usage:",
      "  plot profiles --out FIG.svg [--field NAME] LABEL=PROFILE.csv [LABEL=PROFILE.csv ...]",
      "  plot rates CONVERGENCE.csv [--out TABLE.svg] [--text TABLE.txt]",
      "  plot field FIELD.vtk --field NAME --out MAP.svg",
    ].join("\n"),
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  const opts = new Map<string, string>();
  const positional: string[] = [];
  for (let i = 0; i < rest.length; i++) {
    if (rest[i].startsWith("--")) {
      opts.set(rest[i].slice(2), rest[i + 1] ?? "");
      i++;
    } else {
      positional.push(rest[i]);
    }
  }
  try {
    if (cmd === "profiles") {
      const out = opts.get("out");
      if (!out || positional.length === 0) usage();
      const labels = positional.map((p) => p.split("=", 1)[0]);
      const inputs = positional.map((p) => p.slice(p.indexOf("=") + 1));
      plotProfiles({ inputs, labels, output: out, field: opts.get("field") });
      console.log(`wrote ${out}`);
      return 0;
    }
    if (cmd === "rates") {
      if (positional.length !== 1) usage();
      const entries = rateTable({
        input: positional[0],
        svgOutput: opts.get("out"),
        textOutput: opts.get("text"),
      });
      console.log(formatRateTable(entries));
      return 0;
    }
    if (cmd === "field") {
      const out = opts.get("out");
      const field = opts.get("field");
      if (!out || !field || positional.length !== 1) usage();
      fieldMap({ input: positional[0], field, output: out });
      console.log(`wrote ${out}`);
      return 0;
    }
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  usage();
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
