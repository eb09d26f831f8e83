#!/usr/bin/env node
/** CLI entry: `ccmlab-figures --recipe <json> [--recipe <json> ...]`. */

import { loadRecipe } from "./recipe.js";
import { render } from "./render.js";

function usage(): string {
  return "usage: ccmlab-figures --recipe <recipe.json> [--recipe <more.json> ...]";
}

export function main(argv: string[]): number {
  const recipes: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--recipe") {
      const path = argv[++i];
      if (path === undefined) {
        process.stderr.write(`missing value after --recipe\n${usage()}\n`);
        return 2;
      }
      recipes.push(path);
    } else if (argv[i] === "--help" || argv[i] === "-h") {
      process.stdout.write(usage() + "\n");
      return 0;
    } else {
      process.stderr.write(`unknown argument '${argv[i]}'\n${usage()}\n`);
      return 2;
    }
  }
  if (recipes.length === 0) {
    process.stderr.write(usage() + "\n");
    return 2;
  }
  for (const path of recipes) {
    try {
      const recipe = loadRecipe(path);
      const labels = render(recipe);
      process.stdout.write(`${recipe.output}: ${labels.join(", ")}\n`);
    } catch (err) {
      process.stderr.write(`ccmlab-figures: error: ${(err as Error).message}\n`);
      return 1;
    }
  }
  return 0;
}

process.exit(main(process.argv.slice(2)));
