"""Regenerate the plot-ready CSV for every recipe in configs/.

    python3 scripts/reproduce_figures.py [--out results/] [--only fig5a fig9]

Each recipe's ``[recipe]`` table names the subcommand and its extra
arguments; recipes with several ``runs`` write one CSV per run.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from mmblockage.cli import main
from mmblockage.config import load_config

ROOT = Path(__file__).resolve().parents[1]


def recipe_invocations(path: Path) -> list[tuple[str, list[str]]]:
    recipe = load_config(path).recipe
    command = recipe["command"]
    runs = recipe.get("runs") or [recipe.get("args", [])]
    if command == "hex":
        extra = ["--density", *map(str, recipe["densities"])]
    else:
        extra = []
    out = []
    for i, args in enumerate(runs):
        suffix = "" if len(runs) == 1 else "_" + "_".join(a.lstrip("-") for a in args if not a.startswith("--"))
        out.append((path.stem + suffix, [command, "--config", str(path), *args, *extra]))
    return out


def main_script(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--only", nargs="*", help="recipe names, e.g. fig5a fig11")
    args = ap.parse_args(argv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    for path in sorted((ROOT / "configs").glob("fig*.toml")):
        if args.only and path.stem not in args.only:
            continue
        for name, cli_args in recipe_invocations(path):
            target = out_dir / f"{name}.csv"
            t0 = time.perf_counter()
            rc = main([*cli_args, "--out", str(target)])
            print(f"{name:<28} rc={rc} {time.perf_counter() - t0:6.1f} s -> {target}")
            status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main_script())
