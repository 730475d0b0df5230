"""Render every plot bundle found in a run directory with matplotlib."""

import argparse
import runpy
from pathlib import Path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir")
    args = ap.parse_args()
    scripts = sorted(Path(args.run_dir).glob("plot_fig*.py"))
    if not scripts:
        raise SystemExit(f"no plot_fig*.py in {args.run_dir}; run an experiment script first")
    for s in scripts:
        runpy.run_path(str(s), run_name="__main__")
        print(f"rendered {s.stem[5:]}")


if __name__ == "__main__":
    main()
