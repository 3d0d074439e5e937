"""Run the full constellation sweep and print the per-cell summary.

Usage: python3 scripts/run_sweep.py [--config configs/sweep.json] [--out results]
"""

import argparse
import pathlib
import sys
import time

from tvmcf.analysis import format_table, rows_to_csv, run_experiment, summarize
from tvmcf.config import parse_config

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "sweep.json"))
    ap.add_argument("--out", default="results")
    ap.add_argument("--timings", action="store_true")
    args = ap.parse_args()

    grid = parse_config(pathlib.Path(args.config).read_text())
    start = time.perf_counter()
    report = run_experiment(
        grid, timings=args.timings,
        progress=lambda r: print(f"k={r.k} T={r.T} trial={r.trial} eps={r.epsilon:.4f}", file=sys.stderr))
    elapsed = time.perf_counter() - start

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.csv").write_text(rows_to_csv(report.rows))
    print(format_table(summarize(report.rows)))
    print(f"cells={len(report.rows)} failures={len(report.failures)} elapsed={elapsed:.1f}s")
    for f in report.failures:
        print(f"failed k={f.k} T={f.T} trial={f.trial}: {f.error}", file=sys.stderr)
    return 1 if report.failures else 0


if __name__ == "__main__":
    sys.exit(main())
