"""Graph sizes and timings of the baseline vs improved algorithms, per buffer family.

Columns: catastrophic-cycle detection time (transitive closure vs SCC),
construction time of G' (Floyd-Warshall vs reversed 0/1 Dijkstra), each the best of three runs, and
node/edge counts of G and G'.
Absolute times are machine-dependent; the speedup column is what to compare.
"""
import argparse
import csv
import sys

from pafas.cli import BENCH_COLUMNS, bench_rows, parse_range
from pafas.semantics import default_cap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", default="pipe,buff")
    ap.add_argument("--sizes", type=parse_range, default=parse_range("1..5"))
    ap.add_argument("--baseline-limit", type=int, default=3000)
    ap.add_argument("--csv", help="also write all rows to this CSV file")
    args = ap.parse_args()
    rows = []
    for fam in args.families.split(","):
        for row in bench_rows(fam, args.sizes, default_cap(), args.baseline_limit):
            rows.append(row)
            print("  ".join(f"{c}={row[c]}" for c in BENCH_COLUMNS if row[c] != ""), flush=True)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {args.csv}", file=sys.stderr)


if __name__ == "__main__":
    main()
