"""Run the benchmark tables and print each results CSV.

    python3 scripts/run_tables.py --tables 2 3 --scale desk --seed 0 --out results

Set HQMM_WORKERS to train grid cells in parallel.
"""
import argparse
import time

from hqmm.experiments import SCALES, TABLES, results_csv, run_experiment, table_spec


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tables", type=int, nargs="+", default=sorted(TABLES), choices=sorted(TABLES))
    p.add_argument("--scale", choices=sorted(SCALES), default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    args = p.parse_args()
    for table in args.tables:
        start = time.perf_counter()
        rows = run_experiment(table_spec(table, args.scale, args.seed, args.out))
        print(f"# table {table} ({args.scale}, seed {args.seed}) in {time.perf_counter() - start:.0f}s")
        print(results_csv(rows))


if __name__ == "__main__":
    main()
