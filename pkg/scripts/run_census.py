"""Count symmetric periodic orbits of period <= N for a range of N.

    python scripts/run_census.py --family normalized_standard --param K=0.5 --nmax 14
    python scripts/run_census.py --family rigid_annulus_rotation --param alpha=1.4142135623730951 --nmax 20
"""
import argparse
from pathlib import Path

from revsym import io
from revsym.cli import parse_param
from revsym.harness import dichotomy_census
from revsym.revmaps import builtin


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", default="normalized_standard")
    p.add_argument("--param", action="append", type=parse_param, default=[], metavar="KEY=VALUE")
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--nmax", type=int, default=14)
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--out", type=Path, help="write census.csv and census.json here")
    args = p.parse_args()

    params = dict(args.param) or ({"K": 0.5} if args.family == "normalized_standard" else {})
    f = builtin(args.family, **params)
    res = dichotomy_census(f, args.nmax, args.nmin, args.resolution)

    print(f"{f.name} {params}  ({res.runtime_s:.2f} s)")
    print(f"{'N':>3} {'all':>6} {'odd':>6} {'interior':>9}")
    for r in res.rows:
        print(f"{r.max_period:>3} {r.count_all:>6} {r.count_odd:>6} {r.count_interior:>9}")
    counts = res.column("count_all")
    if any(counts):
        grows = all(b > a for a, b in zip(counts, counts[1:]))
        print("strictly increasing" if grows else "not strictly increasing")
    for w in res.warnings:
        print("warning:", w)
    if args.out:
        io.write_text(args.out / "census.csv", io.census_csv(res))
        rows = [{"N": r.max_period, "count_all": r.count_all, "count_odd": r.count_odd,
                 "count_interior": r.count_interior} for r in res.rows]
        io.write_text(args.out / "census.json", io.dumps({"map": f.describe(), "rows": rows}))


if __name__ == "__main__":
    main()
