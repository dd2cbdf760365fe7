"""Draw symmetry lines and the symmetric orbits they cut out, as an SVG.

    python scripts/plot_symmetry_lines.py --family normalized_standard --param K=0.5 --m 0..6 --nmax 5
"""
import argparse
from pathlib import Path

from revsym import io
from revsym.cli import parse_param
from revsym.config import parse_m_range
from revsym.revmaps import builtin
from revsym.symmlines import base_lines, find_symmetric_periodic_points, symmetry_line


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", default="normalized_standard")
    p.add_argument("--param", action="append", type=parse_param, default=[], metavar="KEY=VALUE")
    p.add_argument("--m", default="0..6", help="line index range lo..hi")
    p.add_argument("--nmax", type=int, default=5, help="largest orbit period to mark")
    p.add_argument("--out", type=Path, default=Path("out/symmetry_lines.svg"))
    args = p.parse_args()

    params = dict(args.param) or ({"K": 0.5} if args.family == "normalized_standard" else {})
    f = builtin(args.family, **params).on_quotient()
    lo, hi = parse_m_range(args.m)
    base = base_lines(f)
    lines = [symmetry_line(f, m, base) for m in range(lo, hi + 1)]
    orbits = find_symmetric_periodic_points(f, args.nmax).orbits
    for L in lines:
        print(f"m={L.m}: {L.n_points} points, residual {L.max_residual:.2e}")
    print(f"{len(orbits)} symmetric orbits of period <= {args.nmax}")
    svg = io.emit_svg(lines, orbits, f.domain, base.window, title=f"{f.name} {params}")
    print("wrote", io.write_text(args.out, svg))


if __name__ == "__main__":
    main()
