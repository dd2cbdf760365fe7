"""Symmetric orbits of every admissible rotation number on a twist map with boundary twist.

    python scripts/spectrum_demo.py --a "2*pi*(y - 1/4)" --qmax 6
"""
import argparse

from revsym.harness import farey_orbit_spectrum
from revsym.revmaps import twist


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", default="2*pi*(y - 1/4)", help="twist profile a(y) on 0 <= y <= 1")
    p.add_argument("--qmax", type=int, default=6)
    args = p.parse_args()

    res = farey_orbit_spectrum(twist(args.a), args.qmax)
    bt = res.boundary
    print(f"boundary displacement: lower {bt.lower:.12g}, upper {bt.upper:.12g}")
    print(f"{len(res.rationals)} admissible rationals, {len(res.entries)} orbits")
    print(f"{'p/q':>6} {'comp':>4} {'seed y':>20} {'rotation':>20} {'residual':>10}")
    for e in res.entries:
        print(f"{str(e.rational):>6} {e.component:>4} {e.orbit.seed.y:>20.15f} "
              f"{e.rotation:>20.15f} {e.orbit.residual:>10.2e}")
    for pq, comp in res.missing:
        print(f"missing: {pq} on component {comp}")


if __name__ == "__main__":
    main()
