"""Command-line entry point.

    revsym [command] --config run.toml [--out DIR] [--format json,csv,svg]

Exit status: 0 success, 1 bad configuration, 2 a validation check failed,
3 a predicted object was not found (falsification candidate).
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import (COMMANDS, FORMATS, ConfigError, MapConfig, NumericConfig,
                     OutputConfig, RunConfig, check_numeric, build_map, load_config,
                     parse_m_range)
from .domains import DomainError, reflect_xy
from .harness import (FalsificationCandidate, LiftedMap, dichotomy_census,
                      disk_symmetric_fixed_points, farey_orbit_spectrum, twist_criterion)
from .revmaps import (MapError, validate_area, validate_involution, validate_inverse,
                      validate_reversibility)
from .symmlines import (NoRootsError, RefinementBudgetError, base_lines,
                        find_symmetric_periodic_points, symmetry_line)
from .winding import WindingError, fixed_point_index

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_FALSIFIED = 0, 1, 2, 3

log = logging.getLogger("revsym")


class ValidationFailure(RuntimeError):
    pass


@dataclass
class Outcome:
    status: int = EXIT_OK
    files: list[Path] = field(default_factory=list)
    message: str = ""


class _Writer:
    def __init__(self, cfg: RunConfig):
        self.dir = Path(cfg.output.directory)
        self.formats = set(cfg.output.formats)
        self.files: list[Path] = []

    def __call__(self, fmt: str, name: str, text: str):
        if fmt in self.formats:
            self.files.append(io.write_text(self.dir / name, text))


def _header(cfg: RunConfig, f) -> dict:
    return {
        "schema_version": io.SCHEMA_VERSION,
        "tool_version": io.TOOL_VERSION,
        "command": cfg.command,
        "seed": cfg.numeric.seed,
        "map": f.describe(),
    }


# ---------------------------------------------------------------------------
# commands

def _validate(cfg, f, out) -> int:
    num = cfg.numeric
    reports = [
        validate_reversibility(f, num.n_samples, num.validation_tol),
        validate_inverse(f, num.n_samples, num.validation_tol),
        validate_involution(f, num.n_samples, num.validation_tol),
        validate_area(f, num.n_samples, num.area_tol),
    ]
    required = reports[:3] + (reports[3:] if f.flags.area_preserving else [])
    ok = all(r.passed for r in required)
    doc = _header(cfg, f) | {"reports": [r.as_dict() for r in reports], "passed": ok}
    out("json", "validate.json", io.dumps(doc))
    for r in reports:
        log.info("%-22s max residual %.3e (tol %.0e) %s", r.check, r.max_residual, r.tolerance,
                 "ok" if r.passed else "FAIL")
    return EXIT_OK if ok else EXIT_VALIDATION


def _symmlines(cfg, f, out) -> int:
    if not f.flags.orientation_preserving:
        raise ValidationFailure("symmetry lines are curves only for orientation-preserving maps")
    g = f.on_quotient()
    lo, hi = cfg.numeric.m
    base = base_lines(g, cfg.numeric.resolution)
    lines, notes = [], []
    for m in range(lo, hi + 1):
        try:
            lines.append(symmetry_line(g, m, base, line_tol=cfg.numeric.line_tol))
        except RefinementBudgetError as exc:
            notes.append(str(exc))
            break
    for L in lines:
        meta = {"m": L.m, "provenance": L.provenance, "max_residual": io._real(L.max_residual)}
        out("csv", f"symmetry_line_m{L.m}.csv",
            io.polyline_csv([p.points for p in L.pieces], closed=False, meta=meta))
    out("svg", "symmetry_lines.svg",
        io.emit_svg(lines, [], g.domain, g.base_window(), title=f"symmetry lines of {g.name}"))
    doc = _header(cfg, f) | {
        "lines": [{"m": L.m, "provenance": L.provenance, "n_points": L.n_points,
                   "max_residual": L.max_residual} for L in lines],
        "warnings": notes,
    }
    out("json", "symmetry_lines.json", io.dumps(doc))
    return EXIT_OK


def _orbits(cfg, f, out) -> int:
    num = cfg.numeric
    cat = find_symmetric_periodic_points(f, num.N_max, resolution=num.resolution,
                                         tol=num.orbit_tol, keep_lines=True)
    doc = io.OrbitCatalogDocument.from_catalog(f, cat)
    out("json", "orbits.json", doc.emit())
    rows = ["period,x,y,witness_high,witness_low,residual,symmetric_residual,interior"]
    rows += [f"{o.period},{io._real(o.seed.x)},{io._real(o.seed.y)},{o.witness[0]},{o.witness[1]},"
             f"{io._real(o.residual)},{io._real(o.symmetric_residual)},{str(o.interior).lower()}"
             for o in cat.orbits]
    out("csv", "orbits.csv", "\n".join(rows) + "\n")
    g = f.on_quotient()
    shown = [cat.lines[m] for m in sorted(cat.lines)] if cat.lines else []
    out("svg", "orbits.svg", io.emit_svg(shown, cat.orbits, g.domain, g.base_window(),
                                          title=f"symmetric periodic orbits of {g.name}"))
    log.info("%d orbits with period <= %d", len(cat.orbits), num.N_max)
    return EXIT_OK


def _twist(cfg, f, out) -> int:
    doc = _header(cfg, f)
    if f.domain.is_disk:
        try:
            found = disk_symmetric_fixed_points(f, tol=cfg.numeric.orbit_tol)
        except NoRootsError as exc:
            raise FalsificationCandidate(str(exc)) from None
        interior = [o for o in found if o.interior]
        doc["disk_fixed_points"] = [o.as_dict() for o in found]
        out("json", "twist.json", io.dumps(doc))
        if not interior:
            raise FalsificationCandidate(f"no interior symmetric fixed point found for {f.name}")
        return EXIT_OK
    rep = twist_criterion(f, tol=cfg.numeric.orbit_tol)
    doc["components"] = [{
        "component_id": c.component_id, "x": c.x, "intersects": c.intersects,
        "interior": c.interior, "witness": None if c.witness is None else list(c.witness),
        "fixed_points": [list(p) for p in c.fixed_points], "crossings": c.crossings,
    } for c in rep.components]
    bt = rep.boundary
    doc["boundary_twist"] = None if bt is None else {
        "lower": bt.lower, "upper": bt.upper, "satisfied": bt.satisfied}
    out("json", "twist.json", io.dumps(doc))
    lost = [c.component_id for c in rep.components if c.intersects and c.witness is None]
    if bt is not None and bt.satisfied:
        lost += [c.component_id for c in rep.components
                 if c.witness is None or not f.on_quotient().domain.contains(c.witness, True)]
    if lost:
        raise FalsificationCandidate(f"predicted symmetric fixed point missing on components "
                                     f"{sorted(set(lost))}")
    return EXIT_OK


def _spectrum(cfg, f, out) -> int:
    F = LiftedMap.of(f)
    try:
        res = farey_orbit_spectrum(F, cfg.numeric.q_max, tol=cfg.numeric.orbit_tol)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None
    doc = _header(cfg, f) | {
        "q_max": cfg.numeric.q_max,
        "interval": [res.boundary.lower, res.boundary.upper],
        "rationals": [str(r) for r in res.rationals],
        "orbits": [{"rational": str(e.rational), "component": e.component,
                    "rotation": e.rotation} | e.orbit.as_dict() for e in res.entries],
        "missing": [{"rational": str(r), "component": c} for r, c in res.missing],
    }
    out("json", "spectrum.json", io.dumps(doc))
    if res.missing:
        raise FalsificationCandidate(f"{len(res.missing)} predicted orbits not found")
    return EXIT_OK


def _census(cfg, f, out) -> int:
    res = dichotomy_census(f, cfg.numeric.N_max, cfg.numeric.N_min, cfg.numeric.resolution)
    out("csv", "census.csv", io.census_csv(res))
    doc = _header(cfg, f) | {
        "rows": [{"N": r.max_period, "count_all": r.count_all, "count_odd": r.count_odd,
                  "count_interior": r.count_interior} for r in res.rows],
        "degenerate": res.degenerate,
        "warnings": res.warnings,
    }
    out("json", "census.json", io.dumps(doc))
    return EXIT_OK


def _index(cfg, f, out) -> int:
    num = cfg.numeric
    if num.center is not None:
        centers = [np.array(num.center)]
    else:
        cat = find_symmetric_periodic_points(f, 1, resolution=num.resolution, tol=num.orbit_tol)
        centers = [np.array(o.seed) for o in cat.orbits if o.interior]
    entries = []
    for z in centers:
        try:
            a = fixed_point_index(f, z, num.radius)
            b = fixed_point_index(f, reflect_xy(z), num.radius)
        except WindingError as exc:
            raise ValidationFailure(str(exc)) from None
        entries.append({
            "point": [float(z[0]), float(z[1])],
            "index": a.integer if a.is_integer_certified else None,
            "mirror_index": b.integer if b.is_integer_certified else None,
            "certified": a.is_integer_certified and b.is_integer_certified,
            "turning": [a.value, b.value],
        })
    doc = _header(cfg, f) | {"radius": num.radius, "indices": entries}
    out("json", "index.json", io.dumps(doc))
    return EXIT_OK


HANDLERS = {
    "validate": _validate, "symmlines": _symmlines, "orbits": _orbits, "twist": _twist,
    "spectrum": _spectrum, "census": _census, "index": _index,
}


def run(cfg: RunConfig) -> Outcome:
    """Execute the configured command and write its outputs."""
    out = _Writer(cfg)
    try:
        f = cfg.build_map()
        status = HANDLERS[cfg.command](cfg, f, out)
        return Outcome(status, out.files)
    except FalsificationCandidate as exc:
        return Outcome(EXIT_FALSIFIED, out.files, str(exc))
    except (ValidationFailure, NoRootsError, MapError, DomainError) as exc:
        return Outcome(EXIT_VALIDATION, out.files, str(exc))
    except ValueError as exc:
        # preconditions of the library (orientation, boundary twist, domain kind)
        return Outcome(EXIT_VALIDATION, out.files, str(exc))


# ---------------------------------------------------------------------------
# argument handling

def parse_param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revsym", description="Symmetric periodic orbits of "
                                "reversible planar maps.")
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config command")
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--family", help="builtin map family, when no config file is given")
    p.add_argument("--param", action="append", type=parse_param, default=[], metavar="KEY=VALUE",
                   help="builtin map parameter (repeatable)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", help="comma-separated subset of json,csv,svg")
    p.add_argument("--jobs", type=int, default=1,
                   help="accepted for compatibility; work is vectorized in one process")
    p.add_argument("--m", help="symmetry-line index range, e.g. 0..6")
    p.add_argument("--qmax", type=int, help="largest denominator for spectrum")
    p.add_argument("--nmax", type=int, help="largest period for orbits and census")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.command:
        cfg.command = args.command
    if args.out:
        cfg.output.directory = str(args.out)
    if args.format:
        fmts = [s.strip() for s in args.format.split(",") if s.strip()]
        if not fmts or any(s not in FORMATS for s in fmts):
            raise ConfigError(f"--format must be a subset of {','.join(FORMATS)}")
        cfg.output.formats = fmts
    if args.m:
        cfg.numeric.m = parse_m_range(args.m)
    if args.qmax is not None:
        cfg.numeric.q_max = args.qmax
    if args.nmax is not None:
        cfg.numeric.N_max = args.nmax
    check_numeric("", cfg.numeric)
    return cfg


def _config_from_args(args) -> RunConfig:
    if args.config is not None:
        if args.family or args.param:
            raise ConfigError("--family/--param cannot be combined with --config")
        return load_config(args.config)
    if not args.family:
        raise ConfigError("give --config or --family")
    if not args.command:
        raise ConfigError("a command is required without --config")
    mc = MapConfig(family=args.family, params=dict(args.param))
    try:
        build_map(mc, None)
    except (MapError, DomainError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot build map: {exc}") from None
    return RunConfig(args.command, mc, None, NumericConfig(), OutputConfig())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _apply_overrides(_config_from_args(args), args)
    except ConfigError as exc:
        print(f"revsym: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outcome = run(cfg)
    for path in outcome.files:
        log.info("wrote %s", path)
    if outcome.message:
        print(f"revsym: {outcome.message}", file=sys.stderr)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
