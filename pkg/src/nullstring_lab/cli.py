"""Command-line front end: classify, verify and scan metric definition files."""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .catalog import (
    FAMILIES,
    SamplingFailure,
    analyze_point,
    default_metric_file,
    describe,
    family_seed,
    killing_residual,
    null_killing_congruence,
    parse_metric_file,
    serialize_metric_file,
)
from .classify import ZERO_TOL, classify_curvature, parse_symbol
from .curvature import einstein_residual
from .errors import IllConditioned, MetricFileError, NullStringLabError, SingularPoint

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SAMPLING = 0, 1, 2, 3
SEED_ENV = "NULLSTRING_LAB_SEED"

EINSTEIN_TOL = 1e-10
KILLING_TOL = 1e-10
MASTER_TOL = 1e-10
TYPE3_TOL = 1e-10


class InputError(NullStringLabError):
    pass


# JSON ------------------------------------------------------------------------------

def _plain(v):
    """JSON-ready copy: complex -> [re, im], numpy scalars/arrays -> Python."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [_plain(float(v.real)), _plain(float(v.imag))]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def dumps(report):
    # float repr is the shortest round-trip form, so the output is deterministic
    return json.dumps(_plain(report), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


# inputs ---------------------------------------------------------------------------

def load(path, mode=None):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8") from None
    mf = parse_metric_file(text)
    if mode:
        mf.mode = mode
    return mf, mf.instance(), hashlib.sha256(raw).hexdigest()


def resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _header(command, inst, digest, seed):
    return {
        "schemaVersion": SCHEMA_VERSION,
        "toolVersion": __version__,
        "command": command,
        "family": inst.id,
        "inputDigest": "sha256:" + digest,
        "mode": inst.mode,
        "seed": seed,
    }


def _curvature_summary(curv):
    return {"Cup": curv.Cup, "Cdown": curv.Cdown, "R": curv.R,
            "maxTracelessRicci": float(np.max(np.abs(curv.ricci))), "scale": curv.scale()}


# classify ---------------------------------------------------------------------------

def run_classify(inst, digest, points, seed):
    pts = inst.sample(points, family_seed(inst.id, seed))
    per_point, reduced = [], []
    for k, pt in enumerate(pts):
        entry = {"index": k, "point": pt}
        try:
            res = analyze_point(inst, pt)
        except (IllConditioned, SingularPoint) as exc:
            entry.update(sd=None, asd=None, symbol=None, flags=[f"{type(exc).__name__}: {exc}"])
            per_point.append(entry)
            continue
        sym = res.symbol
        entry.update(
            curvature=_curvature_summary(res.curvature), sd=res.sd.label, asd=res.asd.label,
            symbol=sym.render(), flags=res.flags,
        )
        reduced.append(sym.complexified().render())
        per_point.append(entry)
    if not reduced:
        raise SamplingFailure("no sample point could be classified")
    modal = max(sorted(set(reduced)), key=reduced.count)
    claimed = inst.family.claimed_symbol
    matching = sum(
        1 for e in per_point if e["symbol"] is not None and parse_symbol(e["symbol"]).matches(claimed)
    )
    report = {
        "pointsSampled": len(pts),
        "perPoint": per_point,
        "aggregate": {"symbol": modal, "confidence": reduced.count(modal) / len(pts)},
        "claimed": {"symbol": inst.family.claimed, "fractionMatching": matching / len(pts)},
    }
    return report, EXIT_OK


# verify -----------------------------------------------------------------------------

def check_congruences(inst, pts):
    worst, failures = 0.0, []
    for k, pt in enumerate(pts):
        res = analyze_point(inst, pt)
        for decl, rep in res.reports:
            worst = max(worst, rep.residual / rep.scale)
            if not rep.verified:
                failures.append(f"point {k}: {decl.name} residual {rep.residual:.3g}")
            if decl.expected and rep.flag != decl.expected:
                failures.append(f"point {k}: {decl.name} is {rep.flag}, declared {decl.expected}")
    return {"maxRelativeResidual": worst, "failures": failures}


def check_einstein(inst, pts):
    lam = inst.params.get("Lambda")
    worst_ricci = worst_scalar = 0.0
    failures = []
    for k, pt in enumerate(pts):
        curv = inst.curvature(pt)
        L = lam if lam is not None else -curv.R / 4
        r = einstein_residual(curv, L)
        scale = 1.0 + curv.scale()
        worst_ricci = max(worst_ricci, r.maxRicci / scale)
        worst_scalar = max(worst_scalar, r.scalarGap / scale)
        if not r.passes(EINSTEIN_TOL * scale):
            failures.append(f"point {k}: traceless Ricci {r.maxRicci:.3g}, |R + 4 Lambda| {r.scalarGap:.3g}")
    return {"maxTracelessRicci": worst_ricci, "maxScalarGap": worst_scalar, "failures": failures}


def check_killing(inst, pts):
    if not inst.family.killing:
        return {"vectors": [], "failures": [f"family {inst.id} lists no Killing vectors"]}
    vectors, failures = [], []
    for K in inst.family.killing:
        worst = 0.0
        flags = set()
        for k, pt in enumerate(pts):
            r = killing_residual(inst, K, pt)
            worst = max(worst, r.residual / r.scale)
            if r.residual > KILLING_TOL * r.scale:
                failures.append(f"point {k}: {K.name} residual {r.residual:.3g}")
            if K.asd_flag:
                flags.add(null_killing_congruence(inst, K, pt)[0].flag)
        entry = {"name": K.name, "components": list(K.components), "chi0": K.chi0, "maxRelativeResidual": worst}
        if K.asd_flag:
            entry["asdCongruence"] = "".join(sorted(flags))
            if flags != {K.asd_flag}:
                failures.append(f"{K.name}: ASD congruence {''.join(sorted(flags))}, expected {K.asd_flag}")
        vectors.append(entry)
    return {"vectors": vectors, "failures": failures}


def check_master(inst, pts):
    if inst.family.master is None:
        return {"failures": [f"family {inst.id} has no master-equation data"]}
    worst, failures = 0.0, []
    for k, pt in enumerate(pts):
        res = np.abs(inst.family.master(inst, pt))
        worst = max(worst, float(np.max(res)))
        if np.max(res) > MASTER_TOL * (1.0 + inst.curvature(pt).scale()):
            failures.append(f"point {k}: residuals {res.tolist()}")
    return {"maxResidual": worst, "failures": failures}


def check_type3(inst, pts):
    if inst.family.type3 is None:
        return {"failures": [f"family {inst.id} is not a special type III solution"]}
    worst, failures = 0.0, []
    for k, pt in enumerate(pts):
        res, scale = inst.family.type3(inst, pt)
        rel = np.abs(res) / (1.0 + scale)
        worst = max(worst, float(np.max(rel)))
        if np.max(rel) > TYPE3_TOL:
            failures.append(f"point {k}: residuals {np.abs(res).tolist()}")
    return {"maxRelativeResidual": worst, "failures": failures}


CHECKS = {
    "congruences": check_congruences,
    "einstein": check_einstein,
    "killing": check_killing,
    "master": check_master,
    "type3": check_type3,
}


def run_verify(inst, digest, points, seed, checks):
    pts = inst.sample(points, family_seed(inst.id, seed))
    results, ok = {}, True
    for name in checks:
        try:
            out = CHECKS[name](inst, pts)
        except (IllConditioned, SingularPoint) as exc:
            out = {"failures": [f"{type(exc).__name__}: {exc}"]}
        out["passed"] = not out["failures"]
        ok &= out["passed"]
        results[name] = out
    return {"pointsSampled": len(pts), "checks": results}, EXIT_OK if ok else EXIT_FAIL


# scan -------------------------------------------------------------------------------

def parse_grid(spec, coordinates):
    """'q=0.5,p=0.5,x=-1:1:21,y=-1:1:21' -> four coordinate arrays."""
    axes = {}
    for part in spec.split(","):
        name, sep, value = part.partition("=")
        name = name.strip()
        if not sep or name not in coordinates:
            raise InputError(f"grid entry {part!r}: expected <coordinate>=<value> with one of {coordinates}")
        if name in axes:
            raise InputError(f"grid coordinate {name} given twice")
        try:
            bits = [float(b) for b in value.split(":")]
        except ValueError:
            raise InputError(f"grid entry {part!r} is not numeric") from None
        if len(bits) == 1:
            axes[name] = np.array(bits)
        elif len(bits) == 3 and bits[2] >= 1 and bits[2] == int(bits[2]):
            axes[name] = np.linspace(bits[0], bits[1], int(bits[2]))
        else:
            raise InputError(f"grid entry {part!r}: use value or start:stop:count")
    missing = [c for c in coordinates if c not in axes]
    if missing:
        raise InputError(f"grid misses coordinate(s) {', '.join(missing)}")
    return [axes[c] for c in coordinates]


def _cell_label(inst, pt):
    try:
        if inst.locus_distance(pt) < 1e-3:
            return "singular", "*"
        curv = inst.curvature(pt)
        sd, asd = classify_curvature(curv, real_mode=inst.mode == "real", tol=ZERO_TOL)
    except IllConditioned:
        return "ill-conditioned", "?"
    except (SingularPoint, NullStringLabError, ArithmeticError):
        return "singular", "*"
    return None, (sd.label, asd.label)


def run_scan(inst, digest, grid):
    axes = parse_grid(grid, inst.family.coordinates)
    shape = tuple(len(a) for a in axes)
    labels = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        pt = np.array([axes[i][j] for i, j in enumerate(idx)])
        if inst.mode == "complex":
            pt = pt.astype(complex)
        _, labels[idx] = _cell_label(inst, pt)
    cells, boundary = [], 0
    for idx in np.ndindex(*shape):
        lab = labels[idx]
        edge = False
        for axis in range(4):
            for step in (-1, 1):
                nb = list(idx)
                nb[axis] += step
                if 0 <= nb[axis] < shape[axis] and labels[tuple(nb)] != lab:
                    edge = True
        boundary += edge
        cells.append({
            "index": list(idx),
            "point": [axes[i][j] for i, j in enumerate(idx)],
            "sd": lab[0] if isinstance(lab, tuple) else lab,
            "asd": lab[1] if isinstance(lab, tuple) else lab,
            "boundary": edge,
        })
    good = [c for c in cells if c["sd"] not in ("*", "?")]
    if not good:
        raise SamplingFailure("every grid cell is singular")
    counts = {}
    for c in good:
        key = f"{c['sd']} x {c['asd']}"
        counts[key] = counts.get(key, 0) + 1
    return {"grid": grid, "shape": list(shape), "labelCounts": dict(sorted(counts.items())),
            "boundaryCells": boundary, "cells": cells}, EXIT_OK


def render_map(report, coordinates):
    """Text map over the two varying axes (SD label, first letters)."""
    shape = report["shape"]
    varying = [i for i, n in enumerate(shape) if n > 1]
    if len(varying) != 2:
        return ""
    a, b = varying
    keys = sorted({c["sd"] for c in report["cells"]})
    glyph = {}
    for k in keys:
        glyph[k] = k if k in ("*", "?") else "abcdefghijklmnop"[len([g for g in glyph.values() if g not in "*?"])]
    grid = [[" "] * shape[b] for _ in range(shape[a])]
    for c in report["cells"]:
        g = glyph[c["sd"]]
        grid[c["index"][a]][c["index"][b]] = g.upper() if c["boundary"] and g not in "*?" else g
    lines = [f"rows {coordinates[a]}, columns {coordinates[b]}; upper case marks a boundary cell"]
    lines += [f"  {g} = {k}" for k, g in glyph.items()]
    lines += ["".join(row) for row in grid[::-1]]
    return "\n".join(lines)


# human-readable text ------------------------------------------------------------------

def summary(command, report):
    if command == "classify":
        agg = report["aggregate"]
        lines = [
            f"family     {report['family']} ({report['mode']})",
            f"points     {report['pointsSampled']}",
            f"symbol     {agg['symbol']}",
            f"confidence {agg['confidence']:.2f}",
            f"claimed    {report['claimed']['symbol']} (matched at {report['claimed']['fractionMatching']:.2f})",
        ]
        for e in report["perPoint"]:
            for f in e["flags"]:
                lines.append(f"  point {e['index']}: {f}")
        return "\n".join(lines)
    if command == "verify":
        lines = [f"family {report['family']} ({report['mode']}), {report['pointsSampled']} points"]
        for name, res in report["checks"].items():
            lines.append(f"{name:12s} {'pass' if res['passed'] else 'FAIL'}")
            lines += [f"  {f}" for f in res["failures"][:10]]
        return "\n".join(lines)
    lines = [f"family {report['family']} ({report['mode']}), grid {report['grid']}"]
    lines += [f"  {k}: {n}" for k, n in report["labelCounts"].items()]
    lines.append(f"boundary cells: {report['boundaryCells']}")
    return "\n".join(lines)


# entry point ------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="nullstring-lab", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="metric definition file")
        p.add_argument("--mode", choices=("real", "complex"), help="override the file's number mode")
        p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")

    p = sub.add_parser("classify", help="classify a metric at random sample points")
    common(p)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=None, help=f"sampling seed (default ${SEED_ENV} or 0)")

    p = sub.add_parser("verify", help="run residual checks")
    common(p)
    p.add_argument("--check", action="append", choices=sorted(CHECKS), required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("scan", help="Petrov label map over a coordinate grid")
    common(p)
    p.add_argument("--grid", required=True, help="e.g. q=0.5,p=0.5,x=-1:1:21,y=-1:1:21")

    p = sub.add_parser("families", help="list built-in families")
    p.add_argument("--all", action="store_true", help="include auxiliary families")

    p = sub.add_parser("template", help="print a metric file with a family's default bindings")
    p.add_argument("family")
    p.add_argument("--mode", choices=("real", "complex"), default="real")
    return ap


def _emit(args, report, text):
    if args.json == "-":
        sys.stdout.write(dumps(report))
    else:
        print(text)
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(dumps(report))


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "families":
        for fam in FAMILIES.values():
            if fam.in_table or args.all:
                print(describe(fam))
        return EXIT_OK
    if args.command == "template":
        if args.family not in FAMILIES:
            print(f"error: unknown family {args.family!r}", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(serialize_metric_file(default_metric_file(args.family, args.mode)))
        return EXIT_OK
    try:
        mf, inst, digest = load(args.file, args.mode)
        if getattr(args, "points", 1) < 1:
            raise InputError("--points must be positive")
        seed = resolve_seed(getattr(args, "seed", None))
        if args.command == "classify":
            body, code = run_classify(inst, digest, args.points, seed)
        elif args.command == "verify":
            body, code = run_verify(inst, digest, args.points, seed, list(dict.fromkeys(args.check)))
        else:
            body, code = run_scan(inst, digest, args.grid)
    except (InputError, MetricFileError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SamplingFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    report = {**_header(args.command, inst, digest, seed), **body}
    text = summary(args.command, report)
    if args.command == "scan":
        text = "\n".join(t for t in (text, render_map(report, inst.family.coordinates)) if t)
    _emit(args, report, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
