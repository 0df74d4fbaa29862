"""Command-line front end: ``cspencer <command> [options]``.

Every command writes one JSON result record (to ``--out`` or stdout).
Exit status: 0 on success, 2 on an inconclusive verdict, 1 on errors.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import math
import sys
import time

from . import bm, discrepancy, hadamard, kernels, opnorms, svg, torus
from .config import COVER_MARGIN, THREADS_ENV, default_threads
from .core import load_cmat
from .errors import CSpencerError, NotFoundError, ParseError
from .report import EXIT_CODES, RunConfig, dumps_record, make_record, write_record

def _common(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (recorded in the output)")
    p.add_argument("--tol", type=float, default=1e-6, help="target tolerance")
    p.add_argument("--resolution", type=int, default=200, help="sweep / sampling resolution (>= 16)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"thread count (default from {THREADS_ENV}, else 1)")
    p.add_argument("--out", default=None, help="write the JSON record here instead of stdout")
    p.add_argument("--no-timing", action="store_true", help="omit wall time for byte-stable records")


def build_parser():
    parser = argparse.ArgumentParser(prog="cspencer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discrepancy", help="min over unimodular x of max_i |<x, a_i>|")
    p.add_argument("--in", dest="input", required=True, help="rows as .cmat.json")
    p.add_argument("--certify", action="store_true", help="require a certified answer (n <= 3)")
    p.add_argument("--restarts", type=int, default=16)

    p = sub.add_parser("norm", help="operator norms of a matrix")
    p.add_argument("--kind", choices=["inf1", "1inf", "22", "qp"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--q", type=float, default=2.0, help="domain exponent for --kind qp")
    p.add_argument("--p", type=float, default=2.0, help="target exponent for --kind qp")

    p = sub.add_parser("cover", help="can one open toric body contain a grid subset?")
    p.add_argument("--subset", required=True, help="0b mask, decimal mask or 'j,k;j,k;...'")
    p.add_argument("--margin", type=float, default=COVER_MARGIN)

    p = sub.add_parser("orbits", help="orbits of grid subsets and the class checks")
    p.add_argument("--size", type=int, default=4)

    p = sub.add_parser("witness", help="point outside three open toric bodies")
    p.add_argument("--in", dest="input", required=True, help="3x3 centres as .cmat.json")

    p = sub.add_parser("verify-lemmas", help="numerical sweeps of the supporting inequalities")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("bm", help="Banach-Mazur distance certificates")
    bsub = p.add_subparsers(dest="bm_command", required=True)
    q = bsub.add_parser("upper", help="Fourier-matrix upper bound between lp and lq")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--q", type=float, required=True)
    q.add_argument("--p", type=float, required=True)
    q = bsub.add_parser("search", help="minimise ||A||_{1->inf} ||A^-1||_{inf->1}")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--restarts", type=int, default=1000)
    q.add_argument("--start", choices=["none", "dft"], default="none")
    q = bsub.add_parser("counterexample", help="certify the block counterexample matrices")
    q.add_argument("--n", type=int, required=True)
    for q in bsub.choices.values():
        _common(q)

    p = sub.add_parser("counterexample", help="search 3x3 matrices with small norm-to-volume ratio")
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--start", choices=["random", "a3", "dft"], default="random")

    p = sub.add_parser("render", help="SVG picture of toric bodies")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(svg.PRESETS))
    src.add_argument("--in", dest="input", help="centres as a k x 3 .cmat.json")
    p.add_argument("--svg", required=True, help="output SVG path")
    p.add_argument("--closed", action="store_true", help="draw closed bodies")
    p.add_argument("--no-grid", action="store_true")

    p = sub.add_parser("hadamard", help="Hadamard check and flat-image witness")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--n", type=int, help="use the n x n Fourier matrix")
    src.add_argument("--in", dest="input")

    for name, p in sub.choices.items():
        if name != "bm":
            _common(p)
    return parser


# --- command handlers ---------------------------------------------------------------
# each returns (status, inputs, result)

def _bracket(br):
    return {"lower": br.lower, "upper": br.upper, "witness": br.witness, "certified": br.certified,
            "grid_resolution": br.grid_resolution, "method": br.method, "cells": br.cells}


def cmd_discrepancy(args, cfg):
    rows = load_cmat(args.input)
    n = rows.shape[0]
    certify = True if args.certify else None
    res = discrepancy.solve(rows, tol=cfg.tolerance, certify=certify, restarts=args.restarts, seed=cfg.seed)
    status = "ok"
    if args.certify and not res.certified:
        status = "inconclusive"
    result = {"value": res.value, "witness": res.witness, "certified": res.certified,
              "certified_min_upper": res.certified_min_upper, "certified_lower": res.certified_lower,
              "sqrt_n": math.sqrt(n), "candidate_counterexample": res.candidate_counterexample,
              "restarts_used": res.restarts_used}
    return status, {"input": args.input, "rows": rows, "certify": bool(args.certify)}, result


def cmd_norm(args, cfg):
    A = load_cmat(args.input)
    inputs = {"input": args.input, "matrix": A, "kind": args.kind}
    if args.kind == "inf1":
        br = opnorms.norm_inf_to_1_certified(A, tol=cfg.tolerance)
        return ("ok" if br.certified else "inconclusive"), inputs, _bracket(br)
    if args.kind == "1inf":
        v = opnorms.norm_1_to_inf(A)
        return "ok", inputs, {"lower": v, "upper": v, "certified": True, "method": "exact"}
    if args.kind == "22":
        v = opnorms.norm_2_to_2(A)
        return "ok", inputs, {"lower": v, "upper": v, "certified": True, "method": "exact"}
    pair = opnorms.LpPair(p=args.p, q=args.q)
    inputs.update(p=args.p, q=args.q)
    v, x = opnorms.norm_q_to_p_lower(A, pair, seed=cfg.seed)
    return "ok", inputs, {"lower": v, "witness": x, "certified": False, "method": "power-iteration"}


def cmd_cover(args, cfg):
    S = torus.parse_subset(args.subset)
    v = torus.coverability(S, tol=cfg.tolerance, margin=args.margin)
    result = {"status": v.status, "coverable": v.coverable, "certified_sup": v.certified_sup,
              "best_value": v.best_value, "margin": v.margin,
              "witness_center": None if v.witness_center is None else v.witness_center.a,
              "families": v.families}
    if S.size == 4:
        result["class"] = torus.class_of(S)
    status = "inconclusive" if v.status == "inconclusive" else "ok"
    return status, {"subset": str(S), "points": S.points, "margin": args.margin}, result


def cmd_orbits(args, cfg):
    orbits = torus.enumerate_orbits(args.size)
    total = sum(o.size for o in orbits)
    result = {
        "total": total,
        "classes": len(orbits),
        "orbits": [{"canonical": str(torus.GridSubset(o.canonical)), "size": o.size, "label": o.label}
                   for o in orbits],
    }
    if args.size == 4:
        result["class1_intersections"] = torus.check_class1_intersections()
        result["five_point_obstruction"] = torus.check_five_point_obstruction()
        result["square_extension"] = torus.square_extension_choices()
        bad = result["class1_intersections"]["violations"] + result["five_point_obstruction"]["violations"]
        if bad:
            return "error", {"size": args.size}, result
    return "ok", {"size": args.size}, result


def cmd_witness(args, cfg):
    rows = load_cmat(args.input)
    rep = torus.uncovered_witness_report(*rows)
    ok = rep.value <= torus.SQRT3 + cfg.tolerance
    result = {"point": rep.point, "value": rep.value, "source": rep.source, "bound": torus.SQRT3}
    return ("ok" if ok else "error"), {"input": args.input, "centers": rows}, result


def cmd_verify_lemmas(args, cfg):
    trig = torus.verify_trig_lemma(cfg.resolution)
    line = torus.verify_line_lemma(args.samples, seed=cfg.seed)
    place = torus.verify_grid_placement(seed=cfg.seed)
    result = {"trig": trig, "line": line, "grid_placement": place,
              "violations": trig.violations + line.violations + place.violations}
    return "ok", {"resolution": cfg.resolution, "samples": args.samples}, result


def cmd_bm(args, cfg):
    if args.bm_command == "upper":
        pair = opnorms.LpPair(p=args.p, q=args.q)
        cert = bm.lp_upper_bound(args.n, pair, seed=cfg.seed)
        result = {"upper": cert.upper, "alpha": pair.alpha, "lower_evidence": cert.lower_evidence,
                  "transporter": cert.transporter}
        return "ok", {"n": args.n, "q": args.q, "p": args.p}, result
    if args.bm_command == "search":
        start = hadamard.dft(args.n).matrix if args.start == "dft" else None
        res = bm.minimize_product_l1_linf(args.n, restarts=args.restarts, seed=cfg.seed, start=start)
        result = {"value": res.value, "matrix": res.matrix, "estimate": res.estimate,
                  "certified": res.certified, "sqrt_n": math.sqrt(args.n)}
        return "ok", {"n": args.n, "restarts": args.restarts, "start": args.start}, result
    rep = bm.counterexample_report(args.n, tol=cfg.tolerance)
    result = {"matrix": bm.counterexample_matrix(args.n), **{k: getattr(rep, k) for k in
              ("norm_lower", "norm_upper", "certified", "abs_det", "volume_bound", "margin")}}
    status = "ok" if rep.certified and rep.margin > 0 else "inconclusive"
    return status, {"n": args.n}, result


def cmd_counterexample(args, cfg):
    start = {"random": None, "a3": bm.A3, "dft": hadamard.dft(3).matrix}[args.start]
    res = bm.search_counterexample(seed=cfg.seed, iterations=args.iterations, start=start)
    result = {"matrix": res.matrix, "ratio_estimate": res.ratio_estimate, "ratio_upper": res.ratio_upper,
              "success": res.success}
    return ("ok" if res.success else "inconclusive"), {"iterations": args.iterations, "start": args.start}, result


def cmd_render(args, cfg):
    kw = {"sample_resolution": cfg.resolution, "closed": args.closed, "show_grid": not args.no_grid}
    if args.preset:
        spec = svg.PRESETS[args.preset](**kw)
        inputs = {"preset": args.preset}
    else:
        centers = load_cmat(args.input)
        spec = svg.FigureSpec(tuple(centers), **kw)
        inputs = {"input": args.input, "centers": centers}
    text = svg.svg_text(spec)
    with open(args.svg, "w", encoding="utf-8") as fh:
        fh.write(text)
    inputs.update(closed=args.closed, show_grid=not args.no_grid)
    result = {"svg": args.svg, "sha256": hashlib.sha256(text.encode()).hexdigest(),
              "bodies": len(spec.centers)}
    return "ok", inputs, result


def cmd_hadamard(args, cfg):
    if args.n is not None:
        H = hadamard.dft(args.n).matrix
        inputs = {"n": args.n}
    else:
        H = load_cmat(args.input)
        inputs = {"input": args.input, "matrix": H}
    chk = hadamard.is_hadamard(H)
    result = {"is_hadamard": chk.ok, "modulus_defect": chk.modulus_defect,
              "orthogonality_defect": chk.orthogonality_defect}
    if not chk.ok:
        return "error", inputs, result
    try:
        w = hadamard.flat_image_witness(H, tol=cfg.tolerance, seed=cfg.seed)
    except NotFoundError as exc:
        result.update(witness=None, flatness_defect=exc.best)
        return "inconclusive", inputs, result
    result.update(witness=w, flatness_defect=hadamard.flatness_defect(H, w.realize()))
    return "ok", inputs, result


HANDLERS = {
    "discrepancy": cmd_discrepancy, "norm": cmd_norm, "cover": cmd_cover, "orbits": cmd_orbits,
    "witness": cmd_witness, "verify-lemmas": cmd_verify_lemmas, "bm": cmd_bm,
    "counterexample": cmd_counterexample, "render": cmd_render, "hadamard": cmd_hadamard,
}


def run(args):
    """Dispatch parsed arguments; returns ``(exit_code, record)``."""
    command = args.command if args.command != "bm" else f"bm {args.bm_command}"
    threads = args.threads if args.threads is not None else default_threads()
    cfg = RunConfig(command, seed=args.seed, tolerance=args.tol, resolution=args.resolution,
                    thread_count=threads, output_path=args.out)
    t0 = time.perf_counter()
    try:
        status, inputs, result = HANDLERS[args.command](args, cfg)
    except ParseError as exc:
        status, inputs, result = "error", {}, {"error": "parse", "message": str(exc)}
    except (CSpencerError, ValueError, OSError) as exc:
        status, inputs, result = "error", {}, {"error": type(exc).__name__, "message": str(exc)}
    wall = None if args.no_timing else time.perf_counter() - t0
    record = make_record(cfg, status, inputs, result, kernels.BACKEND, wall)
    return EXIT_CODES[status], record


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        code, record = run(args)
    except CSpencerError as exc:  # bad configuration
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if record["status"] == "error":
        print(f"error: {record['result'].get('message', 'failed')}", file=sys.stderr)
    if args.out:
        write_record(record, args.out)
    else:
        sys.stdout.write(dumps_record(record))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
