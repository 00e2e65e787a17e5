"""``atlas`` command line: eval, trace, zeros, verify, partition, involution, render, report."""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

from . import __version__, errors
from .document import AtlasDocument, Cache, cache_key, provenance
from .series import eval_derivative, evaluate, parse_spec_ref
from .tracing import (
    LevelSet,
    StripRecord,
    TracedCurve,
    classify_components,
    color_segments,
    trace_level_set,
)
from .verify import SuiteConfig, run_suite, summary_text
from .window import GridWindow
from .zeros import ZeroRecord, build_merge_tree, locate_zeros

DEFAULTS = {"window": "-4,6,0,40", "grid": "256,256", "tol": "1e-10", "precision": "double",
            "radii": "0.5,1,2", "cache_dir": ""}


# ---------------------------------------------------------------------------
# pipeline pieces shared by the subcommands
# ---------------------------------------------------------------------------

def cached_zeros(spec, target: str, window: GridWindow, tol: float, cache: Cache) -> list:
    key = cache_key(spec.spec_hash, f"zeros:{target}", window.to_dict(), {"tol": tol})
    hit = cache.get(key)
    if hit is not None:
        return [ZeroRecord.from_dict(z) for z in hit]
    zs = locate_zeros(spec, target, window.box, tol)
    cache.put(key, [z.to_dict() for z in zs])
    return zs


def analyse(spec, window: GridWindow, tol: float, cache: Cache):
    """Zeros of f and f', both real-axis pre-images, classification and strips (cached as one payload)."""
    key = cache_key(spec.spec_hash, "analysis", window.to_dict(), {"tol": tol})
    hit = cache.get(key)
    if hit is not None:
        cf = [TracedCurve.from_dict(c) for c in hit["curves_f"]]
        cp = [TracedCurve.from_dict(c) for c in hit["curves_fp"]]
        zf = [ZeroRecord.from_dict(z) for z in hit["zeros_f"]]
        zp = [ZeroRecord.from_dict(z) for z in hit["zeros_fp"]]
        strips = [StripRecord.from_dict(s) for s in hit["strips"]]
        for c in cf + cp:
            c.ensure_values(spec)
        return cf, cp, zf, zp, strips
    zf = cached_zeros(spec, "f", window, tol, cache)
    zp = cached_zeros(spec, "f-prime", window, tol, cache)
    cf = trace_level_set(spec, "f", LevelSet("ImZero"), window,
                         extra_seeds=[z.location for z in zf if window.contains(z.location)])
    cp = trace_level_set(spec, "f-prime", LevelSet("ImZero"), window,
                         extra_seeds=[z.location for z in zp if window.contains(z.location)])
    cf, cp, strips = classify_components(spec, cf, cp, zf, zp, window)
    for c in cf + cp:
        color_segments(c, spec)
    cache.put(key, {"curves_f": [c.to_dict() for c in cf], "curves_fp": [c.to_dict() for c in cp],
                    "zeros_f": [z.to_dict() for z in zf], "zeros_fp": [z.to_dict() for z in zp],
                    "strips": [s.to_dict() for s in strips]})
    return cf, cp, zf, zp, strips


def partition_document(spec, window: GridWindow, k: int | None, tol: float, cache: Cache,
                       samples: int = 0) -> AtlasDocument:
    """Merge trees, eta arcs and fundamental domains for one complete strip (all complete strips if k is None)."""
    from .domains import partition_strip, verify_fundamental

    cf, cp, zf, zp, strips = analyse(spec, window, tol, cache)
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), cf + cp, zf + zp, strips)
    chosen = [s for s in strips if (k is None and s.complete and s.k != 0) or s.k == k]
    if k is not None and not chosen:
        raise errors.IncompleteStrip(f"strip {k} is not in the window")
    for st in chosen:
        tree = build_merge_tree(spec, st.k, [z for z in zf if z.id in st.zero_ids],
                                [z for z in zp if z.id in st.branch_ids])
        doms, arcs = partition_strip(spec, st, cf, zf, tree, window)
        doc.merge_trees.append(tree)
        doc.eta_arcs.extend(arcs)
        doc.domains.extend(doms)
        if samples:
            for d in doms:
                doc.reports.append(verify_fundamental(spec, d, samples, zeros_f=zf))
    return doc


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _parse_s(text: str) -> complex:
    parts = [float(x) for x in text.replace(" ", "").split(",")]
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise ValueError("s must be 're,im'")
    return complex(parts[0], parts[1])


def _settings(args) -> dict:
    """Defaults < config file < flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        cp = configparser.ConfigParser()
        cp.read(args.config)
        if cp.has_section("atlas"):
            cfg.update({k.replace("-", "_"): v for k, v in cp["atlas"].items()})
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = str(val)
    return cfg


def _common(p: argparse.ArgumentParser, window: bool = True):
    p.add_argument("--spec", default="zeta", help="zeta | L:q:i | combo:7[:i:j[:w]] | dh | spec file")
    if window:
        p.add_argument("--window", help="sigma0,sigma1,t0,t1")
        p.add_argument("--grid", help="nx,ny")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="output file (JSON document, or SVG for render)")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--precision", choices=("double", "high"))
    p.add_argument("--config", help="INI file with an [atlas] section")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="atlas", description="Geometry of general Dirichlet series.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="value (or derivative) with an error bound")
    _common(p, window=False)
    p.add_argument("--s", required=True, help="re,im")
    p.add_argument("--order", type=int, default=0, choices=(0, 1, 2))

    p = sub.add_parser("trace", help="real-axis and circle pre-images with classification")
    _common(p)
    p.add_argument("--radii", help="comma-separated circle radii (empty for none)")
    p.add_argument("--svg", help="also render the document to this SVG file")

    p = sub.add_parser("zeros", help="certified zeros of f or f'")
    _common(p)
    p.add_argument("--target", default="f", choices=("f", "f-prime"))

    p = sub.add_parser("verify", help="run every geometric check; exit 1 on any fail")
    _common(p)
    p.add_argument("--radii", help="circle radii for the colour rules")
    p.add_argument("--critical-line", type=float, default=None, dest="critical_line")

    p = sub.add_parser("partition", help="fundamental domains of a strip")
    _common(p)
    p.add_argument("--strip", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000, help="samples per domain for verification (0 to skip)")
    p.add_argument("--svg", help="also render the document to this SVG file")

    p = sub.add_parser("involution", help="involution between an off-line zero pair")
    _common(p)
    p.add_argument("--s1")
    p.add_argument("--s2")
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("render", help="SVG of a saved document")
    p.add_argument("document")
    p.add_argument("--layers", help=f"comma-separated subset of {','.join(('domains', 'real', 'circles', 'eta', 'zeros', 'branch'))}")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="text summary of a saved document")
    p.add_argument("document")
    return ap


def _spec_and_window(args, cfg):
    spec = parse_spec_ref(args.spec)
    window = GridWindow.parse(cfg["window"], cfg["grid"])
    return spec, window


def _write(doc: AtlasDocument, args, default: str) -> Path:
    path = Path(args.out or default)
    doc.save(path)
    print(f"document: {path}")
    return path


def _radii(text: str) -> tuple:
    return tuple(float(r) for r in text.split(",") if r.strip())


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args, cfg) -> int:
    spec = parse_spec_ref(args.spec)
    s = _parse_s(args.s)
    tol = float(cfg["tol"])
    if args.order == 0:
        r = evaluate(spec, s, tol, cfg["precision"])
    else:
        r = eval_derivative(spec, s, args.order, tol, precision=cfg["precision"])
    v = r.value
    print(f"value       {v.real:.17g} {'+' if v.imag >= 0 else '-'} {abs(v.imag):.17g}i")
    print(f"error_bound {r.error_bound:.3g}")
    print(f"terms_used  {r.terms_used}")
    print(f"method      {r.method}")
    return 0


def cmd_trace(args, cfg, cache) -> int:
    spec, window = _spec_and_window(args, cfg)
    tol = float(cfg["tol"])
    cf, cp, zf, zp, strips = analyse(spec, window, tol, cache)
    curves = cf + cp
    for r in _radii(cfg["radii"]):
        for src in ("f", "f-prime"):
            cc = trace_level_set(spec, src, LevelSet("AbsEq", r), window)
            for c in cc:
                color_segments(c, spec)
            curves += cc
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), curves, zf + zp, strips,
                        provenance=provenance({"tol": tol}, "trace"))
    counts = {}
    for c in curves:
        label = c.classification.label if c.levelset.kind == "ImZero" else c.levelset.label
        counts[label] = counts.get(label, 0) + 1
    for label in sorted(counts):
        print(f"{label:24s} {counts[label]}")
    for s in strips:
        print(f"strip {s.k}: zeros={s.zero_count} complete={s.complete} J={s.J_k}")
    _write(doc, args, "atlas-trace.json")
    if args.svg:
        from .render import render_svg

        render_svg(doc, path=args.svg)
    return 0


def cmd_zeros(args, cfg, cache) -> int:
    spec, window = _spec_and_window(args, cfg)
    tol = float(cfg["tol"])
    zs = cached_zeros(spec, args.target, window, tol, cache)
    for z in zs:
        print(f"{z.id:12s} {z.location.real:.12f} {'+' if z.location.imag >= 0 else '-'} "
              f"{abs(z.location.imag):.12f}i  order={z.order}  residual={z.residual:.2g}")
    print(f"{len(zs)} zero(s)")
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), zeros=zs,
                        provenance=provenance({"tol": tol}, f"zeros {args.target}"))
    _write(doc, args, "atlas-zeros.json")
    return 0


def cmd_verify(args, cfg, cache) -> int:
    spec, window = _spec_and_window(args, cfg)
    tol = float(cfg["tol"])
    conf = SuiteConfig(radii=_radii(cfg["radii"]), critical_line=args.critical_line,
                       zero_tol=min(tol, 1e-9))
    res = run_suite(spec, window, conf)
    print(summary_text(res.reports))
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), res.curves_f + res.curves_fp + res.circles,
                        res.zeros_f + res.zeros_fp, res.strips, reports=res.reports,
                        provenance=provenance({"tol": tol, "distance": conf.distance_tol,
                                               "angle": conf.angle_tol, "speiser": conf.speiser_tol}, "verify"))
    _write(doc, args, "atlas-verify.json")
    return 1 if any(r.verdict == "fail" for r in res.reports) else 0


def cmd_partition(args, cfg, cache) -> int:
    spec, window = _spec_and_window(args, cfg)
    tol = float(cfg["tol"])
    doc = partition_document(spec, window, args.strip, tol, cache, args.samples)
    doc.provenance = provenance({"tol": tol, "samples": args.samples}, "partition")
    by_strip = {}
    for d in doc.domains:
        by_strip.setdefault(d.strip, []).append(d)
    for k, ds in sorted(by_strip.items()):
        print(f"strip {k}: {len(ds)} domain(s)")
        for d in ds:
            parts = ", ".join(f"{b['type']}" for b in d.boundary)
            print(f"  domain {d.index}: zero {d.contains_zero}; boundary {parts}; slit {d.image_slit}")
    for r in doc.reports:
        print(r.line())
    _write(doc, args, "atlas-partition.json")
    if args.svg:
        from .render import render_svg

        render_svg(doc, path=args.svg)
    return 1 if any(r.verdict == "fail" for r in doc.reports) else 0


def cmd_involution(args, cfg, cache) -> int:
    from .involution import build_involution, verify_involution

    spec, window = _spec_and_window(args, cfg)
    tol = float(cfg["tol"])
    if args.s1 and args.s2:
        s1, s2 = _parse_s(args.s1), _parse_s(args.s2)
        zs = []
    else:
        zs = cached_zeros(spec, "f", window, tol, cache)
        pair = None
        for a in zs:
            for b in zs:
                if a.location.real > 0.5 + 1e-6 and abs(a.location.real + b.location.real - 1) < 1e-6 \
                        and abs(a.location.imag - b.location.imag) < 1e-6:
                    pair = (a.location, b.location)
                    break
            if pair:
                break
        if pair is None:
            print("no zero pair sigma + it, 1 - sigma + it off the critical line in the window")
            return 1
        s1, s2 = pair
    m = build_involution(spec, s1, s2)
    rep = verify_involution(spec, m, args.samples)
    print(f"pair    {s1:.10f}  {s2:.10f}")
    print(f"radius  {m.radius:.6g}")
    print(rep.line())
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), zeros=zs, reports=[rep],
                        extras={"involution": m.to_dict()},
                        provenance=provenance({"tol": tol, "residual": 1e-6}, "involution"))
    _write(doc, args, "atlas-involution.json")
    return 1 if rep.verdict == "fail" else 0


def cmd_render(args) -> int:
    from .render import render_svg

    doc = AtlasDocument.load(args.document)
    layers = [x for x in args.layers.split(",") if x] if args.layers else None
    render_svg(doc, layers, args.out)
    print(f"svg: {args.out}")
    return 0


def cmd_report(args) -> int:
    doc = AtlasDocument.load(args.document)
    spec = doc.spec
    print(f"spec      {spec.get('name')} ({spec.get('family')})")
    print("characters: chi_j(g^k) = exp(2 pi i j k / phi(q)), g the least primitive root mod q")
    if doc.window:
        w = doc.window
        print(f"window    [{w['sigma_min']}, {w['sigma_max']}] x [{w['t_min']}, {w['t_max']}]")
    prov = doc.provenance
    if prov:
        print(f"tool      {prov.get('tool')} {prov.get('version')}  ({prov.get('command')})")
        print(f"tolerances {json.dumps(prov.get('tolerances', {}), sort_keys=True)}")
    nf = sum(1 for z in doc.zeros if z.target == "f")
    print(f"zeros     f: {nf}  f': {len(doc.zeros) - nf}")
    for s in doc.strips:
        print(f"strip {s.k:3d} zeros={s.zero_count} complete={s.complete} J={s.J_k}")
    if doc.domains:
        print(f"domains   {len(doc.domains)}")
    for r in doc.reports:
        print(r.line())
    bad = doc.dangling_references()
    if bad:
        print(f"dangling references: {bad}")
        return 1
    return 0


VALUE_FLAGS = ("--window", "--s", "--s1", "--s2")


def _join_negative_values(argv: list) -> list:
    """``--window -4,4,0,50`` -> ``--window=-4,4,0,50`` so argparse does not read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        if args.command == "render":
            return cmd_render(args)
        if args.command == "report":
            return cmd_report(args)
        cfg = _settings(args)
        if args.command == "eval":
            return cmd_eval(args, cfg)
        cache = Cache(cfg["cache_dir"] or None)
        return {"trace": cmd_trace, "zeros": cmd_zeros, "verify": cmd_verify, "partition": cmd_partition,
                "involution": cmd_involution}[args.command](args, cfg, cache)
    except (errors.AtlasError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
