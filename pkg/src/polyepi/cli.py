"""Command-line entry point.

Exit codes: 0 success, 1 a verdict came out false, 2 usage or input error,
3 a search or construction budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import freebuild, io, recipes, search, transforms
from .catalog import parse_catalog_id
from .geometry import (
    INF, GeometryError, check_generalized_polygon, check_weak_polygon, check_weak_polygon_metric,
    diameter, dual, girth, is_firm, is_thick, order_of,
)
from .morphisms import MorphismError, check_row_saturation, is_epimorphism

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunReport:
    command: str
    inputs: list[str]
    verdicts: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _num(x):
    return None if x is INF else x


def _write_geometry(g, out, report):
    text = io.dumps_geometry(g)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        report.artifacts.append(str(out))
    else:
        sys.stdout.write(text)


def _budget(args) -> search.SearchBudget:
    return search.SearchBudget(args.max_nodes, args.max_seconds, args.jobs)


def cmd_gen(args, report):
    ident = ":".join(args.family_and_params)
    g = parse_catalog_id(ident)
    report.inputs.append(ident)
    _write_geometry(g, args.output, report)
    return EXIT_OK


def cmd_verify(args, report):
    g = io.load_geometry(args.geometry)
    report.inputs.append(args.geometry)
    gi = girth(g)
    n = args.n if args.n is not None else (None if gi is INF else gi // 2)
    order = order_of(g)
    v = report.verdicts
    v.update({
        "points": g.point_count, "lines": g.line_count,
        "girth": _num(gi), "gonality": None if gi is INF else gi // 2,
        "diameter": _num(diameter(g)),
        "order": list(order) if order else None,
        "firm": is_firm(g), "thick": is_thick(g),
    })
    if n is None or n < 2:
        v["weak-polygon"] = False
        return EXIT_FALSE
    weak = check_weak_polygon(g, n)
    v["n"] = n
    v["weak-polygon"] = weak.ok
    v["weak-polygon-metric"] = check_weak_polygon_metric(g, n)
    if not weak:
        v["witness"] = [str(e) for e in weak.witness]
        v["reason"] = weak.reason
    if n >= 3:
        v["generalized-polygon"] = check_generalized_polygon(g, n).ok if weak else False
    if not args.json:
        for key, val in v.items():
            print(f"{key}: {val}")
    ok = weak.ok and (not args.thick or v.get("generalized-polygon", False))
    return EXIT_OK if ok else EXIT_FALSE


def _transform(fn):
    def run(args, report):
        g = io.load_geometry(args.geometry)
        report.inputs.append(args.geometry)
        _write_geometry(fn(g), args.output, report)
        return EXIT_OK
    return run


def cmd_parity(args, report):
    g = io.load_geometry(args.geometry)
    report.inputs.append(args.geometry)
    pc = transforms.line_parity(g)
    listing = "".join(f"{l} U\n" for l in pc.class_a) + "".join(f"{l} V\n" for l in pc.class_b)
    if args.classes:
        Path(args.classes).write_text(listing, encoding="utf-8")
        report.artifacts.append(str(args.classes))
    elif not args.json:
        sys.stderr.write(listing)
    order = order_of(pc.derived)
    report.verdicts.update({"class_a": len(pc.class_a), "class_b": len(pc.class_b),
                            "derived_order": list(order) if order else None})
    _write_geometry(pc.derived, args.output, report)
    return EXIT_OK


def _parse_cells(text: str):
    cells = text.split("|")
    if len(cells) != 2:
        raise ValueError("partition must look like '0,1|2'")
    return tuple(frozenset(int(x) for x in c.split(",") if x.strip()) for c in cells)


def cmd_build_epi(args, report):
    g = io.load_geometry(args.geometry)
    report.inputs.append(args.geometry)
    target = recipes.gen_ordinary(args.m)
    labeling = (tuple(int(x) for x in args.labeling.split(",")) if args.labeling
                else tuple(range(args.m)))
    d = recipes.ClassDescriptor(args.orientation, args.base, _parse_cells(args.partition), labeling)
    mor = recipes.build_recipe_epi(g, args.m, d, target)
    report.verdicts["epimorphism"] = is_epimorphism(mor).ok
    text = io.dumps_morphism(mor, args.geometry, f"ordinary:{args.m}")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        report.artifacts.append(str(args.output))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classify_epi(args, report):
    mor = io.load_morphism(args.morphism)
    report.inputs.append(args.morphism)
    d = recipes.classify_epi(mor)
    report.verdicts["classified"] = d is not None
    if d is not None:
        report.verdicts["descriptor"] = d.to_json()
        if not args.json:
            print(json.dumps(d.to_json()))
    return EXIT_OK if d is not None else EXIT_FALSE


def _enumerate(args, report, keep):
    src, tgt = io.load_geometry(args.source), io.load_geometry(args.target)
    report.inputs += [args.source, args.target]
    fn = search.enumerate_epimorphisms if keep else search.count_epimorphisms
    res = fn(src, tgt, _budget(args))
    report.verdicts.update({"count": res.count, "status": res.status, "nodes": res.nodes})
    return src, tgt, res


def cmd_enum_epi(args, report):
    src, tgt, res = _enumerate(args, report, keep=True)
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, mor in enumerate(res.morphisms):
        rec = {"index": i, "point_map": list(mor.point_map), "line_map": list(mor.line_map),
               "row_saturated": check_row_saturation(mor).ok}
        if args.classify:
            d = recipes.classify_epi(mor)
            rec["class"] = d.orientation if d else None
            rec["descriptor"] = d.to_json() if d else None
        if out_dir:
            path = out_dir / f"epi_{i:05d}.morph"
            path.write_text(io.dumps_morphism(mor, str(Path(args.source).resolve())
                                              if Path(args.source).exists() else args.source,
                                              str(Path(args.target).resolve())
                                              if Path(args.target).exists() else args.target),
                            encoding="utf-8")
            report.artifacts.append(str(path))
        lines.append(json.dumps(rec, sort_keys=True))
    if out_dir:
        summary = out_dir / "results.jsonl"
        summary.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        report.artifacts.append(str(summary))
    for line in lines:
        print(line)
    if args.classify:
        report.verdicts["classified"] = sum(1 for line in lines if json.loads(line)["class"])
    return EXIT_OK if res.complete else EXIT_BUDGET


def cmd_count_epi(args, report):
    _, _, res = _enumerate(args, report, keep=False)
    if not args.json:
        print(f"{res.count} ({res.status})")
    return EXIT_OK if res.complete else EXIT_BUDGET


def cmd_iso(args, report):
    g, h = io.load_geometry(args.first), io.load_geometry(args.second)
    report.inputs += [args.first, args.second]
    budget = _budget(args)
    if args.up_to_duality:
        found = search.iso_up_to_duality(g, h, budget)
        mor, dualized = found if found else (None, False)
        report.verdicts["dualized"] = dualized
    else:
        mor = search.is_isomorphic(g, h, budget)
    report.verdicts["isomorphic"] = mor is not None
    if mor is not None and not args.json:
        print("point map:", " ".join(map(str, mor.point_map)))
        print("line map:", " ".join(map(str, mor.line_map)))
    return EXIT_OK if mor is not None else EXIT_FALSE


def cmd_embed(args, report):
    small, big = io.load_geometry(args.small), io.load_geometry(args.big)
    report.inputs += [args.small, args.big]
    mor = search.find_subgeometry_embedding(small, big, _budget(args))
    report.verdicts["embeds"] = mor is not None
    if mor is not None:
        report.verdicts["point_map"] = list(mor.point_map)
        report.verdicts["line_map"] = list(mor.line_map)
        if not args.json:
            print("point map:", " ".join(map(str, mor.point_map)))
            print("line map:", " ".join(map(str, mor.line_map)))
    return EXIT_OK if mor is not None else EXIT_FALSE


def cmd_free(args, report):
    target = io.load_geometry(args.target)
    report.inputs.append(args.target)
    caps = freebuild.FreeCaps(args.max_elements, args.max_seconds)
    result = freebuild.run(target, args.n, args.rounds, caps, args.seed)
    st = result.state
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    geom_path = out_dir / "free.geom"
    io.save_geometry(st.geometry, geom_path)
    target_path = out_dir / "target.geom"
    io.save_geometry(target, target_path)
    morph_path = out_dir / "free.morph"
    morph_path.write_text(io.dumps_morphism(st.epi, geom_path.name, target_path.name), encoding="utf-8")
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps({
        "target": args.target, "n": args.n, "rounds": args.rounds, "seed": args.seed,
        "rounds_report": result.report,
        "paths": [r.to_json() for r in st.added_paths],
    }, indent=2, sort_keys=True), encoding="utf-8")
    report.artifacts += [str(geom_path), str(target_path), str(morph_path), str(report_path)]
    last = result.report[-1]
    report.verdicts.update({k: last[k] for k in ("elements", "girth", "girth_ok", "epimorphism",
                                                 "convergence", "partial")})
    report.verdicts["rounds_completed"] = st.stage
    if not args.json:
        for row in result.report:
            print(json.dumps(row, sort_keys=True))
    if st.partial:
        return EXIT_BUDGET
    return EXIT_OK if last["girth_ok"] and last["epimorphism"] else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON run report on stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="parallel width for searches")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--max-nodes", type=int, default=50_000_000)
    budget.add_argument("--max-seconds", type=float, default=600.0)

    parser = argparse.ArgumentParser(prog="polyepi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="emit a catalog geometry")
    p.add_argument("family_and_params", nargs="+", metavar="FAMILY PARAM",
                   help="e.g. 'plane 2', 'gq 2', 'ordinary 8', 'grid 2', 'thin 8 2' or 'plane:2'")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", parents=[common], help="check polygon axioms")
    p.add_argument("geometry", help="file, catalog id, or - for stdin")
    p.add_argument("--n", type=int)
    p.add_argument("--thick", action="store_true", help="also require a thick (generalized) polygon")
    p.set_defaults(func=cmd_verify)

    for name, fn in (("double", transforms.double), ("undouble", transforms.undouble), ("dual", dual)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("geometry")
        p.add_argument("-o", "--output")
        p.set_defaults(func=_transform(fn))

    p = sub.add_parser("parity", parents=[common], help="line-parity classes of a thin polygon")
    p.add_argument("geometry")
    p.add_argument("-o", "--output")
    p.add_argument("--classes", help="write the two-column class listing here")
    p.set_defaults(func=cmd_parity)

    p = sub.add_parser("build-epi", parents=[common], help="build a recipe epimorphism")
    p.add_argument("geometry")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--orientation", choices=("a", "b"), default="a")
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--partition", required=True, help="cells such as '0,1|2'")
    p.add_argument("--labeling", help="comma-separated cyclic labeling of the target")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build_epi)

    p = sub.add_parser("classify-epi", parents=[common])
    p.add_argument("morphism")
    p.set_defaults(func=cmd_classify_epi)

    p = sub.add_parser("enum-epi", parents=[common, budget], help="enumerate epimorphisms")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--classify", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_enum_epi)

    p = sub.add_parser("count-epi", parents=[common, budget])
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_count_epi)

    p = sub.add_parser("iso", parents=[common, budget])
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--up-to-duality", action="store_true")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("embed", parents=[common, budget])
    p.add_argument("small")
    p.add_argument("big")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("free", parents=[common], help="run the free construction")
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--max-elements", type=int, default=200_000)
    p.add_argument("--max-seconds", type=float, default=60.0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_free)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = RunReport(args.command, [])
    t0 = time.monotonic()
    try:
        code = args.func(args, report)
    except search.SearchBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    except (GeometryError, MorphismError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.wall_time = round(time.monotonic() - t0, 3)
    if args.json:
        print(report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
