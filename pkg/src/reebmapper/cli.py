"""Command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from .complex import RdSpace, load_mesh, save_mesh
from .cover import Box, Cover, refine, resolution, uniform_cover
from .errors import ContainmentError, ReebMapperError, VerificationError, WellDefinednessError
from .fixtures import FIXTURES, canned
from .interleave import build_interleaving, corrupt, verify_interleaving
from .mapper import categorical_mapper, default_test_boxes, jcn, lemma61_check, mapper_nerve
from .reeb import betti, essential_values, geometric_mapper, is_adapted, reeb_graph, rgraph_isomorphic

CSV_COLUMNS = (
    "step", "resolution", "intervals", "mapper_vertices", "mapper_edges",
    "b0", "b1", "verified", "adapted", "isomorphic",
)


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    """Shortest round-trip text of ``v`` after rounding to 12 significant digits."""
    return repr(float(format(float(v), ".12g")))


def _counts(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--intervals expects integers, got {text!r}") from None
    return out


def _range(text: str, x: RdSpace) -> Box:
    if text == "auto":
        lo, hi = x.image_bounds()
        return Box(tuple(lo), tuple(hi))
    try:
        axes = [tuple(float(t) for t in part.split(",")) for part in text.split(";")]
    except ValueError:
        raise UsageError(f"bad --range {text!r}") from None
    if any(len(a) != 2 for a in axes):
        raise UsageError("--range needs lo,hi per axis separated by ';'")
    return Box.of(*axes)


def _space(args) -> RdSpace:
    if getattr(args, "fixture", None):
        return canned(args.fixture).space
    if not getattr(args, "mesh", None):
        raise UsageError("give --mesh PATH or --fixture NAME")
    try:
        return load_mesh(args.mesh)
    except FileNotFoundError:
        raise UsageError(f"mesh file not found: {args.mesh}") from None


def _cover(args, x: RdSpace) -> Cover:
    counts = _counts(args.intervals)
    if len(counts) == 1:
        counts = counts * x.dim_range
    if len(counts) != x.dim_range:
        raise UsageError(f"--intervals gives {len(counts)} counts for a map into R^{x.dim_range}")
    return uniform_cover(_range(args.range, x), counts, args.gain)


def _emit(args, stem: str, payloads: dict[str, str]) -> None:
    """Write ``stem.<fmt>`` files to ``--out`` or print the chosen format."""
    wanted = [args.format] if args.format else list(payloads)
    missing = [w for w in wanted if w not in payloads]
    if missing:
        raise UsageError(f"--format {missing[0]} not available here")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for w in wanted:
            (out / f"{stem}.{w}").write_text(payloads[w], encoding="utf-8")
    else:
        for w in wanted:
            sys.stdout.write(payloads[w])


def cmd_mapper(args) -> int:
    x = _space(args)
    nerve = mapper_nerve(categorical_mapper(x, _cover(args, x)))
    _emit(args, "mapper", {"json": nerve.dumps() + "\n", "dot": nerve.to_dot()})
    return 0


def cmd_reeb(args) -> int:
    x = _space(args)
    if x.dim_range != 1:
        raise UsageError("reeb needs a real-valued mesh (dim_range 1)")
    g = reeb_graph(x)
    _emit(args, "reeb", {"json": g.dumps() + "\n", "dot": g.to_dot()})
    return 0


def cmd_jcn(args) -> int:
    x = _space(args)
    counts = _counts(args.intervals)
    if len(counts) != x.dim_range:
        raise UsageError(f"--intervals gives {len(counts)} counts for a map into R^{x.dim_range}")
    nerve = jcn(x, counts, args.gain)
    _emit(args, "jcn", {"json": nerve.dumps() + "\n", "dot": nerve.to_dot()})
    return 0


def cmd_verify(args) -> int:
    x = _space(args)
    c = _cover(args, x)
    cm = categorical_mapper(x, c)
    boxes = default_test_boxes(x, c, count=args.boxes, seed=args.seed, limit=args.boxes if x.dim_range == 1 else None)
    lem = lemma61_check(x, c, boxes, cm)
    w = build_interleaving(x, c, seed=args.seed, count=args.boxes)
    corrupted = None
    if args.corrupt:
        corrupted = corrupt(w)
    rep = verify_interleaving(w)
    passed = lem.passed and rep.passed
    out = {
        "colimit_check": lem.to_json(),
        "interleaving": rep.to_json(),
        "label": rep.label,
        "resolution": resolution(c),
        "certified_bound": resolution(c) if passed else None,
        "passed": passed,
    }
    if args.corrupt:
        out["corruption"] = None if corrupted is None else {
            "side": corrupted[0], "box": corrupted[1].to_json(), "element": corrupted[2], "new_image": corrupted[3],
        }
    text = json.dumps(out, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verify.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0 if passed else 1


def convergence_rows(x: RdSpace, c: Cover, steps: int, seed: int = 0, wall_time: bool = False) -> list[dict]:
    """One row per cover in the refinement sweep starting at ``c``."""
    rows = []
    reeb = reeb_graph(x) if x.dim_range == 1 else None
    crit = essential_values(reeb) if reeb is not None else None
    for step in range(steps):
        t0 = time.perf_counter()
        cm = categorical_mapper(x, c)
        nerve = mapper_nerve(cm)
        bp = betti(nerve)
        rep = verify_interleaving(build_interleaving(x, c, seed=seed))
        row = {
            "step": step,
            "resolution": fmt(resolution(c)),
            "intervals": "x".join(str(n) for n in c.uniform.counts),
            "mapper_vertices": len(nerve.vertices),
            "mapper_edges": len(nerve.edges),
            "b0": bp.b0,
            "b1": bp.b1,
            "verified": str(rep.passed).lower(),
            "adapted": "",
            "isomorphic": "",
        }
        if crit is not None:
            adapted = is_adapted(c, crit)
            row["adapted"] = str(adapted).lower()
            if adapted:
                row["isomorphic"] = str(rgraph_isomorphic(geometric_mapper(cm), reeb)).lower()
        if wall_time:
            row["wall_time"] = fmt(time.perf_counter() - t0)
        rows.append(row)
        c = refine(c)
    return rows


def cmd_converge(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    x = _space(args)
    rows = convergence_rows(x, _cover(args, x), args.steps, args.seed, args.wall_time)
    cols = CSV_COLUMNS + (("wall_time",) if args.wall_time else ())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    text = buf.getvalue()
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "converge.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if all(r["verified"] == "true" for r in rows) else 1


def cmd_fixture(args) -> int:
    x = canned(args.name).space
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        save_mesh(x, Path(args.out) / f"{args.name}.json")
    else:
        from .complex import mesh_to_json
        sys.stdout.write(json.dumps(mesh_to_json(x)) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reebmapper", description="Mapper, JCN and Reeb graph tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--mesh", help="mesh JSON file")
        g.add_argument("--fixture", choices=FIXTURES, help="built-in mesh instead of --mesh")
        sp.add_argument("--out", help="output directory (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)

    def cover_flags(sp, intervals="3"):
        sp.add_argument("--intervals", default=intervals, help="N or N1,N2,... per axis")
        sp.add_argument("--gain", type=float, default=0.5)
        sp.add_argument("--range", default="auto", help="auto or lo,hi[;lo,hi...]")

    sp = sub.add_parser("mapper", help="mapper nerve of a uniform cover")
    source(sp)
    cover_flags(sp)
    sp.add_argument("--format", choices=("json", "dot"))
    sp.set_defaults(func=cmd_mapper)

    sp = sub.add_parser("reeb", help="Reeb graph of a real-valued mesh")
    source(sp)
    sp.add_argument("--format", choices=("json", "dot"))
    sp.set_defaults(func=cmd_reeb)

    sp = sub.add_parser("jcn", help="Joint Contour Net over the image bounding box")
    source(sp)
    sp.add_argument("--intervals", required=True, help="N1,N2,... one per axis")
    sp.add_argument("--gain", type=float, default=0.5)
    sp.add_argument("--format", choices=("json", "dot"))
    sp.set_defaults(func=cmd_jcn)

    sp = sub.add_parser("verify", help="check the colimit equivalence and the interleaving at eps = res")
    source(sp)
    cover_flags(sp)
    sp.add_argument("--boxes", type=int, default=64, help="test boxes (d >= 2) or cap on them (d = 1)")
    sp.add_argument("--corrupt", action="store_true", help="debug: corrupt one witness map first")
    sp.set_defaults(func=cmd_verify, format="json")

    sp = sub.add_parser("converge", help="refinement sweep as CSV")
    source(sp)
    cover_flags(sp, intervals="2")
    sp.add_argument("--steps", type=int, default=4)
    sp.add_argument("--wall-time", action="store_true", help="add a wall_time column (not reproducible)")
    sp.add_argument("--format", choices=("csv",), default="csv")
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("fixture", help="write a built-in mesh as JSON")
    sp.add_argument("name", choices=FIXTURES)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fixture)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContainmentError, VerificationError, WellDefinednessError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ReebMapperError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
