"""Command-line interface: ``legatlas <command> ...``.

Grids are given as encoded strings (``2;x=2,1;o=1,2``), as paths to files
with one grid per line, or as ``-`` for standard input.  Exit status is 0
on success, 1 on domain errors (bad grids, missing files) and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from . import atlas as at
from . import moves as mv
from .fingerprint import KnotTable, MultiComponent, fingerprint, format_jones, mirror_fingerprint
from .grid import GridError, ParseError, component_count, decode, encode, render_ascii
from .invariants import summary_line
from .search import EITHER, NEGATIVE, POSITIVE, VIEWS, Budget, MoveGraphView, connected, is_destabilizable


class DomainError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    max_size: Optional[int] = None
    max_nodes: int = 100_000
    max_depth: int = 1_000
    time_limit: float = 60.0
    seed: int = 0
    workers: int = 1
    deterministic: bool = False
    checkpoint_dir: Optional[str] = None
    name_table: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        workers = args.workers
        if workers is None:
            workers = int(os.environ.get(at.WORKERS_ENV, "1") or 1)
        cfg = cls(
            command=args.command,
            max_size=args.max_size,
            max_nodes=args.max_nodes,
            max_depth=args.max_depth,
            time_limit=args.time_limit,
            seed=args.seed,
            workers=max(1, workers),
            deterministic=args.deterministic,
            checkpoint_dir=args.checkpoint_dir,
            name_table=args.name_table,
        )
        if cfg.deterministic:
            cfg.workers = 1
            cfg.time_limit = math.inf
        return cfg

    def budget(self, size: int) -> Budget:
        return Budget(self.max_size or size, self.max_nodes, self.max_depth, self.time_limit, self.seed)

    def as_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["time_limit"]):
            d["time_limit"] = None
        return d


# -- input helpers ----------------------------------------------------------------


def _lines(sources: list[str]) -> Iterator[tuple[str, str]]:
    """(origin, text) for every non-comment grid line in the sources."""
    for src in sources:
        if src == "-":
            for i, line in enumerate(sys.stdin, 1):
                if line.strip() and not line.startswith("#"):
                    yield f"<stdin>:{i}", line.strip()
        elif ";" in src:
            yield "<arg>", src
        else:
            path = Path(src)
            if not path.exists():
                raise DomainError(f"no such file: {src}")
            with open(path) as fh:
                for i, line in enumerate(fh, 1):
                    if line.strip() and not line.startswith("#"):
                        yield f"{src}:{i}", line.strip()


def _grids(sources: list[str]):
    for origin, text in _lines(sources):
        try:
            yield decode(text)
        except GridError as e:
            raise DomainError(f"{origin}: {_describe(e)}") from e


def _one(text: str):
    grids = list(_grids([text]))
    if len(grids) != 1:
        raise DomainError(f"expected exactly one grid in {text!r}")
    return grids[0]


def _describe(e: Exception) -> str:
    if isinstance(e, ParseError):
        return f"ParseError at offset {e.offset}: {e}"
    return f"{type(e).__name__}: {e}"


def _table(cfg: RunConfig) -> KnotTable:
    return KnotTable.load(cfg.name_table) if cfg.name_table else KnotTable.builtin()


# -- commands -----------------------------------------------------------------------


def cmd_validate(args, cfg) -> int:
    bad = 0
    for origin, text in _lines(args.grids):
        try:
            g = decode(text)
        except GridError as e:
            print(f"{origin}: {_describe(e)}", file=sys.stderr)
            bad += 1
            continue
        print(f"ok {encode(g)} components={component_count(g)}")
    return 1 if bad else 0


def cmd_render(args, cfg) -> int:
    for i, g in enumerate(_grids(args.grids)):
        if i:
            print()
        print(render_ascii(g))
    return 0


def cmd_invariants(args, cfg) -> int:
    for g in _grids(args.grids):
        print(summary_line(g))
    return 0


def cmd_fingerprint(args, cfg) -> int:
    table = _table(cfg)
    for g in _grids(args.grids):
        try:
            fp = fingerprint(g, table=table)
        except MultiComponent:
            print(f"components={component_count(g)}")
            continue
        leg = mirror_fingerprint(fp, table)
        alex = ",".join(str(c) for c in fp.alexander)
        print(
            f"components=1 alexander={alex} determinant={fp.determinant} "
            f"jones={format_jones(fp.jones).replace(' ', ',')} name={fp.name or '-'} "
            f"legendrian_type={leg.name or '-'}"
        )
    return 0


def cmd_moves(args, cfg) -> int:
    g = _one(args.grid)
    if args.action == "list":
        view = MoveGraphView(args.view, cfg.max_size or g.size + 1)
        from .search import neighbors

        for m, h in neighbors(g, view):
            print(f"{m} {encode(h)}")
        return 0
    if not args.path_file:
        raise DomainError("moves apply needs a path file")
    path = []
    with open(args.path_file) as fh:
        for i, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                path.append(mv.MoveDescriptor.parse(line))
            except ValueError as e:
                raise DomainError(f"{args.path_file}:{i}: {e}") from e
    try:
        h = mv.apply_path(g, path)
    except GridError as e:
        raise DomainError(_describe(e)) from e
    print(encode(h))
    return 0


def cmd_isotopic(args, cfg) -> int:
    g1, g2 = _one(args.g1), _one(args.g2)
    size = cfg.max_size or max(g1.size, g2.size) + 2
    view = MoveGraphView(args.view, size)
    out = connected(g1, g2, view, cfg.budget(size))
    line = out.verdict + (f" {out.reason}" if out.reason else "")
    if out.connected:
        line += f" length={len(out.path)}"
    print(line)
    if out.connected:
        for m in out.path:
            print(m)
        if args.path_out:
            Path(args.path_out).write_text("".join(f"{m}\n" for m in out.path))
    if args.stats:
        print(json.dumps(out.as_dict()["stats"], sort_keys=True), file=sys.stderr)
    return 0


def cmd_destab(args, cfg) -> int:
    g = _one(args.grid)
    sign = {"+": POSITIVE, "-": NEGATIVE, "either": EITHER}.get(args.sign, args.sign)
    res = is_destabilizable(g, sign, cfg.budget(cfg.max_size or g.size + 1))
    if res.found:
        smaller = mv.apply_path(g, res.witness)
        print(f"yes {res.destab} -> {encode(smaller)} walk={len(res.walk)}")
        for m in res.witness:
            print(m)
    else:
        print(f"not-found exhausted={'yes' if res.exhausted else 'no'} nodes={res.stats['nodes']}")
    return 0


def cmd_enumerate(args, cfg) -> int:
    if args.count_only and not (args.knots_only or args.quotient or args.sampled):
        print(at.count_valid(args.n))
        return 0
    mode = "sampled" if args.sampled else "exhaustive"
    total = 0
    for g in at.enumerate_grids(args.n, mode, args.sampled or 0, cfg.seed, args.knots_only, args.quotient):
        total += 1
        if not args.count_only:
            print(encode(g))
    if args.count_only:
        print(total)
    return 0


def _atlas_config(args, cfg) -> at.AtlasConfig:
    return at.AtlasConfig(
        max_n=args.max_n,
        min_n=args.min_n,
        max_nodes=cfg.max_nodes,
        max_depth=cfg.max_depth,
        time_limit=cfg.time_limit,
        extra_sizes=args.extra_sizes,
        seed=cfg.seed,
        workers=cfg.workers,
        deterministic=cfg.deterministic,
        sample_from=args.sample_from,
        sample_count=args.sample_count,
        knots=tuple(args.knot or ()),
        layers=args.layers,
    )


def cmd_atlas(args, cfg) -> int:
    out = Path(args.out)
    if args.action == "export":
        src = Path(args.source)
        if src.is_dir():
            src = src / "atlas.jsonl"
        if not src.exists():
            raise DomainError(f"no such file: {src}")
        meta, records = at.read_jsonl(src.read_text())
        written = at.export_tables(records, out, meta)
        written += at.export_mountain_ranges(records, out, plots=not args.no_plots)
    else:
        acfg = _atlas_config(args, cfg)
        say = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
        result = at.run_atlas(acfg, cfg.checkpoint_dir, _table(cfg), progress=say)
        written = at.write_run(result, out, plots=not args.no_plots)
        for layer in at.LAYERS:
            recs = result.layers.get(layer, [])
            print(f"layer {layer}: {len(recs)} records")
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_conjecture(args, cfg) -> int:
    if args.report:
        data = json.loads(Path(args.report).read_text())
        summaries = []
        for d in data.get("census", {}).values():
            fp = at.Fingerprint(1, tuple(), 0, None, d["knot"])
            s = at.KnotClassSummary(fp, d["max_tb"], d["arc_index_estimate"])
            s.min_grid_size_seen = {(c["tb"], c["r"]): (c["min_size"], c["witness"]) for c in d["cells"]}
            summaries.append(s)
    else:
        census = at.run_census(args.max_n, 2, cfg.workers, _table(cfg))
        summaries = list(census.summaries.values())
    rep = at.conjecture_report(summaries)
    for k in rep["knots"]:
        print(f"{k['knot']} arc_index={k['arc_index']} max_tb={k['max_tb']} cells={k['cells']} violations={len(k['violations'])}")
        for v in k["violations"]:
            print(f"  violation tb={v['tb']} r={v['r']} min_size={v['min_size']} bound={v['bound']} witness={v['witness']}")
    print(f"total violations={rep['violations']}")
    return 0


# -- parser -------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--max-size", type=int, help="grid-number cap for searches")
    p.add_argument("--max-nodes", type=int, default=100_000)
    p.add_argument("--max-depth", type=int, default=1_000)
    p.add_argument("--time-limit", type=float, default=60.0, help="seconds per search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help=f"worker processes (default ${at.WORKERS_ENV} or 1)")
    p.add_argument("--deterministic", action="store_true", help="single worker, no time limits")
    p.add_argument("--checkpoint-dir")
    p.add_argument("--name-table", help="CSV of named knots")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="legatlas", description="Grid diagrams of Legendrian knots.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("validate", cmd_validate, "check grids"),
        ("render", cmd_render, "draw grids as text"),
        ("invariants", cmd_invariants, "print tb, r, sl"),
        ("fingerprint", cmd_fingerprint, "print knot invariants"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("grids", nargs="+", help="encoded grid, file of grids, or -")
        p.set_defaults(func=fn)

    p = sub.add_parser("moves", parents=[common], help="list or apply moves")
    p.add_argument("action", choices=("apply", "list"))
    p.add_argument("path_file", nargs="?", help="file of moves, one per line (apply)")
    p.add_argument("grid")
    p.add_argument("--view", choices=VIEWS, default="legendrian")
    p.set_defaults(func=cmd_moves)

    p = sub.add_parser("isotopic", parents=[common], help="search for a move path")
    p.add_argument("g1")
    p.add_argument("g2")
    p.add_argument("--view", choices=VIEWS, default="legendrian")
    p.add_argument("--path-out")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_isotopic)

    p = sub.add_parser("destab", parents=[common], help="look for a destabilization")
    p.add_argument("grid")
    p.add_argument("--sign", choices=("positive", "negative", "either", "+", "-"), default="either")
    p.set_defaults(func=cmd_destab)

    p = sub.add_parser("enumerate", parents=[common], help="list grids of one size")
    p.add_argument("n", type=int)
    p.add_argument("--sampled", type=int, metavar="COUNT")
    p.add_argument("--knots-only", action="store_true")
    p.add_argument("--quotient", action="store_true", help="one grid per cyclic-permutation orbit")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("atlas", help="run or export the atlas pipeline")
    asub = p.add_subparsers(dest="action", required=True)
    r = asub.add_parser("run", parents=[common])
    r.add_argument("--max-n", type=int, default=6)
    r.add_argument("--min-n", type=int, default=2)
    r.add_argument("--extra-sizes", type=int, default=2, help="search caps go up to n + this")
    r.add_argument("--sample-from", type=int, help="sample instead of enumerating from this size")
    r.add_argument("--sample-count", type=int, default=100_000)
    r.add_argument("--knot", action="append", help="restrict to a knot label (repeatable)")
    r.add_argument("--layers", type=int, choices=(1, 2, 3), default=3)
    r.add_argument("--out", required=True)
    r.add_argument("--no-plots", action="store_true")
    r.add_argument("-v", "--verbose", action="store_true")
    e = asub.add_parser("export", parents=[common])
    e.add_argument("source", help="atlas.jsonl or a run directory")
    e.add_argument("--out", required=True)
    e.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("conjecture", parents=[common], help="check min grid size against arc index + m")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--max-n", type=int)
    g.add_argument("--report", help="report.json of a finished run")
    p.set_defaults(func=cmd_conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        return args.func(args, cfg)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (GridError, OSError, ValueError) as e:
        print(f"error: {_describe(e)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
