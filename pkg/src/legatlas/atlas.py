"""Atlas pipeline: enumerate grids, bucket them, reduce, and build layers.

A run goes through these steps:

1. census: every knot grid up to the size cap is fingerprinted and its
   (tb, r) recorded; the smallest grid per (tb, r) cell is kept.
2. layer G: per knot type, grids at the maximal observed tb with no
   destabilization pattern are bucketed by r and reduced by search; class
   representatives that turn out destabilizable are dropped.
3. layers S and T: positive and negative stabilizations of the previous
   layer, bucketed and reduced the same way, with parent lists.
4. symmetry columns: reverse, Legendrian mirror and their composition are
   located among the records of the same layer.

Buckets are independent units of work and can be processed by a pool of
worker processes.  Every finished bucket is written to the checkpoint
directory, so an interrupted run resumes where it stopped.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from . import moves as mv
from .fingerprint import Fingerprint, KnotTable, smooth_type_of_legendrian
from .grid import GridDiagram, component_count, decode, encode
from .invariants import tb_r
from .search import (
    EITHER,
    Budget,
    MoveGraphView,
    canonical,
    connected,
    explore,
    is_destabilizable,
    reduce,
)

LAYERS = ("G", "S", "T")
CSV_HEADER = "id,grid,tb,r,parents,reverse,legendrian_mirror,reverse_mirror"
STAB_MOVES = {"+": mv.StabType("X", "NE"), "-": mv.StabType("X", "SW")}
WORKERS_ENV = "LEGATLAS_WORKERS"


def version() -> str:
    try:
        from importlib.metadata import version as _v

        return _v("artifact")
    except Exception:
        return "0+unknown"


# -- enumeration ------------------------------------------------------------------


def derangements(n: int) -> list[tuple[int, ...]]:
    return [d for d in itertools.permutations(range(1, n + 1)) if all(d[i] != i + 1 for i in range(n))]


def count_valid(n: int) -> int:
    """n! times the number of derangements of n."""
    d = [1, 0]
    for k in range(2, n + 1):
        d.append((k - 1) * (d[-1] + d[-2]))
    return math.factorial(n) * d[n]


def _random_derangement(n: int, rng: random.Random) -> list[int]:
    while True:
        d = list(range(1, n + 1))
        rng.shuffle(d)
        if all(d[i] != i + 1 for i in range(n)):
            return d


def enumerate_grids(
    n: int,
    mode: str = "exhaustive",
    count: int = 0,
    seed: int = 0,
    knots_only: bool = False,
    quotient: bool = False,
    prefix: Optional[int] = None,
) -> Iterator[GridDiagram]:
    """Grids of size n.

    Exhaustive mode yields every valid (x, o) pair once, as o = d(x) for a
    derangement d.  With ``quotient`` only the least translate of each
    orbit under cyclic permutations is kept.  Sampled mode draws ``count``
    uniform grids with a seeded generator (quotient maps them to their
    least translate).  ``prefix`` restricts exhaustive mode to x[1] ==
    prefix, which splits the work into independent chunks.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if mode == "sampled":
        rng = random.Random(seed)
        for _ in range(count):
            x = list(range(1, n + 1))
            rng.shuffle(x)
            d = _random_derangement(n, rng) if n > 1 else None
            if d is None:
                continue
            o = tuple(d[v - 1] for v in x)
            x = tuple(x)
            if quotient:
                x, o, _, _ = canonical(x, o)
            g = GridDiagram(x, o)
            if knots_only and component_count(g) != 1:
                continue
            yield g
        return
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    ders = derangements(n)
    if quotient:
        # every least translate has x[0] == 1
        xs = ((1,) + p for p in itertools.permutations(range(2, n + 1)))
    else:
        xs = itertools.permutations(range(1, n + 1))
    if prefix is not None:
        xs = (x for x in xs if n > 1 and x[1] == prefix)
    for x in xs:
        for d in ders:
            o = tuple(d[v - 1] for v in x)
            if quotient:
                cx, co, _, _ = canonical(x, o)
                if (cx, co) != (x, o):
                    continue
            g = GridDiagram(x, o)
            if knots_only and component_count(g) != 1:
                continue
            yield g


# -- census ---------------------------------------------------------------------


@dataclass
class KnotClassSummary:
    fingerprint: Fingerprint
    max_tb: int
    arc_index_estimate: int
    # (tb, r) -> (smallest size seen, encoding of the first such grid)
    min_grid_size_seen: dict = field(default_factory=dict)
    grids_seen: int = 0

    @property
    def label(self) -> str:
        return self.fingerprint.label()

    def as_dict(self) -> dict:
        return {
            "knot": self.label,
            "fingerprint": self.fingerprint.key,
            "max_tb": self.max_tb,
            "arc_index_estimate": self.arc_index_estimate,
            "grids_seen": self.grids_seen,
            "cells": [
                {"tb": tb, "r": r, "min_size": s, "witness": w}
                for (tb, r), (s, w) in sorted(self.min_grid_size_seen.items(), key=lambda kv: (-kv[0][0], kv[0][1]))
            ],
        }


def _fp_to_dict(fp: Fingerprint) -> dict:
    return {
        "components": fp.components,
        "alexander": list(fp.alexander),
        "determinant": fp.determinant,
        "jones": [fp.jones[0], list(fp.jones[1])] if fp.jones is not None else None,
        "name": fp.name,
    }


def _fp_from_dict(d: dict) -> Fingerprint:
    jones = (d["jones"][0], tuple(d["jones"][1])) if d.get("jones") is not None else None
    return Fingerprint(d["components"], tuple(d["alexander"]), d["determinant"], jones, d.get("name", ""))


def _census_chunk(args) -> dict:
    """Census of the size-n least translates with x[1] == prefix."""
    n, prefix, mode, count, seed, table_rows = args
    table = KnotTable(table_rows) if table_rows is not None else None
    out: dict = {}
    if mode == "exhaustive":
        grids = enumerate_grids(n, knots_only=True, quotient=True, prefix=prefix)
    else:
        grids = enumerate_grids(n, "sampled", count=count, seed=seed, knots_only=True, quotient=True)
    for g in grids:
        fp = smooth_type_of_legendrian(g, table=table)
        tb, r = tb_r(g)
        entry = out.get(fp.key)
        if entry is None:
            entry = out[fp.key] = {"fp": fp, "seen": 0, "cells": {}, "max_tb": tb, "cands": []}
        entry["seen"] += 1
        enc = encode(g)
        cell = entry["cells"].get((tb, r))
        if cell is None or (n, enc) < cell:
            entry["cells"][(tb, r)] = (n, enc)
        if tb > entry["max_tb"]:
            entry["max_tb"] = tb
            entry["cands"] = []
        if tb == entry["max_tb"] and not mv._destabs(g.x_rows, g.o_rows):
            entry["cands"].append((enc, r))
    return out


@dataclass
class Census:
    summaries: dict  # fingerprint key -> KnotClassSummary
    candidates: dict  # fingerprint key -> list of (encoding, r) at max tb
    sizes: list

    def to_json(self) -> dict:
        return {
            "sizes": self.sizes,
            "types": [
                {
                    "fingerprint": _fp_to_dict(s.fingerprint),
                    "max_tb": s.max_tb,
                    "arc_index_estimate": s.arc_index_estimate,
                    "grids_seen": s.grids_seen,
                    "cells": [[tb, r, sz, w] for (tb, r), (sz, w) in sorted(s.min_grid_size_seen.items())],
                    "candidates": self.candidates[k],
                }
                for k, s in sorted(self.summaries.items())
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Census":
        summaries, candidates = {}, {}
        for t in d["types"]:
            fp = _fp_from_dict(t["fingerprint"])
            cells = {(tb, r): (sz, w) for tb, r, sz, w in t["cells"]}
            summaries[fp.key] = KnotClassSummary(fp, t["max_tb"], t["arc_index_estimate"], cells, t["grids_seen"])
            candidates[fp.key] = [tuple(c) for c in t["candidates"]]
        return cls(summaries, candidates, d["sizes"])


def _merge_census(parts: list[tuple[int, dict]]) -> Census:
    summaries: dict = {}
    cands: dict = {}
    for n, part in parts:
        for key, e in part.items():
            s = summaries.get(key)
            if s is None:
                s = summaries[key] = KnotClassSummary(e["fp"], e["max_tb"], n)
                cands[key] = []
            s.grids_seen += e["seen"]
            s.arc_index_estimate = min(s.arc_index_estimate, n)
            for cell, val in e["cells"].items():
                if cell not in s.min_grid_size_seen or val < s.min_grid_size_seen[cell]:
                    s.min_grid_size_seen[cell] = val
            if e["max_tb"] > s.max_tb:
                s.max_tb = e["max_tb"]
                cands[key] = []
            if e["max_tb"] == s.max_tb:
                cands[key].extend(e["cands"])
    for key in cands:
        cands[key] = sorted(set(cands[key]))
    return Census(summaries, cands, sorted({n for n, _ in parts}))


def run_census(
    max_n: int,
    min_n: int = 2,
    workers: int = 1,
    table: Optional[KnotTable] = None,
    sample_from: Optional[int] = None,
    sample_count: int = 0,
    seed: int = 0,
) -> Census:
    """Fingerprint every knot grid of size min_n..max_n (sizes from
    ``sample_from`` on are sampled instead of enumerated)."""
    rows = table.rows if table is not None else None
    jobs = []
    for n in range(min_n, max_n + 1):
        if sample_from is not None and n >= sample_from:
            jobs.append((n, None, "sampled", sample_count, seed + n, rows))
        elif n <= 2:
            jobs.append((n, None, "exhaustive", 0, 0, rows))
        else:
            jobs += [(n, p, "exhaustive", 0, 0, rows) for p in range(2, n + 1)]
    results = _map(_census_chunk, jobs, workers)
    return _merge_census([(job[0], res) for job, res in zip(jobs, results)])


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# -- buckets and records ----------------------------------------------------------


@dataclass
class Bucket:
    fingerprint: Fingerprint
    tb: int
    r: int
    members: list  # GridDiagram

    @property
    def key(self) -> str:
        return bucket_key(self.fingerprint.key, self.tb, self.r)


def bucket_key(fp_key: str, tb: int, r: int) -> str:
    return f"{fp_key}_tb{tb}_r{r}"


@dataclass
class AtlasRecord:
    id: str
    grid: GridDiagram
    tb: int
    r: int
    parents: list = field(default_factory=list)
    reverse: str = "?"
    legendrian_mirror: str = "?"
    reverse_mirror: str = "?"
    layer: str = "G"
    knot: str = ""
    fingerprint: str = ""
    members: int = 1
    # parent id -> {"sign", "move", "path"}: stabilizing the parent by
    # ``move`` and then following ``path`` reproduces ``grid``
    witnesses: dict = field(default_factory=dict)

    def csv_row(self) -> str:
        return ",".join(
            [
                self.id,
                encode(self.grid),
                str(self.tb),
                str(self.r),
                ";".join(self.parents),
                self.reverse,
                self.legendrian_mirror,
                self.reverse_mirror,
            ]
        )

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "grid": encode(self.grid),
            "tb": self.tb,
            "r": self.r,
            "parents": list(self.parents),
            "reverse": self.reverse,
            "legendrian_mirror": self.legendrian_mirror,
            "reverse_mirror": self.reverse_mirror,
            "layer": self.layer,
            "knot": self.knot,
            "fingerprint": self.fingerprint,
            "members": self.members,
            "witnesses": self.witnesses,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AtlasRecord":
        return cls(
            d["id"],
            decode(d["grid"]),
            d["tb"],
            d["r"],
            list(d.get("parents", [])),
            d.get("reverse", "?"),
            d.get("legendrian_mirror", "?"),
            d.get("reverse_mirror", "?"),
            d.get("layer", d["id"][:1]),
            d.get("knot", ""),
            d.get("fingerprint", ""),
            d.get("members", 1),
            d.get("witnesses", {}),
        )


@dataclass
class AtlasConfig:
    max_n: int = 6
    min_n: int = 2
    max_nodes: int = 100_000
    max_depth: int = 1_000
    time_limit: float = 60.0
    destab_nodes: int = 20_000
    extra_sizes: int = 2  # schedule caps n .. n + extra_sizes
    seed: int = 0
    workers: int = 1
    deterministic: bool = False
    sample_from: Optional[int] = None
    sample_count: int = 0
    knots: tuple = ()  # restrict to these labels (empty = all)
    layers: int = 3

    def effective(self) -> "AtlasConfig":
        if not self.deterministic:
            return self
        cfg = AtlasConfig(**asdict(self))
        cfg.workers = 1
        cfg.time_limit = math.inf
        return cfg

    def budget(self, size: int) -> Budget:
        return Budget(size, self.max_nodes, self.max_depth, self.time_limit, self.seed)

    def schedule(self, size: int) -> list[Budget]:
        return [self.budget(size + k) for k in range(self.extra_sizes + 1)]

    def metadata(self) -> dict:
        d = asdict(self.effective())
        d["knots"] = list(d["knots"])
        if math.isinf(d["time_limit"]):
            d["time_limit"] = None
        d["version"] = version()
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.metadata(), sort_keys=True).encode()).hexdigest()[:16]


# -- per-bucket work (runs in worker processes) -----------------------------------


def _reduce_bucket(task: dict) -> dict:
    """Reduce one bucket.

    ``task["members"]`` is a list of (encoding, parent entries); parent
    entries are (parent id, sign, move text).  Members that stabilize the
    same way from different parents are merged beforehand.
    """
    cfg = AtlasConfig(**task["config"])
    members: dict = {}
    for enc, parents in task["members"]:
        members.setdefault(enc, []).extend(tuple(p) for p in parents)
    encs = sorted(members)
    grids = [decode(e) for e in encs]
    size = max(g.size for g in grids)
    red = reduce(grids, MoveGraphView("legendrian", size + cfg.extra_sizes), cfg.schedule(size), check_bucket=False)
    classes = []
    merge_log = []
    for a, b, path in red.merges:
        merge_log.append({"from": encs[a], "to": encs[b], "path": [str(m) for m in path]})
    for ci, cls in enumerate(red.classes):
        rep_i = red.representative_index(ci)
        rep = red.representatives[ci]
        entry = {"grid": encode(rep), "members": len(cls), "parents": {}, "destab": None}
        for i in cls:
            for pid, sign, move in members[encs[i]]:
                if pid in entry["parents"]:
                    continue
                path = red.path_between(i, rep_i) if i != rep_i else []
                entry["parents"][pid] = {"sign": sign, "move": move, "path": [str(m) for m in path]}
        if task["check_destab"]:
            b = cfg.budget(rep.size)
            b = Budget(b.max_size, min(b.max_nodes, cfg.destab_nodes), b.max_depth, b.time_limit, b.seed)
            res = is_destabilizable(rep, EITHER, b)
            entry["destab"] = {
                "found": res.found,
                "exhausted": res.exhausted,
                "witness": [str(m) for m in res.witness],
            }
        classes.append(entry)
    return {
        "key": task["key"],
        "digest": task["digest"],
        "classes": classes,
        "merges": merge_log,
        "unresolved_pairs": red.unresolved_pairs,
        "proven_distinct_pairs": red.proven_distinct_pairs,
        "members": len(encs),
    }


def _annotate_bucket(task: dict) -> dict:
    """Locate the symmetric images of every record of one bucket.

    Targets are the records of the same layer and knot type at r and -r.
    """
    cfg = AtlasConfig(**task["config"])
    same = [(rid, decode(enc)) for rid, enc in task["same"]]
    opposite = [(rid, decode(enc)) for rid, enc in task["opposite"]]
    out = {}
    for rid, enc in task["records"]:
        g = decode(enc)
        row = {}
        images = [("reverse_mirror", mv.transverse_mirror(g), same)]
        if task["r"] == 0:
            images = [("reverse", mv.reverse(g), opposite), ("legendrian_mirror", mv.legendrian_mirror(g), opposite)] + images
        else:
            row["reverse"] = row["legendrian_mirror"] = "-"
        paths = {}
        for col, img, targets in images:
            row[col], path = _locate(img, targets, cfg)
            if path is not None:
                paths[col] = [str(m) for m in path]
        row["paths"] = paths
        out[rid] = row
    return {"key": task["key"], "digest": task["digest"], "annotations": out}


def _locate(img: GridDiagram, targets: list, cfg: AtlasConfig) -> tuple:
    """(target id, path from img) for the first target reached, or ("?", None)."""
    if not targets:
        return "?", None
    size = max([img.size] + [t.size for _, t in targets])
    for budget in cfg.schedule(size):
        view = MoveGraphView("legendrian", budget.max_size)
        if len(targets) > 1:
            hits, _, _ = explore(img, [t for _, t in targets], view, budget)
            if hits:
                i = min(hits)
                return targets[i][0], hits[i]
        else:
            # one target: meeting in the middle is far cheaper
            out = connected(img, targets[0][1], view, budget, check_invariants=False)
            if out.connected:
                return targets[0][0], out.path
    return "?", None


# -- checkpointing ---------------------------------------------------------------


class Checkpoint:
    """``buckets/<key>/state`` files plus an append-only merge log per bucket."""

    def __init__(self, root: Optional[Path]):
        self.root = Path(root) if root is not None else None

    def _dir(self, key: str) -> Path:
        return self.root / "buckets" / key

    def load(self, key: str, digest: str) -> Optional[dict]:
        if self.root is None:
            return None
        path = self._dir(key) / "state"
        if not path.exists():
            return None
        try:
            state = json.loads(path.read_text())
        except json.JSONDecodeError:
            return None
        return state if state.get("digest") == digest else None

    def save(self, key: str, state: dict) -> None:
        if self.root is None:
            return
        d = self._dir(key)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "merges.log", "a") as fh:
            for m in state.get("merges", ()):
                fh.write(json.dumps(m, sort_keys=True) + "\n")
        tmp = d / "state.tmp"
        tmp.write_text(json.dumps(state, sort_keys=True))
        os.replace(tmp, d / "state")

    def load_census(self, digest: str) -> Optional[Census]:
        if self.root is None:
            return None
        path = self.root / "census.json"
        if not path.exists():
            return None
        d = json.loads(path.read_text())
        return Census.from_json(d["census"]) if d.get("digest") == digest else None

    def save_census(self, census: Census, digest: str) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "census.json").write_text(json.dumps({"digest": digest, "census": census.to_json()}))


def _digest(*parts) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _run_tasks(fn, tasks: list, ckpt: Checkpoint, workers: int, on_done=None) -> list:
    results: dict = {}
    todo = []
    for t in tasks:
        state = ckpt.load(t["ckpt_key"], t["digest"])
        if state is not None:
            results[t["ckpt_key"]] = state
        else:
            todo.append(t)
    def finish(t, res):
        ckpt.save(t["ckpt_key"], res)
        results[t["ckpt_key"]] = res
        if on_done:
            on_done(t["ckpt_key"])

    if workers <= 1 or len(todo) <= 1:
        for t in todo:
            finish(t, fn(t))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, t) for t in todo]
            for t, fut in zip(todo, futures):
                finish(t, fut.result())
    return [results[t["ckpt_key"]] for t in tasks]


# -- the pipeline ---------------------------------------------------------------


@dataclass
class Atlas:
    config: AtlasConfig
    census: Census
    layers: dict  # "G" | "S" | "T" -> list of AtlasRecord
    report: dict

    def records(self) -> list[AtlasRecord]:
        return [rec for layer in LAYERS for rec in self.layers.get(layer, [])]

    def by_id(self) -> dict:
        return {rec.id: rec for rec in self.records()}

    def knots(self) -> list[str]:
        return sorted({rec.knot for rec in self.records()})


def _bucket_sort_key(fp_key: str, tb: int, r: int):
    return (fp_key, -tb, r)


def _layer_tasks(layer: str, groups: dict, cfg: AtlasConfig, check_destab: bool) -> list[dict]:
    tasks = []
    conf = asdict(cfg.effective())
    for (fp_key, tb, r), members in sorted(groups.items(), key=lambda kv: _bucket_sort_key(*kv[0])):
        members = sorted(members)
        key = bucket_key(fp_key, tb, r)
        digest = _digest(cfg.digest(), layer, members, check_destab)
        tasks.append(
            {
                "key": key,
                "ckpt_key": f"{layer}_{key}",
                "digest": digest,
                "config": conf,
                "members": members,
                "check_destab": check_destab,
                "fp_key": fp_key,
                "tb": tb,
                "r": r,
            }
        )
    return tasks


def _records_from(layer: str, tasks: list, results: list, labels: dict, counter: itertools.count) -> tuple[list, list]:
    records, dropped = [], []
    for task, res in zip(tasks, results):
        for cls in sorted(res["classes"], key=lambda c: c["grid"]):
            if cls["destab"] and cls["destab"]["found"]:
                dropped.append({"layer": layer, "grid": cls["grid"], "witness": cls["destab"]["witness"]})
                continue
            g = decode(cls["grid"])
            rec = AtlasRecord(
                id=f"{layer}{next(counter)}",
                grid=g,
                tb=task["tb"],
                r=task["r"],
                parents=sorted(cls["parents"], key=_id_order),
                layer=layer,
                knot=labels[task["fp_key"]],
                fingerprint=task["fp_key"],
                members=cls["members"],
                witnesses={pid: cls["parents"][pid] for pid in sorted(cls["parents"], key=_id_order)},
            )
            records.append(rec)
    return records, dropped


def _id_order(rid: str):
    return (LAYERS.index(rid[0]) if rid[:1] in LAYERS else 9, int(rid[1:]) if rid[1:].isdigit() else 0, rid)


def _stabilized_groups(parents: list[AtlasRecord]) -> dict:
    groups: dict = {}
    for rec in parents:
        for sign, t in STAB_MOVES.items():
            child = mv.stabilize(rec.grid, t, 1)
            dtb, dr = mv.TB_R_DELTA[t]
            key = (rec.fingerprint, rec.tb + dtb, rec.r + dr)
            move = str(mv.MoveDescriptor("stab", site=1, stype=t))
            groups.setdefault(key, []).append((encode(child), [(rec.id, sign, move)]))
    return groups


def _annotate(layer_records: list[AtlasRecord], cfg: AtlasConfig, ckpt: Checkpoint, layer: str) -> None:
    by_cell: dict = {}
    for rec in layer_records:
        by_cell.setdefault((rec.fingerprint, rec.tb, rec.r), []).append(rec)
    tasks = []
    conf = asdict(cfg.effective())
    for (fp_key, tb, r), recs in sorted(by_cell.items(), key=lambda kv: _bucket_sort_key(*kv[0])):
        same = [(x.id, encode(x.grid)) for x in recs]
        opposite = [(x.id, encode(x.grid)) for x in by_cell.get((fp_key, tb, -r), [])]
        key = bucket_key(fp_key, tb, r)
        tasks.append(
            {
                "key": key,
                "ckpt_key": f"{layer}_{key}_sym",
                "digest": _digest(cfg.digest(), layer, same, opposite, "sym"),
                "config": conf,
                "records": same,
                "same": same,
                "opposite": opposite,
                "r": r,
            }
        )
    results = _run_tasks(_annotate_bucket, tasks, ckpt, cfg.effective().workers)
    ann = {}
    for res in results:
        ann.update(res["annotations"])
    sym_paths = {}
    for rec in layer_records:
        row = ann[rec.id]
        if row.get("paths"):
            sym_paths[rec.id] = row["paths"]
        rec.reverse = row["reverse"]
        rec.legendrian_mirror = row["legendrian_mirror"]
        rec.reverse_mirror = row["reverse_mirror"]
    return sym_paths


def run_atlas(
    cfg: AtlasConfig,
    checkpoint_dir=None,
    table: Optional[KnotTable] = None,
    progress=None,
    stop_after: Optional[int] = None,
) -> Atlas:
    """Run the full pipeline.

    ``stop_after`` raises ``Interrupted`` once that many bucket tasks have
    completed in this invocation (used to exercise resume).
    """
    eff = cfg.effective()
    table = table if table is not None else KnotTable.builtin()
    ckpt = Checkpoint(checkpoint_dir)
    say = progress or (lambda msg: None)
    census_digest = _digest(eff.max_n, eff.min_n, eff.sample_from, eff.sample_count, eff.seed, table.rows if table else None)
    census = ckpt.load_census(census_digest)
    if census is None:
        say(f"census of sizes {eff.min_n}..{eff.max_n}")
        census = run_census(eff.max_n, eff.min_n, eff.workers, table, eff.sample_from, eff.sample_count, eff.seed)
        ckpt.save_census(census, census_digest)
    labels = {k: s.label for k, s in census.summaries.items()}
    wanted = {k for k, lab in labels.items() if not eff.knots or lab in eff.knots}

    finished = [0]

    def tick(key):
        finished[0] += 1
        say(f"bucket {key} done")
        if stop_after is not None and finished[0] >= stop_after:
            raise Interrupted(key)

    report = {"buckets": {}, "dropped": [], "merges": {}, "symmetry_paths": {}, "unresolved_pairs": 0}
    layers: dict = {}
    groups: dict = {}
    for key in sorted(wanted):
        s = census.summaries[key]
        for enc, r in census.candidates[key]:
            groups.setdefault((key, s.max_tb, r), []).append((enc, []))
    parents: list = []
    for layer in LAYERS[: eff.layers]:
        if layer != "G":
            groups = _stabilized_groups(parents)
        tasks = _layer_tasks(layer, groups, eff, check_destab=(layer == "G"))
        say(f"layer {layer}: {len(tasks)} buckets")
        results = _run_tasks(_reduce_bucket, tasks, ckpt, eff.workers, tick)
        records, dropped = _records_from(layer, tasks, results, labels, itertools.count(1))
        for task, res in zip(tasks, results):
            report["buckets"][task["ckpt_key"]] = {
                "members": res["members"],
                "classes": len(res["classes"]),
                "unresolved_pairs": res["unresolved_pairs"],
                "proven_distinct_pairs": res["proven_distinct_pairs"],
            }
            report["unresolved_pairs"] += res["unresolved_pairs"]
            if res["merges"]:
                report["merges"][task["ckpt_key"]] = res["merges"]
        report["dropped"] += dropped
        report["symmetry_paths"].update(_annotate(records, eff, ckpt, layer))
        layers[layer] = records
        parents = records
    report["unknown_annotations"] = sum(
        v == "?" for recs in layers.values() for rec in recs for v in (rec.reverse, rec.legendrian_mirror, rec.reverse_mirror)
    )
    return Atlas(cfg, census, layers, report)


class Interrupted(RuntimeError):
    pass


# -- exports ---------------------------------------------------------------------


def layer_csv(records: list[AtlasRecord]) -> str:
    return "\n".join([CSV_HEADER] + [rec.csv_row() for rec in records]) + "\n"


def atlas_jsonl(atlas: Atlas) -> str:
    meta = atlas.config.metadata()
    lines = []
    for rec in atlas.records():
        d = rec.as_dict()
        d["run"] = meta
        lines.append(json.dumps(d, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def read_jsonl(text: str) -> tuple[dict, list[AtlasRecord]]:
    meta, recs = {}, []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        meta = d.get("run", meta)
        recs.append(AtlasRecord.from_dict(d))
    return meta, recs


def mountain_range(records: list[AtlasRecord], knot: str) -> str:
    """Plain-text graph: ``node r tb count`` and ``arrow id_from id_to sign``."""
    recs = [rec for rec in records if rec.knot == knot]
    by_id = {rec.id: rec for rec in recs}
    cells: dict = {}
    for rec in recs:
        cells[(rec.r, rec.tb)] = cells.get((rec.r, rec.tb), 0) + 1
    lines = [f"# knot {knot}"]
    for (r, tb), cnt in sorted(cells.items(), key=lambda kv: (-kv[0][1], kv[0][0])):
        lines.append(f"node {r} {tb} {cnt}")
    arrows = []
    for rec in recs:
        for pid in rec.parents:
            parent = by_id.get(pid)
            if parent is None:
                continue
            sign = "+" if rec.r - parent.r > 0 else "-"
            arrows.append((_id_order(pid), _id_order(rec.id), f"arrow {pid} {rec.id} {sign}"))
    lines += [a[2] for a in sorted(arrows)]
    return "\n".join(lines) + "\n"


def parse_mountain_range(text: str) -> tuple[list, list]:
    nodes, arrows = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "node":
            nodes.append((int(parts[1]), int(parts[2]), int(parts[3])))
        elif parts[0] == "arrow":
            arrows.append((parts[1], parts[2], parts[3]))
    return nodes, arrows


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


def export_tables(records: list[AtlasRecord], outdir, meta: Optional[dict] = None) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for layer in LAYERS:
        p = out / f"layer_{layer}.csv"
        p.write_text(layer_csv([rec for rec in records if rec.layer == layer]))
        written.append(p)
    p = out / "atlas.jsonl"
    lines = []
    for rec in records:
        d = rec.as_dict()
        d["run"] = meta or {}
        lines.append(json.dumps(d, sort_keys=True))
    p.write_text("\n".join(lines) + ("\n" if lines else ""))
    written.append(p)
    return written


def export_mountain_ranges(records: list[AtlasRecord], outdir, plots: bool = True) -> list[Path]:
    out = Path(outdir) / "mountain"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for knot in sorted({rec.knot for rec in records}):
        text = mountain_range(records, knot)
        p = out / f"{_safe(knot)}.txt"
        p.write_text(text)
        written.append(p)
        if plots:
            from .plotting import plot_mountain_range

            png = out / f"{_safe(knot)}.png"
            plot_mountain_range([rec for rec in records if rec.knot == knot], knot, png)
            written.append(png)
    return written


# -- conjecture ------------------------------------------------------------------


def conjecture_report(summaries) -> dict:
    """Check min size(tb_max - m, r) <= arc index + m for every observed cell."""
    knots = []
    total = 0
    for s in sorted(summaries, key=lambda s: s.fingerprint.key):
        violations = []
        for (tb, r), (size, witness) in sorted(s.min_grid_size_seen.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
            m = s.max_tb - tb
            bound = s.arc_index_estimate + m
            if size > bound:
                violations.append({"tb": tb, "r": r, "m": m, "min_size": size, "bound": bound, "witness": witness})
        total += len(violations)
        knots.append(
            {
                "knot": s.label,
                "fingerprint": s.fingerprint.key,
                "arc_index": s.arc_index_estimate,
                "max_tb": s.max_tb,
                "cells": len(s.min_grid_size_seen),
                "violations": violations,
            }
        )
    return {"knots": knots, "violations": total}


def write_run(atlas: Atlas, outdir, plots: bool = True) -> list[Path]:
    """Write every output of a run into ``outdir``."""
    out = Path(outdir)
    meta = atlas.config.metadata()
    written = export_tables(atlas.records(), out, meta)
    written += export_mountain_ranges(atlas.records(), out, plots)
    census = {k: s.as_dict() for k, s in sorted(atlas.census.summaries.items())}
    report = {"run": meta, "census": census, **atlas.report}
    p = out / "report.json"
    p.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    written.append(p)
    p = out / "conjecture.json"
    p.write_text(json.dumps(conjecture_report(atlas.census.summaries.values()), indent=1, sort_keys=True) + "\n")
    written.append(p)
    return written
