"""Command-line front end.

Subcommands::

    cimegraph synth  CASE --out FILE [--template FILE] [--seed N] [--open-fraction F]
    cimegraph export CIME --out DIR  [--strategy a|b]
    cimegraph ntp    CIME --out DIR  [--strategy a|b] [--parallelism N|auto]
    cimegraph bench  CIME [--strategies a,b] [--repetitions N]
    cimegraph diff   LEFT RIGHT

Exit codes: 0 success, 1 pipeline or validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import os
import statistics
import sys
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from . import cime_io, graph, model, ntp, synth
from .cime_io import Severity

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TOPOLOGY_FILES = ("toponodes.csv", "topoedges.csv", "islands.csv")


class PipelineError(Exception):
    pass


@dataclass
class RunConfig:
    inputs: tuple[str, ...]
    strategy: str = "B"
    parallelism: Union[int, str] = 1
    seed: Optional[int] = None
    out: Optional[str] = None
    format: str = "human"

    def __post_init__(self):
        self.strategy = self.strategy.upper()
        if self.strategy not in ("A", "B"):
            raise ValueError(f"strategy must be a or b, got {self.strategy!r}")
        if self.parallelism != "auto":
            self.parallelism = int(self.parallelism)
            if self.parallelism < 1:
                raise ValueError("parallelism must be >= 1")


def _eprint(*args):
    print(*args, file=sys.stderr)


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path: Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def load_model(path, mapping: Optional[model.AttributeMapping] = None) -> model.GridModel:
    """Parse and bind a CIM/E file, raising :class:`PipelineError` on errors."""
    doc, diags = cime_io.read_cime(path)
    for d in diags:
        _eprint(f"{path}: {d}")
    if any(d.severity is Severity.ERROR for d in diags):
        raise PipelineError(f"{path}: parse errors")
    m, report = model.bind_model(doc, mapping or model.DEFAULT_MAPPING)
    for issue in report:
        _eprint(f"{path}: {issue}")
    if report.errors:
        raise PipelineError(f"{path}: {len(report.errors)} validation error(s)")
    return m


# -- synth --------------------------------------------------------------------

def cmd_synth(args) -> int:
    case_path = args.case
    if os.path.exists(case_path):
        case = synth.read_case(case_path)
    elif case_path in synth.BUILTIN_CASES:
        case = synth.builtin_case(case_path)
    else:
        _eprint(f"no such case file: {case_path}")
        return EXIT_USAGE
    tmpl = synth.SubstationTemplate.from_file(args.template) if args.template else synth.SubstationTemplate()
    m = synth.synthesize_node_breaker(case, tmpl, seed=args.seed)
    if args.open_fraction:
        m = synth.perturb_switches(m, args.open_fraction, seed=args.seed or 0)
    cime_io.write_cime(model.to_document(m), args.out)
    print(f"{args.out}: {len(m.substations)} substations, {m.switch_count} switches, "
          f"{len(m.ac_lines)} lines, {len(m.transformers)} transformers")
    return EXIT_OK


# -- export -------------------------------------------------------------------

def _vertex_type(vertex_id: str) -> str:
    prefix = vertex_id.split("/", 1)[0]
    return graph.CONNECTIVITY_NODE if prefix == "cn" else prefix


_VERTEX_TYPES = {
    "A": (graph.CONNECTIVITY_NODE, "busbar", "generator", "load", "compensator_p", "breaker", "disconnector",
          "ac_line", "transformer", "compensator_s", "converter", "dc_line"),
    "B": (graph.CONNECTIVITY_NODE, "busbar", "generator", "load", "compensator_p",
          "ac_line", "transformer", "compensator_s", "converter", "dc_line"),
}
_EDGE_TYPES = {"A": (graph.PLAIN,), "B": (graph.PLAIN, "breaker", "disconnector")}


def export_graph(g: graph.PropertyGraph, out: Path) -> dict[str, int]:
    """Write graph-loading files; returns row counts per file name."""
    out.mkdir(parents=True, exist_ok=True)
    by_type: dict[str, list] = {t: [] for t in _VERTEX_TYPES[g.strategy]}
    for vid in sorted(g.vertices):
        by_type.setdefault(_vertex_type(vid), []).append(g.vertices[vid])
    counts = {}
    for vtype, verts in by_type.items():
        status = []
        if vtype in model.SWITCH_KINDS:
            status = ["closed"]
        elif vtype in ("ac_line", "transformer", "compensator_s", "converter", "dc_line"):
            status = ["i_closed", "j_closed"]
        extra: list[str] = []
        for v in verts:
            extra += [k for k in v.attributes if k not in extra]
        rows = []
        for v in verts:
            row = [v.id, v.kind, v.substation or ""]
            if status == ["closed"]:
                row.append(int(v.closed))
            elif status:
                row += [int(c) for c in v.ends_closed]
            rows.append(row + [v.attributes.get(k, "") for k in extra])
        name = f"vertex_{vtype}.csv"
        _write_csv(out / name, ["id", "kind", "substation", *status, *extra], rows)
        counts[name] = len(rows)
    by_kind: dict[str, list] = {k: [] for k in _EDGE_TYPES[g.strategy]}
    for eid in sorted(g.edges):
        e = g.edges[eid]
        by_kind.setdefault(e.kind, []).append([e.id, *e.endpoints, e.kind, "" if e.closed is None else int(e.closed)])
    for kind, rows in by_kind.items():
        name = f"edge_{kind}.csv"
        _write_csv(out / name, ["id", "from", "to", "kind", "closed"], rows)
        counts[name] = len(rows)
    return counts


def cmd_export(args) -> int:
    if not os.path.exists(args.cime):
        _eprint(f"no such file: {args.cime}")
        return EXIT_USAGE
    m = load_model(args.cime, _mapping(args))
    g = graph.build_graph(m, args.strategy)
    counts = export_graph(g, Path(args.out))
    for name, n in counts.items():
        print(f"{name}\t{n}")
    return EXIT_OK


# -- ntp ----------------------------------------------------------------------

def write_topology(result: ntp.BusBranchModel, out: Path, load_ms: float = 0.0) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "toponodes.csv",
        ["id", "substation", "busbar", "energized", "members"],
        [[n.id, n.substation, int(n.contains_busbar), int(n.energized), ";".join(sorted(n.members))]
         for n in result.nodes],
    )
    _write_csv(out / "topoedges.csv", ["device", "from", "to"], [[e.id, *e.endpoints] for e in result.edges])
    _write_csv(
        out / "islands.csv",
        ["id", "energized", "nodes"],
        [[i.id, int(i.energized), ";".join(sorted(i.nodes))] for i in result.islands],
    )
    phases = [("load", load_ms)] + [(k, result.timing.get(k, 0.0)) for k in ("substation_tp", "network_tp", "islands")]
    _write_csv(out / "timing.csv", ["phase", "ms"], [[k, f"{v:.1f}"] for k, v in phases])


def cmd_ntp(args) -> int:
    if not os.path.exists(args.cime):
        _eprint(f"no such file: {args.cime}")
        return EXIT_USAGE
    cfg = RunConfig((args.cime,), args.strategy, args.parallelism, out=args.out, format=args.format)
    t0 = time.perf_counter()
    m = load_model(args.cime, _mapping(args))
    g = graph.build_graph(m, cfg.strategy)
    load_ms = (time.perf_counter() - t0) * 1e3
    result = ntp.run_ntp(g, cfg.parallelism)
    for w in result.warnings:
        _eprint(f"warning: {w}")
    write_topology(result, Path(cfg.out), load_ms)
    t = result.timing
    if cfg.format == "delim":
        print("nodes\tedges\tislands\tload_ms\tsubstation_tp_ms\tnetwork_tp_ms\tislands_ms")
        print(f"{len(result.nodes)}\t{len(result.edges)}\t{len(result.islands)}\t{load_ms:.1f}\t"
              f"{t['substation_tp']:.1f}\t{t['network_tp']:.1f}\t{t['islands']:.1f}")
    else:
        print(f"topology nodes: {len(result.nodes)}")
        print(f"topology edges: {len(result.edges)}")
        print(f"islands:        {len(result.islands)} ({sum(i.energized for i in result.islands)} energized)")
        print(f"load {load_ms:.1f} ms, substation TP {t['substation_tp']:.1f} ms, "
              f"network TP {t['network_tp']:.1f} ms, islands {t['islands']:.1f} ms")
    return EXIT_OK


# -- bench --------------------------------------------------------------------

BENCH_COLUMNS = ("strategy", "vertices", "edges", "repetitions", "load_ms_min", "load_ms_median",
                 "substation_tp_ms_median", "network_tp_ms_median", "islands_ms_median",
                 "ntp_ms_min", "ntp_ms_median")


def bench(path, strategies=("A", "B"), repetitions=5, parallelism: Union[int, str] = 1,
          mapping: Optional[model.AttributeMapping] = None) -> list[dict]:
    """Time loading and NTP ``repetitions`` times per strategy."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for strategy in strategies:
        loads, ntps, phases = [], [], {"substation_tp": [], "network_tp": [], "islands": []}
        for _ in range(repetitions):
            t0 = time.perf_counter()
            doc, _ = cime_io.read_cime(path)
            m, _ = model.bind_model(doc, mapping or model.DEFAULT_MAPPING)
            g = graph.build_graph(m, strategy)
            t1 = time.perf_counter()
            result = ntp.run_ntp(g, parallelism)
            t2 = time.perf_counter()
            loads.append((t1 - t0) * 1e3)
            ntps.append((t2 - t1) * 1e3)
            for k in phases:
                phases[k].append(result.timing[k])
        s = graph.stats(g)
        rows.append({
            "strategy": strategy,
            "vertices": s.vertex_count,
            "edges": s.edge_count,
            "repetitions": repetitions,
            "load_ms_min": min(loads),
            "load_ms_median": statistics.median(loads),
            "substation_tp_ms_median": statistics.median(phases["substation_tp"]),
            "network_tp_ms_median": statistics.median(phases["network_tp"]),
            "islands_ms_median": statistics.median(phases["islands"]),
            "ntp_ms_min": min(ntps),
            "ntp_ms_median": statistics.median(ntps),
        })
    return rows


def cmd_bench(args) -> int:
    if args.repetitions < 1:
        _eprint("--repetitions must be at least 1")
        return EXIT_USAGE
    if not os.path.exists(args.cime):
        _eprint(f"no such file: {args.cime}")
        return EXIT_USAGE
    strategies = [s.strip().upper() for s in args.strategies.split(",") if s.strip()]
    if not strategies or any(s not in ("A", "B") for s in strategies):
        _eprint(f"bad --strategies {args.strategies!r}")
        return EXIT_USAGE
    load_model(args.cime, _mapping(args))
    rows = bench(args.cime, strategies, args.repetitions, args.parallelism, _mapping(args))

    def fmt(v):
        return f"{v:.1f}" if isinstance(v, float) else str(v)

    if args.format == "delim":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow([fmt(r[c]) for c in BENCH_COLUMNS])
    else:
        widths = [max(len(c), 8) for c in BENCH_COLUMNS]
        print("  ".join(c.rjust(wd) for c, wd in zip(BENCH_COLUMNS, widths)))
        for r in rows:
            print("  ".join(fmt(r[c]).rjust(wd) for c, wd in zip(BENCH_COLUMNS, widths)))
    return EXIT_OK


# -- diff ---------------------------------------------------------------------

@dataclass
class TopologyResult:
    partition: frozenset
    edges: Optional[Counter] = None
    islands: Optional[frozenset] = None
    connectivity_only: bool = False


def read_topology(path) -> TopologyResult:
    """Load an ``ntp`` output directory, or the TopoNode table of a CIM/E file."""
    path = Path(path)
    if path.is_dir():
        nodes = _read_csv(path / "toponodes.csv")
        members = {r["id"]: frozenset(r["members"].split(";")) for r in nodes}
        edges = Counter(
            (r["device"], members[r["from"]], members[r["to"]]) for r in _read_csv(path / "topoedges.csv")
        )
        islands = frozenset(
            frozenset(members[n] for n in r["nodes"].split(";")) for r in _read_csv(path / "islands.csv")
        )
        return TopologyResult(frozenset(members.values()), edges, islands)
    doc, diags = cime_io.read_cime(path)
    if any(d.severity is Severity.ERROR for d in diags):
        raise PipelineError(f"{path}: parse errors")
    m, _ = model.bind_model(doc)
    if not m.toponodes:
        raise PipelineError(f"{path}: no TopoNode table to compare against")
    part = frozenset(frozenset(graph.node_vertex_id(nd) for nd in t.nds) for t in m.toponodes)
    return TopologyResult(part, connectivity_only=True)


def _cn_only(partition):
    out = (frozenset(v for v in s if v.startswith("cn/")) for s in partition)
    return frozenset(s for s in out if s)


def diff_topology(left: TopologyResult, right: TopologyResult) -> list[str]:
    """Human-readable differences; empty when both describe the same topology."""
    lp, rp = left.partition, right.partition
    if left.connectivity_only or right.connectivity_only:
        lp, rp = _cn_only(lp), _cn_only(rp)
    report = []
    only_left, only_right = lp - rp, rp - lp
    for s in sorted(only_left, key=min):
        pieces = sorted((min(t) for t in rp if t & s))
        if len(pieces) > 1:
            report.append(f"node split: {min(s)} -> {', '.join(pieces)}")
        else:
            report.append(f"node only in left: {min(s)} ({len(s)} members)")
    for s in sorted(only_right, key=min):
        pieces = sorted((min(t) for t in lp if t & s))
        if len(pieces) > 1:
            report.append(f"node merge: {', '.join(pieces)} -> {min(s)}")
        else:
            report.append(f"node only in right: {min(s)} ({len(s)} members)")
    if left.edges is not None and right.edges is not None and left.edges != right.edges:
        for dev, a, b in sorted((left.edges - right.edges).elements(), key=lambda x: x[0]):
            report.append(f"edge only in left: {dev} ({min(a)} - {min(b)})")
        for dev, a, b in sorted((right.edges - left.edges).elements(), key=lambda x: x[0]):
            report.append(f"edge only in right: {dev} ({min(a)} - {min(b)})")
    if left.islands is not None and right.islands is not None and left.islands != right.islands:
        report.append(f"islands differ: {len(left.islands)} vs {len(right.islands)}")
    return report


def cmd_diff(args) -> int:
    for p in (args.left, args.right):
        if not os.path.exists(p):
            _eprint(f"no such file or directory: {p}")
            return EXIT_USAGE
    report = diff_topology(read_topology(args.left), read_topology(args.right))
    for line in report:
        print(line)
    if not report:
        print("equivalent")
    return EXIT_FAIL if report else EXIT_OK


# -- entry point --------------------------------------------------------------

def _mapping(args):
    path = getattr(args, "mapping", None)
    return model.AttributeMapping.from_file(path) if path else None


def _parallelism(value):
    if value in ("auto", "max"):
        return "auto"
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("parallelism must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cimegraph", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a node-breaker CIM/E file from a bus-branch case")
    p.add_argument("case", help="case file, or a builtin name (ieee14, ieee118)")
    p.add_argument("--template", help="substation template file")
    p.add_argument("--seed", type=int)
    p.add_argument("--open-fraction", type=float, default=0.0, help="share of switches to open")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    def common(p, strategy=True):
        p.add_argument("cime")
        if strategy:
            p.add_argument("--strategy", type=str.upper, choices=("A", "B"), default="B")
        p.add_argument("--mapping", help="attribute mapping file")

    p = sub.add_parser("export", help="write graph-loading files")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("ntp", help="run network topology processing")
    common(p)
    p.add_argument("--parallelism", type=_parallelism, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("human", "delim"), default="human")
    p.set_defaults(func=cmd_ntp)

    p = sub.add_parser("bench", help="time loading and NTP per strategy")
    common(p, strategy=False)
    p.add_argument("--strategies", default="a,b")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--parallelism", type=_parallelism, default=1)
    p.add_argument("--format", choices=("human", "delim"), default="delim")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("diff", help="compare two topology results")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_diff)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (PipelineError, model.MappingError, synth.CaseFormatError, graph.GraphError,
            ntp.NtpError, cime_io.CimeSerializeError) as exc:
        _eprint(f"error: {exc}")
        return EXIT_FAIL
    except (OSError, ValueError, KeyError) as exc:
        _eprint(f"error: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
