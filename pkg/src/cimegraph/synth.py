"""Node-breaker test models synthesized from plain bus-branch cases.

Case file format (whitespace delimited, ``#`` comments)::

    name ieee14

    [bus]
    id   gen  load
    1    1    0
    2    1    1

    [branch]
    from to   kind
    1    2    line
    4    7    transformer

``gen``/``load`` are 0/1 flags.  Branches are numbered ``br1``, ``br2``, ...
in file order, which keeps parallel circuits distinct.
"""
from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .model import (
    GridModel,
    Record,
    SingleEndedRecord,
    SwitchRecord,
    TwoEndedBranchRecord,
    replace_switch_status,
)

BUILTIN_CASES = ("ieee14", "ieee118")


class CaseFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: str
    has_generator: bool = False
    has_load: bool = False


@dataclass(frozen=True)
class Branch:
    id: str
    from_bus: str
    to_bus: str
    kind: str = "line"


@dataclass(frozen=True)
class BusBranchCase:
    name: str
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.buses:
            raise CaseFormatError(f"case {self.name!r} has no buses")
        seen = set()
        for bus in self.buses:
            if bus.id in seen:
                raise CaseFormatError(f"duplicate bus id {bus.id!r}")
            seen.add(bus.id)
        for br in self.branches:
            for end in (br.from_bus, br.to_bus):
                if end not in seen:
                    raise CaseFormatError(f"branch {br.id} references undeclared bus {end!r}")
            if br.kind not in ("line", "transformer"):
                raise CaseFormatError(f"branch {br.id}: unknown kind {br.kind!r}")
            if br.from_bus == br.to_bus:
                raise CaseFormatError(f"branch {br.id} connects bus {br.from_bus!r} to itself")


_FLAGS = {"0": False, "1": True}


def load_case(text: str, name: Optional[str] = None) -> BusBranchCase:
    """Parse the plain case format described in the module docstring."""
    section = None
    header = None
    buses, branches = [], []
    case_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("bus", "branch"):
                raise CaseFormatError(f"line {lineno}: unknown section [{section}]")
            header = None
            continue
        fields = line.split()
        if section is None:
            if fields[0] == "name" and len(fields) == 2:
                case_name = fields[1]
                continue
            raise CaseFormatError(f"line {lineno}: expected 'name <id>' or a section header")
        if header is None:
            header = [f.lower() for f in fields]
            need = ("id", "gen", "load") if section == "bus" else ("from", "to", "kind")
            missing = [c for c in need if c not in header]
            if missing:
                raise CaseFormatError(f"line {lineno}: [{section}] header lacks {', '.join(missing)}")
            continue
        if len(fields) != len(header):
            raise CaseFormatError(f"line {lineno}: expected {len(header)} fields, got {len(fields)}")
        row = dict(zip(header, fields))
        if section == "bus":
            try:
                buses.append(Bus(row["id"], _FLAGS[row["gen"]], _FLAGS[row["load"]]))
            except KeyError:
                raise CaseFormatError(f"line {lineno}: gen/load flags must be 0 or 1") from None
        else:
            branches.append(Branch(f"br{len(branches) + 1}", row["from"], row["to"], row["kind"].lower()))
    return BusBranchCase(name or case_name or "case", buses, branches)


def dump_case(case: BusBranchCase) -> str:
    lines = [f"name {case.name}", "", "[bus]", "id\tgen\tload"]
    lines += [f"{b.id}\t{int(b.has_generator)}\t{int(b.has_load)}" for b in case.buses]
    lines += ["", "[branch]", "from\tto\tkind"]
    lines += [f"{br.from_bus}\t{br.to_bus}\t{br.kind}" for br in case.branches]
    return "\n".join(lines) + "\n"


def read_case(path) -> BusBranchCase:
    with open(path, encoding="utf-8") as fh:
        return load_case(fh.read())


def builtin_case(name: str) -> BusBranchCase:
    """IEEE 14- and 118-bus topologies shipped with the package."""
    if name not in BUILTIN_CASES:
        raise KeyError(f"no builtin case {name!r}; choose from {BUILTIN_CASES}")
    text = resources.files("cimegraph").joinpath("data").joinpath(f"{name}.case").read_text(encoding="utf-8")
    return load_case(text)


def scaled_case(n_buses: int, seed: int = 0, branches_per_bus: float = 1.6,
                transformer_share: float = 0.1, gen_share: float = 0.3, load_share: float = 0.7) -> BusBranchCase:
    """Random connected case: a random spanning tree plus extra chords."""
    if n_buses < 1:
        raise ValueError("n_buses must be positive")
    rng = random.Random(seed)
    buses = [Bus(str(i), rng.random() < gen_share, rng.random() < load_share) for i in range(1, n_buses + 1)]
    if not any(b.has_generator for b in buses):
        buses[0] = dataclasses.replace(buses[0], has_generator=True)
    pairs = [(rng.randrange(1, i), i) for i in range(2, n_buses + 1)]
    extra = max(0, round(branches_per_bus * n_buses) - len(pairs)) if n_buses > 1 else 0
    for _ in range(extra):
        a, b = rng.sample(range(1, n_buses + 1), 2)
        pairs.append((a, b))
    branches = [
        Branch(f"br{k}", str(a), str(b), "transformer" if rng.random() < transformer_share else "line")
        for k, (a, b) in enumerate(pairs, start=1)
    ]
    return BusBranchCase(f"scaled{n_buses}", buses, branches)


# -- templates ----------------------------------------------------------------

_SWITCH_NAMES = ("breaker", "disconnector")


@dataclass(frozen=True)
class SubstationTemplate:
    """Switch chains used to expand a bus into a substation.

    ``branch_chain`` runs from the bus bar to each line/transformer end,
    ``device_chain`` from the bus bar to each generator or load.  With more
    than one bus section, neighbouring sections are tied through another
    ``branch_chain`` and connections are spread round-robin over sections.
    """

    branch_chain: tuple[str, ...] = ("disconnector", "breaker", "disconnector")
    device_chain: tuple[str, ...] = ("breaker", "disconnector")
    bus_sections: int = 1

    def __post_init__(self):
        object.__setattr__(self, "branch_chain", tuple(self.branch_chain))
        object.__setattr__(self, "device_chain", tuple(self.device_chain))
        for chain in (self.branch_chain, self.device_chain):
            if not chain:
                raise ValueError("switch chains must not be empty")
            bad = [k for k in chain if k not in _SWITCH_NAMES]
            if bad:
                raise ValueError(f"unknown switch kind(s) {bad}")
        if self.bus_sections < 1:
            raise ValueError("bus_sections must be >= 1")

    @classmethod
    def from_text(cls, text: str) -> "SubstationTemplate":
        """``key = value`` lines; chains are comma-separated switch kinds."""
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (p.strip() for p in line.partition("="))
            if not sep:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            if key in ("branch_chain", "device_chain"):
                kwargs[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "bus_sections":
                kwargs[key] = int(value)
            else:
                raise ValueError(f"line {lineno}: unknown template key {key!r}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "SubstationTemplate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def expected_switch_count(case: BusBranchCase, tmpl: SubstationTemplate = SubstationTemplate()) -> int:
    ends = 2 * len(case.branches)
    devices = sum(b.has_generator + b.has_load for b in case.buses)
    ties = (tmpl.bus_sections - 1) * len(case.buses)
    return (ends + ties) * len(tmpl.branch_chain) + devices * len(tmpl.device_chain)


def substation_id(case: BusBranchCase, bus_id: str) -> str:
    return f"{case.name}_S{bus_id}"


class _Builder:
    def __init__(self):
        self.lists = {k: [] for k in ("substations", "bus_bars", "generators", "loads",
                                      "ac_lines", "transformers", "breakers", "disconnectors")}

    def chain(self, kinds, start_nd, end_nd, prefix, st):
        nodes = [start_nd] + [f"{prefix}.n{p}" for p in range(1, len(kinds))] + [end_nd]
        for pos, kind in enumerate(kinds, start=1):
            rec = SwitchRecord(f"{prefix}.sw{pos}", f"{prefix}.sw{pos}", st, nodes[pos - 1], nodes[pos], True, kind)
            self.lists["breakers" if kind == "breaker" else "disconnectors"].append(rec)


def synthesize_node_breaker(case: BusBranchCase, tmpl: SubstationTemplate = SubstationTemplate(),
                            seed: Optional[int] = None) -> GridModel:
    """Expand every bus of ``case`` into a substation built from ``tmpl``.

    All switches and branch ends come out closed.  Ids depend only on the
    case name, bus and branch ids and chain positions; ``seed`` (when given)
    shuffles the order of records inside each table.
    """
    b = _Builder()
    L = b.lists
    k = tmpl.bus_sections
    connections: dict[str, int] = {}
    section_node = {}

    def next_section(bus_id):
        c = connections.get(bus_id, 0)
        connections[bus_id] = c + 1
        return section_node[(bus_id, c % k + 1)]

    for bus in case.buses:
        st = substation_id(case, bus.id)
        L["substations"].append(Record(st, f"bus{bus.id}"))
        for s in range(1, k + 1):
            nd = f"{st}.bb{s}"
            section_node[(bus.id, s)] = nd
            L["bus_bars"].append(SingleEndedRecord(f"{st}.BB{s}", f"{st}.BB{s}", st, nd, "busbar"))
        for s in range(1, k):
            b.chain(tmpl.branch_chain, section_node[(bus.id, s)], section_node[(bus.id, s + 1)], f"{st}.tie{s}", st)
        for flag, tag, key, kind in ((bus.has_generator, "G", "generators", "generator"),
                                     (bus.has_load, "L", "loads", "load")):
            if flag:
                prefix = f"{st}.{tag}"
                end = f"{prefix}.end"
                b.chain(tmpl.device_chain, next_section(bus.id), end, prefix, st)
                L[key].append(SingleEndedRecord(f"{st}.{tag}", f"{st}.{tag}", st, end, kind))

    for br in case.branches:
        ends = []
        for side, bus_id in (("i", br.from_bus), ("j", br.to_bus)):
            st = substation_id(case, bus_id)
            prefix = f"{st}.{br.id}{side}"
            end = f"{prefix}.end"
            b.chain(tmpl.branch_chain, next_section(bus_id), end, prefix, st)
            ends.append(end)
        rec_id = f"{case.name}_{br.id}"
        if br.kind == "transformer":
            L["transformers"].append(TwoEndedBranchRecord(rec_id, rec_id, ends[0], ends[1], True, True, "transformer",
                                                          substation_id(case, br.from_bus)))
        else:
            L["ac_lines"].append(TwoEndedBranchRecord(rec_id, rec_id, ends[0], ends[1], True, True, "ac_line"))

    if seed is not None:
        rng = random.Random(seed)
        for records in L.values():
            rng.shuffle(records)
    return GridModel(**L, section=case.name)


def perturb_switches(model: GridModel, fraction: float, seed: Optional[int] = 0) -> GridModel:
    """Open a seeded uniform sample of ``round(fraction * n)`` switches.

    A branch end whose connectivity node is reached only through switches
    that are now all open is taken out of service as well.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    keys = sorted((r.kind, r.id) for r in model.switches())
    chosen = random.Random(seed).sample(keys, round(fraction * len(keys)))
    if not chosen:
        return model
    out = replace_switch_status(model, {key: False for key in chosen})

    has_switch, has_closed = set(), set()
    for rec in out.switches():
        for nd in rec.nodes():
            has_switch.add(nd)
            if rec.closed:
                has_closed.add(nd)
    isolated = has_switch - has_closed

    def cut(recs):
        return tuple(
            dataclasses.replace(r, i_closed=r.i_closed and r.i_nd not in isolated,
                                j_closed=r.j_closed and r.j_nd not in isolated)
            for r in recs
        )

    return dataclasses.replace(
        out,
        ac_lines=cut(out.ac_lines),
        transformers=cut(out.transformers),
        compensators_s=cut(out.compensators_s),
        converters=cut(out.converters),
        dc_lines=cut(out.dc_lines),
    )
