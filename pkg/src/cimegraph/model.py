"""Typed grid model bound from the CIM/E class tables.

Fifteen table kinds are recognised (base voltage, substation, bus bar, AC
line, generator, transformer, load, series and shunt compensators,
converter, DC line, island, topology node, breaker and disconnector).  Column
names are looked up through an :class:`AttributeMapping` so exports that use
different headers can still be bound.  Columns that are not mapped are kept
verbatim in each record's ``attributes``.
"""
from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass, field
from typing import Optional

from .cime_io import ClassTable, RawDocument, Severity

NodeId = str

SINGLE_ENDED_KINDS = ("busbar", "generator", "load", "compensator_p")
SWITCH_KINDS = ("breaker", "disconnector")
BRANCH_KINDS = ("ac_line", "transformer", "compensator_s", "dc_link")

# table kind -> GridModel field, in the order tables are written back out
TABLE_FIELDS = {
    "base_voltage": "base_voltages",
    "substation": "substations",
    "busbar": "bus_bars",
    "ac_line": "ac_lines",
    "generator": "generators",
    "transformer": "transformers",
    "load": "loads",
    "compensator_p": "compensators_p",
    "compensator_s": "compensators_s",
    "converter": "converters",
    "dc_line": "dc_lines",
    "island": "islands",
    "toponode": "toponodes",
    "breaker": "breakers",
    "disconnector": "disconnectors",
}

DEFAULT_TABLES = {
    "base_voltage": "BaseVoltage",
    "substation": "Substation",
    "busbar": "Bus",
    "ac_line": "ACline",
    "generator": "Generator",
    "transformer": "Transformer",
    "load": "Load",
    "compensator_p": "Compensator_P",
    "compensator_s": "Compensator_S",
    "converter": "Converter",
    "dc_line": "DCline",
    "island": "Island",
    "toponode": "TopoNode",
    "breaker": "Breaker",
    "disconnector": "Disconnector",
}

DEFAULT_COLUMNS = {
    "id": "id",
    "name": "name",
    "st": "st",
    "nd": "nd",
    "i_nd": "i_nd",
    "j_nd": "j_nd",
    "k_nd": "k_nd",
    "point": "point",
    "i_off": "i_off",
    "j_off": "j_off",
    "k_off": "k_off",
    "nds": "nds",
}

_SINGLE_FOR_TABLE = {"busbar", "generator", "load", "compensator_p"}
_SWITCH_FOR_TABLE = {"breaker", "disconnector"}
# table kind -> record kind for two-ended devices
_BRANCH_FOR_TABLE = {
    "ac_line": "ac_line",
    "transformer": "transformer",
    "compensator_s": "compensator_s",
    "converter": "dc_link",
    "dc_line": "dc_link",
}
NO_SUBSTATION = "-"


class MappingError(ValueError):
    pass


@dataclass
class AttributeMapping:
    """Table and column names used when binding.

    ``columns`` maps a table kind to overrides of :data:`DEFAULT_COLUMNS`;
    the pseudo-kind ``default`` overrides every table at once.
    """

    tables: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TABLES))
    columns: dict[str, dict[str, str]] = field(default_factory=dict)

    def column(self, kind: str, name: str) -> str:
        for scope in (kind, "default"):
            if name in self.columns.get(scope, {}):
                return self.columns[scope][name]
        return DEFAULT_COLUMNS[name]

    def kind_of(self, class_name: str) -> Optional[str]:
        for kind, cls in self.tables.items():
            if cls == class_name:
                return kind
        return None

    @classmethod
    def from_text(cls, text: str) -> "AttributeMapping":
        """Parse ``kind.field = column`` lines (``#`` starts a comment).

        ``kind.table = ClassName`` renames the table itself.
        """
        mapping = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            kind, dot, name = key.strip().partition(".")
            value = value.strip()
            if not sep or not dot or not value:
                raise MappingError(f"line {lineno}: expected 'kind.field = column', got {raw!r}")
            if kind != "default" and kind not in TABLE_FIELDS:
                raise MappingError(f"line {lineno}: unknown table kind {kind!r}")
            if name == "table":
                if kind == "default":
                    raise MappingError(f"line {lineno}: 'default.table' is meaningless")
                mapping.tables[kind] = value
            elif name in DEFAULT_COLUMNS:
                mapping.columns.setdefault(kind, {})[name] = value
            else:
                raise MappingError(f"line {lineno}: unknown field {name!r}")
        return mapping

    @classmethod
    def from_file(cls, path) -> "AttributeMapping":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


DEFAULT_MAPPING = AttributeMapping()


@dataclass(frozen=True)
class Record:
    """Base voltage, substation and island rows: identity plus raw columns."""

    id: str
    name: str
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class TopoNodeRecord:
    id: str
    name: str
    substation: Optional[str]
    nds: tuple[NodeId, ...]
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class SingleEndedRecord:
    id: str
    name: str
    substation: str
    nd: NodeId
    kind: str
    attributes: dict[str, str] = field(default_factory=dict)

    def nodes(self):
        return (self.nd,)


@dataclass(frozen=True)
class SwitchRecord:
    id: str
    name: str
    substation: str
    i_nd: NodeId
    j_nd: NodeId
    closed: bool
    kind: str
    attributes: dict[str, str] = field(default_factory=dict)

    def nodes(self):
        return (self.i_nd, self.j_nd)


@dataclass(frozen=True)
class TwoEndedBranchRecord:
    """AC line, transformer winding pair, series compensator or DC link.

    Three-winding transformers become three records sharing ``group`` (the
    original row id), each joining one winding node to a synthetic star node.
    """

    id: str
    name: str
    i_nd: NodeId
    j_nd: NodeId
    i_closed: bool
    j_closed: bool
    kind: str
    substation: Optional[str] = None
    attributes: dict[str, str] = field(default_factory=dict)
    group: Optional[str] = None

    def nodes(self):
        return (self.i_nd, self.j_nd)


@dataclass(frozen=True)
class Issue:
    record_id: str
    message: str
    severity: Severity

    def __str__(self):
        return f"{self.severity.value}: {self.record_id}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    def __len__(self):
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)

    @property
    def errors(self):
        return [i for i in self.issues if i.severity is Severity.ERROR]

    @property
    def warnings(self):
        return [i for i in self.issues if i.severity is Severity.WARNING]

    def error(self, record_id, message):
        self.issues.append(Issue(record_id, message, Severity.ERROR))

    def warning(self, record_id, message):
        self.issues.append(Issue(record_id, message, Severity.WARNING))

    def extend(self, other: "ValidationReport"):
        self.issues.extend(other.issues)


@dataclass(frozen=True)
class GridModel:
    base_voltages: tuple[Record, ...] = ()
    substations: tuple[Record, ...] = ()
    bus_bars: tuple[SingleEndedRecord, ...] = ()
    ac_lines: tuple[TwoEndedBranchRecord, ...] = ()
    generators: tuple[SingleEndedRecord, ...] = ()
    transformers: tuple[TwoEndedBranchRecord, ...] = ()
    loads: tuple[SingleEndedRecord, ...] = ()
    compensators_p: tuple[SingleEndedRecord, ...] = ()
    compensators_s: tuple[TwoEndedBranchRecord, ...] = ()
    converters: tuple[TwoEndedBranchRecord, ...] = ()
    dc_lines: tuple[TwoEndedBranchRecord, ...] = ()
    islands: tuple[Record, ...] = ()
    toponodes: tuple[TopoNodeRecord, ...] = ()
    breakers: tuple[SwitchRecord, ...] = ()
    disconnectors: tuple[SwitchRecord, ...] = ()
    extra_tables: tuple[ClassTable, ...] = ()
    section: str = "grid"

    def __post_init__(self):
        for name in TABLE_FIELDS.values():
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "extra_tables", tuple(self.extra_tables))

    def single_ended(self):
        return (*self.bus_bars, *self.generators, *self.loads, *self.compensators_p)

    def switches(self):
        return (*self.breakers, *self.disconnectors)

    def branches(self):
        return (*self.ac_lines, *self.transformers, *self.compensators_s, *self.converters, *self.dc_lines)

    def equipment(self):
        return (*self.single_ended(), *self.switches(), *self.branches())

    @functools.cached_property
    def connectivity_nodes(self) -> frozenset[NodeId]:
        return frozenset(nd for rec in self.equipment() for nd in rec.nodes())

    @property
    def switch_count(self) -> int:
        return len(self.breakers) + len(self.disconnectors)

    def node_substations(self) -> dict[NodeId, Optional[str]]:
        """Substation of every connectivity node.

        Switches and single-ended devices decide; a node touched only by
        branch devices falls back to the branch record's substation.  Ties
        resolve to the smallest substation id.
        """
        primary: dict[NodeId, set] = {}
        fallback: dict[NodeId, set] = {}
        for rec in (*self.single_ended(), *self.switches()):
            for nd in rec.nodes():
                primary.setdefault(nd, set()).add(rec.substation)
        for rec in self.branches():
            if rec.substation is not None:
                for nd in rec.nodes():
                    fallback.setdefault(nd, set()).add(rec.substation)
        out = {}
        for nd in self.connectivity_nodes:
            found = primary.get(nd) or fallback.get(nd)
            out[nd] = min(found) if found else None
        return out


def collect_connectivity_nodes(model: GridModel) -> list[NodeId]:
    """Sorted, deduplicated node ids referenced by any equipment record."""
    return sorted(model.connectivity_nodes)


# -- binding ------------------------------------------------------------------

_REQUIRED = {
    "single": ("id", "st", "nd"),
    "switch": ("id", "st", "i_nd", "j_nd", "point"),
    "branch": ("id", "i_nd", "j_nd"),
    "plain": ("id",),
    "toponode": ("id", "nds"),
}


def _shape(kind):
    if kind in _SINGLE_FOR_TABLE:
        return "single"
    if kind in _SWITCH_FOR_TABLE:
        return "switch"
    if kind in _BRANCH_FOR_TABLE:
        return "branch"
    if kind == "toponode":
        return "toponode"
    return "plain"


def _parse_point(value):
    return {"1": True, "0": False}.get(value)


def _parse_off(value):
    return {"0": True, "1": False}.get(value)


class _TableBinder:
    def __init__(self, kind, table: ClassTable, mapping: AttributeMapping, report: ValidationReport):
        self.kind = kind
        self.table = table
        self.report = report
        self.col = {f: mapping.column(kind, f) for f in DEFAULT_COLUMNS}
        self.label = f"<{table.class_name}::{table.section_name}>"

    def missing_columns(self):
        present = set(self.table.attributes)
        return [self.col[f] for f in _REQUIRED[_shape(self.kind)] if self.col[f] not in present]

    def passthrough(self, row: dict) -> dict:
        used = set(self.col.values())
        return {k: v for k, v in row.items() if k not in used}

    def status(self, row, rec_id, key, parse, default=True):
        column = self.col[key]
        if column not in row:
            return default
        value = parse(row[column])
        if value is None:
            self.report.error(rec_id, f"{self.label}: bad {column} value {row[column]!r}")
            return default
        return value

    def substation(self, row):
        st = row.get(self.col["st"])
        return None if st in (None, "", NO_SUBSTATION) else st

    def bind(self):
        out = []
        for row in self.table.records():
            rec_id = row[self.col["id"]]
            name = row.get(self.col["name"], rec_id)
            attrs = self.passthrough(row)
            shape = _shape(self.kind)
            if shape == "single":
                out.append(SingleEndedRecord(rec_id, name, row[self.col["st"]], row[self.col["nd"]], self.kind, attrs))
            elif shape == "switch":
                closed = self.status(row, rec_id, "point", _parse_point)
                out.append(
                    SwitchRecord(
                        rec_id, name, row[self.col["st"]], row[self.col["i_nd"]], row[self.col["j_nd"]],
                        closed, self.kind, attrs,
                    )
                )
            elif shape == "branch":
                out.extend(self.bind_branch(row, rec_id, name, attrs))
            elif shape == "toponode":
                nds = tuple(n for n in row[self.col["nds"]].split(",") if n)
                out.append(TopoNodeRecord(rec_id, name, self.substation(row), nds, attrs))
            else:
                out.append(Record(rec_id, name, attrs))
        return out

    def bind_branch(self, row, rec_id, name, attrs):
        kind = _BRANCH_FOR_TABLE[self.kind]
        st = self.substation(row)
        i_closed = self.status(row, rec_id, "i_off", _parse_off)
        j_closed = self.status(row, rec_id, "j_off", _parse_off)
        k_nd = row.get(self.col["k_nd"]) if self.kind == "transformer" else None
        if k_nd in (None, "", NO_SUBSTATION):
            return [
                TwoEndedBranchRecord(rec_id, name, row[self.col["i_nd"]], row[self.col["j_nd"]],
                                     i_closed, j_closed, kind, st, attrs)
            ]
        k_closed = self.status(row, rec_id, "k_off", _parse_off)
        star = f"{rec_id}#star"
        windings = (
            ("i", row[self.col["i_nd"]], i_closed, attrs),
            ("j", row[self.col["j_nd"]], j_closed, {}),
            ("k", k_nd, k_closed, {}),
        )
        return [
            TwoEndedBranchRecord(f"{rec_id}#{w}", name, nd, star, closed, True, kind, st, a, group=rec_id)
            for w, nd, closed, a in windings
        ]


def bind_model(doc: RawDocument, mapping: AttributeMapping = DEFAULT_MAPPING) -> tuple[GridModel, ValidationReport]:
    """Turn the recognised tables of ``doc`` into a :class:`GridModel`.

    Unrecognised tables are carried along in ``extra_tables``.  The returned
    report holds binding problems followed by :func:`validate` findings.
    """
    report = ValidationReport()
    lists: dict[str, list] = {name: [] for name in TABLE_FIELDS.values()}
    extra = []
    section = None
    for table in doc.tables:
        kind = mapping.kind_of(table.class_name)
        if kind is None:
            extra.append(table)
            continue
        binder = _TableBinder(kind, table, mapping, report)
        missing = binder.missing_columns()
        if missing:
            report.error(binder.label, f"missing column(s) {', '.join(missing)}; table skipped")
            continue
        if section is None:
            section = table.section_name
        lists[TABLE_FIELDS[kind]].extend(binder.bind())
    model = GridModel(**lists, extra_tables=extra, section=section or "grid")
    report.extend(validate(model))
    return model, report


def validate(model: GridModel) -> ValidationReport:
    """Check record-level invariants of ``model``; findings are returned, never raised."""
    report = ValidationReport()
    declared = {s.id for s in model.substations}

    for kind, name in TABLE_FIELDS.items():
        seen = set()
        for rec in getattr(model, name):
            if not rec.id:
                report.error(f"{kind}:?", "empty id")
            elif rec.id in seen:
                report.error(rec.id, f"duplicate {kind} id")
            seen.add(rec.id)

    for rec in model.equipment():
        for nd in rec.nodes():
            if not nd:
                report.error(rec.id, "empty connectivity node reference")
        if len(rec.nodes()) == 2 and rec.nodes()[0] == rec.nodes()[1]:
            report.error(rec.id, f"both ends on the same node {rec.nodes()[0]!r}")

    for rec in (*model.switches(), *model.single_ended()):
        if rec.substation not in declared:
            report.warning(rec.id, f"substation {rec.substation!r} is not declared")

    primary: dict[NodeId, set] = {}
    for rec in (*model.single_ended(), *model.switches()):
        for nd in rec.nodes():
            primary.setdefault(nd, set()).add(rec.substation)
    for nd in sorted(primary):
        if len(primary[nd]) > 1:
            report.warning(nd, f"connectivity node used by several substations: {sorted(primary[nd])}")

    for line in model.ac_lines:
        a, b = primary.get(line.i_nd), primary.get(line.j_nd)
        if a and b and a & b:
            report.warning(line.id, f"both line ends lie in substation {min(a & b)!r}")
    return report


# -- writing back -------------------------------------------------------------

def _table_for(kind, records, mapping: AttributeMapping, section):
    col = {f: mapping.column(kind, f) for f in DEFAULT_COLUMNS}
    shape = _shape(kind)
    if shape == "single":
        typed = ["id", "name", "st", "nd"]
    elif shape == "switch":
        typed = ["id", "name", "st", "i_nd", "j_nd", "point"]
    elif shape == "toponode":
        typed = ["id", "name", "st", "nds"]
    elif shape == "branch":
        typed = ["id", "name", "st", "i_nd", "j_nd", "i_off", "j_off"]
        if kind == "transformer" and any(r.group for r in records):
            typed += ["k_nd", "k_off"]
    else:
        typed = ["id", "name"]

    rows = []
    if shape == "branch":
        records = _regroup_windings(records)
    extra_cols: list[str] = []
    for rec in records:
        for key in rec["attributes"] if isinstance(rec, dict) else rec.attributes:
            if key not in extra_cols:
                extra_cols.append(key)

    def off(closed):
        return "0" if closed else "1"

    for rec in records:
        if isinstance(rec, dict):
            values = rec
        else:
            values = {"id": rec.id, "name": rec.name, "attributes": rec.attributes}
            if shape == "single":
                values.update(st=rec.substation, nd=rec.nd)
            elif shape == "switch":
                values.update(st=rec.substation, i_nd=rec.i_nd, j_nd=rec.j_nd, point="1" if rec.closed else "0")
            elif shape == "toponode":
                values.update(st=rec.substation or NO_SUBSTATION, nds=",".join(rec.nds))
        row = []
        for f in typed:
            v = values.get(f)
            if f in ("i_off", "j_off", "k_off"):
                v = off(v)
            elif f == "st" and v is None:
                v = NO_SUBSTATION
            row.append(v)
        row += [values["attributes"].get(c, "") for c in extra_cols]
        rows.append(row)
    return ClassTable(mapping.tables[kind], section, [col[f] for f in typed] + extra_cols, rows)


def _regroup_windings(records):
    out = []
    groups: dict[str, dict] = {}
    for rec in records:
        if rec.group is None:
            out.append(dict(id=rec.id, name=rec.name, st=rec.substation, i_nd=rec.i_nd, j_nd=rec.j_nd,
                            i_off=rec.i_closed, j_off=rec.j_closed, k_nd=NO_SUBSTATION, k_off=True,
                            attributes=rec.attributes))
            continue
        winding = rec.id.rsplit("#", 1)[1]
        entry = groups.get(rec.group)
        if entry is None:
            entry = dict(id=rec.group, name=rec.name, st=rec.substation, attributes={})
            groups[rec.group] = entry
            out.append(entry)
        entry[f"{winding}_nd"] = rec.i_nd
        entry[f"{winding}_off"] = rec.i_closed
        if winding == "i":
            entry["attributes"] = rec.attributes
    return out


def to_document(model: GridModel, mapping: AttributeMapping = DEFAULT_MAPPING) -> RawDocument:
    """Inverse of :func:`bind_model`: one class table per non-empty record list."""
    tables = []
    for kind, name in TABLE_FIELDS.items():
        records = getattr(model, name)
        if records:
            tables.append(_table_for(kind, records, mapping, model.section))
    tables.extend(model.extra_tables)
    return RawDocument(("cimegraph",), tables)


def replace_switch_status(model: GridModel, statuses: dict[tuple[str, str], bool]) -> GridModel:
    """Copy of ``model`` with switches keyed by ``(kind, id)`` set to the given closed flags."""
    def upd(recs):
        return tuple(
            dataclasses.replace(r, closed=statuses[(r.kind, r.id)]) if (r.kind, r.id) in statuses else r
            for r in recs
        )

    return dataclasses.replace(model, breakers=upd(model.breakers), disconnectors=upd(model.disconnectors))
