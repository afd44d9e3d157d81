"""Reader and writer for CIM/E text files.

A CIM/E file is a sequence of class tables::

    <! System Statement !>
    <Bus::Area>
    @ id  name  st  nd
    // comment
    # BB1  bus_1  S1  N1
    </Bus::Area>

Fields are separated by runs of blanks on input and by a single tab on
output.  There is no quoting, so neither attribute names nor values may
contain whitespace.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

__all__ = [
    "ClassTable",
    "CimeSerializeError",
    "ParseDiagnostic",
    "RawDocument",
    "Severity",
    "get_table",
    "parse_cime",
    "read_cime",
    "serialize_cime",
    "write_cime",
]

_OPEN_TAG = re.compile(r"^<\s*([^\s:<>/!]+)\s*::\s*([^\s<>]+)\s*>$")
_CLOSE_TAG = re.compile(r"^</\s*([^\s:<>/!]+)\s*::\s*([^\s<>]+)\s*>$")


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    line_number: int
    severity: Severity
    message: str

    def __str__(self):
        return f"line {self.line_number}: {self.severity.value}: {self.message}"


@dataclass(frozen=True)
class ClassTable:
    """One ``<class::section>`` block.

    ``comments`` holds ``(position, text)`` pairs where position is the
    number of object rows that precede the comment.
    """

    class_name: str
    section_name: str
    attributes: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...] = ()
    comments: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(self, "comments", tuple((int(p), t) for p, t in self.comments))

    def column(self, name: str) -> list[str]:
        """Values of attribute ``name`` across all rows."""
        idx = self.attributes.index(name)
        return [row[idx] for row in self.rows]

    def records(self) -> list[dict[str, str]]:
        return [dict(zip(self.attributes, row)) for row in self.rows]


@dataclass(frozen=True)
class RawDocument:
    """Parse tree of a CIM/E file.

    Top-level ``comments`` are ``(position, text)`` pairs, position being
    the index of the table the comment precedes.
    """

    system_statements: tuple[str, ...] = ()
    tables: tuple[ClassTable, ...] = ()
    comments: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "system_statements", tuple(self.system_statements))
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "comments", tuple((int(p), t) for p, t in self.comments))


class CimeSerializeError(ValueError):
    pass


def get_table(doc: RawDocument, class_name: str) -> Optional[ClassTable]:
    """First table whose class name equals ``class_name`` (case-sensitive)."""
    for table in doc.tables:
        if table.class_name == class_name:
            return table
    return None


class _TableBuilder:
    def __init__(self, class_name, section_name, line_number):
        self.class_name = class_name
        self.section_name = section_name
        self.line_number = line_number
        self.attributes = None
        self.rows = []
        self.comments = []

    def build(self):
        return ClassTable(
            self.class_name,
            self.section_name,
            self.attributes or (),
            self.rows,
            self.comments,
        )


def _split_lines(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def parse_cime(text: Union[str, bytes]) -> tuple[RawDocument, list[ParseDiagnostic]]:
    """Parse CIM/E text into a :class:`RawDocument`.

    Never raises on malformed input.  Problems are reported as diagnostics
    and the parser carries on at the next line it understands.
    """
    diagnostics: list[ParseDiagnostic] = []

    def error(lineno, message):
        diagnostics.append(ParseDiagnostic(lineno, Severity.ERROR, message))

    def warning(lineno, message):
        diagnostics.append(ParseDiagnostic(lineno, Severity.WARNING, message))

    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            text = bytes(text).decode("utf-8", errors="replace")
            warning(text[: exc.start].count("\n") + 1, "input is not valid UTF-8; undecodable bytes replaced")
    if text.startswith("\ufeff"):
        text = text[1:]

    statements: list[str] = []
    tables: list[ClassTable] = []
    top_comments: list[tuple[int, str]] = []
    current: Optional[_TableBuilder] = None
    statement_lines: Optional[list[str]] = None
    statement_start = 0

    def close_current():
        nonlocal current
        tables.append(current.build())
        current = None

    for lineno, raw in enumerate(_split_lines(text), start=1):
        line = raw.strip()

        if statement_lines is not None:
            end = line.find("!>")
            if end >= 0:
                statement_lines.append(line[:end])
                statements.append(_join_statement(statement_lines))
                statement_lines = None
                if line[end + 2:].strip():
                    warning(lineno, "text after '!>' ignored")
            else:
                statement_lines.append(line)
            continue

        if not line:
            continue

        if line.startswith("<!"):
            body = line[2:]
            end = body.find("!>")
            if end >= 0:
                statements.append(_join_statement([body[:end]]))
                if body[end + 2:].strip():
                    warning(lineno, "text after '!>' ignored")
            else:
                statement_lines = [body]
                statement_start = lineno
            continue

        if line.startswith("</"):
            m = _CLOSE_TAG.match(line)
            if current is None:
                error(lineno, f"close tag {line!r} outside any table")
            elif m is None:
                error(lineno, f"malformed close tag {line!r}")
                close_current()
            else:
                if (m.group(1), m.group(2)) != (current.class_name, current.section_name):
                    error(
                        lineno,
                        f"close tag </{m.group(1)}::{m.group(2)}> does not match "
                        f"<{current.class_name}::{current.section_name}> opened on line {current.line_number}",
                    )
                close_current()
            continue

        if line.startswith("<"):
            m = _OPEN_TAG.match(line)
            if m is None:
                error(lineno, f"malformed class tag {line!r}")
                continue
            if current is not None:
                error(
                    lineno,
                    f"table <{current.class_name}::{current.section_name}> opened on line "
                    f"{current.line_number} is not closed before a new table; nesting is not allowed",
                )
                close_current()
            current = _TableBuilder(m.group(1), m.group(2), lineno)
            continue

        if line.startswith("//"):
            comment = line[2:].strip()
            if current is None:
                top_comments.append((len(tables), comment))
            else:
                current.comments.append((len(current.rows), comment))
            continue

        if line.startswith("@"):
            if current is None:
                error(lineno, "attribute header outside any table")
            elif current.attributes is not None:
                error(lineno, "duplicate attribute header ignored")
            else:
                current.attributes = tuple(line[1:].split())
            continue

        if line.startswith("#"):
            fields = line[1:].split()
            if current is None:
                error(lineno, "object row outside any table dropped")
            elif current.attributes is None:
                error(lineno, "object row before attribute header dropped")
            else:
                width = len(current.attributes)
                if len(fields) != width:
                    error(lineno, f"row has {len(fields)} fields, header has {width}")
                    fields = (fields + [""] * width)[:width]
                current.rows.append(tuple(fields))
            continue

        warning(lineno, f"unrecognized line ignored: {line[:40]!r}")

    if statement_lines is not None:
        error(statement_start, "system statement not terminated by '!>'")
        statements.append(_join_statement(statement_lines))
    if current is not None:
        error(current.line_number, f"table <{current.class_name}::{current.section_name}> is never closed")
        close_current()

    return RawDocument(statements, tables, top_comments), diagnostics


def _join_statement(lines):
    return "\n".join(s for s in (line.strip() for line in lines) if s)


def _check_field(value, what):
    if not value or any(ch.isspace() for ch in value):
        raise CimeSerializeError(f"{what} {value!r} is empty or contains whitespace")


def _row_line(table, index, row):
    if len(row) != len(table.attributes):
        raise CimeSerializeError(
            f"table <{table.class_name}::{table.section_name}> row {index}: "
            f"{len(row)} fields, header has {len(table.attributes)}"
        )
    fields = list(row)
    # trailing empties are padding from a short row; dropping them reparses identically
    while fields and fields[-1] == "":
        fields.pop()
    for value in fields:
        _check_field(value, f"table <{table.class_name}::{table.section_name}> row {index}: value")
    return "\t".join(["#", *fields])


def _serialize_lines(doc: RawDocument) -> Iterable[str]:
    for statement in doc.system_statements:
        if "!>" in statement or "<!" in statement:
            raise CimeSerializeError(f"system statement {statement!r} contains a delimiter")
        parts = statement.split("\n")
        if len(parts) == 1:
            yield f"<! {statement} !>" if statement else "<! !>"
        else:
            yield "<!"
            yield from parts
            yield "!>"

    top = sorted(doc.comments, key=lambda c: c[0])
    k = 0
    for t_index, table in enumerate(doc.tables):
        while k < len(top) and top[k][0] <= t_index:
            yield f"// {top[k][1]}".rstrip()
            k += 1
        _check_field(table.class_name, "class name")
        _check_field(table.section_name, "section name")
        for name in table.attributes:
            _check_field(name, f"table <{table.class_name}::{table.section_name}> attribute")
        yield f"<{table.class_name}::{table.section_name}>"
        yield "\t".join(["@", *table.attributes])
        comments = sorted(table.comments, key=lambda c: c[0])
        j = 0
        for r_index, row in enumerate(table.rows):
            while j < len(comments) and comments[j][0] <= r_index:
                yield f"// {comments[j][1]}".rstrip()
                j += 1
            yield _row_line(table, r_index, row)
        for _, text in comments[j:]:
            yield f"// {text}".rstrip()
        yield f"</{table.class_name}::{table.section_name}>"
    for _, text in top[k:]:
        yield f"// {text}".rstrip()


def serialize_cime(doc: RawDocument) -> str:
    """Render ``doc`` as CIM/E text (LF line endings, tab-separated fields).

    Raises :class:`CimeSerializeError` if a row's width disagrees with its
    header or a value cannot be written without quoting.
    """
    lines = list(_serialize_lines(doc))
    return "\n".join(lines) + "\n" if lines else ""


def read_cime(path) -> tuple[RawDocument, list[ParseDiagnostic]]:
    with open(path, "rb") as fh:
        return parse_cime(fh.read())


def write_cime(doc: RawDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_cime(doc))
