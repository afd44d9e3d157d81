"""Shared generators for tests: random CIM/E documents and small grid models."""
import random
import string

from hypothesis import strategies as st

from cimegraph.cime_io import ClassTable, RawDocument
from cimegraph.model import GridModel, Record, SingleEndedRecord, SwitchRecord, TwoEndedBranchRecord

# no whitespace, no tag delimiters; a few non-ASCII letters to exercise UTF-8
_VALUE_CHARS = string.ascii_letters + string.digits + "_.-+=,;:#@/!é中Ω"
_NAME_CHARS = string.ascii_letters + string.digits + "_."


def random_document(rng: random.Random) -> RawDocument:
    """A valid document drawn with the stdlib RNG (used for fixed corpora)."""

    def token(chars, lo=1, hi=8):
        return "".join(rng.choice(chars) for _ in range(rng.randint(lo, hi)))

    def text():
        return " ".join(token(_NAME_CHARS) for _ in range(rng.randint(0, 4)))

    tables = []
    for _ in range(rng.randint(0, 6)):
        width = rng.randint(1, 7)
        rows = [[token(_VALUE_CHARS) for _ in range(width)] for _ in range(rng.randint(0, 12))]
        comments = sorted(((rng.randint(0, len(rows)), text()) for _ in range(rng.randint(0, 3))), key=lambda c: c[0])
        tables.append(ClassTable(token(_NAME_CHARS), token(_NAME_CHARS + ":"),
                                 [token(_VALUE_CHARS) for _ in range(width)], rows, comments))
    statements = []
    for _ in range(rng.randint(0, 2)):
        statements.append("\n".join(text() or "x" for _ in range(rng.randint(1, 3))))
    top = sorted(((rng.randint(0, len(tables)), text()) for _ in range(rng.randint(0, 3))), key=lambda c: c[0])
    return RawDocument(statements, tables, top)


_values = st.text(st.sampled_from(_VALUE_CHARS), min_size=1, max_size=10)
_names = st.text(st.sampled_from(_NAME_CHARS), min_size=1, max_size=10)
_texts = st.lists(_names, max_size=4).map(" ".join)


@st.composite
def tables(draw):
    width = draw(st.integers(1, 6))
    rows = draw(st.lists(st.lists(_values, min_size=width, max_size=width), max_size=8))
    comments = draw(st.lists(st.tuples(st.integers(0, len(rows)), _texts), max_size=3))
    return ClassTable(
        draw(_names),
        draw(_names),
        draw(st.lists(_values, min_size=width, max_size=width)),
        rows,
        sorted(comments, key=lambda c: c[0]),
    )


@st.composite
def documents(draw):
    tbls = draw(st.lists(tables(), max_size=5))
    statements = draw(st.lists(st.lists(_names, min_size=1, max_size=3).map("\n".join), max_size=2))
    comments = draw(st.lists(st.tuples(st.integers(0, len(tbls)), _texts), max_size=3))
    return RawDocument(statements, tbls, sorted(comments, key=lambda c: c[0]))


def three_device_model(closed=True):
    """Bus bar on N1, breaker N1-N2, load on N2, all in substation S1."""
    return GridModel(
        substations=[Record("S1", "S1")],
        bus_bars=[SingleEndedRecord("BB1", "BB1", "S1", "N1", "busbar")],
        breakers=[SwitchRecord("CB1", "CB1", "S1", "N1", "N2", closed, "breaker")],
        loads=[SingleEndedRecord("L1", "L1", "S1", "N2", "load")],
    )


def mixed_switch_model():
    """BB1 -(closed CB1)- N1 - L1 ; BB1 -(open DS1)- N2 - G1."""
    return GridModel(
        substations=[Record("S1", "S1")],
        bus_bars=[SingleEndedRecord("BB1", "BB1", "S1", "NB", "busbar")],
        breakers=[SwitchRecord("CB1", "CB1", "S1", "NB", "N1", True, "breaker")],
        disconnectors=[SwitchRecord("DS1", "DS1", "S1", "NB", "N2", False, "disconnector")],
        loads=[SingleEndedRecord("L1", "L1", "S1", "N1", "load")],
        generators=[SingleEndedRecord("G1", "G1", "S1", "N2", "generator")],
    )


def two_substation_model(i_closed=True, j_closed=True):
    """Two one-bus substations joined by line LN1 through one breaker at each end."""
    return GridModel(
        substations=[Record("S1", "S1"), Record("S2", "S2")],
        bus_bars=[SingleEndedRecord("BB1", "BB1", "S1", "A1", "busbar"),
                  SingleEndedRecord("BB2", "BB2", "S2", "B1", "busbar")],
        breakers=[SwitchRecord("CB1", "CB1", "S1", "A1", "A2", True, "breaker"),
                  SwitchRecord("CB2", "CB2", "S2", "B1", "B2", True, "breaker")],
        generators=[SingleEndedRecord("G1", "G1", "S1", "A1", "generator")],
        loads=[SingleEndedRecord("L2", "L2", "S2", "B1", "load")],
        ac_lines=[TwoEndedBranchRecord("LN1", "LN1", "A2", "B2", i_closed, j_closed, "ac_line")],
    )


def scan_nd_columns(text: str) -> set:
    """Independent raw-text scan: every value under an nd/i_nd/j_nd header."""
    found = set()
    header = None
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("<") and not line.startswith("</") and not line.startswith("<!"):
            header = None
        elif line.startswith("@"):
            header = line[1:].split()
        elif line.startswith("#") and header:
            for name, value in zip(header, line[1:].split()):
                if name in ("nd", "i_nd", "j_nd"):
                    found.add(value)
    return found
