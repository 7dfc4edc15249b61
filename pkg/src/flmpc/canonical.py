"""Canonical, injective text serialization of view payloads.

Every value encodes to a tag character followed by either a length-prefixed
atom (``i3:-12``) or a fixed sequence of sub-encodings. Lists carry their
item count (``l2:i1:1i1:2``). The grammar is prefix-free, so distinct values
never collide and ``decode(encode(v)) == v``.

    int          i<len>:<decimal>
    Fraction     r<len>:<num>/<den>
    str          s<len>:<text>
    Symbol       y<len>:<name>
    EntryKind    k<len>:<name>
    tuple/list   l<count>:<item>...
    FieldVector  f <q> <components>
    Example      x <features> <label>
    ClientData   d <owner> <examples>
    SysParam     p <weights> <program> <round> <q> <s>
    ViewEntry    e <seq> <round> <kind> <payload>
    PartyView    v <party> <entries>
    JointView    j <corrupted> <views>
"""

from __future__ import annotations

from fractions import Fraction

from .errors import FormatError
from .values import ClientDataset, Example, FieldVector, SysParam, Symbol
from .views import EntryKind, JointView, PartyView, ViewEntry


def _atom(tag: str, text: str) -> str:
    return f"{tag}{len(text)}:{text}"


def encode(value) -> str:
    parts: list[str] = []
    _encode(value, parts)
    return "".join(parts)


def _encode(value, out: list[str]) -> None:
    if isinstance(value, bool) or value is None:
        raise TypeError(f"cannot canonically encode {value!r}")
    if isinstance(value, EntryKind):
        out.append(_atom("k", value.value))
    elif isinstance(value, Symbol):
        out.append(_atom("y", value.value))
    elif isinstance(value, int):
        out.append(_atom("i", str(value)))
    elif isinstance(value, Fraction):
        out.append(_atom("r", f"{value.numerator}/{value.denominator}"))
    elif isinstance(value, str):
        out.append(_atom("s", value))
    elif isinstance(value, (tuple, list)):
        out.append(f"l{len(value)}:")
        for item in value:
            _encode(item, out)
    elif isinstance(value, FieldVector):
        out.append("f")
        _encode(value.q, out)
        _encode(value.components, out)
    elif isinstance(value, Example):
        out.append("x")
        _encode(value.features, out)
        _encode(value.label, out)
    elif isinstance(value, ClientDataset):
        out.append("d")
        _encode(value.owner, out)
        _encode(value.examples, out)
    elif isinstance(value, SysParam):
        out.append("p")
        for item in (value.weights, value.program, value.round, value.q, value.s):
            _encode(item, out)
    elif isinstance(value, ViewEntry):
        out.append("e")
        for item in (value.seq, value.round, value.kind, value.payload):
            _encode(item, out)
    elif isinstance(value, PartyView):
        out.append("v")
        _encode(value.party, out)
        _encode(value.entries, out)
    elif isinstance(value, JointView):
        out.append("j")
        _encode(value.corrupted, out)
        _encode(value.views, out)
    else:
        raise TypeError(f"cannot canonically encode {type(value).__name__}")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, msg):
        raise FormatError(f"{msg} at offset {self.pos}")

    def tag(self) -> str:
        if self.pos >= len(self.text):
            self.fail("unexpected end of input")
        c = self.text[self.pos]
        self.pos += 1
        return c

    def count(self) -> int:
        end = self.text.find(":", self.pos)
        if end < 0:
            self.fail("missing ':'")
        digits = self.text[self.pos:end]
        if not digits.isdigit():
            self.fail(f"bad length {digits!r}")
        self.pos = end + 1
        return int(digits)

    def atom(self) -> str:
        n = self.count()
        if self.pos + n > len(self.text):
            self.fail("truncated atom")
        s = self.text[self.pos:self.pos + n]
        self.pos += n
        return s

    def value(self):
        t = self.tag()
        try:
            if t == "i":
                return int(self.atom())
            if t == "r":
                num, _, den = self.atom().partition("/")
                return Fraction(int(num), int(den))
            if t == "s":
                return self.atom()
            if t == "y":
                return Symbol(self.atom())
            if t == "k":
                return EntryKind(self.atom())
        except ValueError as exc:
            self.fail(str(exc))
        if t == "l":
            return tuple(self.value() for _ in range(self.count()))
        if t == "f":
            return FieldVector(self.value(), self.value())
        if t == "x":
            return Example(self.value(), self.value())
        if t == "d":
            return ClientDataset(self.value(), self.value())
        if t == "p":
            return SysParam(*(self.value() for _ in range(5)))
        if t == "e":
            return ViewEntry(self.value(), self.value(), self.value(), self.value())
        if t == "v":
            party = self.value()
            try:
                return PartyView.from_entries(party, self.value())
            except ValueError as exc:
                self.fail(str(exc))
        if t == "j":
            return JointView(self.value(), self.value())
        self.fail(f"unknown tag {t!r}")


def decode(text: str):
    reader = _Reader(text)
    value = reader.value()
    if reader.pos != len(text):
        reader.fail("trailing data")
    return value
