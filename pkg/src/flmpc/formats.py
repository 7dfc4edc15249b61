"""Reading and writing datasets, transcripts, model files and check reports.

All numbers are written as decimal integers (field elements) or ``num/den``
(rationals). Files end with a newline and use ``\\n`` line endings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .canonical import decode, encode
from .errors import FormatError
from .values import ClientDataset, Example, FieldVector, Symbol, format_rational, parse_rational
from .views import EntryKind, PartyView, ViewEntry

TRANSCRIPT_MAGIC = "flmpc-transcript"
TRANSCRIPT_VERSION = 1


# -- datasets ---------------------------------------------------------------------


def parse_datasets(text: str) -> list[ClientDataset]:
    """Blocks headed ``client <id>``; one ``f_1 ... f_d ; label`` line per example."""
    clients: list[tuple[int, list[Example]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("client"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                raise FormatError(f"bad client header {line!r}", lineno)
            owner = int(parts[1])
            if any(o == owner for o, _ in clients):
                raise FormatError(f"duplicate client {owner}", lineno)
            clients.append((owner, []))
            continue
        if not clients:
            raise FormatError("example before any 'client' header", lineno)
        feats, sep, label = line.partition(";")
        if not sep:
            raise FormatError("example line needs 'features ; label'", lineno)
        try:
            example = Example(tuple(parse_rational(t) for t in feats.split()), parse_rational(label))
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
        if not example.features:
            raise FormatError("example has no features", lineno)
        examples = clients[-1][1]
        if examples and len(examples[0].features) != len(example.features):
            raise FormatError("feature dimension differs within client", lineno)
        examples.append(example)
    return [ClientDataset(owner, tuple(ex)) for owner, ex in clients]


def format_datasets(datasets: Sequence[ClientDataset]) -> str:
    blocks = []
    for ds in datasets:
        lines = [f"client {ds.owner}"]
        for ex in ds.examples:
            lines.append(" ".join(format_rational(f) for f in ex.features) + " ; " + format_rational(ex.label))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_datasets(path) -> list[ClientDataset]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read dataset file {path}: {exc.strerror}") from None
    return parse_datasets(text)


# -- transcripts ----------------------------------------------------------------------


def format_transcript(views: Sequence[PartyView], digest: str) -> str:
    lines = [f"{TRANSCRIPT_MAGIC} {TRANSCRIPT_VERSION}", f"config-digest {digest}", f"parties {len(views)}"]
    for view in sorted(views, key=lambda v: v.party):
        for e in view.entries:
            lines.append(f"{e.round} {view.party} {e.seq} {e.kind.value} {encode(e.payload)}")
    return "\n".join(lines) + "\n"


def parse_transcript(text: str) -> tuple[str, list[PartyView]]:
    """Return ``(config digest, views)``."""
    lines = text.splitlines()
    if len(lines) < 3:
        raise FormatError("truncated transcript header")
    magic = lines[0].split()
    if magic != [TRANSCRIPT_MAGIC, str(TRANSCRIPT_VERSION)]:
        raise FormatError(f"not a version-{TRANSCRIPT_VERSION} transcript", 1)
    key, _, digest = lines[1].partition(" ")
    if key != "config-digest":
        raise FormatError("missing config-digest", 2)
    key, _, count = lines[2].partition(" ")
    if key != "parties" or not count.isdigit():
        raise FormatError("missing party count", 3)
    entries: dict[int, list[ViewEntry]] = {p: [] for p in range(1, int(count) + 1)}
    last = (0, -1)
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split(" ", 4)
        if len(parts) != 5:
            raise FormatError("expected 'round party seq kind payload'", lineno)
        try:
            rnd, party, seq = int(parts[0]), int(parts[1]), int(parts[2])
            kind = EntryKind(parts[3])
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
        if party not in entries:
            raise FormatError(f"party {party} outside 1..{count}", lineno)
        if (party, seq) <= last:
            raise FormatError("lines not ordered by (party, sequence number)", lineno)
        last = (party, seq)
        try:
            payload = decode(parts[4])
        except FormatError as exc:
            raise FormatError(f"payload: {exc}", lineno) from None
        entries[party].append(ViewEntry(seq, rnd, kind, payload))
    views = []
    for party, es in entries.items():
        try:
            views.append(PartyView.from_entries(party, es))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    return digest, views


# -- model files ---------------------------------------------------------------------------


def format_model(model: Sequence[Fraction]) -> str:
    return "".join(format_rational(w) + "\n" for w in model)


def parse_model(text: str) -> tuple[Fraction, ...]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            try:
                out.append(parse_rational(line))
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
    return tuple(out)


# -- reports --------------------------------------------------------------------------------


def describe(value) -> str:
    """Compact human-readable rendering used in report lines (no spaces)."""
    if isinstance(value, FieldVector):
        return "[" + ",".join(str(c) for c in value.components) + "]"
    if isinstance(value, Symbol):
        return value.value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, ClientDataset):
        rows = (
            ",".join(format_rational(f) for f in ex.features) + ";" + format_rational(ex.label)
            for ex in value.examples
        )
        return "{" + "|".join(rows) + "}"
    if isinstance(value, tuple):
        return "(" + ",".join(describe(v) for v in value) + ")"
    raise TypeError(f"cannot describe {type(value).__name__}")


def describe_inputs(inputs: tuple) -> str:
    return "/".join(describe(x) for x in inputs)


def privacy_report_lines(report) -> list[str]:
    lines = [f"# protocol={report.protocol} simulator={report.simulator} mode={report.mode}"]
    for r in report.records:
        verdict = "PASS" if r.passed else "FAIL"
        lines.append(
            f"inputs={describe_inputs(r.inputs)} I={r.corrupted.label()} "
            f"distance={format_rational(r.distance)} verdict={verdict}"
        )
    for w in report.witnesses:
        lines.append(
            f"witness I={w.corrupted.label()} first={describe_inputs(w.first)} "
            f"second={describe_inputs(w.second)} distance={format_rational(w.distance)}"
        )
    lines.append(f"verdict={report.verdict}")
    return lines


def privacy_summary(report) -> dict:
    return {
        "protocol": report.protocol,
        "simulator": report.simulator,
        "mode": report.mode,
        "records": len(report.records),
        "failures": sum(not r.passed for r in report.records),
        "max_distance": format_rational(report.max_distance),
        "witnesses": [
            {
                "I": w.corrupted.label(),
                "first": describe_inputs(w.first),
                "second": describe_inputs(w.second),
                "distance": format_rational(w.distance),
            }
            for w in report.witnesses
        ],
        "verdict": report.verdict,
    }


def reduction_report_lines(report) -> list[str]:
    lines = [f"# reduction inner={report.inner} rounds={report.rounds}"]
    if report.identity_composition:
        lines.append("note=single round: the composition is the identity composition")
    lines.append(f"outputs points={report.points_checked} mismatches={len(report.mismatches)} "
                 f"verdict={'PASS' if report.outputs_equal else 'FAIL'}")
    for mm in report.mismatches:
        lines.append(f"mismatch inputs={describe_inputs(mm.inputs)} expected={describe(mm.expected)} got={describe(mm.got)}")
    for label, sub in (("hybrid", report.hybrid), ("substituted", report.substituted)):
        lines.append(f"## {label}")
        lines.extend(privacy_report_lines(sub))
    lines.append(f"verdict={report.verdict}")
    return lines


def reduction_summary(report) -> dict:
    return {
        "inner": report.inner,
        "rounds": report.rounds,
        "identity_composition": report.identity_composition,
        "outputs_checked": report.points_checked,
        "output_mismatches": len(report.mismatches),
        "hybrid": privacy_summary(report.hybrid),
        "substituted": privacy_summary(report.substituted),
        "verdict": report.verdict,
    }


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
