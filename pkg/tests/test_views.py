import pytest
from hypothesis import given, settings, strategies as st

from flmpc.views import EntryKind, JointView, PartyView, ViewEntry, watch_reads

from view_ops import check_sequence


def test_append_assigns_sequence_numbers():
    v = PartyView(1)
    v.append(EntryKind.INPUT, 3)
    v.append(EntryKind.MSG_OUT, 4, round=2)
    assert [e.seq for e in v.entries] == [0, 1]
    assert v.entries[1] == ViewEntry(1, 2, EntryKind.MSG_OUT, 4)
    assert v.since(1) == (v.entries[1],)


def test_entries_are_immutable_snapshots():
    v = PartyView(1)
    v.append(EntryKind.INPUT, 3)
    snap = v.entries
    v.append(EntryKind.OUTPUT, 4)
    assert len(snap) == 1 and len(v) == 2
    with pytest.raises(AttributeError):
        snap[0].payload = 9


def test_from_entries_validates():
    good = [ViewEntry(0, 0, EntryKind.INPUT, 1), ViewEntry(1, 0, EntryKind.OUTPUT, 2)]
    assert len(PartyView.from_entries(1, good)) == 2
    with pytest.raises(ValueError):
        PartyView.from_entries(1, [ViewEntry(1, 0, EntryKind.INPUT, 1)])


def test_equality():
    a, b = PartyView(1), PartyView(1)
    a.append(EntryKind.INPUT, 1)
    b.append(EntryKind.INPUT, 1)
    assert a == b and a != PartyView(2)
    assert JointView((1,), (a,)) == JointView((1,), (b,))


def test_watch_reads():
    a, b = PartyView(1), PartyView(2)
    with watch_reads() as seen:
        a.entries
    b.entries
    assert seen == [a]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_random_operation_sequences(seed):
    assert check_sequence(seed) == []
