import itertools

import pytest
from hypothesis import given, strategies as st

from flmpc.errors import DomainError, IncompleteRoundError
from flmpc.fl import aggregate_plain
from flmpc.secagg import (
    PairwiseMaskSet,
    derive_masks,
    mask_pairs,
    mask_update,
    masks_from_point,
    secure_agg_round,
    signed_mask,
    unmask_aggregate,
)
from flmpc.values import FieldVector, decode_centered, fv
from flmpc.views import EntryKind, PartyView


def test_single_client_no_pairs():
    masks = PairwiseMaskSet.zeros([1], 5, 1)
    assert masks.pairs() == []
    assert mask_update(fv(5, 3), masks, 1) == fv(5, 3)


def test_two_client_example():
    masks = PairwiseMaskSet.from_dict({(1, 2): fv(5, 2)})
    y1 = mask_update(fv(5, 3), masks.restrict(1), 1)
    y2 = mask_update(fv(5, 4), masks.restrict(2), 2)
    assert (y1, y2) == (fv(5, 0), fv(5, 2))
    assert y1 + y2 == fv(5, 2)


def test_three_clients_all_mask_assignments():
    xs = [fv(5, 1), fv(5, 3), fv(5, 4)]
    count = 0
    for point in itertools.product(range(5), repeat=3):
        masks = masks_from_point([1, 2, 3], 5, 1, point)
        ys = [mask_update(x, masks, i) for i, x in enumerate(xs, start=1)]
        assert unmask_aggregate(ys) == fv(5, 3)
        count += 1
    assert count == 125


def test_unmask_examples():
    assert unmask_aggregate([fv(5, 0), fv(5, 2)]) == fv(5, 2)
    for point in itertools.product(range(5), repeat=3):
        masks = masks_from_point([1, 2, 3], 5, 1, point)
        ys = [mask_update(fv(5, 0), masks, i) for i in (1, 2, 3)]
        assert unmask_aggregate(ys) == fv(5, 0)


def test_q17_pair_under_every_mask():
    # updates 13 (-4) and 9 (-8) sum to 5 in Z_17: the wrap is visible in the decode
    for p in range(17):
        masks = PairwiseMaskSet.from_dict({(1, 2): fv(17, p)})
        agg, _ = secure_agg_round([fv(17, 13), fv(17, 9)], masks)
        assert agg == fv(17, 5)
        assert decode_centered(agg) == (5,)


def test_unmask_missing():
    with pytest.raises(IncompleteRoundError):
        unmask_aggregate([fv(5, 1), None])
    with pytest.raises(IncompleteRoundError):
        unmask_aggregate([fv(5, 1)], expected=2)
    with pytest.raises(IncompleteRoundError):
        unmask_aggregate([])


def test_mask_shape_mismatch():
    masks = PairwiseMaskSet.from_dict({(1, 2): fv(7, 1)})
    with pytest.raises(DomainError):
        mask_update(fv(5, 1), masks, 1)
    with pytest.raises(DomainError):
        secure_agg_round([fv(5, 1), fv(5, 1), fv(5, 1)], PairwiseMaskSet.zeros([1, 2], 5, 1))


def test_secure_equals_plain_exhaustive():
    n = 0
    for x1, x2 in itertools.product(range(5), repeat=2):
        xs = [fv(5, x1), fv(5, x2)]
        for p in range(5):
            agg, _ = secure_agg_round(xs, masks_from_point([1, 2], 5, 1, (p,)))
            assert agg == aggregate_plain(xs)
            n += 1
    assert n == 125


def test_zero_masks_match_plain_server_view():
    xs = [fv(5, 2), fv(5, 4)]
    views = [PartyView(i) for i in (1, 2, 3)]
    secure_agg_round(xs, PairwiseMaskSet.zeros([1, 2], 5, 1), views)
    plain = PartyView(3)
    aggregate_plain(xs, plain)
    assert views[2] == plain


def test_single_client_reveals_input():
    views = [PartyView(1), PartyView(2)]
    agg, deltas = secure_agg_round([fv(5, 3)], PairwiseMaskSet.zeros([1], 5, 1), views)
    assert agg == fv(5, 3)
    assert [e.payload for e in views[1].of_kind(EntryKind.MSG_IN)] == [fv(5, 3)]
    assert len(deltas) == 2 and deltas[1][0].payload == fv(5, 3)


def test_server_view_holds_only_masked_vectors():
    xs = [fv(7, 1, 2), fv(7, 3, 4), fv(7, 5, 6)]
    masks = derive_masks(9, 0, [1, 2, 3], 7, 2)
    views = [PartyView(i) for i in range(1, 5)]
    _, deltas = secure_agg_round(xs, masks, views)
    sent = [v.of_kind(EntryKind.MSG_OUT)[0].payload for v in views[:3]]
    received = [e.payload for e in views[3].entries]
    assert received == sent
    assert all(e.kind == EntryKind.MSG_IN for e in views[3].entries)
    assert [len(d) for d in deltas] == [1, 1, 1, 3]


def test_derive_masks_deterministic():
    a = derive_masks(1, 0, [1, 2, 3], 17, 2)
    assert a == derive_masks(1, 0, [1, 2, 3], 17, 2)
    assert a != derive_masks(1, 1, [1, 2, 3], 17, 2)
    assert a.pairs() == mask_pairs([1, 2, 3]) == [(1, 2), (1, 3), (2, 3)]


@given(
    k=st.integers(1, 6),
    q=st.sampled_from([2, 3, 5, 17, 101]),
    d=st.integers(1, 3),
    seed=st.integers(0, 10**6),
)
def test_mask_neutrality(k, q, d, seed):
    clients = list(range(1, k + 1))
    masks = derive_masks(seed, 0, clients, q, d)
    total = FieldVector.zeros(q, d)
    for i in clients:
        total = total + signed_mask(masks, i, q, d)
    assert total == FieldVector.zeros(q, d)
    # restricting to a client keeps only the pads that client shares
    for i in clients:
        assert all(i in pair for pair in masks.restrict(i).pairs())
