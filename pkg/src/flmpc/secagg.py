"""Pairwise additive masking over Z_q.

Every unordered client pair {i, j} with i < j shares a one-time pad p_ij.
Client i adds p_ij towards each higher index and subtracts it towards each
lower one, so the pads cancel in the sum and the server only ever sees
masked vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError, IncompleteRoundError
from .prng import DrawStream
from .values import FieldVector, field_sum
from .views import EntryKind, PartyView


@dataclass(frozen=True)
class PairwiseMaskSet:
    """Masks keyed by ``(i, j)`` with ``i < j``; both endpoints are clients."""

    masks: tuple[tuple[tuple[int, int], FieldVector], ...]

    def __post_init__(self):
        items = tuple(sorted(dict(self.masks).items()))
        for (i, j), _ in items:
            if not i < j:
                raise DomainError(f"mask pair ({i}, {j}) must be ordered i < j")
        object.__setattr__(self, "masks", items)

    @classmethod
    def from_dict(cls, masks: Mapping[tuple[int, int], FieldVector]) -> PairwiseMaskSet:
        return cls(tuple(masks.items()))

    @classmethod
    def zeros(cls, clients: Sequence[int], q: int, d: int) -> PairwiseMaskSet:
        return cls.from_dict(
            {pair: FieldVector.zeros(q, d) for pair in itertools.combinations(sorted(clients), 2)}
        )

    def as_dict(self) -> dict[tuple[int, int], FieldVector]:
        return dict(self.masks)

    def restrict(self, i: int) -> PairwiseMaskSet:
        """The masks client ``i`` knows."""
        return PairwiseMaskSet(tuple((p, m) for p, m in self.masks if i in p))

    def pairs(self) -> list[tuple[int, int]]:
        return [p for p, _ in self.masks]

    def covers(self, clients: Sequence[int]) -> bool:
        have = set(self.pairs())
        return all(p in have for p in itertools.combinations(sorted(clients), 2))

    def payload(self) -> tuple:
        """View payload: ``((i, j, mask), ...)``."""
        return tuple((i, j, m) for (i, j), m in self.masks)


def mask_pairs(clients: Sequence[int]) -> list[tuple[int, int]]:
    return list(itertools.combinations(sorted(clients), 2))


def masks_from_point(clients: Sequence[int], q: int, d: int, point: Sequence[int]) -> PairwiseMaskSet:
    """Consume ``d`` field elements per pair, pairs in lexicographic order."""
    pairs = mask_pairs(clients)
    if len(point) != d * len(pairs):
        raise DomainError(f"need {d * len(pairs)} mask components, got {len(point)}")
    return PairwiseMaskSet.from_dict(
        {pair: FieldVector(q, tuple(point[k * d:(k + 1) * d])) for k, pair in enumerate(pairs)}
    )


def derive_masks(seed: int, round_index: int, clients: Sequence[int], q: int, d: int) -> PairwiseMaskSet:
    """Seeded pads: pair (i, j) of a round reads its own draw stream."""
    masks = {}
    for i, j in mask_pairs(clients):
        stream = DrawStream(f"mask|{round_index}|{i}|{j}", seed)
        masks[(i, j)] = FieldVector(q, tuple(stream.below(q) for _ in range(d)))
    return PairwiseMaskSet.from_dict(masks)


def signed_mask(masks: PairwiseMaskSet, i: int, q: int, d: int) -> FieldVector:
    total = FieldVector.zeros(q, d)
    for (a, b), p in masks.masks:
        if p.q != q or p.d != d:
            raise DomainError(f"mask ({a}, {b}) is in Z_{p.q}^{p.d}, update in Z_{q}^{d}")
        if a == i:
            total = total + p
        elif b == i:
            total = total - p
    return total


def mask_update(x: FieldVector, masks: PairwiseMaskSet, i: int, view: PartyView | None = None, round: int = 0) -> FieldVector:
    """y_i = x_i + sum_{j>i} p_ij - sum_{j<i} p_ji (mod q)."""
    y = x + signed_mask(masks, i, x.q, x.d)
    if view is not None:
        view.append(EntryKind.MSG_OUT, y, round)
    return y


def unmask_aggregate(masked: Sequence[FieldVector | None], expected: int | None = None) -> FieldVector:
    if expected is not None and len(masked) != expected:
        raise IncompleteRoundError(f"{len(masked)} of {expected} masked vectors received")
    if not masked or any(y is None for y in masked):
        raise IncompleteRoundError("missing masked vector: pads would not cancel")
    return field_sum(list(masked))


def secure_agg_round(inputs: Sequence[FieldVector], masks: PairwiseMaskSet, views: Sequence[PartyView] | None = None, round: int = 0):
    """Mask every client's input, then sum at the server.

    ``views`` are the m views (clients 1..m-1, then the server). Returns the
    aggregate and, per party, the entries this round appended.
    """
    k = len(inputs)
    clients = list(range(1, k + 1))
    if not masks.covers(clients):
        raise DomainError("mask set does not cover every client pair")
    if views is None:
        views = [PartyView(i) for i in range(1, k + 2)]
    if len(views) != k + 1:
        raise DomainError(f"need {k + 1} views, got {len(views)}")
    marks = [len(v) for v in views]
    server = views[-1]
    ys = []
    for i, x in zip(clients, inputs):
        ys.append(mask_update(x, masks.restrict(i), i, views[i - 1], round))
    for y in ys:
        server.append(EntryKind.MSG_IN, y, round)
    aggregate = unmask_aggregate(ys, expected=k)
    deltas = [list(v.since(n)) for v, n in zip(views, marks)]
    return aggregate, deltas
