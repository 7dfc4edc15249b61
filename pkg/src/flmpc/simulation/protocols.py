"""Protocols under test and their simulators.

Two protocol families, each in three variants:

* aggregation: clients hold vectors in Z_q^d, the server learns their sum
  (the sum-to-server functionality);
* fl: clients hold datasets, the server the initial model; over n rounds the
  server learns each round's model and the clients receive acks plus the
  models broadcast to them.

Variants: ``plain`` sends updates in the clear, ``oracle`` calls the ideal
aggregation functionality, ``masked`` runs pairwise-masked aggregation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .. import functionality as fn
from ..errors import DomainError
from ..fl import (
    VARIANTS,
    ClientParty,
    RoundConfig,
    ServerParty,
    aggregate_plain,
    broadcast_sysparam,
    fl_functionality,
    play_rounds,
    zero_model,
)
from ..secagg import PairwiseMaskSet, mask_pairs, mask_update, masks_from_point, secure_agg_round
from ..values import ACK, BOTTOM, ClientDataset, FieldVector, encode_centered, field_sum
from ..views import EntryKind, JointView, PartyView
from .core import CorruptionSet


def _open_view(party: int, value, randomness=()) -> PartyView:
    view = PartyView(party)
    view.append(EntryKind.INPUT, value, 0)
    view.append(EntryKind.RANDOMNESS, randomness, 0)
    return view


def _outputs_of(view: PartyView) -> tuple:
    return tuple(e.payload for e in view.entries if e.kind == EntryKind.OUTPUT)


def _corrupted_pairs(clients: Sequence[int], corrupted: Sequence[int]) -> list[tuple[int, int]]:
    bad = set(corrupted)
    return [p for p in mask_pairs(clients) if bad & set(p)]


def _honest_masked(sigma: FieldVector, honest: Sequence[int], free: Sequence[int]) -> dict[int, FieldVector]:
    """Masked vectors of honest clients: uniform given their sum ``sigma``.

    The first k-1 are read from ``free`` (d components each), the last one is
    whatever makes the sum come out to ``sigma``.
    """
    q, d = sigma.q, sigma.d
    out = {}
    for n, h in enumerate(honest[:-1]):
        out[h] = FieldVector(q, tuple(free[n * d:(n + 1) * d]))
    if honest:
        rest = [out[h] for h in honest[:-1]]
        out[honest[-1]] = sigma - field_sum(rest) if rest else sigma
    return out


def _free_count(I: CorruptionSet, d: int) -> int:
    k = len(I.honest_clients)
    return (k - 1) * d if I.has_server and k >= 2 else 0


# -- aggregation ----------------------------------------------------------------------


@dataclass(frozen=True)
class AggregationProtocol:
    variant: str
    m: int
    q: int
    d: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")

    @property
    def name(self) -> str:
        return f"aggregation/{self.variant}"

    @property
    def clients(self) -> list[int]:
        return list(range(1, self.m))

    def randomness_domain(self) -> fn.RandomnessDomain:
        if self.variant != "masked":
            return fn.DETERMINISTIC
        return fn.RandomnessDomain.uniform(self.q, self.d * len(mask_pairs(self.clients)))

    def functionality(self) -> fn.MAryFunctionality:
        return fn.sum_to_server(self.m, self.q, self.d)

    def ideal(self, inputs) -> tuple:
        return fn.evaluate_functionality(self.functionality(), inputs)

    def outputs(self, views) -> tuple:
        return tuple(_outputs_of(v)[-1] for v in views)

    def grid(self) -> list[tuple]:
        vectors = [FieldVector(self.q, c) for c in itertools.product(range(self.q), repeat=self.d)]
        return [xs + (BOTTOM,) for xs in itertools.product(vectors, repeat=self.m - 1)]

    def execute(self, inputs, point=()) -> list[PartyView]:
        xs, k = list(inputs[:-1]), self.m - 1
        masks = masks_from_point(self.clients, self.q, self.d, point) if self.variant == "masked" else None
        views = [
            _open_view(i, x, masks.restrict(i).payload() if masks is not None else ())
            for i, x in enumerate(xs, start=1)
        ]
        views.append(_open_view(self.m, inputs[-1]))
        if self.variant == "plain":
            for v, x in zip(views, xs):
                v.append(EntryKind.MSG_OUT, x)
            aggregate = aggregate_plain(xs, views[-1])
        elif self.variant == "oracle":
            binding = fn.OracleBinding("aggregation", self.functionality(), dict(enumerate(views, start=1)))
            aggregate = fn.oracle_call(binding, xs + [inputs[-1]])[-1]
        else:
            aggregate, _ = secure_agg_round(xs, masks, views)
        for v in views[:k]:
            v.append(EntryKind.OUTPUT, ACK)
        views[-1].append(EntryKind.OUTPUT, aggregate)
        return views


@dataclass(frozen=True)
class AggregationSimulator:
    """Simulator for the aggregation protocol given only (I, x_I, f_I).

    For ``plain`` this is the natural sum-only simulator: the first honest
    client is credited with the whole honest sum, the others with zero.
    """

    variant: str
    m: int
    q: int
    d: int

    @property
    def name(self) -> str:
        return f"sim-aggregation/{self.variant}"

    def supports(self, I: CorruptionSet) -> bool:
        return I.m == self.m

    def randomness_domain(self, I: CorruptionSet) -> fn.RandomnessDomain:
        if self.variant != "masked":
            return fn.DETERMINISTIC
        clients = list(range(1, self.m))
        n = self.d * len(_corrupted_pairs(clients, I.clients)) + _free_count(I, self.d)
        return fn.RandomnessDomain.uniform(self.q, n)

    def generate(self, I: CorruptionSet, x_I, f_I, point=()) -> JointView:
        q, d, m = self.q, self.d, self.m
        clients = list(range(1, m))
        x = dict(zip(I.members, x_I))
        out = dict(zip(I.members, f_I))
        bad = I.clients

        pairs = _corrupted_pairs(clients, bad) if self.variant == "masked" else []
        n_mask = d * len(pairs)
        masks = PairwiseMaskSet.from_dict(
            {p: FieldVector(q, tuple(point[k * d:(k + 1) * d])) for k, p in enumerate(pairs)}
        )
        views, sent = {}, {}
        for c in bad:
            rnd = masks.restrict(c).payload() if self.variant == "masked" else ()
            views[c] = _open_view(c, x[c], rnd)
            if self.variant == "plain":
                views[c].append(EntryKind.MSG_OUT, x[c])
                sent[c] = x[c]
            elif self.variant == "oracle":
                views[c].append(EntryKind.ORACLE_QUERY, (0, x[c]))
                views[c].append(EntryKind.ORACLE_ANSWER, (0, out[c]))
            else:
                sent[c] = mask_update(x[c], masks.restrict(c), c, views[c])
            views[c].append(EntryKind.OUTPUT, out[c])

        if I.has_server:
            aggregate = out[m]
            server = _open_view(m, x[m])
            if self.variant == "oracle":
                server.append(EntryKind.ORACLE_QUERY, (0, x[m]))
                server.append(EntryKind.ORACLE_ANSWER, (0, aggregate))
            else:
                honest = list(I.honest_clients)
                sigma = aggregate - field_sum([sent[c] for c in bad]) if bad else aggregate
                if self.variant == "masked":
                    sent.update(_honest_masked(sigma, honest, point[n_mask:]))
                else:
                    sent.update({h: sigma if n == 0 else FieldVector.zeros(q, d) for n, h in enumerate(honest)})
                for i in clients:
                    server.append(EntryKind.MSG_IN, sent[i])
            server.append(EntryKind.OUTPUT, aggregate)
            views[m] = server
        return JointView(I.members, tuple(views[i] for i in I.members))


# -- federated learning ------------------------------------------------------------------


def label_grid_datasets(k: int, d: int, feature: Fraction, labels: Sequence[Fraction]) -> list[tuple[ClientDataset, ...]]:
    """Every assignment of one example ``(feature * ones_d, y)`` per client, y from ``labels``."""
    x = (Fraction(feature),) * d
    return [
        tuple(ClientDataset.from_pairs(i, [(x, y)]) for i, y in enumerate(ys, start=1))
        for ys in itertools.product([Fraction(y) for y in labels], repeat=k)
    ]


@dataclass(frozen=True)
class FLProtocol:
    """n rounds of FL on fixed parties; inputs are ``(D_1, ..., D_{m-1}, w_0)``."""

    variant: str
    config: RoundConfig
    rounds: int
    initial_model: tuple = field(default=None)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.initial_model is None:
            object.__setattr__(self, "initial_model", zero_model(self.config.d))
        object.__setattr__(self, "initial_model", tuple(Fraction(w) for w in self.initial_model))

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def name(self) -> str:
        return f"fl/{self.variant}/n={self.rounds}"

    def _per_round(self) -> int:
        return self.config.d * len(mask_pairs(range(1, self.m)))

    def randomness_domain(self) -> fn.RandomnessDomain:
        if self.variant != "masked":
            return fn.DETERMINISTIC
        return fn.RandomnessDomain.uniform(self.config.q, self.rounds * self._per_round())

    def masks(self, point) -> list[PairwiseMaskSet]:
        k = self._per_round()
        clients = list(range(1, self.m))
        return [
            masks_from_point(clients, self.config.q, self.config.d, point[r * k:(r + 1) * k])
            for r in range(self.rounds)
        ]

    def execute(self, inputs, point=()) -> list[PartyView]:
        masks = self.masks(point) if self.variant == "masked" else None
        views, _ = play_rounds(self.config, inputs[:-1], self.variant, self.rounds, inputs[-1], masks)
        return views

    def functionality(self) -> fn.MAryFunctionality:
        return fl_functionality(self.config, self.rounds)

    def ideal(self, inputs) -> tuple:
        """Per party, everything the functionality delivers over all rounds.

        Server: the models w_1..w_n. Client: its n acks, and the models
        w_1..w_{n-1} it receives by broadcast (w_0 is public).
        """
        per_round = fn.trace(self.functionality(), inputs)
        models = tuple(out[-1] for out in per_round)
        acks = [tuple(out[i] for out in per_round) for i in range(self.m - 1)]
        return tuple((a, models[:-1]) for a in acks) + (models,)

    def outputs(self, views) -> tuple:
        result = []
        for v in views[:-1]:
            seen = tuple(e.payload.weights for e in v.entries if e.kind == EntryKind.SYSPARAM and e.round > 0)
            result.append((_outputs_of(v), seen))
        result.append(_outputs_of(views[-1]))
        return tuple(result)

    def grid(self, feature, labels) -> list[tuple]:
        return [
            ds + (self.initial_model,)
            for ds in label_grid_datasets(self.m - 1, self.config.d, feature, labels)
        ]


@dataclass(frozen=True)
class FLSimulator:
    """Simulates corrupted views of an n-round FL run from (I, x_I, f_I).

    Each round is simulated like a single aggregation: the aggregate is read
    off consecutive server models, corrupted clients run their own code on
    fresh pads, and honest masked vectors are drawn uniformly subject to the
    honest sum. This is the round-by-round simulator the composition argument
    builds from the per-round ones.
    """

    variant: str
    config: RoundConfig
    rounds: int
    initial_model: tuple = field(default=None)

    def __post_init__(self):
        if self.initial_model is None:
            object.__setattr__(self, "initial_model", zero_model(self.config.d))
        object.__setattr__(self, "initial_model", tuple(Fraction(w) for w in self.initial_model))

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def name(self) -> str:
        return f"sim-fl/{self.variant}/n={self.rounds}"

    def supports(self, I: CorruptionSet) -> bool:
        return I.m == self.m

    def _layout(self, I: CorruptionSet):
        pairs = _corrupted_pairs(range(1, self.m), I.clients) if self.variant == "masked" else []
        free = _free_count(I, self.config.d) if self.variant == "masked" else 0
        return pairs, free

    def randomness_domain(self, I: CorruptionSet) -> fn.RandomnessDomain:
        pairs, free = self._layout(I)
        return fn.RandomnessDomain.uniform(self.config.q, self.rounds * (len(pairs) * self.config.d + free))

    def _aggregate(self, before, after) -> FieldVector:
        c = self.config
        scale = (c.m - 1) * c.s / c.learning_rate
        diff = [(w0 - w1) * scale for w0, w1 in zip(before, after)]
        if any(v.denominator != 1 for v in diff):
            raise DomainError(f"models {before} -> {after} do not come from an integer aggregate")
        return encode_centered((int(v) for v in diff), c.q)

    def generate(self, I: CorruptionSet, x_I, f_I, point=()) -> JointView:
        c, m, d, q = self.config, self.config.m, self.config.d, self.config.q
        x = dict(zip(I.members, x_I))
        out = dict(zip(I.members, f_I))
        bad = I.clients
        if I.has_server:
            models = (tuple(x[m]),) + tuple(out[m])
        else:
            models = (self.initial_model,) + tuple(out[bad[0]][1])

        pairs, free = self._layout(I)
        per = len(pairs) * d + free
        masks, spare = [], []
        for r in range(self.rounds):
            chunk = point[r * per:(r + 1) * per]
            masks.append(PairwiseMaskSet.from_dict(
                {p: FieldVector(q, tuple(chunk[k * d:(k + 1) * d])) for k, p in enumerate(pairs)}
            ))
            spare.append(chunk[len(pairs) * d:])

        parties = {
            i: ClientParty(i, x[i], tuple(mk.restrict(i).payload() for mk in masks) if self.variant == "masked" else ())
            for i in bad
        }
        server = ServerParty(m, models[0], c) if I.has_server else None
        corrupt = [parties[i] for i in bad]

        for r in range(self.rounds):
            if server is not None:
                server.broadcast(r, corrupt)
            else:
                sp = broadcast_sysparam(models[r], r, c, list(range(1, m)), {p.index: p.view for p in corrupt},
                                        recipients=list(bad))
                for p in corrupt:
                    p.sysparam = sp

            if self.variant == "oracle":
                for p in corrupt:
                    p.view.append(EntryKind.ORACLE_QUERY, (r, p.update()), r)
                    p.view.append(EntryKind.ORACLE_ANSWER, (r, ACK), r)
                if server is not None:
                    aggregate = self._aggregate(models[r], models[r + 1])
                    server.view.append(EntryKind.ORACLE_QUERY, (r, BOTTOM), r)
                    server.view.append(EntryKind.ORACLE_ANSWER, (r, aggregate), r)
            else:
                if self.variant == "plain":
                    sent = {p.index: p.send_plain() for p in corrupt}
                else:
                    sent = {p.index: p.send_masked(masks[r]) for p in corrupt}
                if server is not None:
                    aggregate = self._aggregate(models[r], models[r + 1])
                    honest = list(I.honest_clients)
                    sigma = aggregate - field_sum(list(sent.values())) if sent else aggregate
                    if self.variant == "masked":
                        sent.update(_honest_masked(sigma, honest, spare[r]))
                    else:
                        sent.update({h: sigma if n == 0 else FieldVector.zeros(q, d) for n, h in enumerate(honest)})
                    for i in range(1, m):
                        server.receive(sent[i], r)

            if server is not None:
                server.update_model(aggregate, r)
                if server.model != models[r + 1]:
                    raise DomainError(f"round {r}: server output inconsistent with its input")
            for p in corrupt:
                p.finish(r)

        views = {i: parties[i].view for i in bad}
        if server is not None:
            views[m] = server.view
        return JointView(I.members, tuple(views[i] for i in I.members))


def simulator_for(protocol):
    """The shipped simulator matching a protocol instance."""
    if isinstance(protocol, AggregationProtocol):
        return AggregationSimulator(protocol.variant, protocol.m, protocol.q, protocol.d)
    if isinstance(protocol, FLProtocol):
        return FLSimulator(protocol.variant, protocol.config, protocol.rounds, protocol.initial_model)
    raise TypeError(f"no simulator for {type(protocol).__name__}")
