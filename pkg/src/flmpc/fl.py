"""The federated learning round: selection, broadcast, local update, aggregation, model update.

Parties 1..m-1 are the selected clients, party m is the server. The training
program is one exact gradient step of squared loss on a linear model; client
gradients are scaled by ``s``, rounded half away from zero and sent as
centered representatives in Z_q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import functionality as fn
from .errors import (
    ConfigError,
    DomainError,
    FieldOverflowError,
    FLMPCError,
    InsufficientClientsError,
    SelectionError,
)
from .prng import fisher_yates
from .secagg import PairwiseMaskSet, derive_masks, mask_update, secure_agg_round
from .values import (
    ACK,
    BOTTOM,
    PROGRAM_SQUARED_LOSS,
    ClientDataset,
    FieldVector,
    SysParam,
    centered_bound,
    decode_centered,
    encode_centered,
    field_sum,
    is_prime,
    round_half_away,
)
from .views import EntryKind, PartyView

VARIANTS = ("plain", "oracle", "masked")
PROGRAMS = (PROGRAM_SQUARED_LOSS,)


@dataclass(frozen=True)
class RoundConfig:
    m: int
    q: int
    d: int
    learning_rate: Fraction
    s: int = 1
    program: str = PROGRAM_SQUARED_LOSS

    def __post_init__(self):
        object.__setattr__(self, "learning_rate", Fraction(self.learning_rate))
        if self.m < 2:
            raise ConfigError(f"need m >= 2 parties, got {self.m}")
        if not is_prime(self.q):
            raise ConfigError(f"modulus not prime: {self.q}")
        if self.d < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.d}")
        if self.s < 1:
            raise ConfigError(f"quantization scale must be >= 1, got {self.s}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.program not in PROGRAMS:
            raise ConfigError(f"unknown training program {self.program!r}")

    @property
    def clients(self) -> int:
        return self.m - 1


def zero_model(d: int) -> tuple[Fraction, ...]:
    return (Fraction(0),) * d


# -- step 1: client selection ------------------------------------------------------


def select_clients(pool: Sequence[ClientDataset], count: int, min_size: int = 1, seed: int = 0) -> list[int]:
    """Seeded Fisher-Yates shuffle of the eligible owners (sorted by id); take the first ``count``."""
    if not pool:
        raise InsufficientClientsError("empty client pool")
    if count < 1:
        raise ConfigError(f"must select at least one client, got {count}")
    owners = [ds.owner for ds in pool]
    if len(set(owners)) != len(owners):
        raise DomainError("duplicate client ids in pool")
    eligible = sorted(ds.owner for ds in pool if ds.size >= max(min_size, 1))
    if len(eligible) < count:
        raise InsufficientClientsError(
            f"{len(eligible)} eligible clients (min dataset size {min_size}), need {count}"
        )
    return fisher_yates(eligible, seed)[:count]


# -- step 2: broadcast -------------------------------------------------------------


def broadcast_sysparam(
    model: Sequence[Fraction],
    round_index: int,
    config: RoundConfig,
    selected: Sequence[int],
    views: Mapping[int, PartyView],
    server_view: PartyView | None = None,
    recipients: Sequence[int] | None = None,
) -> SysParam:
    """Deliver one SysParam to every recipient (default: all selected clients)."""
    recipients = list(selected if recipients is None else recipients)
    strays = [r for r in recipients if r not in selected]
    if strays:
        raise SelectionError(f"broadcast to unselected clients {strays}")
    sp = SysParam(tuple(Fraction(w) for w in model), config.program, round_index, config.q, config.s)
    if server_view is not None:
        server_view.append(EntryKind.MSG_OUT, sp, round_index)
    for r in recipients:
        if r in views:
            views[r].append(EntryKind.SYSPARAM, sp, round_index)
    return sp


# -- step 3: client computation -----------------------------------------------------


def exact_gradient(dataset: ClientDataset, weights: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """sum_k 2 (w . x_k - y_k) x_k in exact rationals."""
    d = len(weights)
    grad = [Fraction(0)] * d
    for ex in dataset.examples:
        if len(ex.features) != d:
            raise DomainError(f"client {dataset.owner}: example of dimension {len(ex.features)}, model has {d}")
        residual = 2 * (sum(w * x for w, x in zip(weights, ex.features)) - ex.label)
        for c in range(d):
            grad[c] += residual * ex.features[c]
    return tuple(grad)


def quantize(gradient: Sequence[Fraction], s: int) -> tuple[int, ...]:
    return tuple(round_half_away(g * s) for g in gradient)


def client_update(dataset: ClientDataset, sysparam: SysParam, view: PartyView | None = None) -> FieldVector:
    if dataset.dimension != sysparam.d:
        raise DomainError(f"client {dataset.owner}: data dimension {dataset.dimension} != model dimension {sysparam.d}")
    update = encode_centered(quantize(exact_gradient(dataset, sysparam.weights), sysparam.s), sysparam.q)
    if view is not None:
        view.append(EntryKind.MSG_OUT, update, sysparam.round)
    return update


# -- step 4: aggregation -----------------------------------------------------------


def aggregate_plain(updates: Sequence[FieldVector], view: PartyView | None = None, round: int = 0) -> FieldVector:
    if not updates:
        raise DomainError("no updates to aggregate")
    first = updates[0]
    for u in updates:
        if u.q != first.q or u.d != first.d:
            raise DomainError(f"mixed update shapes: Z_{first.q}^{first.d} vs Z_{u.q}^{u.d}")
    if view is not None:
        for u in updates:
            view.append(EntryKind.MSG_IN, u, round)
    return field_sum(list(updates))


# -- step 5: model update ------------------------------------------------------------


def model_update(
    model: Sequence[Fraction],
    aggregate: FieldVector,
    count: int,
    learning_rate: Fraction,
    s: int,
    q: int,
    view: PartyView | None = None,
    round: int = 0,
) -> tuple[Fraction, ...]:
    """w' = w - lr * (decode(aggregate) / s) / count."""
    if aggregate.q != q or aggregate.d != len(model):
        raise DomainError(f"aggregate in Z_{aggregate.q}^{aggregate.d}, expected Z_{q}^{len(model)}")
    if count < 1:
        raise DomainError("client count must be positive")
    step = Fraction(learning_rate) / (s * count)
    new = tuple(Fraction(w) - step * g for w, g in zip(model, decode_centered(aggregate)))
    if view is not None:
        view.append(EntryKind.OUTPUT, new, round)
    return new


# -- the per-round functionality ---------------------------------------------------------


def ideal_round_model(config: RoundConfig, datasets: Sequence[ClientDataset], model: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """The server's round output computed over the integers, no field arithmetic.

    Raises FieldOverflowError where the protocol's centered encoding would not
    represent a client update or the aggregate.
    """
    bound = centered_bound(config.q)
    total = [0] * config.d
    for ds in datasets:
        if ds.dimension != config.d:
            raise DomainError(f"client {ds.owner}: data dimension {ds.dimension} != {config.d}")
        qg = quantize(exact_gradient(ds, model), config.s)
        if any(abs(v) > bound for v in qg):
            raise FieldOverflowError(f"client {ds.owner}: quantized update {qg} exceeds {bound}")
        total = [a + b for a, b in zip(total, qg)]
    if any(abs(v) > bound for v in total):
        raise FieldOverflowError(f"aggregate {tuple(total)} exceeds centered range {bound}")
    step = config.learning_rate / (config.s * len(datasets))
    return tuple(Fraction(w) - step * g for w, g in zip(model, total))


def round_functionality(config: RoundConfig, round_index: int = 0) -> fn.MAryFunctionality:
    """Ideal round: clients hold datasets, the server the model; server gets the new model, clients an ack."""
    if not isinstance(config, RoundConfig):
        raise ConfigError(f"expected RoundConfig, got {type(config).__name__}")
    m = config.m

    def rule(inputs, randomness):
        return (ACK,) * (m - 1) + (ideal_round_model(config, inputs[:-1], inputs[-1]),)

    return fn.MAryFunctionality(
        name=f"f{round_index + 1}",
        arity=m,
        input_domains=(fn.DatasetDomain(config.d),) * (m - 1) + (fn.ModelDomain(config.d),),
        rule=rule,
        params=(("round", round_index), ("q", config.q), ("s", config.s), ("lr", config.learning_rate)),
    )


def fl_functionality(config: RoundConfig, rounds: int) -> fn.MAryFunctionality:
    """f_FL = f_n o ... o f_1 with the server's model threaded between rounds."""
    if rounds < 1:
        raise ConfigError(f"need at least one round, got {rounds}")
    plan = fn.CompositionPlan(
        tuple(round_functionality(config, j) for j in range(rounds)), fn.thread_server_output
    )
    return fn.compose(plan)


# -- party state machines ----------------------------------------------------------------


class ClientParty:
    def __init__(self, index: int, dataset: ClientDataset, randomness: tuple = ()):
        self.index = index
        self.dataset = dataset
        self.view = PartyView(index)
        self.view.append(EntryKind.INPUT, dataset, 0)
        self.view.append(EntryKind.RANDOMNESS, randomness, 0)
        self.sysparam: SysParam | None = None

    def update(self) -> FieldVector:
        return client_update(self.dataset, self.sysparam)

    def send_plain(self) -> FieldVector:
        return client_update(self.dataset, self.sysparam, self.view)

    def send_masked(self, masks: PairwiseMaskSet) -> FieldVector:
        return mask_update(self.update(), masks.restrict(self.index), self.index, self.view, self.sysparam.round)

    def finish(self, round_index: int) -> None:
        self.view.append(EntryKind.OUTPUT, ACK, round_index)


class ServerParty:
    def __init__(self, m: int, model: Sequence[Fraction], config: RoundConfig):
        self.m = m
        self.config = config
        self.model = tuple(Fraction(w) for w in model)
        self.view = PartyView(m)
        self.view.append(EntryKind.INPUT, self.model, 0)
        self.view.append(EntryKind.RANDOMNESS, (), 0)

    def broadcast(self, round_index: int, clients: Sequence[ClientParty]) -> SysParam:
        """Send sysparam to ``clients``; the server records one send regardless of recipients."""
        selected = list(range(1, self.m))
        views = {c.index: c.view for c in clients}
        sp = broadcast_sysparam(self.model, round_index, self.config, selected, views, self.view,
                                recipients=[c.index for c in clients])
        for c in clients:
            c.sysparam = sp
        return sp

    def receive(self, update: FieldVector, round_index: int) -> None:
        self.view.append(EntryKind.MSG_IN, update, round_index)

    def update_model(self, aggregate: FieldVector, round_index: int) -> tuple[Fraction, ...]:
        c = self.config
        self.model = model_update(self.model, aggregate, self.m - 1, c.learning_rate, c.s, c.q,
                                  self.view, round_index)
        return self.model


def client_randomness(masks_by_round: Sequence[PairwiseMaskSet] | None, index: int) -> tuple:
    """Client randomness entry: per round, the pads it shares, as ``(i, j, pad)`` triples."""
    if masks_by_round is None:
        return ()
    return tuple(m.restrict(index).payload() for m in masks_by_round)


# -- the protocol ---------------------------------------------------------------------------


@dataclass
class FLRun:
    model: tuple[Fraction, ...]
    views: list[PartyView]
    selected: list[int]
    models: list[tuple[Fraction, ...]] = field(default_factory=list)

    @property
    def server_view(self) -> PartyView:
        return self.views[-1]


def play_rounds(
    config: RoundConfig,
    datasets: Sequence[ClientDataset],
    variant: str,
    rounds: int,
    initial_model: Sequence[Fraction],
    masks: Sequence[PairwiseMaskSet] | None = None,
) -> tuple[list[PartyView], list[tuple[Fraction, ...]]]:
    """Run ``rounds`` rounds on already-selected datasets (party i holds ``datasets[i-1]``)."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown protocol variant {variant!r}")
    m = config.m
    if len(datasets) != m - 1:
        raise DomainError(f"{len(datasets)} datasets for {m - 1} clients")
    if len(initial_model) != config.d:
        raise DomainError(f"initial model has dimension {len(initial_model)}, expected {config.d}")
    if variant == "masked":
        if masks is None or len(masks) != rounds:
            raise DomainError("masked variant needs one mask set per round")
    else:
        masks = None

    clients = [ClientParty(i, ds, client_randomness(masks, i)) for i, ds in enumerate(datasets, start=1)]
    server = ServerParty(m, initial_model, config)
    views = [c.view for c in clients] + [server.view]
    models = [server.model]
    binding = None
    if variant == "oracle":
        binding = fn.OracleBinding("fl-oracle", fn.sum_to_server(m, config.q, config.d),
                                   {i: v for i, v in enumerate(views, start=1)})
    try:
        for r in range(rounds):
            server.broadcast(r, clients)
            if variant == "plain":
                updates = [c.send_plain() for c in clients]
                aggregate = aggregate_plain(updates, server.view, r)
            elif variant == "oracle":
                updates = [c.update() for c in clients]
                answers = fn.oracle_call(binding, updates + [BOTTOM], (), r)
                aggregate = answers[-1]
            else:
                updates = [c.update() for c in clients]
                aggregate, _ = secure_agg_round(updates, masks[r], views, r)
            models.append(server.update_model(aggregate, r))
            for c in clients:
                c.finish(r)
    except FLMPCError as exc:
        exc.views = views
        raise
    return views, models


def run_fl(
    config: RoundConfig,
    datasets: Sequence[ClientDataset],
    variant: str,
    rounds: int,
    *,
    initial_model: Sequence[Fraction] | None = None,
    seed: int = 0,
    eligibility: int = 1,
    masks: Sequence[PairwiseMaskSet] | None = None,
) -> FLRun:
    """Select m-1 clients from ``datasets`` once, then run ``rounds`` rounds.

    Masked runs take pads from ``masks`` when given, else derive them from ``seed``.
    """
    if rounds < 1:
        raise ConfigError(f"need at least one round, got {rounds}")
    selected = select_clients(datasets, config.m - 1, eligibility, seed)
    by_owner = {ds.owner: ds for ds in datasets}
    chosen = [by_owner[o] for o in selected]
    if initial_model is None:
        initial_model = zero_model(config.d)
    if variant == "masked" and masks is None:
        clients = range(1, config.m)
        masks = [derive_masks(seed, r, clients, config.q, config.d) for r in range(rounds)]
    views, models = play_rounds(config, chosen, variant, rounds, initial_model, masks)
    return FLRun(models[-1], views, selected, models)
