"""m-ary functionalities, their composition, and oracle calls.

A functionality maps m party inputs plus one explicit randomness point to m
outputs. Randomness is never drawn inside: it is an element of a finite
product domain that callers enumerate or pick.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .errors import (
    ArityError,
    ConfigError,
    DomainError,
    IncompleteCallError,
    TapeViolationError,
    ThreadingError,
)
from .values import ACK, BOTTOM, ClientDataset, FieldVector, Symbol, field_sum
from .views import EntryKind, PartyView


# -- domains -----------------------------------------------------------------


@dataclass(frozen=True)
class FieldDomain:
    q: int
    d: int

    def __contains__(self, value) -> bool:
        return isinstance(value, FieldVector) and value.q == self.q and value.d == self.d


@dataclass(frozen=True)
class SymbolDomain:
    symbols: frozenset = frozenset({BOTTOM})

    def __contains__(self, value) -> bool:
        return isinstance(value, Symbol) and value in self.symbols


@dataclass(frozen=True)
class ModelDomain:
    """Rational weight vectors of dimension d."""

    d: int

    def __contains__(self, value) -> bool:
        return (
            isinstance(value, tuple)
            and len(value) == self.d
            and all(isinstance(w, Fraction) for w in value)
        )


@dataclass(frozen=True)
class DatasetDomain:
    d: int

    def __contains__(self, value) -> bool:
        return (
            isinstance(value, ClientDataset)
            and value.size > 0
            and all(len(ex.features) == self.d for ex in value.examples)
        )


@dataclass(frozen=True)
class AnyDomain:
    def __contains__(self, value) -> bool:
        return True


@dataclass(frozen=True)
class RandomnessDomain:
    """Finite product of factor sets, enumerated lexicographically.

    The empty product has exactly one point, ``()``.
    """

    factors: tuple[tuple, ...] = ()

    @classmethod
    def uniform(cls, q: int, count: int) -> RandomnessDomain:
        return cls((tuple(range(q)),) * count)

    @property
    def size(self) -> int:
        return math.prod(len(f) for f in self.factors)

    def points(self, start: int = 0, stop: int | None = None):
        return itertools.islice(itertools.product(*self.factors), start, stop)

    def __contains__(self, point) -> bool:
        return (
            isinstance(point, tuple)
            and len(point) == len(self.factors)
            and all(p in f for p, f in zip(point, self.factors))
        )

    def __mul__(self, other: RandomnessDomain) -> RandomnessDomain:
        return RandomnessDomain(self.factors + other.factors)


DETERMINISTIC = RandomnessDomain()


# -- functionalities -----------------------------------------------------------


@dataclass(frozen=True)
class MAryFunctionality:
    name: str
    arity: int
    input_domains: tuple
    rule: Callable[[tuple, tuple], tuple] = field(compare=False)
    randomness: RandomnessDomain = DETERMINISTIC
    params: tuple = ()
    # Set by compose(): (rounds, threading rule).
    stages: tuple = ()

    def __post_init__(self):
        if self.arity < 2:
            raise ArityError(f"arity must be >= 2, got {self.arity}")
        if len(self.input_domains) != self.arity:
            raise ArityError(
                f"{self.name}: {len(self.input_domains)} input domains for arity {self.arity}"
            )


def _check_inputs(f: MAryFunctionality, inputs: Sequence, randomness: tuple) -> None:
    if len(inputs) != f.arity:
        raise ArityError(f"{f.name} expects {f.arity} inputs, got {len(inputs)}")
    for i, (x, dom) in enumerate(zip(inputs, f.input_domains), start=1):
        if x not in dom:
            raise DomainError(f"{f.name}: input of party {i} not in {dom}: {x!r}")
    if randomness not in f.randomness:
        raise DomainError(f"{f.name}: randomness {randomness!r} outside its domain")


def evaluate_functionality(f: MAryFunctionality, inputs: Sequence, randomness: tuple = ()) -> tuple:
    """Return ``(out_1, ..., out_m)``; pure in ``(inputs, randomness)``."""
    inputs = tuple(inputs)
    _check_inputs(f, inputs, randomness)
    outputs = tuple(f.rule(inputs, randomness))
    if len(outputs) != f.arity:
        raise ArityError(f"{f.name} produced {len(outputs)} outputs, expected {f.arity}")
    return outputs


# -- composition ----------------------------------------------------------------


def thread_server_output(inputs: tuple, outputs: tuple) -> tuple:
    """Clients keep their inputs; the server's output becomes its next input."""
    return inputs[:-1] + (outputs[-1],)


def thread_all_outputs(inputs: tuple, outputs: tuple) -> tuple:
    return tuple(outputs)


@dataclass(frozen=True)
class CompositionPlan:
    rounds: tuple
    threading: Callable[[tuple, tuple], tuple] = thread_server_output

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        if not self.rounds:
            raise ConfigError("composition needs at least one round")


def _split(point: tuple, rounds) -> list[tuple]:
    parts, pos = [], 0
    for f in rounds:
        k = len(f.randomness.factors)
        parts.append(point[pos:pos + k])
        pos += k
    return parts


def _run_rounds(rounds, threading, inputs, randomness, record=None):
    x = inputs
    out = None
    for k, (f, r) in enumerate(zip(rounds, _split(randomness, rounds))):
        if k > 0:
            x = tuple(threading(x, out))
            if len(x) != f.arity:
                raise ThreadingError(f"threading produced {len(x)} inputs for {f.name}")
            for i, (v, dom) in enumerate(zip(x, f.input_domains), start=1):
                if v not in dom:
                    raise ThreadingError(
                        f"round {k + 1} ({f.name}): threaded input of party {i} not in {dom}"
                    )
        if record is not None and f.stages:
            out = _run_rounds(*f.stages, x, r, record)
        else:
            out = evaluate_functionality(f, x, r)
            if record is not None:
                record.append(out)
    return out


def compose(plan: CompositionPlan) -> MAryFunctionality:
    """Compose rounds f_1..f_n into f_n o ... o f_1 (round 1 applied first)."""
    rounds = plan.rounds
    arities = {f.arity for f in rounds}
    if len(arities) != 1:
        raise ArityError(f"mixed arities in composition: {sorted(arities)}")
    randomness = RandomnessDomain()
    for f in rounds:
        randomness = randomness * f.randomness

    def rule(inputs, point):
        return _run_rounds(rounds, plan.threading, inputs, point)

    return MAryFunctionality(
        name="(" + " o ".join(f.name for f in reversed(rounds)) + ")",
        arity=rounds[0].arity,
        input_domains=rounds[0].input_domains,
        rule=rule,
        randomness=randomness,
        params=(("rounds", len(rounds)),),
        stages=(rounds, plan.threading),
    )


def trace(f: MAryFunctionality, inputs: Sequence, randomness: tuple = ()) -> list[tuple]:
    """Per-round outputs of a composed functionality, nested compositions flattened."""
    inputs = tuple(inputs)
    _check_inputs(f, inputs, randomness)
    if not f.stages:
        return [evaluate_functionality(f, inputs, randomness)]
    record: list[tuple] = []
    _run_rounds(*f.stages, inputs, randomness, record)
    return record


# -- stock functionalities ---------------------------------------------------------


def identity_functionality(m: int, domain=AnyDomain()) -> MAryFunctionality:
    return MAryFunctionality(
        name="id", arity=m, input_domains=(domain,) * m, rule=lambda x, r: tuple(x)
    )


def sum_to_server(m: int, q: int, d: int, accumulate: bool = False) -> MAryFunctionality:
    """Clients hold vectors in Z_q^d; the server learns their sum, clients an ack.

    With ``accumulate`` the server's input is a running vector that the sum is
    added to, so the functionality can be threaded across rounds.
    """
    server_dom = FieldDomain(q, d) if accumulate else SymbolDomain()

    def rule(x, r):
        total = field_sum(x[:-1])
        if accumulate:
            total = x[-1] + total
        return (ACK,) * (m - 1) + (total,)

    return MAryFunctionality(
        name="sum+" if accumulate else "sum",
        arity=m,
        input_domains=(FieldDomain(q, d),) * (m - 1) + (server_dom,),
        rule=rule,
        params=(("q", q), ("d", d)),
    )


def padded_sum_to_server(m: int, q: int, d: int) -> MAryFunctionality:
    """Like sum_to_server, but the server's output is shifted by a uniform pad."""

    def rule(x, r):
        pad = FieldVector(q, r)
        return (ACK,) * (m - 1) + (field_sum(x[:-1]) + pad,)

    return MAryFunctionality(
        name="padded-sum",
        arity=m,
        input_domains=(FieldDomain(q, d),) * (m - 1) + (SymbolDomain(),),
        rule=rule,
        randomness=RandomnessDomain.uniform(q, d),
        params=(("q", q), ("d", d)),
    )


# -- oracle calls ----------------------------------------------------------------


class AnswerTape:
    """Read-only to its party: the oracle writes each call's answer exactly once."""

    def __init__(self):
        self._answers: dict[int, Any] = {}

    def write(self, call: int, answer) -> None:
        if call in self._answers:
            raise TapeViolationError(f"answer for call {call} already written")
        self._answers[call] = answer

    @property
    def answers(self) -> tuple:
        return tuple(self._answers[k] for k in sorted(self._answers))

    def __len__(self):
        return len(self._answers)


class OracleBinding:
    """Outer protocol ``outer`` with oracle access to the functionality ``oracle``.

    ``views`` maps party index (1-based) to that party's view; parties without
    a view still take part in calls, their entries are just not recorded.
    """

    def __init__(self, outer: str, oracle: MAryFunctionality, views=None):
        self.outer = outer
        self.oracle = oracle
        self.views: dict[int, PartyView] = dict(views or {})
        m = oracle.arity
        self.query_tapes: list[list] = [[] for _ in range(m)]
        self.answer_tapes = [AnswerTape() for _ in range(m)]
        self.calls = 0
        self._pending: dict[int, Any] = {}

    @property
    def arity(self) -> int:
        return self.oracle.arity

    def submit(self, party: int, query) -> None:
        if not 1 <= party <= self.arity:
            raise ArityError(f"party {party} outside 1..{self.arity}")
        if party in self._pending:
            raise TapeViolationError(f"party {party} already queried call {self.calls}")
        self._pending[party] = query
        self.query_tapes[party - 1].append(query)

    def invoke(self, randomness: tuple = (), round: int = 0) -> tuple:
        missing = [i for i in range(1, self.arity + 1) if i not in self._pending]
        if missing:
            raise IncompleteCallError(f"call {self.calls}: no query from parties {missing}")
        queries = tuple(self._pending[i] for i in range(1, self.arity + 1))
        answers = evaluate_functionality(self.oracle, queries, randomness)
        call = self.calls
        for i in range(1, self.arity + 1):
            if i in self.views:
                self.views[i].append(EntryKind.ORACLE_QUERY, (call, queries[i - 1]), round)
        for i in range(1, self.arity + 1):
            self.answer_tapes[i - 1].write(call, answers[i - 1])
            if i in self.views:
                self.views[i].append(EntryKind.ORACLE_ANSWER, (call, answers[i - 1]), round)
        self._pending = {}
        self.calls += 1
        return answers


def oracle_call(binding: OracleBinding, queries: Sequence, randomness: tuple = (), round: int = 0) -> tuple:
    """Submit one query per party (``None`` marks a missing one) and invoke the oracle."""
    if len(queries) > binding.arity:
        raise ArityError(f"{len(queries)} queries for arity {binding.arity}")
    for i, q in enumerate(queries, start=1):
        if q is not None:
            binding.submit(i, q)
    return binding.invoke(randomness, round)
