"""Exact view distributions, total-variation distance and the privacy checks.

Computational indistinguishability is replaced by exact comparison: the
protocol's randomness domain and the simulator's randomness domain are both
enumerated in full, each point weighted uniformly, and the resulting
distributions over canonically serialized joint views are compared with
exact rational total-variation distance.

A *protocol* here is any object with

    m                               party count
    name                            short label
    randomness_domain()             RandomnessDomain of the real execution
    execute(inputs, point)          list of m PartyView
    ideal(inputs)                   tuple of m ideal outputs
    outputs(views)                  the parties' outputs read off their views

and a *simulator* any object with

    name
    supports(I)                     bool
    randomness_domain(I)            RandomnessDomain
    generate(I, x_I, f_I, point)    JointView
"""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..canonical import encode
from ..errors import BudgetError, DomainError, UnsupportedCorruptionError
from ..views import JointView, PartyView

DEFAULT_BUDGET = 10**7
MODES = ("det", "general")


@dataclass(frozen=True)
class CorruptionSet:
    """Statically corrupted parties; party ``m`` is the server."""

    members: tuple[int, ...]
    m: int

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        object.__setattr__(self, "members", members)
        if not members:
            raise DomainError("corruption set must be non-empty")
        if members[0] < 1 or members[-1] > self.m:
            raise DomainError(f"corruption set {members} outside parties 1..{self.m}")
        if len(members) > self.m - 1:
            raise DomainError("at least one party must stay honest")

    @classmethod
    def parse(cls, text: str, m: int) -> CorruptionSet:
        """``"server"``, ``"clients"``, or a comma list mixing both with indices."""
        members: set[int] = set()
        for tok in text.split(","):
            tok = tok.strip()
            if tok == "server":
                members.add(m)
            elif tok == "clients":
                members.update(range(1, m))
            elif tok.isdigit():
                members.add(int(tok))
            else:
                raise DomainError(f"bad corruption set token {tok!r}")
        return cls(tuple(members), m)

    @property
    def has_server(self) -> bool:
        return self.m in self.members

    @property
    def clients(self) -> tuple[int, ...]:
        return tuple(i for i in self.members if i != self.m)

    @property
    def honest_clients(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.m) if i not in self.members)

    def label(self) -> str:
        return "{" + ",".join("S" if i == self.m else str(i) for i in self.members) + "}"


def _as_set(I, m: int) -> CorruptionSet:
    if isinstance(I, CorruptionSet):
        if I.m != m:
            raise DomainError(f"corruption set for m={I.m} used with m={m}")
        return I
    return CorruptionSet(tuple(I), m)


def project_views(views: Sequence[PartyView], I) -> JointView:
    """(I, View_i1, ..., View_it), ascending; the source views are not touched."""
    m = len(views)
    if isinstance(I, CorruptionSet):
        members = I.members
    else:
        members = tuple(sorted(set(I)))
    for i in members:
        if not 1 <= i <= m:
            raise DomainError(f"party {i} outside 1..{m}")
    return JointView(members, tuple(views[i - 1] for i in members))


def restrict(values: Sequence, I: CorruptionSet) -> tuple:
    """The subsequence of a per-party tuple belonging to I."""
    return tuple(values[i - 1] for i in I.members)


# -- distributions -----------------------------------------------------------------


@dataclass
class ViewDistribution:
    atoms: dict[str, Fraction]
    provenance: str
    domain_size: int

    @classmethod
    def from_counts(cls, counts: Counter, provenance: str, domain_size: int) -> ViewDistribution:
        return cls({k: Fraction(c, domain_size) for k, c in counts.items()}, provenance, domain_size)

    def total(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))

    def __len__(self):
        return len(self.atoms)

    def probability(self, key: str) -> Fraction:
        return self.atoms.get(key, Fraction(0))


def tv_distance(p: ViewDistribution, q: ViewDistribution) -> Fraction:
    support = set(p.atoms) | set(q.atoms)
    return sum((abs(p.probability(k) - q.probability(k)) for k in support), Fraction(0)) / 2


def view_key(joint: JointView, general: tuple | None) -> str:
    return encode(joint) if general is None else encode((joint, general))


def _chunks(size: int, workers: int) -> list[tuple[int, int]]:
    step = -(-size // workers)
    return [(a, min(a + step, size)) for a in range(0, size, step)]


def _real_chunk(protocol, inputs, I, general, start, stop) -> Counter:
    counts: Counter = Counter()
    for point in protocol.randomness_domain().points(start, stop):
        views = protocol.execute(inputs, point)
        extra = protocol.outputs(views) if general else None
        counts[view_key(project_views(views, I), extra)] += 1
    return counts


def _sim_chunk(sim, I, x_I, f_I, f_all, start, stop) -> Counter:
    counts: Counter = Counter()
    for point in sim.randomness_domain(I).points(start, stop):
        counts[view_key(sim.generate(I, x_I, f_I, point), f_all)] += 1
    return counts


def _gather(task, args, size: int, workers: int) -> Counter:
    """Run ``task`` over disjoint index ranges and merge; merge order is irrelevant."""
    if workers <= 1 or size < 2:
        return task(*args, 0, size)
    total: Counter = Counter()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, *args, a, b) for a, b in _chunks(size, workers)]
        for fut in futures:
            total.update(fut.result())
    return total


def _check_budget(size: int, budget: int, what: str) -> None:
    if size > budget:
        raise BudgetError(f"{what}: {size} randomness points exceed budget {budget}; shrink q, d or m")


def enumerate_real_distribution(protocol, inputs, I, *, mode: str = "det", budget: int = DEFAULT_BUDGET, workers: int = 1) -> ViewDistribution:
    I = _as_set(I, protocol.m)
    size = protocol.randomness_domain().size
    _check_budget(size, budget, protocol.name)
    counts = _gather(_real_chunk, (protocol, tuple(inputs), I, mode == "general"), size, workers)
    return ViewDistribution.from_counts(counts, "real", size)


def simulate_distribution(sim, I, x_I, f_I, f_all=None, *, budget: int = DEFAULT_BUDGET, workers: int = 1) -> ViewDistribution:
    """Distribution of S(I, x_I, f_I) -- or with f(x) appended, general case -- over all simulator coins."""
    if not sim.supports(I):
        raise UnsupportedCorruptionError(f"{sim.name} does not support I={I.label()}")
    size = sim.randomness_domain(I).size
    _check_budget(size, budget, sim.name)
    counts = _gather(_sim_chunk, (sim, I, tuple(x_I), tuple(f_I), f_all), size, workers)
    return ViewDistribution.from_counts(counts, "simulated", size)


# -- the checks ------------------------------------------------------------------------


@dataclass(frozen=True)
class PrivacyRecord:
    inputs: tuple
    corrupted: CorruptionSet
    distance: Fraction

    @property
    def passed(self) -> bool:
        return self.distance == 0


@dataclass(frozen=True)
class Witness:
    """Two inputs the simulator cannot tell apart whose real views differ."""

    corrupted: CorruptionSet
    first: tuple
    second: tuple
    distance: Fraction


@dataclass
class PrivacyReport:
    protocol: str
    simulator: str
    mode: str
    records: list[PrivacyRecord] = field(default_factory=list)
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records) and not self.witnesses

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def max_distance(self) -> Fraction:
        return max((r.distance for r in self.records), default=Fraction(0))


def check_private_computation(
    protocol,
    simulator,
    grid: Sequence[tuple],
    corruption_sets: Sequence,
    mode: str = "det",
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> PrivacyReport:
    """Compare real and simulated view distributions for every grid input and every I.

    Besides the simulator comparison, inputs that hand the simulator identical
    arguments ``(I, x_I, f_I[, f(x)])`` are compared with each other: if their
    real distributions differ, no simulator of any kind can match both, and
    the pair is reported as a witness.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    sets = [_as_set(I, protocol.m) for I in corruption_sets]
    for I in sets:
        if not simulator.supports(I):
            raise UnsupportedCorruptionError(f"{simulator.name} does not support I={I.label()}")
    grid = [tuple(x) for x in grid]
    work = len(grid) * sum(protocol.randomness_domain().size + simulator.randomness_domain(I).size for I in sets)
    _check_budget(work, budget, f"grid of {len(grid)} inputs")

    general = mode == "general"
    report = PrivacyReport(protocol.name, simulator.name, mode)
    for I in sets:
        groups: dict[str, list[tuple[tuple, ViewDistribution]]] = {}
        for x in grid:
            f = protocol.ideal(x)
            x_I, f_I = restrict(x, I), restrict(f, I)
            f_all = f if general else None
            real = enumerate_real_distribution(protocol, x, I, mode=mode, budget=budget, workers=workers)
            sim = simulate_distribution(simulator, I, x_I, f_I, f_all, budget=budget, workers=workers)
            report.records.append(PrivacyRecord(x, I, tv_distance(real, sim)))
            groups.setdefault(encode((x_I, f_I, f_all or ())), []).append((x, real))
        for members in groups.values():
            for (xa, pa), (xb, pb) in itertools.combinations(members, 2):
                dist = tv_distance(pa, pb)
                if dist > 0:
                    report.witnesses.append(Witness(I, xa, xb, dist))
    return report
