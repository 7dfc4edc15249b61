"""Value types exchanged between parties: field vectors, symbols, datasets, sysparam."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, FieldOverflowError

PROGRAM_SQUARED_LOSS = "sqloss-gd1"


class Symbol(enum.Enum):
    """Distinguished non-vector values: an empty input and an acknowledgement."""

    BOTTOM = "bottom"
    ACK = "ack"

    def __repr__(self):
        return f"Symbol.{self.name}"


BOTTOM = Symbol.BOTTOM
ACK = Symbol.ACK


def is_prime(n: int) -> bool:
    """Trial division; moduli here are desk-sized."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True)
class FieldVector:
    """A vector in Z_q^d with components kept in [0, q)."""

    q: int
    components: tuple[int, ...]

    def __post_init__(self):
        if self.q < 2:
            raise DomainError(f"modulus must be >= 2, got {self.q}")
        if not self.components:
            raise DomainError("field vector must have dimension >= 1")
        comps = tuple(int(c) % self.q for c in self.components)
        object.__setattr__(self, "components", comps)

    @classmethod
    def zeros(cls, q: int, d: int) -> FieldVector:
        return cls(q, (0,) * d)

    @property
    def d(self) -> int:
        return len(self.components)

    def _check(self, other: FieldVector) -> None:
        if not isinstance(other, FieldVector):
            raise DomainError(f"expected FieldVector, got {type(other).__name__}")
        if other.q != self.q or other.d != self.d:
            raise DomainError(
                f"shape mismatch: Z_{self.q}^{self.d} vs Z_{other.q}^{other.d}"
            )

    def __add__(self, other: FieldVector) -> FieldVector:
        self._check(other)
        return FieldVector(self.q, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: FieldVector) -> FieldVector:
        self._check(other)
        return FieldVector(self.q, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> FieldVector:
        return FieldVector(self.q, tuple(-a for a in self.components))

    def __iter__(self):
        return iter(self.components)

    def __repr__(self):
        return f"FieldVector(q={self.q}, {list(self.components)})"


def fv(q: int, *components: int) -> FieldVector:
    return FieldVector(q, tuple(components))


def field_sum(vectors: Sequence[FieldVector]) -> FieldVector:
    if not vectors:
        raise DomainError("cannot sum an empty list of vectors")
    total = vectors[0]
    for v in vectors[1:]:
        total = total + v
    return total


def centered_bound(q: int) -> int:
    return (q - 1) // 2


def encode_centered(values: Iterable[int], q: int) -> FieldVector:
    """Map signed integers with |v| <= (q-1)/2 into Z_q."""
    values = tuple(values)
    bound = centered_bound(q)
    for v in values:
        if abs(v) > bound:
            raise FieldOverflowError(
                f"|{v}| exceeds centered range {bound} of Z_{q}; modulus too small for the data"
            )
    return FieldVector(q, values)


def decode_centered(vec: FieldVector) -> tuple[int, ...]:
    bound = centered_bound(vec.q)
    return tuple(c - vec.q if c > bound else c for c in vec.components)


def round_half_away(x: Fraction) -> int:
    n = abs(Fraction(x))
    r = int(n + Fraction(1, 2))  # floor for non-negative values
    return r if x >= 0 else -r


def parse_rational(text: str) -> Fraction:
    """Parse "num/den" or an integer literal; floats and exponents are rejected."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"not a rational: {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(n, d)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Example:
    features: tuple[Fraction, ...]
    label: Fraction


@dataclass(frozen=True)
class ClientDataset:
    owner: int
    examples: tuple[Example, ...]

    @property
    def size(self) -> int:
        return len(self.examples)

    @property
    def dimension(self) -> int | None:
        return len(self.examples[0].features) if self.examples else None

    @classmethod
    def from_pairs(cls, owner: int, pairs) -> ClientDataset:
        """Build from ``[(features, label), ...]`` with int/Fraction/str entries."""
        examples = []
        for features, label in pairs:
            examples.append(
                Example(tuple(Fraction(f) for f in features), Fraction(label))
            )
        return cls(owner, tuple(examples))


@dataclass(frozen=True)
class SysParam:
    weights: tuple[Fraction, ...]
    program: str
    round: int
    q: int
    s: int

    @property
    def d(self) -> int:
        return len(self.weights)
