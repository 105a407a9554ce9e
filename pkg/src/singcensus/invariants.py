"""Closed-form singularity counts for generic polynomial maps C^3 -> C^3.

All arithmetic is on Python integers (arbitrary precision).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations
from math import gcd
from typing import Iterable


class InvariantError(ArithmeticError):
    """An internal consistency check of the count formulas failed."""


@dataclass(frozen=True)
class DegreeTriple:
    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        for d in (self.d1, self.d2, self.d3):
            if not isinstance(d, int) or isinstance(d, bool) or d < 1:
                raise ValueError(f"degrees must be positive integers, got {self.as_tuple()}")

    @classmethod
    def of(cls, degrees: Iterable[int]) -> DegreeTriple:
        d = tuple(int(v) for v in degrees)
        if len(d) != 3:
            raise ValueError(f"need exactly three degrees, got {len(d)}")
        return cls(*d)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.d3)


@dataclass(frozen=True)
class InvariantTable:
    d1: int
    d2: int
    d3: int
    s1: int
    s2: int
    s3: int
    P: int
    c1: int
    c2: int
    c3: int
    countA2: int
    countA1sq: int
    countA3: int
    countA2A1: int
    countA1cube: int | None
    A1cube_bracket: int
    admissible: bool
    blocking_reason: str | None

    def counts(self) -> dict[str, int | None]:
        return {
            "A3": self.countA3,
            "A2A1": self.countA2A1,
            "A1cube": self.countA1cube,
            "A2": self.countA2,
            "A1sq": self.countA1sq,
        }

    def to_json_obj(self) -> dict:
        return asdict(self)


def determinacy_gate(d: DegreeTriple | Iterable[int]) -> tuple[bool, str]:
    """Pairwise gcds at most 2 and triple gcd 1, else the offending condition."""
    d = d if isinstance(d, DegreeTriple) else DegreeTriple.of(d)
    t = d.as_tuple()
    for i, j in combinations(range(3), 2):
        g = gcd(t[i], t[j])
        if g > 2:
            return False, f"gcd(d{i + 1},d{j + 1})={g}>2"
    g3 = gcd(gcd(t[0], t[1]), t[2])
    if g3 > 1:
        return False, f"gcd(d1,d2,d3)={g3}>1"
    return True, "pairwise gcds <= 2 and gcd(d1,d2,d3)=1"


def triple_point_bracket(P: int, s1: int, a2: int, a1sq: int, a3: int, a2a1: int) -> int:
    """Six times the number of triple fold points."""
    return (P * P - 3 * P + 2) * s1**3 - 6 * a2a1 - 6 * a3 - 3 * s1 * a1sq - 4 * s1 * a2


def compute_invariants(d: DegreeTriple | Iterable[int]) -> InvariantTable:
    d = d if isinstance(d, DegreeTriple) else DegreeTriple.of(d)
    d1, d2, d3 = d.as_tuple()
    e1, e2, e3 = d1 - 1, d2 - 1, d3 - 1
    s1 = d1 + d2 + d3 - 3
    s2 = e1 * e2 + e1 * e3 + e2 * e3
    s3 = e1 * e2 * e3
    P = d1 * d2 * d3
    c1, c2, c3 = s1, s2 - s1, s3 - 2 * s2 + s1
    a2 = c1 * c1 + c2
    a1sq = (P - 2) * s1 * s1 - 2 * a2
    a3 = c1**3 + 3 * c1 * c2 + 2 * c3
    a2a1 = (P - 3) * s1 * a2 - 3 * a3
    bracket = triple_point_bracket(P, s1, a2, a1sq, a3, a2a1)
    admissible, reason = determinacy_gate(d)
    if bracket % 6 and admissible:
        raise InvariantError(f"triple-point bracket {bracket} for {d.as_tuple()} is not divisible by 6")
    table = InvariantTable(
        d1, d2, d3, s1, s2, s3, P, c1, c2, c3,
        countA2=a2,
        countA1sq=a1sq,
        countA3=a3,
        countA2A1=a2a1,
        # outside the gate the bracket need not be a multiple of 6; no count is claimed then
        countA1cube=None if bracket % 6 else bracket // 6,
        A1cube_bracket=bracket,
        admissible=admissible,
        blocking_reason=None if admissible else reason,
    )
    if admissible:
        negative = [k for k, v in table.counts().items() if v is not None and v < 0]
        if negative:
            raise InvariantError(f"negative counts {negative} for admissible degrees {d.as_tuple()}")
    return table
