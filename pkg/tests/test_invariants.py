import itertools
import time

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from singcensus.invariants import (
    DegreeTriple,
    compute_invariants,
    determinacy_gate,
    triple_point_bracket,
)

# independent oracle: the formulas as symbolic polynomials in d1, d2, d3 with an exact 1/6
d1, d2, d3 = sp.symbols("d1 d2 d3", integer=True, positive=True)
_e = (d1 - 1, d2 - 1, d3 - 1)
_s1 = d1 + d2 + d3 - 3
_s2 = _e[0] * _e[1] + _e[0] * _e[2] + _e[1] * _e[2]
_s3 = _e[0] * _e[1] * _e[2]
_P = d1 * d2 * d3
_c1, _c2, _c3 = _s1, _s2 - _s1, _s3 - 2 * _s2 + _s1
_A2 = sp.expand(_c1**2 + _c2)
_A1sq = sp.expand((_P - 2) * _s1**2 - 2 * _A2)
_A3 = sp.expand(_c1**3 + 3 * _c1 * _c2 + 2 * _c3)
_A2A1 = sp.expand((_P - 3) * _s1 * _A2 - 3 * _A3)
_A1cube = sp.expand(
    sp.Rational(1, 6) * ((_P**2 - 3 * _P + 2) * _s1**3 - 6 * _A2A1 - 6 * _A3 - 3 * _s1 * _A1sq - 4 * _s1 * _A2)
)
ORACLE = {"A2": _A2, "A1sq": _A1sq, "A3": _A3, "A2A1": _A2A1, "A1cube": _A1cube}


def oracle(d):
    sub = dict(zip((d1, d2, d3), d))
    return {k: sp.Rational(v.subs(sub)) for k, v in ORACLE.items()}


@pytest.mark.parametrize(
    "d, expected",
    [
        ((1, 1, 1), (0, 0, 0, 0, 0)),
        ((2, 2, 3), (17, 126, 68, 408, 400)),
        ((1, 2, 3), (8, 20, 16, 24, 4)),
        ((1, 2, 2), (3, 2, 2, 0, 0)),
    ],
)
def test_table_examples(d, expected):
    t = compute_invariants(d)
    assert (t.countA2, t.countA1sq, t.countA3, t.countA2A1, t.countA1cube) == expected


def test_table_intermediates():
    t = compute_invariants((2, 2, 3))
    assert (t.s1, t.s2, t.s3, t.P, t.c1, t.c2, t.c3) == (4, 5, 2, 12, 4, 1, -4)
    t = compute_invariants((1, 2, 3))
    assert (t.s1, t.s2, t.s3, t.P, t.c1, t.c2, t.c3) == (3, 2, 0, 6, 3, -1, -1)
    t = compute_invariants((1, 1, 1))
    assert (t.s1, t.s2, t.s3, t.P, t.c1, t.c2, t.c3) == (0, 0, 0, 1, 0, 0, 0)


def test_matches_symbolic_oracle():
    for d in itertools.product(range(1, 9), repeat=3):
        t = compute_invariants(d)
        want = oracle(d)
        if t.countA1cube is None:
            # only outside the gate, where the bracket is not a multiple of 6
            assert not t.admissible and not want["A1cube"].is_integer
            want.pop("A1cube")
        got = {k: sp.Integer(v) for k, v in t.counts().items() if v is not None}
        assert got == want, d
        assert 6 * want.get("A1cube", sp.Rational(t.A1cube_bracket, 6)) == t.A1cube_bracket


@given(st.integers(1, 50))
def test_one_one_n_specialization(n):
    t = compute_invariants((1, 1, n))
    assert t.countA2 == (n - 1) * (n - 2)
    assert t.countA3 == (n - 1) * (n - 2) * (n - 3)


@given(st.tuples(st.integers(1, 12), st.integers(1, 12), st.integers(1, 12)), st.permutations(range(3)))
def test_permutation_symmetry(d, perm):
    a = compute_invariants(d)
    b = compute_invariants(tuple(d[i] for i in perm))
    assert a.counts() == b.counts() and a.A1cube_bracket == b.A1cube_bracket
    fields = ("s1", "s2", "s3", "P", "c1", "c2", "c3", "admissible")
    assert [getattr(a, f) for f in fields] == [getattr(b, f) for f in fields]


def test_arbitrary_precision():
    d = (1009, 1013, 1019)
    t = compute_invariants(d)
    assert t.admissible
    assert t.countA1cube == int(oracle(d)["A1cube"])
    assert t.countA1cube > 2**63


def test_admissible_counts_nonnegative():
    for d in itertools.product(range(1, 7), repeat=3):
        t = compute_invariants(d)
        if t.admissible:
            assert min(t.counts().values()) >= 0, d


def test_bracket_divisible_by_six_on_admissible_triples():
    for d in itertools.product(range(1, 9), repeat=3):
        t = compute_invariants(d)
        br = triple_point_bracket(t.P, t.s1, t.countA2, t.countA1sq, t.countA3, t.countA2A1)
        assert br == t.A1cube_bracket
        if t.admissible:
            assert br % 6 == 0 and br == 6 * t.countA1cube


def test_non_admissible_bracket_may_be_fractional():
    t = compute_invariants((1, 3, 3))
    assert not t.admissible
    assert t.A1cube_bracket == 736 and t.countA1cube is None


@pytest.mark.parametrize(
    "d, ok, reason",
    [
        ((2, 2, 3), True, None),
        ((2, 3, 4), True, None),
        ((3, 3, 5), False, "gcd(d1,d2)=3>2"),
        ((2, 4, 6), False, "gcd(d1,d2,d3)=2>1"),
        ((2, 6, 3), False, "gcd(d2,d3)=3>2"),
        ((4, 6, 9), False, "gcd(d2,d3)=3>2"),
    ],
)
def test_gate(d, ok, reason):
    got, why = determinacy_gate(d)
    assert got is ok
    if reason:
        assert why == reason


def test_non_admissible_still_tabulated():
    t = compute_invariants((3, 3, 5))
    assert not t.admissible and t.blocking_reason == "gcd(d1,d2)=3>2"
    assert t.countA3 == int(oracle((3, 3, 5))["A3"])


def test_degree_validation():
    with pytest.raises(ValueError):
        DegreeTriple(0, 1, 1)
    with pytest.raises(ValueError):
        DegreeTriple.of((1, 2))


def test_fast():
    t0 = time.perf_counter()
    for d in ((1, 1, 1), (2, 2, 3), (1, 2, 3), (1, 2, 2)):
        compute_invariants(d)
    assert (time.perf_counter() - t0) / 4 < 1e-3
