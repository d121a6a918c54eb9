from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopver.affine import EQ, GE, Affine, Constraint
from loopver.frontend import Atom, Cell, Clause, load
from loopver.resources import (
    DISJOINT, EQUAL, ONE, UNKNOWN, AliasUndecided, CapExceeded, InsufficientPermission, PermissionMap,
    Region, cell_equal, format_frac, frac_add, normalize, parse_frac, split_regions,
)

small = st.integers(-4, 4)
affines = st.builds(Affine, small, small, st.integers(-8, 8))
fractions = st.fractions(min_value=Fraction(1, 12), max_value=1, max_denominator=12)
ops = st.sampled_from(["==", "<", "<=", ">", ">="])

PY_OPS = {"==": int.__eq__, "<": int.__lt__, "<=": int.__le__, ">": int.__gt__, ">=": int.__ge__}


@given(affines, ops, affines, st.integers(-10, 10), st.integers(-10, 10))
def test_constraint_compare_matches_python(lhs, op, rhs, i, n):
    c = Constraint.compare(lhs, op, rhs)
    assert c.holds(i, n) == PY_OPS[op](lhs.evaluate(i, n), rhs.evaluate(i, n))


@given(affines, st.sampled_from([GE, EQ]), st.integers(-10, 10), st.integers(-10, 10))
def test_negation_is_exact_complement(expr, op, i, n):
    c = Constraint.make(expr, op)
    assert c.holds(i, n) != any(d.holds(i, n) for d in c.negation())


def test_constraint_rendering():
    i = Affine(1, 0, 0)
    n = Affine(0, 1, 0)
    assert Constraint.compare(i, "==", Affine.constant(1)).render() == "i==1"
    assert Constraint.compare(i, "<=", n - 1).render() == "i<=N-1"
    assert Constraint.compare(n, ">=", Affine.constant(2)).render() == "N>=2"


@given(fractions, fractions, fractions)
def test_frac_add_commutative_associative(a, b, c):
    assert frac_add(a, b) == frac_add(b, a)
    assert frac_add(frac_add(a, b), c) == frac_add(a, frac_add(b, c))


@given(fractions)
def test_format_parse_round_trip(f):
    text = format_frac(f)
    assert "/" in text and parse_frac(text) == f


def test_format_frac_always_has_denominator():
    assert format_frac(ONE) == "1/1"
    assert format_frac(Fraction(2, 4)) == "1/2"


def test_region_infeasible_is_none():
    i = Affine(1, 0, 0)
    assert Region.build([Constraint.compare(i, ">=", Affine.constant(3)),
                         Constraint.compare(i, "<=", Affine.constant(2))]) is None


def test_listing2_regions(listing2):
    p = listing2
    regions = split_regions(p.requires + p.ensures, p.sends, p)
    assert sorted(r.render() for r in regions) == sorted([
        "i==1 && N==1", "i==1 && N>=2", "i==N && N>=2", "i>=2 && i<=N-1"])


@pytest.mark.parametrize("name", ["listing1", "listing2", "listing3"])
def test_regions_partition_iteration_space(corpus, name):
    p = corpus[name]
    cells = [c for s in p.body if hasattr(s, "reads") for c in (*s.reads, s.target)]
    regions = split_regions(p.requires + p.ensures, p.sends, p, cells)
    for n in range(0, 9):
        for i in p.iterations(n):
            assert sum(r.contains(i, n) for r in regions) == 1, (i, n)
    # every region is inhabited at some small size
    for r in regions:
        assert any(r.contains(i, n) for n in range(0, 9) for i in p.iterations(n))


def test_cell_equal_trichotomy():
    i, n = Affine(1, 0, 0), Affine(0, 1, 0)
    a_i, a_n = Cell("a", i), Cell("a", n)
    bounds = Region.build([Constraint.compare(i, ">=", Affine.constant(0)),
                           Constraint.compare(i, "<", n)])
    assert cell_equal(a_i, a_n, bounds) == DISJOINT
    last = Region.build([Constraint.compare(i, "==", n)])
    assert cell_equal(a_i, a_n, last) == EQUAL
    anywhere = Region.build([])
    assert cell_equal(a_i, a_n, anywhere) == UNKNOWN
    assert cell_equal(a_i, Cell("a", i - 1), anywhere) == DISJOINT
    assert cell_equal(a_i, Cell("b", i), anywhere) == DISJOINT


@settings(max_examples=60)
@given(st.integers(-2, 2), st.integers(-2, 2), st.integers(-3, 3))
def test_cell_equal_sound_on_points(di, dn, dc):
    i = Affine(1, 0, 0)
    c1, c2 = Cell("a", i), Cell("a", Affine(1 + di, dn, dc))
    region = Region.build([Constraint.compare(i, ">=", Affine.constant(0)),
                           Constraint.compare(i, "<=", Affine.constant(3)),
                           Constraint.compare(Affine(0, 1, 0), "==", Affine.constant(2))])
    rel = cell_equal(c1, c2, region)
    points = [(k, 2) for k in range(4)]
    same = [c1.index.evaluate(*p) == c2.index.evaluate(*p) for p in points]
    if rel == EQUAL:
        assert all(same)
    elif rel == DISJOINT:
        assert not any(same)


def test_permission_map_accounting():
    r = Region.build([])
    a = Cell("a", Affine(1, 0, 0))
    m = PermissionMap(r).add(a, Fraction(1, 2)).add(a, Fraction(1, 2))
    assert m.get(a) == ONE
    with pytest.raises(CapExceeded):
        m.add(a, Fraction(1, 3))
    m2 = m.subtract(a, Fraction(1, 3))
    assert m2.get(a) == Fraction(2, 3) and m.get(a) == ONE
    with pytest.raises(InsufficientPermission):
        m2.subtract(a, ONE)
    assert len(m.subtract(a, ONE)) == 0


def test_permission_map_merges_aliases_on_region():
    i, n = Affine(1, 0, 0), Affine(0, 1, 0)
    r = Region.build([Constraint.compare(i, "==", n)])
    m = PermissionMap(r).add(Cell("a", i), Fraction(1, 2)).add(Cell("a", n), Fraction(1, 2))
    assert len(m) == 1 and m.get(Cell("a", i)) == ONE
    with pytest.raises(AliasUndecided):
        PermissionMap(Region.build([])).add(Cell("a", i), ONE).get(Cell("a", n))


def test_permission_map_compare():
    r = Region.build([])
    a, b = Cell("a", Affine(1, 0, 0)), Cell("b", Affine(1, 0, 0))
    have = PermissionMap(r).add(a, ONE)
    want = PermissionMap(r).add(a, Fraction(1, 2)).add(b, Fraction(1, 2))
    missing, leftover = have.compare(want)
    assert missing == [(b, Fraction(1, 2))] and leftover == [(a, Fraction(1, 2))]
    assert have == PermissionMap(r).add(a, ONE)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(-1, 1), fractions), min_size=1, max_size=4), fractions)
def test_normalize_is_monotone(atoms, extra):
    r = Region.build([])
    clauses = tuple(Clause((), Atom(Cell("a", Affine(1, 0, k)), f)) for k, f in atoms)
    try:
        base = normalize(clauses, r)
    except CapExceeded:
        return
    extra_clause = Clause((), Atom(Cell("a", Affine(1, 0, 0)), extra))
    try:
        bigger = normalize(clauses + (extra_clause,), r)
    except CapExceeded:
        return
    for cell, f in base.items():
        assert bigger.get(cell) >= f


def test_normalize_respects_guards(listing2):
    p = listing2
    regions = {r.render(): r for r in split_regions(p.requires + p.ensures, p.sends, p)}
    first = normalize(p.requires, regions["i==1 && N>=2"])
    assert first.get(Cell("a", Affine(1, 0, -1))) == Fraction(1, 2)
    middle = normalize(p.requires, regions["i>=2 && i<=N-1"])
    assert middle.get(Cell("a", Affine(1, 0, -1))) == 0


def test_normalize_cap_exceeded(mutant):
    p = load(mutant("doubled_requires.loop"))
    with pytest.raises(CapExceeded):
        normalize(p.requires, Region.build(p.bounds()))
