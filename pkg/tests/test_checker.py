from __future__ import annotations

from fractions import Fraction

import pytest

from loopver.checker import BACKWARD, FORWARD, check_iteration, receive_points, send_direction
from loopver.corpus import source
from loopver.frontend import load


@pytest.mark.parametrize("name", ["listing1", "listing2", "listing3"])
def test_corpus_passes(corpus, name):
    report = check_iteration(corpus[name])
    assert report.passed, report.diagnostic
    assert report.regions and all(r.passed for r in report.regions)


def test_listing1_trace(listing1):
    report = check_iteration(listing1)
    (region,) = report.regions
    assert [(s.statement, s.action, s.cell.render(), s.before) for s in region.steps] == [
        ("S1", "read", "b[i]", Fraction(1, 2)),
        ("S1", "write", "a[i]", Fraction(1)),
        ("S2", "read", "a[i]", Fraction(1)),
        ("S2", "write", "c[i]", Fraction(1)),
    ]


def test_listing2_send_and_receive_steps(listing2):
    report = check_iteration(listing2)
    middle = next(r for r in report.regions if r.region.render() == "i>=2 && i<=N-1")
    actions = [(s.statement, s.action, s.cell.render(), s.before, s.after) for s in middle.steps]
    assert ("#1", "send", "a[i]", Fraction(1), Fraction(1, 2)) in actions
    assert ("S2", "receive", "a[i-1]", Fraction(0), Fraction(1, 2)) in actions
    last = next(r for r in report.regions if r.region.render() == "i==N && N>=2")
    assert not any(s.action == "send" for s in last.steps)


def test_send_directions(listing2, listing3):
    assert send_direction(listing2.sends[0]) == FORWARD
    assert send_direction(listing3.sends[0]) == BACKWARD


def test_receive_points(listing2):
    pts = receive_points(listing2)
    (inst,) = pts["S2"]
    assert inst.site == 0 and [c.render() for c in inst.formula] == ["perm(a[i-1],1/2)"]
    assert all(g.holds(2, 3) for g in inst.guard) and not all(g.holds(1, 3) for g in inst.guard)


def test_deleted_send_is_insufficient_read(mutant):
    report = check_iteration(load(mutant("broken.loop")))
    d = report.diagnostic
    assert d.code == "InsufficientRead" and d.statement == "S2" and d.cell == "a[i-1]"
    # InsufficientRead exactly on the regions with i >= 2; with nothing sent, i == 1 keeps
    # half of a[1] too many and fails its postcondition instead
    for r in report.regions:
        later = any(r.region.contains(i, n) for n in range(2, 6) for i in range(2, n + 1))
        code = r.diagnostic.code if r.diagnostic else None
        assert (code == "InsufficientRead") == later


def test_zero_distance(mutant):
    report = check_iteration(load(mutant("zero_distance.loop")))
    assert report.diagnostic.code == "NonPositiveDistance"


def test_doubled_requires(mutant):
    report = check_iteration(load(mutant("doubled_requires.loop")))
    assert report.diagnostic.code == "CapExceeded"
    assert report.diagnostic.cell == "a[i]"


def test_write_needs_full_permission():
    src = source("listing1").replace("requires perm(a[i],1)", "requires perm(a[i],1/2)")
    src = src.replace("ensures  perm(a[i],1)", "ensures  perm(a[i],1/2)")
    d = check_iteration(load(src)).diagnostic
    assert d.code == "InsufficientWrite" and d.statement == "S1"


def test_postcondition_mismatch():
    src = source("listing1").replace("ensures  perm(a[i],1) ** ", "ensures  ")
    d = check_iteration(load(src)).diagnostic
    assert d.code == "PostconditionMismatch" and "leftover a[i]:1" in d.message


def test_send_without_permission():
    src = source("listing2").replace("send perm(a[i],1/2)", "send perm(c[i+1],1/2)")
    d = check_iteration(load(src)).diagnostic
    assert d.code == "SendWithoutPermission"


def test_guarded_send_rejected():
    src = source("listing2").replace("send perm(a[i],1/2)", "send i>1 ==> perm(a[i],1/2)")
    assert check_iteration(load(src)).diagnostic.code == "GuardedSend"


def test_frame_neutrality():
    src = source("listing2").replace("requires perm(c[i],1)", "requires perm(z[i],1/3) ** perm(c[i],1)")
    src = src.replace("ensures  perm(c[i],1)", "ensures  perm(z[i],1/3) ** perm(c[i],1)")
    report = check_iteration(load(src))
    assert report.passed
    assert not any(s.cell.array == "z" for r in report.regions for s in r.steps)


def test_check_is_deterministic(listing3):
    assert check_iteration(listing3) == check_iteration(listing3)


def test_empty_body_and_contract():
    report = check_iteration(load("for(i=0;i<N;i++) /*@ requires true; ensures true; @*/ { }"))
    assert report.passed
