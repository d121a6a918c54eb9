from __future__ import annotations

import pytest

from loopver.aggregator import check_balance
from loopver.checker import check_iteration
from loopver.classifier import BACKWARD_DEP, FORWARD_ONLY, INDEPENDENT, UNVERIFIED, classify
from loopver.corpus import source
from loopver.frontend import load


def verdict(p):
    return classify(p, check_iteration(p), check_balance(p))


@pytest.mark.parametrize("name,kind,pragma", [
    ("listing1", INDEPENDENT, "independent"),
    ("listing2", FORWARD_ONLY, "ivdep"),
    ("listing3", BACKWARD_DEP, "none"),
])
def test_corpus_verdicts(corpus, name, kind, pragma):
    v = verdict(corpus[name])
    assert v.kind == kind and v.suggested_pragma == pragma
    if kind == INDEPENDENT:
        assert v.evidence == ()
    else:
        assert [u.direction for u in v.evidence] == (["forward"] if kind == FORWARD_ONLY else ["backward"])


@pytest.mark.parametrize("name", ["broken.loop", "zero_distance.loop", "doubled_requires.loop"])
def test_failed_checks_are_unverified(mutant, name):
    v = verdict(load(mutant(name)))
    assert v.kind == UNVERIFIED and v.diagnostic is not None and v.suggested_pragma == "none"


def test_aggregation_failure_is_unverified():
    p = load("for(i=0;i<N;i++) /*@ requires perm(x[0],1/2); ensures perm(x[0],1/2); @*/ { }")
    v = verdict(p)
    assert v.kind == UNVERIFIED and v.diagnostic.code == "ZeroCoefficient"


def test_fractions_do_not_change_kind():
    src = source("listing2").replace("1/2", "1/3")
    src = src.replace("ensures  perm(c[i],1) ** perm(a[i],1/3) ** perm(a[i-1],1/3)",
                      "ensures  perm(c[i],1) ** perm(a[i],2/3) ** perm(a[i-1],1/3)")
    v = verdict(load(src))
    assert v.kind == FORWARD_ONLY
