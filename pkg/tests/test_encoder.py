from __future__ import annotations

import re

import pytest

from loopver.checker import receive_points
from loopver.encoder import encode
from loopver.frontend import load


def squash(text: str) -> str:
    return re.sub(r"\s+", "", text)


def proc(enc, name):
    return next(p for p in enc.procedures if p.name == name)


def test_listing1_loop_main(listing1):
    main = proc(encode(listing1), "loop_main")
    assert main.requires == ("(\\forall* int i; 0<=i && i<N; "
                             "perm(a[i],1) ** perm(c[i],1) ** perm(b[i],1/2))")
    assert main.body is None
    assert main.params == ("int N", "int[] a", "int[] c", "int[] b")


def test_listing1_has_no_transfer_procedures(listing1):
    enc = encode(listing1)
    assert [p.name for p in enc.procedures] == ["loop_main", "loop_body"]
    assert "send_phi" not in enc.render() and "recv_phi" not in enc.render()


def test_listing2_send_recv_contracts(listing2):
    enc = encode(listing2)
    assert squash(proc(enc, "send_phi_0").requires) == squash("is_iteration(i+1) ==> perm(a[i],1/2)")
    assert squash(proc(enc, "recv_phi_0").ensures) == squash("is_iteration(i-1) ==> perm(a[i-1],1/2)")
    assert enc.is_iteration_def.strip() == "boolean is_iteration(int i) { return 1 <= i && i < N+1; }"


def test_listing2_body_placement(listing2):
    body = proc(encode(listing2), "loop_body")
    assert body.requires.startswith("(1<=i && i<N+1) ** ")
    assert body.body == ("S1: a[i] = c[i]*CONST+a[i]*(1-CONST);", "send_phi_0(i);", "recv_phi_0(i);",
                         "S2: c[i] = min(a[i], a[i-1]);")
    assert body.params[:3] == ("int i", "int N", "int CONST")


def test_listing3_receive_before_first_statement(listing3):
    body = proc(encode(listing3), "loop_body")
    assert body.body[0] == "recv_phi_0(i);" and body.body[-1] == "send_phi_0(i);"


def test_empty_loop():
    enc = encode(load("for(i=0;i<N;i++) /*@ requires true; ensures true; @*/ { }"))
    body = proc(enc, "loop_body")
    assert body.requires == "(0<=i && i<N) ** true" and body.ensures == "true" and body.body == ()


@pytest.mark.parametrize("name", ["listing1", "listing2", "listing3"])
def test_encoding_is_deterministic(corpus, name):
    assert encode(corpus[name]).render() == encode(corpus[name]).render()


@pytest.mark.parametrize("name", ["listing1", "listing2", "listing3"])
def test_placements_match_checker(corpus, name):
    p = corpus[name]
    enc = encode(p)
    recvs = {(i.site, i.label): i for insts in receive_points(p).values() for i in insts}
    for pl in enc.placements:
        send = p.sends[pl.site]
        if pl.kind == "send":
            assert pl.pos == send.pos and pl.formula == send.formula
        else:
            inst = recvs[(pl.site, send.target)]
            assert pl.pos == p.statement(send.target).pos and pl.formula == inst.formula
    assert len(enc.placements) == 2 * len(p.sends)


def test_multiple_sends_are_numbered_in_source_order():
    src = """for(i=0;i<N;i++)
    /*@ requires perm(a[i],1) ** perm(b[i],1) ** (i>=1 ==> perm(a[i-1],1/2)) ** (i>=2 ==> perm(b[i-2],1/2));
        ensures  perm(a[i],1) ** perm(b[i],1); @*/
    { S1: a[i] = 1; //@ send perm(a[i],1/2) to S2,1;
      S2: b[i] = 2; //@ send perm(b[i],1/2) to S1,2;
    }"""
    enc = encode(load(src))
    names = [p.name for p in enc.procedures]
    assert names[2:] == ["send_phi_0", "recv_phi_0", "send_phi_1", "recv_phi_1"]
    assert proc(enc, "recv_phi_1").ensures == "is_iteration(i-2) ==> perm(b[i-2],1/2)"
