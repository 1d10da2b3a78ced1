"""A one-session reconstruction of the ASW contract-signing protocol.

The game starts once Alice's commitment cm_A has reached Bob.  Outcomes name
who ended up holding the other side's signature: ``none``, ``sign_A`` (Alice
holds Bob's), ``sign_B`` (Bob holds Alice's) and ``sign_AB``.

Modelling rules:

* Bob moves first: send cm_B or stop.  If he stops, Alice may send an abort
  request; either way nobody signs.
* Alice, holding cm_B, sends sc_A or stops.  She cannot abort any more.
* If Alice stops, Bob may send a resolve request.  A served request hands Bob
  a replacement contract, i.e. Alice's signature.
* Whenever Bob holds Alice's signature (sc_A or a replacement) he decides
  whether to send sc_B.  If he does not, Alice resolves with cm_B.
* A reliable TTP serves every request; its bookkeeping is folded into the tree.
  An unreliable TTP is an agent that serves or ignores each request it gets.
* One session, no replay, first request wins.  Bob cannot resolve before
  sending cm_B, and sc_B is never sent before sc_A, so ``sign_A`` is not
  reachable; it is still listed in the claim objectives.
"""
from __future__ import annotations

from .protocol import ProtocolTree, parse_protocol

OBJECTIVES = {
    "fair": ("none", "sign_AB"),
    "bob_claim": ("none", "sign_B", "sign_AB"),
    "alice_claim": ("none", "sign_A", "sign_AB"),
}


def _ttp(reliable: bool, served: str, ignored: str) -> str:
    if reliable:
        return served
    return f"(node TTP (serve {served}) (ignore {ignored}))"


def _bob_holds_sc_a(reliable: bool) -> str:
    alice_resolves = _ttp(reliable, "(outcome sign_AB)", "(outcome sign_B)")
    return f"(node Bob (send_scB (outcome sign_AB)) (stop {alice_resolves}))"


def asw_source(reliable_ttp: bool = True) -> str:
    r = reliable_ttp
    header = "(agents Alice Bob)" if r else "(agents Alice Bob TTP)"
    objectives = "\n".join(f"(objective {k} {' '.join(v)})" for k, v in OBJECTIVES.items())
    bob_resolves = _ttp(r, _bob_holds_sc_a(r), "(outcome none)")
    alice_aborts = _ttp(r, "(outcome none)", "(outcome none)")
    tree = (
        "(node Bob\n"
        "  (send_cmB (node Alice\n"
        f"    (send_scA {_bob_holds_sc_a(r)})\n"
        f"    (stop (node Bob (resolve {bob_resolves}) (idle (outcome none))))))\n"
        f"  (stop (node Alice (abort {alice_aborts}) (idle (outcome none)))))"
    )
    return f"{header}\n{objectives}\n{tree}\n"


def asw_model(reliable_ttp: bool = True) -> ProtocolTree:
    return parse_protocol(asw_source(reliable_ttp))
