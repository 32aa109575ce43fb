"""Post-run contract invariant sweep, computed from ledger state and results only."""
from __future__ import annotations

from collections import Counter

from ..auction import NoWinner, RevealedBid, Winner, vickrey_oracle
from ..contract import POLICIES, ContractInstance
from ..credentials import ShowProof
from ..ledger import Kind, Ledger


def _zeta_of(tx) -> str:
    return ShowProof.from_bytes(bytes.fromhex(tx.payload["proof"])).zeta.to_bytes().hex()


def _expected_payout(auction, zeta: str) -> int:
    v = auction.revealed[zeta]
    outcome = auction.outcome()
    if isinstance(outcome, Winner) and outcome.zeta.hex() == zeta:
        return POLICIES[auction.policy](outcome)
    return v


def sweep(ledger: Ledger) -> list[str]:
    """Return a list of human-readable violations; empty means every invariant holds."""
    state = ledger.state
    problems: list[str] = []

    supply = sum(ledger.genesis.values())
    if state.total_coins() != supply:
        problems.append(f"conservation: genesis supply {supply} != accounts + buffer {state.total_coins()}")
    if any(b < 0 for b in state.accounts.values()):
        problems.append("conservation: negative account balance")

    applied = [r for r in ledger.results if r.applied]
    withdrawals: dict[str, Counter] = {}
    deposits: Counter = Counter()
    claims: Counter = Counter()

    for r in applied:
        tx = r.tx
        cid = tx.payload.get("contract")
        inst: ContractInstance | None = state.contracts.get(cid)
        if tx.kind is Kind.SETUP:
            continue
        if inst is None:
            problems.append(f"height {r.height}: applied {tx.kind.value} for unknown contract")
            continue
        if tx.kind is Kind.DEPOSIT:
            deposits[cid] += tx.payload["value"]
            continue
        if tx.kind is Kind.CREATE:
            auction = inst.auctions.get(tx.digest)
            if auction is None or r.height >= auction.t_commit:
                problems.append(f"height {r.height}: Create applied after its own t_commit")
            continue
        auction = inst.auctions.get(tx.payload.get("auction"))
        if auction is None:
            problems.append(f"height {r.height}: applied {tx.kind.value} for unknown auction")
            continue
        h, tc, tr = r.height, auction.t_commit, auction.t_reveal
        if tx.kind is Kind.COMMIT and not h < tc:
            problems.append(f"temporal safety: Commit applied at {h} >= t_commit {tc}")
        elif tx.kind in (Kind.REVEAL, Kind.OPEN_MIN_PRICE) and not tc <= h < tr:
            problems.append(f"temporal safety: {tx.kind.value} applied at {h} outside [{tc}, {tr})")
        elif tx.kind in (Kind.WITHDRAW, Kind.SUBMIT_WORK, Kind.CLAIM_WORK) and h < tr:
            problems.append(f"temporal safety: {tx.kind.value} applied at {h} < t_reveal {tr}")
        if tx.kind is Kind.WITHDRAW:
            withdrawals.setdefault(cid, Counter())[(auction.auction_id, _zeta_of(tx))] += 1
        elif tx.kind is Kind.CLAIM_WORK:
            claims[cid] += auction.earmark

    for cid, inst in state.contracts.items():
        paid = withdrawals.get(cid, Counter())
        per_zeta = Counter()
        for (_, zeta), k in paid.items():
            per_zeta[zeta] += k
        for zeta, k in per_zeta.items():
            if k > 1:
                problems.append(f"double spend: tag {zeta[:16]}... paid out {k} times")
        if set(per_zeta) != inst.spent:
            problems.append("spent list does not match applied withdrawals")
        revealed_anywhere = set().union(*(a.revealed for a in inst.auctions.values())) if inst.auctions else set()
        if not inst.spent <= revealed_anywhere:
            problems.append("spent list contains a tag that was never revealed")

        refunds = sum(_expected_payout(inst.auctions[aid], z) for (aid, z) in paid)
        if deposits[cid] != refunds + claims[cid] + inst.buffer:
            problems.append(
                f"budget balance: deposits {deposits[cid]} != refunds {refunds} + worker {claims[cid]} + buffer {inst.buffer}"
            )
        if inst.buffer < 0:
            problems.append("buffer went negative")

        for aid, a in inst.auctions.items():
            if not set(a.revealed) <= set(a.committed):
                problems.append(f"auction {aid[:12]}: revealed tag was never committed")
            if a.status == "pending":
                if state.height >= a.t_reveal:
                    problems.append(f"auction {aid[:12]}: still pending after t_reveal")
                continue
            if a.opened_min_price is None:
                expected = NoWinner()
            else:
                bids = [RevealedBid(bytes.fromhex(z), v, a.committed[z]) for z, v in a.revealed.items()]
                expected = vickrey_oracle(bids, a.opened_min_price)
            if a.outcome() != expected:
                problems.append(f"auction {aid[:12]}: outcome {a.outcome()} differs from oracle {expected}")
            if isinstance(expected, Winner) and not (a.opened_min_price <= expected.price <= expected.bid):
                problems.append(f"auction {aid[:12]}: clearing price out of bounds")
    return problems
