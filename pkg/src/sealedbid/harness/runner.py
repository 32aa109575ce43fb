"""Drive a :class:`Scenario` end to end on a fresh ledger."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .. import contract as C
from ..auction import NoWinner, Outcome, Winner
from ..credentials import (
    Credential,
    CredentialError,
    key_ceremony,
    prepare_request,
    unblind_and_aggregate,
    zeta_tag,
)
from ..crypto import KeyPair, pedersen_commit, random_scalar
from ..ledger import ApplyResult, Kind, Ledger, Transaction
from .invariants import sweep
from .scenario import BidderSpec, Scenario

# order of transactions inside one block
_PHASE = {
    Kind.SETUP: 0,
    Kind.CREATE: 1,
    Kind.DEPOSIT: 2,
    Kind.COMMIT: 3,
    Kind.REVEAL: 4,
    Kind.OPEN_MIN_PRICE: 5,
    Kind.WITHDRAW: 6,
    Kind.SUBMIT_WORK: 7,
    Kind.CLAIM_WORK: 8,
}


@dataclass
class Bidder:
    spec: BidderSpec
    key: KeyPair
    payee: KeyPair
    sequence: int
    request_id: str | None = None
    secret: object = None
    credential: Credential | None = None


@dataclass
class RunResult:
    scenario: Scenario
    ledger: Ledger
    contract_id: str
    auction_id: str
    worker: KeyPair
    bidders: dict[str, Bidder]
    actors: dict[str, str]
    notes: list[str] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    unmet: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.unmet

    @property
    def auction(self):
        inst = self.ledger.state.contracts.get(self.contract_id)
        return inst.auctions.get(self.auction_id) if inst else None

    @property
    def outcome(self) -> Outcome | None:
        return self.auction.outcome() if self.auction else None

    def winner_name(self) -> str | None:
        out = self.outcome
        if not isinstance(out, Winner):
            return None
        for name, b in self.bidders.items():
            if zeta_tag(b.sequence, bytes.fromhex(self.auction_id)).to_bytes() == out.zeta:
                return name
        return None

    def payouts(self) -> dict[str, int]:
        return {name: self.ledger.balance_of(b.payee.address) for name, b in self.bidders.items()}

    def balances(self) -> dict[str, int]:
        return {name: self.ledger.balance_of(b.key.address) for name, b in self.bidders.items()}

    @property
    def worker_balance(self) -> int:
        return self.ledger.balance_of(self.worker.address)

    @property
    def locked(self) -> int:
        inst = self.ledger.state.contracts.get(self.contract_id)
        return inst.buffer if inst else 0

    def rejections(self) -> list[tuple[str, Kind, str]]:
        return [
            (self.actors.get(r.tx.digest, "?"), r.tx.kind, r.reason.value)
            for r in self.ledger.results
            if not r.applied
        ]

    def trace_lines(self) -> list[str]:
        return list(self.ledger.trace_lines())

    def write_trace(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.trace_lines()) + "\n")

    def summary(self) -> str:
        out = self.outcome
        lines = [f"scenario {self.scenario.name}: final height {self.ledger.current_height()}"]
        if isinstance(out, Winner):
            lines.append(f"  outcome: {self.winner_name()} wins with bid {out.bid}, pays {out.price}")
        elif isinstance(out, NoWinner):
            lines.append("  outcome: auction failed (no winner)")
        else:
            lines.append("  outcome: pending")
        for name, b in self.bidders.items():
            lines.append(
                f"  {name:<10} bid {b.spec.bid:>4}  account {self.ledger.balance_of(b.key.address):>5}"
                f"  payout {self.ledger.balance_of(b.payee.address):>5}"
            )
        lines.append(f"  worker     received {self.worker_balance}")
        lines.append(f"  contract buffer (locked) {self.locked}")
        for actor, kind, reason in self.rejections():
            lines.append(f"  rejected: {actor} {kind.value} {reason}")
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.extend(f"  INVARIANT VIOLATION: {v}" for v in self.violations)
        lines.extend(f"  EXPECTATION FAILED: {u}" for u in self.unmet)
        lines.append("  invariant sweep: " + ("pass" if not self.violations else "FAIL"))
        return "\n".join(lines)


Action = Callable[[], "Transaction | None"]


def run_scenario(scenario: Scenario) -> RunResult:
    rng = random.Random(scenario.seed)
    shares, vk = key_ceremony(scenario.n, scenario.t, rng)
    admin = KeyPair.generate(rng)
    worker = KeyPair.generate(rng)
    bidders = {
        b.name: Bidder(b, KeyPair.generate(rng), KeyPair.generate(rng), random_scalar(rng)) for b in scenario.bidders
    }
    genesis = {b.key.address.hex(): b.spec.balance for b in bidders.values()}
    genesis[worker.address.hex()] = scenario.worker.balance
    rules = C.AuctionContract()
    ledger = Ledger(rules, genesis)

    setup = C.setup_tx(admin, [s.public for s in shares], vk, scenario.denominations, rng)
    cid = setup.digest
    blinding = random_scalar(rng)
    commitment = pedersen_commit(scenario.worker.min_price, blinding)
    create = C.create_tx(worker, cid, vk, commitment, scenario.t_commit, scenario.t_reveal, rng=rng)
    aid = create.digest
    result = RunResult(scenario, ledger, cid, aid, worker, bidders, {setup.digest: "admin", create.digest: "worker"})
    auction_id = bytes.fromhex(aid)

    schedule: list[tuple[int, int, int, str, Action]] = []

    def at(height, kind: Kind, order: int, actor: str, action: Action):
        if isinstance(height, int):
            schedule.append((height, _PHASE[kind], order, actor, action))

    at(1, Kind.SETUP, 0, "admin", lambda: setup)
    at(scenario.worker.create_at, Kind.CREATE, 0, "worker", lambda: create)
    at(scenario.worker.open_at, Kind.OPEN_MIN_PRICE, 0, "worker",
       lambda: C.open_min_price_tx(worker, cid, aid, scenario.worker.min_price, blinding, rng))  # fmt: skip

    def claim():
        inst = ledger.state.contracts.get(cid)
        auction = inst.auctions.get(aid) if inst else None
        if auction is None or auction.work is None:
            result.notes.append("worker: no work binding to claim against, claim skipped")
            return None
        return C.claim_work_tx(worker, cid, aid, rng=rng)

    at(scenario.worker.claim_at, Kind.CLAIM_WORK, 0, "worker", claim)

    def needs_credential(b: Bidder, what: str, build: Callable[[], Transaction]) -> Action:
        def action():
            if b.credential is None:
                result.notes.append(f"{b.spec.name}: no credential, {what} skipped")
                return None
            return build()

        return action

    def deposit(b: Bidder) -> Action:
        def action():
            req, secret = prepare_request(b.spec.bid, b.sequence, rng)
            b.request_id, b.secret = C.request_id(req), secret
            return C.deposit_tx(b.key, cid, req, rng)

        return action

    def submit_work(b: Bidder, auto: bool) -> Action:
        def build():
            if auto:
                inst = ledger.state.contracts.get(cid)
                state_auction = inst.auctions.get(aid) if inst else None
                if state_auction is None:
                    return None
                # what a bidder can read off the chain: would this tag win?
                out = state_auction.effective_outcome(max(ledger.current_height() + 1, state_auction.t_reveal))
                mine = zeta_tag(b.sequence, auction_id).to_bytes()
                if not (isinstance(out, Winner) and out.zeta == mine):
                    return None
            digest = hashlib.sha256(f"encrypted replica for {aid}".encode()).digest()
            return C.submit_work_tx(b.credential, cid, aid, vk, digest, rng)

        return needs_credential(b, "SubmitWork", build)

    for i, b in enumerate(bidders.values()):
        s = b.spec
        at(s.deposit_at, Kind.DEPOSIT, i, s.name, deposit(b))
        at(s.commit_at, Kind.COMMIT, i, s.name,
           needs_credential(b, "Commit", lambda b=b: C.commit_tx(b.credential, cid, aid, vk, rng)))  # fmt: skip
        at(s.reveal_at, Kind.REVEAL, i, s.name,
           needs_credential(b, "Reveal", lambda b=b: C.reveal_tx(b.credential, cid, aid, vk, rng)))  # fmt: skip
        withdraw = needs_credential(b, "Withdraw", lambda b=b: C.withdraw_tx(b.credential, cid, aid, vk, b.payee, rng))
        at(s.withdraw_at, Kind.WITHDRAW, 2 * i, s.name, withdraw)
        if s.double_spend:
            at(s.withdraw_at, Kind.WITHDRAW, 2 * i + 1, s.name, withdraw)
        sw = s.submit_work_at
        at(scenario.t_reveal if sw == "auto" else sw, Kind.SUBMIT_WORK, i, s.name, submit_work(b, sw == "auto"))

    schedule.sort(key=lambda e: e[:3])
    by_height: dict[int, list] = {}
    for h, _, _, actor, action in schedule:
        by_height.setdefault(h, []).append((actor, action))

    for height in range(1, scenario.last_height + 1):
        for actor, action in by_height.get(height, []):
            tx = action()
            if tx is not None:
                result.actors[tx.digest] = actor
                ledger.submit(tx)
        applied = ledger.advance_block()
        _issue_credentials(result, applied, shares, vk)

    if result.auction is not None and ledger.current_height() >= scenario.t_reveal:
        rules.resolve(ledger.state, cid, aid)
    result.violations = sweep(ledger) + _attribution(result)
    result.unmet = check_expectations(result)
    return result


def _issue_credentials(result: RunResult, applied: list[ApplyResult], shares, vk) -> None:
    """Authorities answer deposits that made it on chain; bidders aggregate off-chain."""
    by_request = {b.request_id: b for b in result.bidders.values() if b.request_id and b.credential is None}
    for r in applied:
        if not r.applied or r.tx.kind is not Kind.DEPOSIT:
            continue
        b = by_request.get(hashlib.sha256(bytes.fromhex(r.tx.payload["request"])).hexdigest())
        if b is None:
            continue
        partials = []
        for idx in b.spec.issuers:
            partials.append(C.respond_to_deposit(result.ledger.state, result.contract_id, b.request_id, shares[idx - 1]))
        try:
            b.credential = unblind_and_aggregate(partials, b.secret, vk)
        except CredentialError as exc:
            result.notes.append(f"{b.spec.name}: credential issuance failed ({type(exc).__name__}: {exc})")


def _attribution(result: RunResult) -> list[str]:
    """Budget balance split by participant: every coin left in the buffer has an owner who deviated."""
    if result.auction is None:
        return []
    auction = result.auction
    withdrawn = {
        result.actors.get(r.tx.digest) for r in result.ledger.results if r.applied and r.tx.kind is Kind.WITHDRAW
    }
    deposited = [b for b in result.bidders.values() if b.request_id and b.request_id in result.ledger.state.contracts[result.contract_id].requests]
    stuck = sum(b.spec.bid for b in deposited if b.spec.name not in withdrawn)
    unclaimed = auction.earmark if auction.status == "won" and not auction.worker_paid else 0
    if result.locked != stuck + unclaimed:
        return [f"budget attribution: buffer {result.locked} != unwithdrawn deposits {stuck} + unclaimed worker pay {unclaimed}"]
    return []


def check_expectations(result: RunResult) -> list[str]:
    exp = result.scenario.expect
    unmet = []
    out = result.outcome
    if exp.outcome == "failed" and not isinstance(out, NoWinner):
        unmet.append(f"outcome: expected failed, got {out}")
    elif isinstance(exp.outcome, dict):
        got = (result.winner_name(), out.price if isinstance(out, Winner) else None)
        want = (exp.outcome["winner"], exp.outcome["price"])
        if got != want:
            unmet.append(f"outcome: expected winner/price {want}, got {got}")
    payouts = result.payouts()
    for name, amount in exp.payouts.items():
        if payouts[name] != amount:
            unmet.append(f"payouts.{name}: expected {amount}, got {payouts[name]}")
    if exp.worker is not None and result.worker_balance - result.scenario.worker.balance != exp.worker:
        unmet.append(f"worker: expected {exp.worker}, got {result.worker_balance - result.scenario.worker.balance}")
    if exp.locked is not None and result.locked != exp.locked:
        unmet.append(f"locked: expected {exp.locked}, got {result.locked}")
    seen = result.rejections()
    for rej in exp.rejections:
        if (rej.actor, rej.kind, rej.reason.value) not in seen:
            unmet.append(f"rejections: expected {rej.actor} {rej.kind.value} {rej.reason.value}")
    return unmet
