"""Sealed-bid auction contract on top of :mod:`sealedbid.ledger`.

Each transaction kind has a *procedure* (``*_tx`` functions, run by clients)
and a *checker* (``AuctionContract.check``, run by the ledger). Checkers read
state only; they return a closure that performs the state change.

Payload fields (all binary values hex-encoded):

==============  ==========================================================
Setup           n, t, denominations, authorities (n x 288 B), vk (290 B)
Create          contract, vk, commitment (48 B), t_commit, t_reveal, policy
Deposit         contract, value, request
Commit          contract, auction, proof (undisclosed show)
Reveal          contract, auction, value, proof (disclosed show)
OpenMinPrice    contract, auction, value, blinding (32 B)
Withdraw        contract, auction, addr (48 B), proof (disclosed), binding
SubmitWork      contract, auction, proof, digest (32 B), signer, signature
ClaimWork       contract, auction, evidence
==============  ==========================================================

Bidder-side transactions are sent from fresh one-time keys so the ledger
address does not link a bidder's Deposit to their Commit.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .auction import NoWinner, Outcome, RevealedBid, Winner, resolve_vickrey
from .credentials import (
    AuthorityKeyShare,
    Credential,
    CredentialRequest,
    PartialCredential,
    PublicKey,
    ShowProof,
    VerificationKey,
    aggregate_public_keys,
    blind_sign,
    show,
    verification_key_from_bytes,
    verify_request,
    verify_show,
)
from .crypto import (
    EncodingError,
    FiatShamirProof,
    KeyPair,
    PedersenCommitment,
    RandomSource,
    g1_from_bytes,
    scalar_from_bytes,
    scalar_to_bytes,
    sign,
    verify_open,
    verify_signature,
)
from .ledger import ChainState, Kind, Reason, Rejected, Transaction

DEFAULT_DENOMINATIONS = (1, 2, 5, 10, 20, 50, 100)

Effect = Callable[[], None]
# A policy maps a winning outcome to the winner's refund; the rest is earmarked for the worker.
Policy = Callable[[Winner], int]
WorkPredicate = Callable[["AuctionState", bytes], bool]


def vickrey_refund(w: Winner) -> int:
    return w.bid - w.price


POLICIES: dict[str, Policy] = {"vickrey": vickrey_refund}


def accept_any_work(auction: "AuctionState", evidence: bytes) -> bool:
    """Stand-in for proof-of-storage verification: any claim after a binding is accepted."""
    return auction.work is not None


def _frame(*parts: bytes) -> bytes:
    return b"".join(len(p).to_bytes(4, "big") + p for p in parts)


def commit_context(contract_id: str, auction_id: str) -> bytes:
    return _frame(b"commit", bytes.fromhex(contract_id), bytes.fromhex(auction_id))


def reveal_context(contract_id: str, auction_id: str) -> bytes:
    return _frame(b"reveal", bytes.fromhex(contract_id), bytes.fromhex(auction_id))


def withdraw_context(contract_id: str, auction_id: str, addr: bytes) -> bytes:
    return _frame(b"withdraw", bytes.fromhex(contract_id), bytes.fromhex(auction_id), addr)


def work_context(contract_id: str, auction_id: str, digest: bytes, signer: bytes) -> bytes:
    return _frame(b"submit-work", bytes.fromhex(contract_id), bytes.fromhex(auction_id), digest, signer)


def file_commitment_message(auction_id: str, digest: bytes) -> bytes:
    return _frame(b"file-commitment", bytes.fromhex(auction_id), digest)


# --------------------------------------------------------------------------
# State
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FileCommitment:
    digest: bytes
    signer: bytes
    signature: bytes

    @classmethod
    def create(cls, auction_id: str, data_digest: bytes, key: KeyPair, rng: RandomSource | None = None):
        sig = sign(key, file_commitment_message(auction_id, data_digest), rng)
        return cls(data_digest, key.address, sig.to_bytes())

    def verify(self, auction_id: str) -> bool:
        try:
            signer = g1_from_bytes(self.signer)
            sig = FiatShamirProof.from_bytes(self.signature)
        except EncodingError:
            return False
        return verify_signature(signer, file_commitment_message(auction_id, self.digest), sig)


@dataclass
class AuctionState:
    auction_id: str
    worker: str
    authority: str
    min_price_commitment: str
    t_commit: int
    t_reveal: int
    policy: str = "vickrey"
    committed: dict[str, int] = field(default_factory=dict)
    revealed: dict[str, int] = field(default_factory=dict)
    opened_min_price: int | None = None
    status: str = "pending"
    winner: str | None = None
    price: int | None = None
    winning_bid: int | None = None
    earmark: int = 0
    work: dict | None = None
    worker_paid: bool = False

    def outcome(self) -> Outcome | None:
        if self.status == "pending":
            return None
        if self.status == "failed":
            return NoWinner()
        return Winner(bytes.fromhex(self.winner), self.price, self.winning_bid)

    def compute_outcome(self) -> Outcome:
        if self.opened_min_price is None:
            return NoWinner()
        bids = [RevealedBid(bytes.fromhex(z), v, self.committed[z]) for z, v in self.revealed.items()]
        return resolve_vickrey(bids, self.opened_min_price)

    def effective_outcome(self, height: int) -> Outcome | None:
        """Recorded outcome, or the one resolution would record now; ``None`` before ``t_reveal``."""
        if self.status != "pending":
            return self.outcome()
        if height < self.t_reveal:
            return None
        return self.compute_outcome()

    def record(self, outcome: Outcome, refund: Policy = vickrey_refund) -> None:
        if self.status != "pending":
            return
        if isinstance(outcome, Winner):
            self.status = "won"
            self.winner = outcome.zeta.hex()
            self.price = outcome.price
            self.winning_bid = outcome.bid
            self.earmark = outcome.bid - refund(outcome)
        else:
            self.status = "failed"

    def to_json(self) -> dict:
        return {
            "worker": self.worker,
            "authority": self.authority,
            "min_price_commitment": self.min_price_commitment,
            "t_commit": self.t_commit,
            "t_reveal": self.t_reveal,
            "policy": self.policy,
            "committed": dict(sorted(self.committed.items())),
            "revealed": dict(sorted(self.revealed.items())),
            "opened_min_price": self.opened_min_price,
            "status": self.status,
            "winner": self.winner,
            "price": self.price,
            "winning_bid": self.winning_bid,
            "earmark": self.earmark,
            "work": self.work,
            "worker_paid": self.worker_paid,
        }


@dataclass
class ContractInstance:
    contract_id: str
    n: int
    t: int
    denominations: tuple[int, ...]
    vk_hex: str
    authorities: tuple[str, ...]
    buffer: int = 0
    spent: set[str] = field(default_factory=set)
    auctions: dict[str, AuctionState] = field(default_factory=dict)
    requests: dict[str, dict] = field(default_factory=dict)

    @property
    def vk(self) -> VerificationKey:
        return verification_key_from_bytes(bytes.fromhex(self.vk_hex))

    @property
    def authority_ref(self) -> str:
        return hashlib.sha256(bytes.fromhex(self.vk_hex)).hexdigest()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "denominations": list(self.denominations),
            "vk": self.vk_hex,
            "authorities": list(self.authorities),
            "buffer": self.buffer,
            "spent": sorted(self.spent),
            "requests": {k: dict(v) for k, v in sorted(self.requests.items())},
            "auctions": {k: a.to_json() for k, a in sorted(self.auctions.items())},
        }


# --------------------------------------------------------------------------
# Checkers
# --------------------------------------------------------------------------


def _decode_show(tx: Transaction) -> ShowProof:
    try:
        return ShowProof.from_bytes(tx.get_hex("proof"))
    except EncodingError as exc:
        raise Rejected(Reason.MALFORMED, f"show proof: {exc}") from None


class AuctionContract:
    """Rules object plugged into :class:`~sealedbid.ledger.Ledger`."""

    def __init__(
        self,
        work_predicate: WorkPredicate = accept_any_work,
        policies: Mapping[str, Policy] | None = None,
    ):
        self.work_predicate = work_predicate
        self.policies = dict(POLICIES if policies is None else policies)
        self._checkers = {
            Kind.SETUP: self.check_setup,
            Kind.CREATE: self.check_create,
            Kind.DEPOSIT: self.check_deposit,
            Kind.COMMIT: self.check_commit,
            Kind.REVEAL: self.check_reveal,
            Kind.OPEN_MIN_PRICE: self.check_open_min_price,
            Kind.WITHDRAW: self.check_withdraw,
            Kind.SUBMIT_WORK: self.check_submit_work,
            Kind.CLAIM_WORK: self.check_claim_work,
        }

    def check(self, state: ChainState, tx: Transaction) -> Effect:
        return self._checkers[tx.kind](state, tx)

    def end_block(self, state: ChainState) -> None:
        for inst in state.contracts.values():
            for auction in inst.auctions.values():
                if auction.status == "pending" and state.height >= auction.t_reveal:
                    auction.record(auction.compute_outcome(), self.policies[auction.policy])

    def resolve(self, state: ChainState, contract_id: str, auction_id: str) -> Outcome:
        _, auction = self._lookup(state, contract_id, auction_id)
        if state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"cannot resolve before height {auction.t_reveal}")
        auction.record(auction.compute_outcome(), self.policies[auction.policy])
        return auction.outcome()

    # lookups ---------------------------------------------------------------

    @staticmethod
    def _contract(state: ChainState, contract_id) -> ContractInstance:
        inst = state.contracts.get(contract_id) if isinstance(contract_id, str) else None
        if inst is None:
            raise Rejected(Reason.UNKNOWN_CONTRACT, str(contract_id))
        return inst

    def _lookup(self, state: ChainState, contract_id, auction_id) -> tuple[ContractInstance, AuctionState]:
        inst = self._contract(state, contract_id)
        auction = inst.auctions.get(auction_id) if isinstance(auction_id, str) else None
        if auction is None:
            raise Rejected(Reason.UNKNOWN_AUCTION, str(auction_id))
        return inst, auction

    def _tx_auction(self, state: ChainState, tx: Transaction) -> tuple[ContractInstance, AuctionState]:
        return self._lookup(state, tx.payload.get("contract"), tx.payload.get("auction"))

    # per kind --------------------------------------------------------------

    def check_setup(self, state: ChainState, tx: Transaction) -> Effect:
        n, t = tx.get_int("n"), tx.get_int("t")
        if not 0 < t <= n <= 255:
            raise Rejected(Reason.BAD_PARAMS, f"need 0 < t <= n <= 255, got n={n}, t={t}")
        denoms = tx.payload.get("denominations")
        if not isinstance(denoms, list) or not denoms:
            raise Rejected(Reason.BAD_PARAMS, "denominations must be a non-empty list")
        if any(isinstance(d, bool) or not isinstance(d, int) or d <= 0 for d in denoms):
            raise Rejected(Reason.BAD_PARAMS, "denominations must be positive integers")
        if any(a >= b for a, b in zip(denoms, denoms[1:])):
            raise Rejected(Reason.BAD_PARAMS, "denominations must be strictly increasing")
        auth_hex = tx.payload.get("authorities")
        if not isinstance(auth_hex, list) or len(auth_hex) != n:
            raise Rejected(Reason.BAD_PARAMS, f"expected {n} authority public keys")
        vk_raw = tx.get_hex("vk", 290)
        try:
            publics = {i + 1: PublicKey.from_bytes(bytes.fromhex(h)) for i, h in enumerate(auth_hex)}
            vk = VerificationKey.from_bytes(vk_raw)
        except (EncodingError, TypeError, ValueError) as exc:
            raise Rejected(Reason.MALFORMED, f"key material: {exc}") from None
        if (vk.n, vk.t) != (n, t):
            raise Rejected(Reason.BAD_PARAMS, "verification key threshold does not match n, t")
        # every t-sized window {1..t-1, j} must interpolate to the same key
        base = {i: publics[i] for i in range(1, t)}
        for j in range(t, n + 1):
            if aggregate_public_keys({**base, j: publics[j]}, n, t) != vk:
                raise Rejected(Reason.BAD_PARAMS, f"authority {j} is inconsistent with the verification key")
        cid = tx.digest
        if cid in state.contracts:
            raise Rejected(Reason.DUPLICATE, "contract already exists")
        inst = ContractInstance(cid, n, t, tuple(denoms), vk_raw.hex(), tuple(auth_hex))

        def effect():
            state.contracts[cid] = inst

        return effect

    def check_create(self, state: ChainState, tx: Transaction) -> Effect:
        inst = self._contract(state, tx.payload.get("contract"))
        if tx.payload.get("vk") != inst.vk_hex:
            raise Rejected(Reason.BAD_PARAMS, "auction must reference the contract's authority set")
        policy = tx.payload.get("policy", "vickrey")
        if policy not in self.policies:
            raise Rejected(Reason.BAD_PARAMS, f"unknown policy {policy!r}")
        t_commit, t_reveal = tx.get_int("t_commit"), tx.get_int("t_reveal")
        if t_commit >= t_reveal:
            raise Rejected(Reason.BAD_PARAMS, "t_commit must be below t_reveal")
        if t_commit <= state.height:
            raise Rejected(Reason.DEADLINE, f"t_commit {t_commit} is not after height {state.height}")
        commitment = tx.payload.get("commitment")
        # format only; the point is decoded when the worker opens it
        if not isinstance(commitment, str) or len(commitment) != 96:
            raise Rejected(Reason.MALFORMED, "commitment must be 48 hex-encoded bytes")
        aid = tx.digest
        auction = AuctionState(aid, tx.sender.hex(), inst.authority_ref, commitment, t_commit, t_reveal, policy)

        def effect():
            inst.auctions[aid] = auction

        return effect

    def check_deposit(self, state: ChainState, tx: Transaction) -> Effect:
        inst = self._contract(state, tx.payload.get("contract"))
        v = tx.get_int("value")
        if v not in inst.denominations:
            raise Rejected(Reason.BAD_DENOMINATION, f"{v} is not one of {inst.denominations}")
        sender = tx.sender.hex()
        if state.accounts.get(sender, 0) < v:
            raise Rejected(Reason.INSUFFICIENT_FUNDS, f"balance below {v}")
        raw = tx.get_hex("request")
        try:
            req = CredentialRequest.from_bytes(raw)
        except EncodingError as exc:
            raise Rejected(Reason.MALFORMED, f"credential request: {exc}") from None
        if req.value != v:
            raise Rejected(Reason.BAD_PROOF, "request value differs from deposited amount")
        if not verify_request(req):
            raise Rejected(Reason.BAD_PROOF, "credential request proof does not verify")
        rid = hashlib.sha256(raw).hexdigest()
        if rid in inst.requests:
            raise Rejected(Reason.DUPLICATE, "request already recorded")

        def effect():
            state.accounts[sender] -= v
            inst.buffer += v
            inst.requests[rid] = {"value": v, "request": raw.hex(), "height": state.height}

        return effect

    def check_commit(self, state: ChainState, tx: Transaction) -> Effect:
        inst, auction = self._tx_auction(state, tx)
        if state.height >= auction.t_commit:
            raise Rejected(Reason.DEADLINE, f"commit window closed at {auction.t_commit}")
        p = _decode_show(tx)
        if p.disclosed:
            raise Rejected(Reason.BAD_PROOF, "commit must not disclose the bid")
        zeta = p.zeta.to_bytes().hex()
        if zeta in auction.committed:
            raise Rejected(Reason.DUPLICATE, "tag already committed")
        ctx = commit_context(inst.contract_id, auction.auction_id)
        if not verify_show(inst.vk, bytes.fromhex(auction.auction_id), p, ctx):
            raise Rejected(Reason.BAD_PROOF, "credential show does not verify")
        height = state.height

        def effect():
            auction.committed[zeta] = height

        return effect

    def check_reveal(self, state: ChainState, tx: Transaction) -> Effect:
        inst, auction = self._tx_auction(state, tx)
        if not auction.t_commit <= state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"reveal window is [{auction.t_commit}, {auction.t_reveal})")
        v = tx.get_int("value")
        p = _decode_show(tx)
        if not p.disclosed or p.value != v:
            raise Rejected(Reason.BAD_PROOF, "reveal must disclose the stated value")
        zeta = p.zeta.to_bytes().hex()
        if zeta not in auction.committed:
            raise Rejected(Reason.UNKNOWN_ZETA, "tag was never committed")
        if zeta in auction.revealed:
            raise Rejected(Reason.DUPLICATE, "tag already revealed")
        ctx = reveal_context(inst.contract_id, auction.auction_id)
        if not verify_show(inst.vk, bytes.fromhex(auction.auction_id), p, ctx):
            raise Rejected(Reason.BAD_PROOF, "credential show does not verify")

        def effect():
            auction.revealed[zeta] = v

        return effect

    def check_open_min_price(self, state: ChainState, tx: Transaction) -> Effect:
        _, auction = self._tx_auction(state, tx)
        if tx.sender.hex() != auction.worker:
            raise Rejected(Reason.NOT_WORKER)
        if not auction.t_commit <= state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"opening window is [{auction.t_commit}, {auction.t_reveal})")
        if auction.opened_min_price is not None:
            raise Rejected(Reason.ALREADY_RESOLVED, "minimum price already opened")
        v0 = tx.get_int("value")
        if v0 < 0:
            raise Rejected(Reason.BAD_PROOF, "minimum price must be non-negative")
        try:
            blinding = scalar_from_bytes(tx.get_hex("blinding", 32))
            c = PedersenCommitment.from_bytes(bytes.fromhex(auction.min_price_commitment))
        except EncodingError as exc:
            raise Rejected(Reason.BAD_PROOF, str(exc)) from None
        if not verify_open(c, v0, blinding):
            raise Rejected(Reason.BAD_PROOF, "commitment does not open to the stated price")

        def effect():
            auction.opened_min_price = v0

        return effect

    def check_withdraw(self, state: ChainState, tx: Transaction) -> Effect:
        inst, auction = self._tx_auction(state, tx)
        if state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"withdrawals open at {auction.t_reveal}")
        p = _decode_show(tx)
        zeta = p.zeta.to_bytes().hex()
        if zeta in inst.spent:
            raise Rejected(Reason.DOUBLE_SPEND)
        if zeta not in auction.revealed:
            raise Rejected(Reason.UNKNOWN_ZETA, "only revealed tags can withdraw")
        if not p.disclosed or p.value != auction.revealed[zeta]:
            raise Rejected(Reason.BAD_PROOF, "withdraw must disclose the revealed value")
        addr = tx.get_hex("addr", 48)
        ctx = withdraw_context(inst.contract_id, auction.auction_id, addr)
        try:
            payee = g1_from_bytes(addr)
            binding = FiatShamirProof.from_bytes(tx.get_hex("binding"))
        except EncodingError as exc:
            raise Rejected(Reason.MALFORMED, str(exc)) from None
        if not verify_signature(payee, ctx + bytes.fromhex(zeta), binding):
            raise Rejected(Reason.BAD_PROOF, "payout address binding does not verify")
        if not verify_show(inst.vk, bytes.fromhex(auction.auction_id), p, ctx):
            raise Rejected(Reason.BAD_PROOF, "credential show does not verify")
        outcome = auction.effective_outcome(state.height)
        v = auction.revealed[zeta]
        if isinstance(outcome, Winner) and outcome.zeta.hex() == zeta:
            payout = self.policies[auction.policy](outcome)
        else:
            payout = v
        if payout > inst.buffer:
            raise Rejected(Reason.INSUFFICIENT_FUNDS, "contract buffer cannot cover the payout")
        payee_hex = addr.hex()
        policy = self.policies[auction.policy]

        def effect():
            auction.record(outcome, policy)
            inst.spent.add(zeta)
            inst.buffer -= payout
            state.accounts[payee_hex] = state.accounts.get(payee_hex, 0) + payout

        return effect

    def check_submit_work(self, state: ChainState, tx: Transaction) -> Effect:
        inst, auction = self._tx_auction(state, tx)
        if state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"work submission opens at {auction.t_reveal}")
        outcome = auction.effective_outcome(state.height)
        if not isinstance(outcome, Winner):
            raise Rejected(Reason.NOT_WINNER, "auction has no winner")
        if auction.work is not None:
            raise Rejected(Reason.ALREADY_RESOLVED, "work already bound")
        p = _decode_show(tx)
        zeta = p.zeta.to_bytes().hex()
        if zeta != outcome.zeta.hex():
            raise Rejected(Reason.NOT_WINNER)
        fc = FileCommitment(tx.get_hex("digest", 32), tx.get_hex("signer", 48), tx.get_hex("signature"))
        if not fc.verify(auction.auction_id):
            raise Rejected(Reason.BAD_PROOF, "file commitment signature does not verify")
        ctx = work_context(inst.contract_id, auction.auction_id, fc.digest, fc.signer)
        if not verify_show(inst.vk, bytes.fromhex(auction.auction_id), p, ctx):
            raise Rejected(Reason.BAD_PROOF, "credential show does not verify")
        binding = {"digest": fc.digest.hex(), "signer": fc.signer.hex(), "signature": fc.signature.hex()}
        policy = self.policies[auction.policy]

        def effect():
            auction.record(outcome, policy)
            auction.work = binding

        return effect

    def check_claim_work(self, state: ChainState, tx: Transaction) -> Effect:
        inst, auction = self._tx_auction(state, tx)
        if tx.sender.hex() != auction.worker:
            raise Rejected(Reason.NOT_WORKER)
        if state.height < auction.t_reveal:
            raise Rejected(Reason.DEADLINE, f"claims open at {auction.t_reveal}")
        if auction.worker_paid:
            raise Rejected(Reason.ALREADY_RESOLVED, "payment already claimed")
        if auction.status != "won" or auction.work is None:
            raise Rejected(Reason.WORK_REJECTED, "no work binding to claim against")
        evidence = tx.get_hex("evidence")
        if not self.work_predicate(auction, evidence):
            raise Rejected(Reason.WORK_REJECTED, "work acceptance predicate refused the claim")
        amount = auction.earmark
        if amount > inst.buffer:
            raise Rejected(Reason.INSUFFICIENT_FUNDS, "contract buffer cannot cover the payment")
        worker = auction.worker

        def effect():
            auction.worker_paid = True
            inst.buffer -= amount
            state.accounts[worker] = state.accounts.get(worker, 0) + amount

        return effect


# --------------------------------------------------------------------------
# Procedures
# --------------------------------------------------------------------------


def setup_tx(
    key: KeyPair,
    authority_publics: Sequence[PublicKey],
    vk: VerificationKey,
    denominations: Sequence[int] = DEFAULT_DENOMINATIONS,
    rng: RandomSource | None = None,
) -> Transaction:
    payload = {
        "n": vk.n,
        "t": vk.t,
        "denominations": list(denominations),
        "authorities": [pk.to_bytes().hex() for pk in authority_publics],
        "vk": vk.to_bytes().hex(),
    }
    return Transaction.build(Kind.SETUP, key, payload, rng)


def create_tx(
    worker: KeyPair,
    contract_id: str,
    vk: VerificationKey,
    commitment: PedersenCommitment,
    t_commit: int,
    t_reveal: int,
    policy: str = "vickrey",
    rng: RandomSource | None = None,
) -> Transaction:
    payload = {
        "contract": contract_id,
        "vk": vk.to_bytes().hex(),
        "commitment": commitment.to_bytes().hex(),
        "t_commit": t_commit,
        "t_reveal": t_reveal,
        "policy": policy,
    }
    return Transaction.build(Kind.CREATE, worker, payload, rng)


def deposit_tx(
    bidder: KeyPair, contract_id: str, request: CredentialRequest, rng: RandomSource | None = None
) -> Transaction:
    payload = {"contract": contract_id, "value": request.value, "request": request.to_bytes().hex()}
    return Transaction.build(Kind.DEPOSIT, bidder, payload, rng)


def commit_tx(
    credential: Credential, contract_id: str, auction_id: str, vk: VerificationKey, rng: RandomSource | None = None
) -> Transaction:
    p = show(credential, bytes.fromhex(auction_id), vk, False, commit_context(contract_id, auction_id), rng)
    payload = {"contract": contract_id, "auction": auction_id, "proof": p.to_bytes().hex()}
    return Transaction.build(Kind.COMMIT, KeyPair.generate(rng), payload, rng)


def reveal_tx(
    credential: Credential, contract_id: str, auction_id: str, vk: VerificationKey, rng: RandomSource | None = None
) -> Transaction:
    p = show(credential, bytes.fromhex(auction_id), vk, True, reveal_context(contract_id, auction_id), rng)
    payload = {"contract": contract_id, "auction": auction_id, "value": credential.value, "proof": p.to_bytes().hex()}
    return Transaction.build(Kind.REVEAL, KeyPair.generate(rng), payload, rng)


def open_min_price_tx(
    worker: KeyPair, contract_id: str, auction_id: str, v0: int, blinding: int, rng: RandomSource | None = None
) -> Transaction:
    payload = {"contract": contract_id, "auction": auction_id, "value": v0, "blinding": scalar_to_bytes(blinding).hex()}
    return Transaction.build(Kind.OPEN_MIN_PRICE, worker, payload, rng)


def withdraw_tx(
    credential: Credential,
    contract_id: str,
    auction_id: str,
    vk: VerificationKey,
    payee: KeyPair,
    rng: RandomSource | None = None,
) -> Transaction:
    ctx = withdraw_context(contract_id, auction_id, payee.address)
    p = show(credential, bytes.fromhex(auction_id), vk, True, ctx, rng)
    binding = sign(payee, ctx + p.zeta.to_bytes(), rng)
    payload = {
        "contract": contract_id,
        "auction": auction_id,
        "addr": payee.address.hex(),
        "proof": p.to_bytes().hex(),
        "binding": binding.to_bytes().hex(),
    }
    return Transaction.build(Kind.WITHDRAW, KeyPair.generate(rng), payload, rng)


def submit_work_tx(
    credential: Credential,
    contract_id: str,
    auction_id: str,
    vk: VerificationKey,
    file_digest: bytes,
    rng: RandomSource | None = None,
) -> Transaction:
    signer = KeyPair.generate(rng)
    fc = FileCommitment.create(auction_id, file_digest, signer, rng)
    ctx = work_context(contract_id, auction_id, fc.digest, fc.signer)
    p = show(credential, bytes.fromhex(auction_id), vk, False, ctx, rng)
    payload = {
        "contract": contract_id,
        "auction": auction_id,
        "proof": p.to_bytes().hex(),
        "digest": fc.digest.hex(),
        "signer": fc.signer.hex(),
        "signature": fc.signature.hex(),
    }
    return Transaction.build(Kind.SUBMIT_WORK, KeyPair.generate(rng), payload, rng)


def claim_work_tx(
    worker: KeyPair, contract_id: str, auction_id: str, evidence: bytes = b"", rng: RandomSource | None = None
) -> Transaction:
    payload = {"contract": contract_id, "auction": auction_id, "evidence": evidence.hex()}
    return Transaction.build(Kind.CLAIM_WORK, worker, payload, rng)


def respond_to_deposit(
    state: ChainState, contract_id: str, request_id: str, share: AuthorityKeyShare
) -> PartialCredential:
    """Authority side of issuance: sign only requests whose deposit is on chain."""
    inst = state.contracts.get(contract_id)
    if inst is None or request_id not in inst.requests:
        raise LookupError(f"no recorded deposit {request_id} in contract {contract_id}")
    req = CredentialRequest.from_bytes(bytes.fromhex(inst.requests[request_id]["request"]))
    return blind_sign(share, req)


def request_id(request: CredentialRequest) -> str:
    return hashlib.sha256(request.to_bytes()).hexdigest()
