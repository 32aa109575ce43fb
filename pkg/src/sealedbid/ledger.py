"""Deterministic simulated chain: block-height clock, coin accounts, ordered mempool.

The ledger knows nothing about auctions. It authenticates each transaction's
sender signature and hands it to a *rules* object (the contract), which
splits every transaction into a pure check and a mutation:

    effect = rules.check(state, tx)   # raises Rejected, never mutates
    effect()                          # applies the change

A transaction therefore either applies fully or leaves the state untouched.

Transaction encoding (version 1) is canonical JSON: sorted keys, no
whitespace, binary values as lowercase hex. ``size`` is the byte length of
that encoding.
"""
from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Iterator, Mapping, Protocol

from .crypto import CURVE_ID, EncodingError, FiatShamirProof, KeyPair, RandomSource, g1_from_bytes, sign, verify_signature

ENCODING_VERSION = 1


class Kind(str, enum.Enum):
    SETUP = "Setup"
    CREATE = "Create"
    DEPOSIT = "Deposit"
    COMMIT = "Commit"
    REVEAL = "Reveal"
    OPEN_MIN_PRICE = "OpenMinPrice"
    WITHDRAW = "Withdraw"
    SUBMIT_WORK = "SubmitWork"
    CLAIM_WORK = "ClaimWork"


class Reason(str, enum.Enum):
    DEADLINE = "DEADLINE"
    BAD_PROOF = "BAD_PROOF"
    UNKNOWN_ZETA = "UNKNOWN_ZETA"
    DOUBLE_SPEND = "DOUBLE_SPEND"
    BAD_DENOMINATION = "BAD_DENOMINATION"
    INSUFFICIENT_FUNDS = "INSUFFICIENT_FUNDS"
    NOT_WORKER = "NOT_WORKER"
    ALREADY_RESOLVED = "ALREADY_RESOLVED"
    BAD_SIGNATURE = "BAD_SIGNATURE"
    MALFORMED = "MALFORMED"
    BAD_PARAMS = "BAD_PARAMS"
    UNKNOWN_CONTRACT = "UNKNOWN_CONTRACT"
    UNKNOWN_AUCTION = "UNKNOWN_AUCTION"
    DUPLICATE = "DUPLICATE"
    NOT_WINNER = "NOT_WINNER"
    WORK_REJECTED = "WORK_REJECTED"


class Rejected(Exception):
    def __init__(self, reason: Reason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason
        self.detail = detail


class InvariantViolation(AssertionError):
    """A ledger-level invariant (e.g. coin conservation) failed; always a bug."""


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _check_payload(value: Any, path: str = "payload") -> None:
    if isinstance(value, bool) or value is None:
        raise TypeError(f"{path}: booleans and null are not allowed")
    if isinstance(value, (int, str)):
        return
    if isinstance(value, list):
        for i, v in enumerate(value):
            _check_payload(v, f"{path}[{i}]")
        return
    raise TypeError(f"{path}: unsupported type {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class Transaction:
    kind: Kind
    sender: bytes
    payload: Mapping[str, Any]
    signature: bytes

    def body(self) -> dict:
        return {"v": ENCODING_VERSION, "kind": self.kind.value, "sender": self.sender.hex(), "payload": dict(self.payload)}

    @cached_property
    def encoding(self) -> bytes:
        return canonical_json({**self.body(), "sig": self.signature.hex()})

    @property
    def size(self) -> int:
        return len(self.encoding)

    @cached_property
    def digest(self) -> str:
        return sha256_hex(self.encoding)

    @cached_property
    def payload_digest(self) -> str:
        return sha256_hex(canonical_json(dict(self.payload)))

    def signing_message(self) -> bytes:
        return hashlib.sha256(canonical_json(self.body())).digest()

    def __eq__(self, other):
        return isinstance(other, Transaction) and self.encoding == other.encoding

    def __hash__(self):
        return hash(self.encoding)

    @classmethod
    def build(
        cls, kind: Kind, key: KeyPair, payload: Mapping[str, Any], rng: RandomSource | None = None
    ) -> "Transaction":
        for k, v in payload.items():
            _check_payload(v, f"payload.{k}")
        unsigned = cls(kind, key.address, dict(payload), b"")
        sig = sign(key, unsigned.signing_message(), rng)
        return cls(kind, key.address, dict(payload), sig.to_bytes())

    @classmethod
    def decode(cls, data: bytes | str) -> "Transaction":
        obj = json.loads(data)
        if obj.get("v") != ENCODING_VERSION:
            raise EncodingError(f"unsupported transaction version {obj.get('v')!r}")
        tx = cls(Kind(obj["kind"]), bytes.fromhex(obj["sender"]), obj["payload"], bytes.fromhex(obj["sig"]))
        if tx.encoding != (data.encode() if isinstance(data, str) else bytes(data)):
            raise EncodingError("transaction is not canonically encoded")
        return tx

    def verify_signature(self) -> bool:
        try:
            public = g1_from_bytes(self.sender)
            sig = FiatShamirProof.from_bytes(self.signature)
        except EncodingError:
            return False
        return verify_signature(public, self.signing_message(), sig)

    # payload accessors raising MALFORMED instead of KeyError/ValueError

    def get_int(self, name: str) -> int:
        v = self.payload.get(name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise Rejected(Reason.MALFORMED, f"payload field {name!r} must be an integer")
        return v

    def get_hex(self, name: str, length: int | None = None) -> bytes:
        v = self.payload.get(name)
        try:
            raw = bytes.fromhex(v)
        except (TypeError, ValueError):
            raise Rejected(Reason.MALFORMED, f"payload field {name!r} must be hex") from None
        if length is not None and len(raw) != length:
            raise Rejected(Reason.MALFORMED, f"payload field {name!r} must be {length} bytes")
        return raw

    def get_str(self, name: str) -> str:
        v = self.payload.get(name)
        if not isinstance(v, str):
            raise Rejected(Reason.MALFORMED, f"payload field {name!r} must be a string")
        return v


@dataclass
class ChainState:
    height: int = 0
    accounts: dict[str, int] = field(default_factory=dict)
    contracts: dict[str, Any] = field(default_factory=dict)
    pending: list[Transaction] = field(default_factory=list)

    @property
    def buffer(self) -> int:
        return sum(c.buffer for c in self.contracts.values())

    def total_coins(self) -> int:
        return sum(self.accounts.values()) + self.buffer

    def balance_of(self, addr: bytes | str) -> int:
        key = addr.hex() if isinstance(addr, (bytes, bytearray)) else addr
        return self.accounts.get(key, 0)

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "accounts": {a: b for a, b in sorted(self.accounts.items()) if b},
            "contracts": {cid: c.to_json() for cid, c in sorted(self.contracts.items())},
            "pending": [tx.digest for tx in self.pending],
        }

    def snapshot(self) -> bytes:
        return canonical_json(self.to_json())

    def digest(self) -> str:
        return sha256_hex(self.snapshot())


class Rules(Protocol):
    def check(self, state: ChainState, tx: Transaction) -> Callable[[], None]: ...

    def end_block(self, state: ChainState) -> None: ...


@dataclass(frozen=True)
class Receipt:
    digest: str
    position: int


@dataclass(frozen=True)
class ApplyResult:
    height: int
    index: int
    tx: Transaction
    reason: Reason | None = None
    detail: str = ""

    @property
    def applied(self) -> bool:
        return self.reason is None

    @property
    def result(self) -> str:
        return "applied" if self.reason is None else f"rejected:{self.reason.value}"

    def record(self) -> dict:
        return {
            "record": "tx",
            "height": self.height,
            "index": self.index,
            "kind": self.tx.kind.value,
            "sender": self.tx.sender.hex(),
            "result": self.result,
            "payload_digest": self.tx.payload_digest,
            "size": self.tx.size,
            "tx": self.tx.encoding.decode(),
        }


class Ledger:
    """Single-writer chain. ``submit`` queues, ``advance_block`` applies."""

    def __init__(self, rules: Rules, genesis: Mapping[str, int] | None = None):
        self.rules = rules
        self.genesis = {a: int(b) for a, b in (genesis or {}).items()}
        if any(b < 0 for b in self.genesis.values()):
            raise ValueError("genesis balances must be non-negative")
        self.state = ChainState(accounts=dict(self.genesis))
        self.results: list[ApplyResult] = []
        self._supply = self.state.total_coins()

    def current_height(self) -> int:
        return self.state.height

    def balance_of(self, addr: bytes | str) -> int:
        return self.state.balance_of(addr)

    def submit(self, tx: Transaction) -> Receipt:
        self.state.pending.append(tx)
        return Receipt(tx.digest, len(self.state.pending) - 1)

    def advance_block(self) -> list[ApplyResult]:
        state = self.state
        state.height += 1
        batch, state.pending = state.pending, []
        out = []
        for i, tx in enumerate(batch):
            out.append(self._apply(tx, i))
        self.rules.end_block(state)
        if state.total_coins() != self._supply:
            raise InvariantViolation(f"coin supply changed: {self._supply} -> {state.total_coins()} at height {state.height}")
        self.results.extend(out)
        return out

    def advance_to(self, height: int) -> list[ApplyResult]:
        out = []
        while self.state.height < height:
            out.extend(self.advance_block())
        return out

    def _apply(self, tx: Transaction, index: int) -> ApplyResult:
        h = self.state.height
        if not tx.verify_signature():
            return ApplyResult(h, index, tx, Reason.BAD_SIGNATURE)
        try:
            effect = self.rules.check(self.state, tx)
        except Rejected as rej:
            return ApplyResult(h, index, tx, rej.reason, rej.detail)
        effect()
        return ApplyResult(h, index, tx)

    # trace --------------------------------------------------------------

    def trace(self) -> Iterator[dict]:
        yield {"record": "genesis", "version": ENCODING_VERSION, "curve": CURVE_ID, "accounts": dict(sorted(self.genesis.items()))}
        for r in self.results:
            yield r.record()
        yield {"record": "final", "height": self.state.height, "state_digest": self.state.digest()}

    def trace_lines(self) -> Iterator[str]:
        for rec in self.trace():
            yield json.dumps(rec, separators=(",", ":"))


def read_trace(lines: Iterable[str]) -> list[dict]:
    records = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace line {n}: not JSON ({exc.msg})") from None
    return records
