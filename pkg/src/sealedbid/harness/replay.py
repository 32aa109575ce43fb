"""Replay a recorded trace from genesis and re-check it.

The trace is self-contained: each transaction line carries its full
canonical encoding, so replay rebuilds the chain without any scenario file
or secret. Recorded results, per-line metadata and the final state digest
must all match what replay produces, and the invariant sweep must pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..contract import AuctionContract
from ..crypto import CURVE_ID, EncodingError
from ..ledger import ENCODING_VERSION, InvariantViolation, Ledger, Transaction, read_trace
from .invariants import sweep

_TX_FIELDS = ("height", "index", "kind", "sender", "result", "payload_digest", "size", "tx")


@dataclass
class TraceReport:
    problems: list[str] = field(default_factory=list)
    transactions: int = 0
    final_height: int | None = None
    state_digest: str | None = None

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_trace(lines: Iterable[str]) -> TraceReport:
    report = TraceReport()
    try:
        records = read_trace(lines)
    except ValueError as exc:
        report.problems.append(str(exc))
        return report
    if len(records) < 2 or records[0].get("record") != "genesis" or records[-1].get("record") != "final":
        report.problems.append("trace must start with a genesis record and end with a final record")
        return report
    genesis, final, body = records[0], records[-1], records[1:-1]
    if genesis.get("version") != ENCODING_VERSION or genesis.get("curve") != CURVE_ID:
        report.problems.append(f"unsupported trace header {genesis.get('version')!r}/{genesis.get('curve')!r}")
        return report

    blocks: dict[int, list[tuple[int, dict, Transaction]]] = {}
    last = (0, -1)
    for n, rec in enumerate(body, start=2):
        missing = [k for k in _TX_FIELDS if k not in rec]
        if rec.get("record") != "tx" or missing:
            report.problems.append(f"line {n}: malformed transaction record (missing {missing})")
            return report
        try:
            tx = Transaction.decode(rec["tx"])
        except (EncodingError, ValueError, KeyError, TypeError) as exc:
            report.problems.append(f"line {n}: undecodable transaction ({exc})")
            return report
        declared = (rec["kind"], rec["sender"], rec["size"], rec["payload_digest"])
        actual = (tx.kind.value, tx.sender.hex(), tx.size, tx.payload_digest)
        if declared != actual:
            report.problems.append(f"line {n}: record metadata does not match the encoded transaction")
        pos = (rec["height"], rec["index"])
        if not isinstance(rec["height"], int) or pos <= last:
            report.problems.append(f"line {n}: records out of order")
            return report
        last = pos
        blocks.setdefault(rec["height"], []).append((n, rec, tx))
    report.transactions = len(body)

    try:
        ledger = Ledger(AuctionContract(), genesis.get("accounts", {}))
        for height in sorted(blocks):
            ledger.advance_to(height - 1)
            for _, _, tx in blocks[height]:
                ledger.submit(tx)
            results = ledger.advance_block()
            for (n, rec, _), res in zip(blocks[height], results):
                if rec["index"] != res.index:
                    report.problems.append(f"line {n}: recorded index {rec['index']} but replay placed it at {res.index}")
                if rec["result"] != res.result:
                    report.problems.append(f"line {n}: recorded {rec['result']} but replay gives {res.result}")
        target = final.get("height")
        if not isinstance(target, int) or target < ledger.current_height():
            report.problems.append(f"final record height {target!r} is before the last transaction")
        else:
            ledger.advance_to(target)
    except InvariantViolation as exc:
        report.problems.append(f"ledger invariant: {exc}")
        return report

    report.final_height = ledger.current_height()
    report.state_digest = ledger.state.digest()
    if final.get("state_digest") != report.state_digest:
        report.problems.append(f"final state digest mismatch: recorded {final.get('state_digest')}, replay {report.state_digest}")
    report.problems.extend(sweep(ledger))
    return report
