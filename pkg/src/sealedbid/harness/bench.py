"""Procedure vs checker timings and transaction sizes per contract operation.

Procedure time is the client building a complete signed transaction.
Checker time is the contract validating it against chain state, excluding
the ledger's sender-signature check and any serialization I/O.
"""
from __future__ import annotations

import csv
import hashlib
import io
import random
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .. import backend
from .. import contract as C
from ..credentials import key_ceremony, prepare_request, unblind_and_aggregate
from ..crypto import KeyPair, pedersen_commit, random_scalar
from ..ledger import Ledger, Transaction

OPERATIONS = ("Create", "Commit", "Reveal", "Withdraw", "SubmitWork")
MIN_ITERATIONS = 100


@dataclass(frozen=True)
class BenchRow:
    operation: str
    side: str
    mean_ms: float
    stddev_ms: float
    count: int
    size_bytes: int


@dataclass
class BenchmarkReport:
    rows: list[BenchRow]
    iterations: int
    backend: str

    def row(self, operation: str, side: str) -> BenchRow:
        for r in self.rows:
            if r.operation == operation and r.side == side:
                return r
        raise KeyError((operation, side))

    def to_table(self) -> str:
        head = ("operation", "side", "mean [ms]", "stddev [ms]", "runs", "size [kB]")
        body = [
            (r.operation, r.side, f"{r.mean_ms:.4f}", f"{r.stddev_ms:.4f}", str(r.count), f"{r.size_bytes / 1000:.3f}")
            for r in self.rows
        ]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = "  ".join(f"{{:<{w}}}" if i < 2 else f"{{:>{w}}}" for i, w in enumerate(widths))
        lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*row) for row in body]
        lines.append(f"backend: {self.backend}; {self.iterations} iterations per row")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["operation", "side", "mean_ms", "stddev_ms", "count", "size_bytes"])
        for r in self.rows:
            w.writerow([r.operation, r.side, f"{r.mean_ms:.6f}", f"{r.stddev_ms:.6f}", r.count, r.size_bytes])
        return buf.getvalue()


def _timed(fn: Callable[[], object]) -> tuple[float, object]:
    t0 = time.perf_counter_ns()
    out = fn()
    return (time.perf_counter_ns() - t0) / 1e6, out


def _rows(name: str, build: Callable[[int], Transaction], check: Callable[[Transaction], object], n: int) -> list[BenchRow]:
    proc_times, txs = [], []
    for i in range(n):
        dt, tx = _timed(lambda: build(i))
        proc_times.append(dt)
        txs.append(tx)
    sizes = [tx.size for tx in txs]  # encodes (and caches) outside the timed region
    check_times = []
    for tx in txs:
        dt, _ = _timed(lambda: check(tx))
        check_times.append(dt)

    def row(side, ts):
        return BenchRow(name, side, statistics.fmean(ts), statistics.stdev(ts) if len(ts) > 1 else 0.0, len(ts), max(sizes))

    return [row("procedure", proc_times), row("checker", check_times)]


def _normalize(ops: Sequence[str] | None) -> list[str]:
    if not ops:
        return list(OPERATIONS)
    lookup = {o.lower(): o for o in OPERATIONS}
    out = []
    for o in ops:
        key = o.strip().lower().replace("_", "").replace("-", "")
        if key not in lookup:
            raise ValueError(f"unknown operation {o!r}; choose from {', '.join(OPERATIONS)}")
        if lookup[key] not in out:
            out.append(lookup[key])
    return [o for o in OPERATIONS if o in out]


def run_benchmark(ops: Sequence[str] | None = None, iterations: int = MIN_ITERATIONS, seed: int = 0) -> BenchmarkReport:
    if iterations < MIN_ITERATIONS:
        raise ValueError(f"iterations must be at least {MIN_ITERATIONS}")
    selected = _normalize(ops)
    rng = random.Random(seed)
    rules = C.AuctionContract()

    shares, vk = key_ceremony(3, 2, rng)
    worker = KeyPair.generate(rng)
    bids = (10, 5, 2, 1)
    bidders = [KeyPair.generate(rng) for _ in bids]
    ledger = Ledger(rules, {b.address.hex(): 100 for b in bidders})
    state = ledger.state

    setup = C.setup_tx(KeyPair.generate(rng), [s.public for s in shares], vk, C.DEFAULT_DENOMINATIONS, rng)
    ledger.submit(setup)
    cid = setup.digest
    t_commit, t_reveal = 10, 20
    v0, r0 = 1, random_scalar(rng)
    create = C.create_tx(worker, cid, vk, pedersen_commit(v0, r0), t_commit, t_reveal, rng=rng)
    ledger.submit(create)
    aid = create.digest
    secrets = []
    for key, v in zip(bidders, bids):
        req, secret = prepare_request(v, random_scalar(rng), rng)
        ledger.submit(C.deposit_tx(key, cid, req, rng))
        secrets.append((C.request_id(req), secret))
    ledger.advance_block()
    if not all(r.applied for r in ledger.results):
        raise RuntimeError("benchmark fixture failed to set up: " + ", ".join(r.result for r in ledger.results))
    creds = [
        unblind_and_aggregate([C.respond_to_deposit(state, cid, rid, s) for s in shares[:2]], secret, vk)
        for rid, secret in secrets
    ]
    k = len(creds)
    rows: list[BenchRow] = []

    # commit phase
    if "Create" in selected:

        def build_create(i):
            blinding = random_scalar(rng)
            return C.create_tx(worker, cid, vk, pedersen_commit(v0, blinding), t_commit, t_reveal, rng=rng)

        rows += _rows("Create", build_create, lambda tx: rules.check(state, tx), iterations)
    if "Commit" in selected:
        rows += _rows("Commit", lambda i: C.commit_tx(creds[i % k], cid, aid, vk, rng), lambda tx: rules.check(state, tx), iterations)

    for c in creds:
        ledger.submit(C.commit_tx(c, cid, aid, vk, rng))
    ledger.advance_to(t_commit)

    # reveal phase
    if "Reveal" in selected:
        rows += _rows("Reveal", lambda i: C.reveal_tx(creds[i % k], cid, aid, vk, rng), lambda tx: rules.check(state, tx), iterations)

    for c in creds:
        ledger.submit(C.reveal_tx(c, cid, aid, vk, rng))
    ledger.submit(C.open_min_price_tx(worker, cid, aid, v0, r0, rng))
    ledger.advance_to(t_reveal)
    if not all(r.applied for r in ledger.results):
        raise RuntimeError("benchmark fixture failed to set up: " + ", ".join(r.result for r in ledger.results))

    # withdraw phase; creds[0] holds the highest bid and wins
    payee = KeyPair.generate(rng)
    if "Withdraw" in selected:
        rows += _rows(
            "Withdraw", lambda i: C.withdraw_tx(creds[i % k], cid, aid, vk, payee, rng), lambda tx: rules.check(state, tx), iterations
        )
    if "SubmitWork" in selected:
        digest = hashlib.sha256(b"encrypted replica").digest()
        rows += _rows(
            "SubmitWork", lambda i: C.submit_work_tx(creds[0], cid, aid, vk, digest, rng), lambda tx: rules.check(state, tx), iterations
        )
    return BenchmarkReport(rows, iterations, backend.BACKEND)
