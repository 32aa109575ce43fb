"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.
"""
import copy
import random
import time
from collections import Counter

import pytest

from sealedbid import contract as C
from sealedbid.auction import NoWinner, RevealedBid, Winner, resolve_vickrey, vickrey_oracle
from sealedbid.credentials import (
    Credential,
    CredentialError,
    ShowProof,
    aggregate_signatures,
    blind_sign,
    key_ceremony,
    prepare_request,
    show,
    threshold_subsets,
    unblind,
    unblind_and_aggregate,
    verify_show,
)
from sealedbid.crypto import KeyPair, random_scalar
from sealedbid.harness import builtin_scenario_path, load_scenario, run_benchmark, run_scenario, verify_trace
from sealedbid.harness.invariants import sweep
from sealedbid.ledger import Kind, Ledger, Reason, Transaction

from world import World

WORK_KINDS = ("Commit", "Reveal", "Withdraw", "SubmitWork")


def fork(world):
    """Independent ledger starting from the world's current state and history."""
    ledger = Ledger(world.rules, world.ledger.genesis)
    ledger.state = copy.deepcopy(world.state)
    ledger.results = list(world.ledger.results)
    return ledger


# 1 -----------------------------------------------------------------------------


def test_threshold_correctness(criterion):
    rng = random.Random(1)
    started = time.perf_counter()
    checked, failures = 0, []
    aid = bytes(32)
    for n in range(1, 6):
        for t in range(1, n + 1):
            shares, vk = key_ceremony(n, t, rng)
            req, secret = prepare_request(7, random_scalar(rng), rng)
            partials = {s.index: blind_sign(s, req) for s in shares}
            for subset in threshold_subsets(n, t):
                cred = unblind_and_aggregate([partials[i] for i in subset], secret, vk)
                if not verify_show(vk, aid, show(cred, aid, vk, True, b"ctx", rng), b"ctx"):
                    failures.append((n, t, subset, "t-subset rejected"))
                checked += 1
            for subset in threshold_subsets(n, t - 1):
                try:
                    unblind_and_aggregate([partials[i] for i in subset], secret, vk)
                    failures.append((n, t, subset, "t-1 subset aggregated"))
                except CredentialError:
                    pass
                # bypass the count check: the interpolated signature must still fail to verify
                if subset:
                    sigma = aggregate_signatures({i: unblind(partials[i], secret) for i in subset})
                    forged = Credential(secret.base, sigma, secret.value, secret.sequence)
                    if forged.verify(vk) or verify_show(vk, aid, show(forged, aid, vk, True, b"", rng)):
                        failures.append((n, t, subset, "t-1 subset verified"))
                checked += 1
    elapsed = time.perf_counter() - started
    ok = not failures and elapsed < 60
    criterion(1, "threshold correctness, n <= 5", ok, f"{checked} subsets, {elapsed:.1f}s, failures={failures[:3]}")


# 2 -----------------------------------------------------------------------------


def test_vickrey_oracle_equivalence(criterion):
    rng = random.Random(2)
    started = time.perf_counter()
    mismatches, kinds = [], Counter()
    for i in range(10_000):
        k = 0 if i % 50 == 0 else rng.randint(0, 20)
        zetas = rng.sample(range(1 << 30), k)
        bids = [RevealedBid(z.to_bytes(48, "big"), rng.randint(1, 100), rng.randint(1, 30)) for z in zetas]
        reserve = rng.choice([0, 1, rng.randint(0, 100), 101])
        got, want = resolve_vickrey(bids, reserve), vickrey_oracle(bids, reserve)
        if got != want:
            mismatches.append((bids, reserve))
        eligible = [b for b in bids if b.value >= reserve]
        kinds["empty" if not bids else "reserve-only" if len(eligible) == 1 else "none" if not eligible else "multi"] += 1
    elapsed = time.perf_counter() - started
    covered = all(kinds[c] for c in ("empty", "reserve-only", "none", "multi"))
    ok = not mismatches and covered and elapsed < 10
    criterion(2, "resolve_vickrey == vickrey_oracle on 10^4 instances", ok, f"{dict(kinds)}, {elapsed:.1f}s")


# 3 -----------------------------------------------------------------------------


def test_honest_auction_golden(criterion):
    r = run_scenario(load_scenario(builtin_scenario_path("honest")))
    out = r.outcome
    supply = sum(r.ledger.genesis.values())
    facts = {
        "winner pays 3": isinstance(out, Winner) and r.winner_name() == "alice" and out.price == 3,
        "payouts 2/3/2": r.payouts() == {"alice": 2, "bob": 3, "carol": 2},
        "worker claims 3": r.worker_balance == 3,
        "nothing locked": r.locked == 0,
        "conservation": r.ledger.state.total_coins() == supply
        and sum(r.balances().values()) + sum(r.payouts().values()) + r.worker_balance == supply,
        "sweep": not r.violations,
        "golden digest": r.ledger.state.digest() == "cb70858470487e47c3938a886170c5ce453ef2db9fe3d2cfccc14981e9866000",
    }
    failed = [k for k, v in facts.items() if not v]
    criterion(3, "honest auction (5,3,2; v0=1; n=3,t=2)", not failed, f"failed: {failed}" if failed else "all facts hold")


# 4 -----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def resolved_world():
    """Bids 5,3,2; only the first two reveal; chain is past t_reveal and resolved."""
    w = World(seed=4)
    w.run_to_resolution(reveal=[0, 1])
    w.apply()
    return w


def test_no_double_payout(criterion, resolved_world):
    w = resolved_world
    rng = random.Random(4)
    thief = KeyPair.generate(rng)
    pool = []
    for i in range(3):
        for j in range(3):
            payee = w.payees[i] if j == 0 else KeyPair.generate(rng)
            pool.append(("withdraw", i, C.withdraw_tx(w.creds[i], w.cid, w.aid, w.vk, payee, rng)))
        honest = pool[-1][2]
        stolen = Transaction.build(Kind.WITHDRAW, thief, {**honest.payload, "addr": thief.address.hex()}, rng)
        pool.append(("stolen", i, stolen))
    pool += [("work", 0, w.submit_work(0)), ("claim", None, w.claim()), ("claim", None, w.claim())]

    problems = []
    for trial in range(1000):
        ledger = fork(w)
        picks = [rng.choice(pool) for _ in range(rng.randint(2, 8))]
        rng.shuffle(picks)
        cuts = sorted(rng.sample(range(1, len(picks)), k=min(rng.randint(0, 2), len(picks) - 1)))
        for lo, hi in zip([0] + cuts, cuts + [len(picks)]):
            for _, _, tx in picks[lo:hi]:
                ledger.submit(tx)
            ledger.advance_block()
        paid = Counter()
        for res in ledger.results[len(w.ledger.results):]:
            if res.applied and res.tx.kind is Kind.WITHDRAW:
                paid[ShowProof.from_bytes(bytes.fromhex(res.tx.payload["proof"])).zeta.to_bytes()] += 1
        if any(k > 1 for k in paid.values()) or len(paid) > 2:
            problems.append((trial, "double payout"))
        problems += [(trial, v) for v in sweep(ledger)]
        if problems:
            break
    criterion(4, "no tag pays out twice over 10^3 interleavings", not problems, f"first problems: {problems[:3]}")


# 5 -----------------------------------------------------------------------------


def test_temporal_safety(criterion):
    rng = random.Random(5)
    w = World(seed=5, t_commit=30, t_reveal=31)
    windows = [(3, 5), (4, 8), (6, 7), (5, 11)]
    auctions = []
    creates = [w.create_tx(tc, tr) for tc, tr in windows]
    assert all(r.applied for r in w.apply(*creates))
    for (tc, tr), create in zip(windows, creates):
        aid = create.digest
        txs = [(w.commit(i, aid), w.reveal(i, aid)) for i in range(len(w.creds))]
        auctions.append((aid, tc, tr, txs))

    problems, counts = [], Counter()
    for trial in range(1000):
        aid, tc, tr, txs = rng.choice(auctions)
        ledger = fork(w)
        start = ledger.current_height()
        plan = {}
        for commit, reveal in rng.sample(txs, rng.randint(1, 2)):
            hc = rng.randint(start + 1, tr + 2)
            hr = rng.randint(start + 1, tr + 2)
            plan.setdefault(hc, []).append(commit)
            plan.setdefault(hr, []).append(reveal)
        for h in sorted(plan):
            ledger.advance_to(h - 1)
            for tx in plan[h]:
                ledger.submit(tx)
            for res in ledger.advance_block():
                kind, applied = res.tx.kind, res.applied
                counts[(kind.value, applied)] += 1
                if kind is Kind.COMMIT:
                    if applied != (h < tc):
                        problems.append((trial, "commit", h, tc, res.result))
                else:
                    in_window = tc <= h < tr
                    if applied and not in_window:
                        problems.append((trial, "reveal applied outside window", h, tc, tr))
                    if not in_window and res.reason is not Reason.DEADLINE:
                        problems.append((trial, "reveal outside window not DEADLINE", h, res.result))
        problems += [(trial, v) for v in sweep(ledger)]
        if problems:
            break
    ok = not problems and counts[("Commit", False)] and counts[("Reveal", True)] and counts[("Reveal", False)]
    criterion(5, "temporal safety over 10^3 schedules", bool(ok), f"{dict(counts)}; problems {problems[:3]}")


# 6 -----------------------------------------------------------------------------


def test_dropout_penalty(criterion):
    r = run_scenario(load_scenario(builtin_scenario_path("dropout")))
    dave_rejected = ("dave", Kind.WITHDRAW, "UNKNOWN_ZETA") in r.rejections()
    w = World(seed=6)
    w.run_to_resolution(reveal=[0, 1])
    retries = [w.withdraw(2) for _ in range(5)]
    results = w.apply(*[w.withdraw(0), w.withdraw(1)] + retries)
    later = w.apply(w.withdraw(2))
    unpaid = all(res.reason is Reason.UNKNOWN_ZETA for res in results[2:] + later)
    facts = {
        "scenario passes": r.passed,
        "dave Withdraw rejected": dave_rejected,
        "dave's 10 locked": r.locked == 10 and r.payouts()["dave"] == 0,
        "world: every retry rejected": unpaid,
        "world: buffer keeps the 2": w.inst.buffer == 2 + w.auction.earmark and w.state.balance_of(w.payees[2].address.hex()) == 0,
    }
    failed = [k for k, v in facts.items() if not v]
    criterion(6, "unrevealed tag never withdraws, value stays in buffer", not failed, f"failed: {failed}" if failed else "exact")


# 7 -----------------------------------------------------------------------------

_ZETA_AT = 1 + 8 + 48 + 48 + 96 + 48  # offset of the tag in a disclosed show


def test_reveal_forgery_suite(criterion):
    rng = random.Random(7)
    w = World(seed=7, t_commit=6, t_reveal=12)
    other = w.create_tx(6, 12)
    w.apply_one(other)
    w.apply(*[w.commit(i) for i in range(3)] + [w.commit(i, other.digest) for i in range(3)])
    w.next_block_is(w.t_commit)

    honest = [w.reveal(i) for i in range(3) for _ in range(3)]
    foreign = [w.reveal(i, other.digest) for i in range(3)]
    commits = [w.commit(i) for i in range(3)]
    zetas = [bytes.fromhex(tx.payload["proof"])[_ZETA_AT:_ZETA_AT + 48] for tx in honest[::3]]

    def rebuild(base, **changes):
        return Transaction.build(Kind.REVEAL, KeyPair.generate(rng), {**base.payload, **changes}, rng)

    def mutate(kind):
        base = rng.choice(honest)
        proof = bytearray.fromhex(base.payload["proof"])
        v = base.payload["value"]
        if kind == "value":
            return rebuild(base, value=rng.choice([x for x in range(0, 101) if x != v]))
        if kind == "value-in-proof":
            alt = rng.choice([x for x in range(1, 101) if x != v])
            proof[1:9] = alt.to_bytes(8, "big")
            return rebuild(base, value=alt, proof=proof.hex())
        if kind == "swap-zeta":
            proof[_ZETA_AT:_ZETA_AT + 48] = rng.choice([z for z in zetas if z != proof[_ZETA_AT:_ZETA_AT + 48]])
            return rebuild(base, proof=proof.hex())
        if kind == "cross-auction":
            src = rng.choice(foreign)
            return rebuild(src, auction=w.aid)
        if kind == "commit-proof":
            src = rng.choice(commits)
            return rebuild(src, value=rng.randint(1, 100))
        if kind == "other-contract":
            return rebuild(base, contract="ab" * 32)
        if kind == "bitflip":
            i = rng.randrange(len(proof))
            proof[i] ^= 1 << rng.randrange(8)
            return rebuild(base, proof=proof.hex())
        raise AssertionError(kind)

    kinds = ["value", "value-in-proof", "swap-zeta", "cross-auction", "commit-proof", "other-contract", "bitflip"]
    batch = [(kinds[i % len(kinds)], mutate(kinds[i % len(kinds)])) for i in range(1000)]
    def state_without_height():
        view = w.state.to_json()
        view.pop("height")
        return view

    before = state_without_height()
    for _, tx in batch:
        w.ledger.submit(tx)
    results = w.ledger.advance_block()
    accepted = [(k, r.result) for (k, _), r in zip(batch, results) if r.applied]
    reasons = Counter(r.reason.value for r in results if not r.applied)
    unchanged = state_without_height() == before
    ok = not accepted and unchanged and len(results) == 1000
    criterion(7, "10^3 mutated Reveals all rejected", ok, f"{dict(reasons)}; accepted {accepted[:3]}")
    # the honest reveals still work afterwards
    assert all(r.applied for r in w.apply(*honest[::3]))


# 8 / 9 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def bench_report():
    started = time.perf_counter()
    report = run_benchmark(iterations=100, seed=8)
    return report, time.perf_counter() - started


def test_benchmark_shape(criterion, bench_report):
    report, elapsed = bench_report
    checker = {op: report.row(op, "checker").mean_ms for op in ("Create",) + WORK_KINDS}
    procedure = {op: report.row(op, "procedure").mean_ms for op in WORK_KINDS}
    a = checker["Create"] * 100 <= checker["Commit"]
    b = all(checker[op] > procedure[op] for op in WORK_KINDS)
    band = [checker[op] for op in WORK_KINDS]
    c = max(band) <= 3 * min(band)
    ok = a and b and c and elapsed < 300 and report.iterations >= 100
    detail = (
        f"a={a} Create {checker['Create']:.4f} ms vs Commit {checker['Commit']:.2f} ms; "
        f"b={b} " + ", ".join(f"{op} {checker[op]:.2f}>{procedure[op]:.2f}" for op in WORK_KINDS)
        + f"; c={c} band {min(band):.2f}-{max(band):.2f} ms; {elapsed:.0f}s, backend {report.backend}"
    )
    criterion(8, "benchmark cost structure", ok, detail)


def test_transaction_sizes(criterion, bench_report):
    report, _ = bench_report
    sizes = {op: report.row(op, "checker").size_bytes for op in ("Create",) + WORK_KINDS}
    ok = all(1000 <= sizes[op] <= 10_000 for op in WORK_KINDS) and 500 <= sizes["Create"] <= 5000
    criterion(9, "transaction sizes", ok, ", ".join(f"{op} {s} B" for op, s in sizes.items()))


# 10 ----------------------------------------------------------------------------


def test_trace_replay_determinism(criterion):
    details, ok = [], True
    for name in ("honest", "dropout", "double_spend", "no_show_worker"):
        r = run_scenario(load_scenario(builtin_scenario_path(name)))
        lines = r.trace_lines()
        report = verify_trace(lines)
        same = report.ok and report.state_digest == r.ledger.state.digest()
        again = verify_trace(lines)
        same = same and again.state_digest == report.state_digest
        ok = ok and same
        details.append(f"{name}={'ok' if same else report.problems[:2]}")
    criterion(10, "trace replay reproduces the final state digest", ok, ", ".join(details))
