"""Scenario files: YAML documents scripting one auction from setup to payout.

Heights are absolute block heights; ``*_at: H`` means the transaction is
included in block ``H``. Any height field may also be ``never``.

.. code-block:: yaml

    name: honest                 # required
    seed: 7                      # drives every random choice in the run
    ceremony: {authorities: 3, threshold: 2}
    denominations: [1, 2, 3, 5, 10]        # default 1,2,5,10,20,50,100
    timeline: {t_commit: 8, t_reveal: 12}
    worker:
      min_price: 1
      balance: 0                 # optional, default 0
      create_at: 1               # optional, default 1 (Setup is always block 1)
      open_at: 8                 # default t_commit
      claim_at: 13               # default t_reveal + 1
    bidders:
      - name: alice
        balance: 10
        bid: 5
        deposit_at: 2            # default 2
        commit_at: 5             # default t_commit - 1
        reveal_at: 9             # default t_commit
        withdraw_at: 12          # default t_reveal
        submit_work_at: auto     # auto = submit at t_reveal if this bidder won
        double_spend: false      # true = a second Withdraw of the same tag in the same block
        issuers: [1, 2]          # authorities that answer the deposit, default 1..t
    expect:                      # optional; checked after the run
      outcome: {winner: alice, price: 3}   # or: failed
      payouts: {alice: 2}        # coins received at each bidder's payout address
      worker: 3
      locked: 0                  # coins left in the contract buffer
      rejections: [{actor: alice, kind: Withdraw, reason: DOUBLE_SPEND}]

Out-of-window heights are allowed on purpose: the contract rejects such
transactions and the trace shows why. Only causal order is enforced
(nothing before its deposit, reveal after commit).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..contract import DEFAULT_DENOMINATIONS
from ..ledger import Kind, Reason

NEVER = None


class ScenarioError(ValueError):
    """Schema violation; the message starts with the offending field path."""

    def __init__(self, path: str, problem: str):
        super().__init__(f"{path}: {problem}")
        self.path = path
        self.problem = problem


@dataclass(frozen=True)
class WorkerSpec:
    min_price: int
    balance: int
    create_at: int
    open_at: int | None
    claim_at: int | None


@dataclass(frozen=True)
class BidderSpec:
    name: str
    balance: int
    bid: int
    deposit_at: int
    commit_at: int | None
    reveal_at: int | None
    withdraw_at: int | None
    submit_work_at: int | str | None
    double_spend: bool
    issuers: tuple[int, ...]


@dataclass(frozen=True)
class Rejection:
    actor: str
    kind: Kind
    reason: Reason


@dataclass(frozen=True)
class Expectations:
    outcome: str | dict | None = None
    payouts: Mapping[str, int] = field(default_factory=dict)
    worker: int | None = None
    locked: int | None = None
    rejections: tuple[Rejection, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    n: int
    t: int
    denominations: tuple[int, ...]
    t_commit: int
    t_reveal: int
    worker: WorkerSpec
    bidders: tuple[BidderSpec, ...]
    expect: Expectations

    @property
    def last_height(self) -> int:
        hs = [self.t_reveal, self.worker.create_at]
        hs += [h for h in (self.worker.open_at, self.worker.claim_at) if isinstance(h, int)]
        for b in self.bidders:
            hs += [h for h in (b.deposit_at, b.commit_at, b.reveal_at, b.withdraw_at) if isinstance(h, int)]
            hs.append(b.submit_work_at if isinstance(b.submit_work_at, int) else self.t_reveal)
        return max(hs)


# --------------------------------------------------------------------------


def _mapping(obj: Any, path: str) -> Mapping:
    if not isinstance(obj, Mapping):
        raise ScenarioError(path, "must be a mapping")
    return obj


def _unknown(obj: Mapping, allowed: set[str], path: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ScenarioError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


def _int(obj: Mapping, key: str, path: str, default: Any = ..., minimum: int | None = None) -> int:
    if key not in obj:
        if default is ...:
            raise ScenarioError(f"{path}.{key}", "required field is missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{path}.{key}", f"must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{path}.{key}", f"must be >= {minimum}, got {v}")
    return v


def _height(obj: Mapping, key: str, path: str, default: int | None, extra: tuple[str, ...] = ()):
    if key not in obj:
        return default
    v = obj[key]
    if v == "never" or v in extra:
        return None if v == "never" else v
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        allowed = " or ".join(["a positive integer", "'never'", *(repr(e) for e in extra)])
        raise ScenarioError(f"{path}.{key}", f"must be {allowed}, got {v!r}")
    return v


def _after(value, floor: int, path: str, what: str) -> None:
    if isinstance(value, int) and value <= floor:
        raise ScenarioError(path, f"must be after {what} (height {floor}), got {value}")


def parse_scenario(doc: Any) -> Scenario:
    doc = _mapping(doc, "<root>")
    _unknown(doc, {"name", "seed", "ceremony", "denominations", "timeline", "worker", "bidders", "expect"}, "")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "required non-empty string")
    seed = _int(doc, "seed", "<root>", 0)

    cer = _mapping(doc.get("ceremony", {"authorities": 3, "threshold": 2}), "ceremony")
    _unknown(cer, {"authorities", "threshold"}, "ceremony")
    n = _int(cer, "authorities", "ceremony", minimum=1)
    if n > 255:
        raise ScenarioError("ceremony.authorities", "at most 255")
    t = _int(cer, "threshold", "ceremony", minimum=1)
    if t > n:
        raise ScenarioError("ceremony.threshold", f"must not exceed authorities ({n})")

    denoms = doc.get("denominations", list(DEFAULT_DENOMINATIONS))
    if not isinstance(denoms, list) or not denoms:
        raise ScenarioError("denominations", "must be a non-empty list")
    for i, d in enumerate(denoms):
        if isinstance(d, bool) or not isinstance(d, int) or d <= 0:
            raise ScenarioError(f"denominations[{i}]", f"must be a positive integer, got {d!r}")
        if i and d <= denoms[i - 1]:
            raise ScenarioError(f"denominations[{i}]", "must be strictly increasing")

    tl = _mapping(doc.get("timeline"), "timeline")
    _unknown(tl, {"t_commit", "t_reveal"}, "timeline")
    t_commit = _int(tl, "t_commit", "timeline", minimum=2)
    t_reveal = _int(tl, "t_reveal", "timeline")
    if t_reveal <= t_commit:
        raise ScenarioError("timeline.t_reveal", f"must exceed t_commit ({t_commit})")

    w = _mapping(doc.get("worker"), "worker")
    _unknown(w, {"min_price", "balance", "create_at", "open_at", "claim_at"}, "worker")
    worker = WorkerSpec(
        min_price=_int(w, "min_price", "worker", minimum=0),
        balance=_int(w, "balance", "worker", 0, minimum=0),
        create_at=_int(w, "create_at", "worker", 1, minimum=1),
        open_at=_height(w, "open_at", "worker", t_commit),
        claim_at=_height(w, "claim_at", "worker", t_reveal + 1),
    )
    if worker.create_at >= t_commit:
        raise ScenarioError("worker.create_at", f"must be before t_commit ({t_commit})")
    _after(worker.open_at, worker.create_at, "worker.open_at", "create_at")

    raw_bidders = doc.get("bidders", [])
    if not isinstance(raw_bidders, list):
        raise ScenarioError("bidders", "must be a list")
    bidders, names = [], set()
    fields = {"name", "balance", "bid", "deposit_at", "commit_at", "reveal_at", "withdraw_at",
              "submit_work_at", "double_spend", "issuers"}  # fmt: skip
    for i, b in enumerate(raw_bidders):
        path = f"bidders[{i}]"
        b = _mapping(b, path)
        _unknown(b, fields, path)
        bname = b.get("name")
        if not isinstance(bname, str) or not bname:
            raise ScenarioError(f"{path}.name", "required non-empty string")
        if bname in names or bname == "worker":
            raise ScenarioError(f"{path}.name", f"duplicate or reserved name {bname!r}")
        names.add(bname)
        deposit_at = _int(b, "deposit_at", path, 2, minimum=1)
        commit_at = _height(b, "commit_at", path, t_commit - 1)
        reveal_at = _height(b, "reveal_at", path, t_commit)
        withdraw_at = _height(b, "withdraw_at", path, t_reveal)
        submit_at = _height(b, "submit_work_at", path, "auto", extra=("auto",))
        for key, val in (("commit_at", commit_at), ("reveal_at", reveal_at), ("withdraw_at", withdraw_at), ("submit_work_at", submit_at)):
            _after(val, deposit_at, f"{path}.{key}", "deposit_at")
        if isinstance(commit_at, int):
            _after(reveal_at, commit_at, f"{path}.reveal_at", "commit_at")
        ds = b.get("double_spend", False)
        if not isinstance(ds, bool):
            raise ScenarioError(f"{path}.double_spend", "must be true or false")
        issuers = b.get("issuers", list(range(1, t + 1)))
        if (
            not isinstance(issuers, list)
            or any(isinstance(x, bool) or not isinstance(x, int) or not 1 <= x <= n for x in issuers)
            or len(set(issuers)) != len(issuers)
        ):
            raise ScenarioError(f"{path}.issuers", f"must be distinct authority indices in 1..{n}")
        bidders.append(
            BidderSpec(
                bname,
                _int(b, "balance", path, minimum=0),
                _int(b, "bid", path, minimum=1),
                deposit_at,
                commit_at,
                reveal_at,
                withdraw_at,
                submit_at,
                ds,
                tuple(issuers),
            )
        )

    return Scenario(name, seed, n, t, tuple(denoms), t_commit, t_reveal, worker, tuple(bidders), _parse_expect(doc.get("expect"), names))


def _parse_expect(raw: Any, names: set[str]) -> Expectations:
    if raw is None:
        return Expectations()
    raw = _mapping(raw, "expect")
    _unknown(raw, {"outcome", "payouts", "worker", "locked", "rejections"}, "expect")
    outcome = raw.get("outcome")
    if outcome is not None and outcome != "failed":
        outcome = _mapping(outcome, "expect.outcome")
        _unknown(outcome, {"winner", "price"}, "expect.outcome")
        if outcome.get("winner") not in names:
            raise ScenarioError("expect.outcome.winner", f"unknown bidder {outcome.get('winner')!r}")
        _int(outcome, "price", "expect.outcome", minimum=0)
        outcome = dict(outcome)
    payouts = _mapping(raw.get("payouts", {}), "expect.payouts")
    for k in payouts:
        if k not in names:
            raise ScenarioError(f"expect.payouts.{k}", "unknown bidder")
        _int(payouts, k, "expect.payouts", minimum=0)
    rejections = []
    for i, r in enumerate(raw.get("rejections", []) or []):
        path = f"expect.rejections[{i}]"
        r = _mapping(r, path)
        _unknown(r, {"actor", "kind", "reason"}, path)
        if r.get("actor") not in names | {"worker"}:
            raise ScenarioError(f"{path}.actor", f"unknown actor {r.get('actor')!r}")
        try:
            kind = Kind(r.get("kind"))
        except ValueError:
            raise ScenarioError(f"{path}.kind", f"unknown transaction kind {r.get('kind')!r}") from None
        try:
            reason = Reason(r.get("reason"))
        except ValueError:
            raise ScenarioError(f"{path}.reason", f"unknown reason code {r.get('reason')!r}") from None
        rejections.append(Rejection(r["actor"], kind, reason))
    return Expectations(
        outcome,
        dict(payouts),
        _int(raw, "worker", "expect", None, minimum=0),
        _int(raw, "locked", "expect", None, minimum=0),
        tuple(rejections),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read file ({exc.strerror})") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(str(path), f"not valid YAML ({exc})") from None
    return parse_scenario(doc)


def builtin_scenario_path(name: str) -> Path:
    path = Path(__file__).resolve().parent.parent / "scenarios" / f"{name}.yaml"
    if not path.is_file():
        known = sorted(p.stem for p in path.parent.glob("*.yaml"))
        raise FileNotFoundError(f"no built-in scenario {name!r}; available: {', '.join(known)}")
    return path
