"""Second-price (Vickrey) resolution with a reserve price.

Tie rule: among equal highest bids the earliest commit height wins, then the
smallest tag in byte order; the clearing price is then the tied value.
With a single bid at or above the reserve, the winner pays the reserve.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union


@dataclass(frozen=True)
class RevealedBid:
    zeta: bytes
    value: int
    height: int


@dataclass(frozen=True)
class NoWinner:
    pass


@dataclass(frozen=True)
class Winner:
    zeta: bytes
    price: int
    bid: int


Outcome = Union[NoWinner, Winner]


def _validate(bids: Sequence[RevealedBid], reserve: int) -> None:
    if reserve < 0:
        raise ValueError("reserve must be non-negative")
    seen = set()
    for b in bids:
        if b.value <= 0:
            raise ValueError(f"bid values must be positive, got {b.value}")
        if b.zeta in seen:
            raise ValueError("duplicate tag in bid set")
        seen.add(b.zeta)


def resolve_vickrey(bids: Sequence[RevealedBid], reserve: int) -> Outcome:
    _validate(bids, reserve)
    best = None
    for b in bids:
        if best is None or (-b.value, b.height, b.zeta) < (-best.value, best.height, best.zeta):
            best = b
    if best is None or best.value < reserve:
        return NoWinner()
    price = reserve
    for b in bids:
        if b is not best and b.value > price:
            price = b.value
    return Winner(best.zeta, price, best.value)


def vickrey_oracle(bids: Sequence[RevealedBid], reserve: int) -> Outcome:
    """Reference implementation: full sort and explicit cases."""
    if reserve < 0 or any(b.value < 1 for b in bids):
        raise ValueError("reserve must be non-negative and bids positive")
    if len({b.zeta for b in bids}) != len(bids):
        raise ValueError("duplicate tag in bid set")
    ranked = sorted(bids, key=lambda b: (-b.value, b.height, b.zeta))
    if not ranked:
        return NoWinner()
    top = ranked[0]
    if top.value < reserve:
        return NoWinner()
    if len(ranked) == 1:
        return Winner(top.zeta, reserve, top.value)
    runner_up = ranked[1].value
    return Winner(top.zeta, max(reserve, runner_up), top.value)
