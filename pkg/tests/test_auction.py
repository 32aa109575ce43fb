import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sealedbid.auction import NoWinner, RevealedBid, Winner, resolve_vickrey, vickrey_oracle


def bids_of(values, heights=None):
    heights = heights or list(range(len(values)))
    return [RevealedBid(bytes([i + 1]) * 4, v, h) for i, (v, h) in enumerate(zip(values, heights))]


@pytest.mark.parametrize("fn", [resolve_vickrey, vickrey_oracle])
def test_documented_examples(fn):
    b = bids_of([5, 3, 2])
    assert fn(b, 1) == Winner(b[0].zeta, 3, 5)
    b = bids_of([5])
    assert fn(b, 3) == Winner(b[0].zeta, 3, 5)
    assert fn(bids_of([2, 1]), 3) == NoWinner()
    assert fn([], 0) == NoWinner()
    b = bids_of([4, 4, 1], heights=[1, 2, 0])
    assert fn(b, 1) == Winner(b[0].zeta, 4, 4)


@pytest.mark.parametrize("fn", [resolve_vickrey, vickrey_oracle])
def test_same_block_tie_goes_to_smallest_tag(fn):
    b = [RevealedBid(b"\x09", 7, 3), RevealedBid(b"\x02", 7, 3), RevealedBid(b"\x05", 1, 0)]
    assert fn(b, 0) == Winner(b"\x02", 7, 7)


@pytest.mark.parametrize("fn", [resolve_vickrey, vickrey_oracle])
def test_parameter_errors(fn):
    with pytest.raises(ValueError):
        fn([RevealedBid(b"a", 1, 0), RevealedBid(b"a", 2, 1)], 0)
    with pytest.raises(ValueError):
        fn([RevealedBid(b"a", 0, 0)], 0)
    with pytest.raises(ValueError):
        fn([], -1)


bid_sets = st.lists(
    st.tuples(st.integers(1, 100), st.integers(0, 5)), max_size=20
).map(lambda xs: [RevealedBid(i.to_bytes(2, "big"), v, h) for i, (v, h) in enumerate(xs)])


@given(bid_sets, st.integers(0, 110))
def test_matches_oracle(bids, reserve):
    assert resolve_vickrey(bids, reserve) == vickrey_oracle(bids, reserve)


@given(bid_sets, st.integers(0, 110))
def test_clearing_price_bounds(bids, reserve):
    out = resolve_vickrey(bids, reserve)
    if isinstance(out, Winner):
        assert reserve <= out.price <= out.bid
        assert out.bid == max(b.value for b in bids)
    else:
        assert all(b.value < reserve for b in bids)


@given(bid_sets, st.integers(0, 110))
def test_input_order_does_not_matter(bids, reserve):
    shuffled = list(bids)
    random.Random(len(bids)).shuffle(shuffled)
    assert resolve_vickrey(bids, reserve) == resolve_vickrey(shuffled, reserve)


@given(bid_sets.filter(bool), st.integers(0, 100), st.integers(1, 50))
def test_raising_winning_bid_keeps_price(bids, reserve, raise_by):
    out = resolve_vickrey(bids, reserve)
    if not isinstance(out, Winner):
        return
    raised = [RevealedBid(b.zeta, b.value + raise_by, b.height) if b.zeta == out.zeta else b for b in bids]
    again = resolve_vickrey(raised, reserve)
    assert again == Winner(out.zeta, out.price, out.bid + raise_by)


@given(bid_sets.filter(lambda b: len(b) >= 2), st.integers(0, 100))
def test_loser_outbidding_winner_wins(bids, reserve):
    out = resolve_vickrey(bids, reserve)
    if not isinstance(out, Winner):
        return
    loser = next(b for b in bids if b.zeta != out.zeta)
    raised = [RevealedBid(b.zeta, out.bid + 1, b.height) if b.zeta == loser.zeta else b for b in bids]
    assert resolve_vickrey(raised, reserve).zeta == loser.zeta


def _utility(values, bids, i, reserve):
    b = bids_of(bids)
    out = resolve_vickrey(b, reserve)
    if isinstance(out, Winner) and out.zeta == b[i].zeta:
        return values[i] - out.price
    return 0


def test_truthful_bidding_is_dominant():
    rng = random.Random(2718)
    grid = range(1, 11)
    for _ in range(150):
        n = rng.randint(1, 4)
        values = [rng.choice(grid) for _ in range(n)]
        reserve = rng.randint(0, 10)
        for i in range(n):
            truthful = _utility(values, values, i, reserve)
            for deviation in grid:
                bids = list(values)
                bids[i] = deviation
                assert _utility(values, bids, i, reserve) <= truthful, (values, reserve, i, deviation)
