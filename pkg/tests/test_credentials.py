import random
from itertools import combinations

import pytest

from sealedbid.credentials import (
    CredentialRequest,
    IntegrityError,
    ParameterError,
    PartialCredential,
    RequestRejected,
    ShowProof,
    ThresholdError,
    VerificationKey,
    aggregate_public_keys,
    blind_sign,
    issue,
    key_ceremony,
    lagrange_at_zero,
    prepare_request,
    show,
    threshold_subsets,
    unblind_and_aggregate,
    verify_request,
    verify_show,
    zeta_tag,
)
from sealedbid.crypto import ORDER, EncodingError, G1, scalar_to_bytes

AUCTION = b"\x01" * 32
OTHER_AUCTION = b"\x02" * 32


@pytest.fixture(scope="module")
def cred(ceremony):
    shares, vk = ceremony
    return issue(shares[:2], vk, 5, random.Random(9))


def test_lagrange_coefficients_interpolate_constant_term():
    # f(x) = 7 + 3x + 2x^2 over indices 2, 4, 5
    f = lambda x: (7 + 3 * x + 2 * x * x) % ORDER  # noqa: E731
    idx = [2, 4, 5]
    assert sum(c * f(i) for c, i in zip(lagrange_at_zero(idx), idx)) % ORDER == 7


@pytest.mark.parametrize("n,t", [(0, 0), (3, 0), (2, 3), (256, 2)])
def test_ceremony_rejects_bad_threshold(n, t):
    with pytest.raises(ParameterError):
        key_ceremony(n, t)


def test_every_t_subset_of_public_shares_gives_the_same_key(ceremony):
    shares, vk = ceremony
    assert all(s.is_consistent() for s in shares)
    for subset in combinations(shares, 2):
        assert aggregate_public_keys({s.index: s.public for s in subset}, 3, 2) == vk
    with pytest.raises(ThresholdError):
        aggregate_public_keys({1: shares[0].public}, 3, 2)


def test_threshold_issuance_all_subsets(ceremony, rng):
    shares, vk = ceremony
    req, secret = prepare_request(5, 77, rng)
    partials = {s.index: blind_sign(s, req) for s in shares}
    for subset in threshold_subsets(3, 2) + threshold_subsets(3, 3):
        c = unblind_and_aggregate([partials[i] for i in subset], secret, vk)
        assert c.verify(vk)
    for (i,) in threshold_subsets(3, 1):
        with pytest.raises(ThresholdError):
            unblind_and_aggregate([partials[i]], secret, vk)


def test_aggregation_parameter_errors(ceremony, rng):
    shares, vk = ceremony
    req, secret = prepare_request(2, 5, rng)
    p1 = blind_sign(shares[0], req)
    with pytest.raises(ParameterError):
        unblind_and_aggregate([p1, p1], secret, vk)
    with pytest.raises(ParameterError):
        unblind_and_aggregate([p1, PartialCredential(9, p1.enc_a, p1.enc_b)], secret, vk)
    bogus = PartialCredential(2, p1.enc_a, p1.enc_b + G1.generator())
    with pytest.raises(IntegrityError):
        unblind_and_aggregate([p1, bogus], secret, vk)


def test_blind_sign_is_deterministic(ceremony, rng):
    shares, _ = ceremony
    req, _ = prepare_request(10, 1234, rng)
    assert blind_sign(shares[1], req) == blind_sign(shares[1], req)


def test_request_hides_sequence_and_tags(ceremony, rng):
    s = 0x1234567890ABCDEF
    req, _ = prepare_request(5, s, rng)
    raw = req.to_bytes()
    assert scalar_to_bytes(s) not in raw
    assert s.to_bytes(8, "big") not in raw
    for aid in (AUCTION, OTHER_AUCTION):
        assert zeta_tag(s, aid).to_bytes() not in raw
    assert verify_request(req)


def test_same_value_different_sequence_gives_different_tags(ceremony, rng):
    shares, vk = ceremony
    a = issue(shares[:2], vk, 5, rng)
    b = issue(shares[:2], vk, 5, rng)
    pa, pb = show(a, AUCTION, vk, rng=rng), show(b, AUCTION, vk, rng=rng)
    assert pa.zeta != pb.zeta


def test_tampered_request_is_refused(ceremony, rng):
    shares, _ = ceremony
    req, _ = prepare_request(5, 42, rng)
    raw = bytearray(req.to_bytes())
    refused = 0
    for i in range(0, len(raw), 7):
        mutated = bytearray(raw)
        mutated[i] ^= 0x04
        try:
            bad = CredentialRequest.from_bytes(bytes(mutated))
        except EncodingError:
            refused += 1
            continue
        with pytest.raises(RequestRejected):
            blind_sign(shares[0], bad)
        refused += 1
    assert refused == len(range(0, len(raw), 7))


def test_request_with_other_value_is_refused(ceremony, rng):
    shares, _ = ceremony
    req, _ = prepare_request(5, 42, rng)
    forged = CredentialRequest(10, req.commitment, req.gamma, req.enc_a, req.enc_b, req.proof)
    assert not verify_request(forged)


@pytest.mark.parametrize("disclose", [False, True])
def test_show_roundtrip_and_binding(cred, ceremony, rng, disclose):
    _, vk = ceremony
    p = show(cred, AUCTION, vk, disclose, b"ctx", rng)
    assert p.disclosed == disclose
    assert verify_show(vk, AUCTION, p, b"ctx")
    assert not verify_show(vk, OTHER_AUCTION, p, b"ctx")
    assert not verify_show(vk, AUCTION, p, b"other")
    q = ShowProof.from_bytes(p.to_bytes())
    assert q == p and verify_show(vk, AUCTION, q, b"ctx")
    assert len(p.to_bytes()) == (409 if disclose else 423)


def test_disclosed_value_cannot_be_replaced(cred, ceremony, rng):
    _, vk = ceremony
    p = show(cred, AUCTION, vk, True, rng=rng)
    for v in (1, 2, 4, 6, 10, 100):
        forged = ShowProof(p.h, p.sigma, p.kappa, p.nu, p.zeta, p.proof, v)
        assert not verify_show(vk, AUCTION, forged)


def test_show_under_other_authorities_fails(cred, rng):
    _, other_vk = key_ceremony(3, 2, random.Random(77))
    p = show(cred, AUCTION, other_vk, rng=rng)
    assert not verify_show(other_vk, AUCTION, p)


def test_shows_are_rerandomized_but_tag_is_stable(cred, ceremony, rng):
    _, vk = ceremony
    a, b = show(cred, AUCTION, vk, rng=rng), show(cred, AUCTION, vk, rng=rng)
    assert a.h != b.h and a.sigma != b.sigma and a.kappa != b.kappa
    assert a.zeta == b.zeta == zeta_tag(cred.sequence, AUCTION)
    assert show(cred, OTHER_AUCTION, vk, rng=rng).zeta != a.zeta


def test_show_proof_single_byte_mutations_rejected(cred, ceremony, rng):
    _, vk = ceremony
    data = show(cred, AUCTION, vk, rng=rng).to_bytes()
    for i in range(0, len(data), 2):
        mutated = bytearray(data)
        mutated[i] ^= 0x01
        try:
            p = ShowProof.from_bytes(bytes(mutated))
        except EncodingError:
            continue
        assert not verify_show(vk, AUCTION, p), f"byte {i}"


def test_encodings_roundtrip(ceremony, rng):
    shares, vk = ceremony
    assert VerificationKey.from_bytes(vk.to_bytes()) == vk
    req, _ = prepare_request(20, 8, rng)
    assert CredentialRequest.from_bytes(req.to_bytes()) == req
    part = blind_sign(shares[2], req)
    assert PartialCredential.from_bytes(part.to_bytes()) == part
    with pytest.raises(EncodingError):
        VerificationKey.from_bytes(vk.to_bytes()[:-1])
    with pytest.raises(EncodingError):
        ShowProof.from_bytes(b"\x07" + b"\x00" * 400)
