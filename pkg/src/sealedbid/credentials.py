"""Threshold blind credentials over two attributes.

A credential is a randomizable signature ``(h, sigma)`` with
``sigma = (x + y_s * s + y_v * v) * h`` on a private sequence number ``s``
and a public value ``v``. Signing keys are Shamir-shared by a dealer among
``n`` authorities; any ``t`` partial signatures combine by Lagrange
interpolation at zero into a signature under the joint verification key.

Issuance is blind in ``s``: the holder sends a Pedersen-style commitment to
``(s, v)`` plus an ElGamal encryption of ``s * h`` and a proof tying them
together. Authorities sign the ciphertext homomorphically.

Showing a credential re-randomizes it and proves, in zero knowledge, that
the same ``s`` sits inside the credential and inside the tag
``zeta = s * H("auction", auction_id)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .crypto import (
    G1,
    G2,
    G1Table,
    G2Table,
    ORDER,
    EncodingError,
    Equation,
    FiatShamirProof,
    RandomSource,
    g1_from_bytes,
    g2_from_bytes,
    group,
    hash_to_group,
    pairing_check,
    prove_linear,
    random_scalar,
    verify_linear,
)


class CredentialError(Exception):
    """Base class for issuance failures."""


class ParameterError(CredentialError, ValueError):
    pass


class ThresholdError(CredentialError):
    pass


class IntegrityError(CredentialError):
    pass


class RequestRejected(CredentialError):
    pass


REQUEST_LABEL = b"credential-request"
SHOW_LABEL = b"show"
SHOW_DISCLOSED_LABEL = b"show-disclosed"


@lru_cache(maxsize=None)
def attribute_bases() -> tuple[G1Table, G1Table]:
    """G1 bases for the commitment to (s, v) in a credential request."""
    return (
        G1Table(hash_to_group(b"attribute", b"s")),
        G1Table(hash_to_group(b"attribute", b"v")),
    )


@lru_cache(maxsize=512)
def auction_base(auction_id: bytes) -> G1Table:
    return G1Table(hash_to_group(b"auction", auction_id))


def zeta_tag(sequence: int, auction_id: bytes) -> G1:
    return auction_base(auction_id).mul(sequence)


def lagrange_at_zero(indices: Sequence[int]) -> list[int]:
    """Lagrange coefficients for interpolating at x=0 from x-coordinates ``indices``."""
    coeffs = []
    for i in indices:
        num, den = 1, 1
        for j in indices:
            if j != i:
                num = num * (-j) % ORDER
                den = den * (i - j) % ORDER
        coeffs.append(num * pow(den, -1, ORDER) % ORDER)
    return coeffs


# --------------------------------------------------------------------------
# Keys
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PublicKey:
    """G2 images of the signing exponents (x, y_s, y_v)."""

    alpha: G2
    beta_s: G2
    beta_v: G2

    def to_bytes(self) -> bytes:
        return self.alpha.to_bytes() + self.beta_s.to_bytes() + self.beta_v.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        if len(data) != 288:
            raise EncodingError(f"public key: expected 288 bytes, got {len(data)}")
        return cls(g2_from_bytes(data[:96]), g2_from_bytes(data[96:192]), g2_from_bytes(data[192:]))


@dataclass(frozen=True)
class AuthorityKeyShare:
    index: int
    x: int
    y_s: int
    y_v: int
    public: PublicKey

    def is_consistent(self) -> bool:
        g2 = group().g2_table
        return (
            g2.mul(self.x) == self.public.alpha
            and g2.mul(self.y_s) == self.public.beta_s
            and g2.mul(self.y_v) == self.public.beta_v
        )


@dataclass(frozen=True)
class VerificationKey:
    """The joint key, equal to the interpolation at zero of any t public shares."""

    alpha: G2
    beta_s: G2
    beta_v: G2
    n: int
    t: int

    def to_bytes(self) -> bytes:
        return bytes([self.n, self.t]) + PublicKey(self.alpha, self.beta_s, self.beta_v).to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerificationKey":
        if len(data) != 290:
            raise EncodingError(f"verification key: expected 290 bytes, got {len(data)}")
        pk = PublicKey.from_bytes(data[2:])
        n, t = data[0], data[1]
        if not 0 < t <= n:
            raise EncodingError("verification key has invalid threshold")
        return cls(pk.alpha, pk.beta_s, pk.beta_v, n, t)

    @cached_property
    def tables(self) -> tuple[G2Table, G2Table, G2Table]:
        return G2Table(self.alpha), G2Table(self.beta_s), G2Table(self.beta_v)


@lru_cache(maxsize=64)
def verification_key_from_bytes(data: bytes) -> VerificationKey:
    """Decode and cache; checkers see the same key on every transaction."""
    return VerificationKey.from_bytes(data)


def _check_threshold(n: int, t: int) -> None:
    if not (isinstance(n, int) and isinstance(t, int)) or not 0 < t <= n:
        raise ParameterError(f"need 0 < t <= n, got n={n}, t={t}")
    if n > 255:
        raise ParameterError("at most 255 authorities are supported")


def key_ceremony(
    n: int, t: int, rng: RandomSource | None = None
) -> tuple[list[AuthorityKeyShare], VerificationKey]:
    """Dealer-based sharing of the signing key among ``n`` authorities with threshold ``t``.

    The dealer's polynomials are local to this call and discarded on return.
    """
    _check_threshold(n, t)
    g2 = group().g2_table
    polys = [[random_scalar(rng) for _ in range(t)] for _ in range(3)]

    def evaluate(poly, x):
        acc = 0
        for coeff in reversed(poly):
            acc = (acc * x + coeff) % ORDER
        return acc

    shares = []
    for i in range(1, n + 1):
        x, ys, yv = (evaluate(p, i) for p in polys)
        shares.append(AuthorityKeyShare(i, x, ys, yv, PublicKey(g2.mul(x), g2.mul(ys), g2.mul(yv))))
    vk = VerificationKey(g2.mul(polys[0][0]), g2.mul(polys[1][0]), g2.mul(polys[2][0]), n, t)
    return shares, vk


def aggregate_public_keys(publics: dict[int, PublicKey], n: int, t: int) -> VerificationKey:
    """Interpolate the joint key from at least ``t`` public shares keyed by authority index."""
    _check_threshold(n, t)
    if len(publics) < t:
        raise ThresholdError(f"need {t} public shares, got {len(publics)}")
    idx = sorted(publics)[:t]
    lam = lagrange_at_zero(idx)
    parts = [publics[i] for i in idx]
    return VerificationKey(
        G2.msm([p.alpha for p in parts], lam),
        G2.msm([p.beta_s for p in parts], lam),
        G2.msm([p.beta_v for p in parts], lam),
        n,
        t,
    )


# --------------------------------------------------------------------------
# Issuance
# --------------------------------------------------------------------------


def _u64(v: int) -> bytes:
    return int(v).to_bytes(8, "big")


@dataclass(frozen=True)
class CredentialRequest:
    """What a bidder publishes in Deposit: nothing here is a function of ``s`` alone."""

    value: int
    commitment: G1
    gamma: G1
    enc_a: G1
    enc_b: G1
    proof: FiatShamirProof

    def to_bytes(self) -> bytes:
        return (
            _u64(self.value)
            + self.commitment.to_bytes()
            + self.gamma.to_bytes()
            + self.enc_a.to_bytes()
            + self.enc_b.to_bytes()
            + self.proof.to_bytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "CredentialRequest":
        if len(data) < 8 + 4 * 48:
            raise EncodingError("truncated credential request")
        pts = [g1_from_bytes(data[8 + 48 * i : 56 + 48 * i]) for i in range(4)]
        proof = FiatShamirProof.from_bytes(data[8 + 4 * 48 :])
        return cls(int.from_bytes(data[:8], "big"), *pts, proof)

    @cached_property
    def base(self) -> G1:
        """The signature base h, derived from the commitment so all authorities agree on it."""
        return hash_to_group(b"credential-base", self.commitment.to_bytes())

    def equations(self) -> list[Equation]:
        hs, hv = attribute_bases()
        g1 = group().g1_table
        # witnesses: 0 = blinding o, 1 = s, 2 = ElGamal randomness k
        return [
            Equation(self.commitment - hv.mul(self.value), (g1, hs), (0, 1)),
            Equation(self.enc_a, (g1,), (2,)),
            Equation(self.enc_b, (self.gamma, self.base), (2, 1)),
        ]


@dataclass(frozen=True)
class IssuanceSecret:
    """Holder-side state kept between request and aggregation."""

    sequence: int
    value: int
    elgamal_key: int
    base: G1


def prepare_request(
    value: int, sequence: int, rng: RandomSource | None = None
) -> tuple[CredentialRequest, IssuanceSecret]:
    if value < 0:
        raise ParameterError("value must be non-negative")
    ctx = group()
    hs, hv = attribute_bases()
    o = random_scalar(rng)
    d = random_scalar(rng)
    k = random_scalar(rng)
    commitment = G1Table.msm([ctx.g1_table, hs, hv], [o, sequence, value])
    base = hash_to_group(b"credential-base", commitment.to_bytes())
    gamma = ctx.g1_table.mul(d)
    enc_a = ctx.g1_table.mul(k)
    enc_b = G1.msm([gamma, base], [k, sequence])
    stub = CredentialRequest(value, commitment, gamma, enc_a, enc_b, FiatShamirProof(REQUEST_LABEL, 0, ()))
    proof = prove_linear(REQUEST_LABEL, stub.equations(), [o, sequence, k], _u64(value), rng)
    req = CredentialRequest(value, commitment, gamma, enc_a, enc_b, proof)
    return req, IssuanceSecret(sequence, value, d, base)


def verify_request(req: CredentialRequest) -> bool:
    if req.commitment.is_identity() or req.gamma.is_identity():
        return False
    if len(req.proof.responses) != 3:
        return False
    return verify_linear(req.proof, req.equations(), _u64(req.value), REQUEST_LABEL)


@dataclass(frozen=True)
class PartialCredential:
    index: int
    enc_a: G1
    enc_b: G1

    def to_bytes(self) -> bytes:
        return bytes([self.index]) + self.enc_a.to_bytes() + self.enc_b.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PartialCredential":
        if len(data) != 97:
            raise EncodingError(f"partial credential: expected 97 bytes, got {len(data)}")
        return cls(data[0], g1_from_bytes(data[1:49]), g1_from_bytes(data[49:]))


def blind_sign(share: AuthorityKeyShare, req: CredentialRequest) -> PartialCredential:
    """Sign the encrypted attribute without learning it. Deterministic in ``req``."""
    if not verify_request(req):
        raise RequestRejected("credential request proof does not verify")
    h = req.base
    a = req.enc_a * share.y_s
    b = G1.msm([h, req.enc_b], [(share.x + share.y_v * req.value) % ORDER, share.y_s])
    return PartialCredential(share.index, a, b)


@dataclass(frozen=True)
class Credential:
    h: G1
    sigma: G1
    value: int
    sequence: int = field(repr=False)

    def verify(self, vk: VerificationKey) -> bool:
        if self.h.is_identity():
            return False
        alpha, beta_s, beta_v = vk.tables
        agg = alpha.point + G2Table.msm([beta_s, beta_v], [self.sequence, self.value])
        return pairing_check([(self.h, agg), (-self.sigma, group().g2)])


def unblind(partial: PartialCredential, secret: IssuanceSecret) -> G1:
    return partial.enc_b - partial.enc_a * secret.elgamal_key


def aggregate_signatures(sigmas: dict[int, G1]) -> G1:
    """Lagrange-combine signature shares keyed by authority index. No threshold check."""
    if not sigmas:
        raise ThresholdError("no signature shares to aggregate")
    idx = sorted(sigmas)
    return G1.msm([sigmas[i] for i in idx], lagrange_at_zero(idx))


def unblind_and_aggregate(
    partials: Iterable[PartialCredential], secret: IssuanceSecret, vk: VerificationKey
) -> Credential:
    partials = list(partials)
    indices = [p.index for p in partials]
    if len(set(indices)) != len(indices):
        raise ParameterError(f"duplicate authority indices: {sorted(indices)}")
    if any(not 1 <= i <= vk.n for i in indices):
        raise ParameterError(f"authority index outside 1..{vk.n}")
    if len(partials) < vk.t:
        raise ThresholdError(f"need {vk.t} partial credentials, got {len(partials)}")
    sigma = aggregate_signatures({p.index: unblind(p, secret) for p in partials})
    cred = Credential(secret.base, sigma, secret.value, secret.sequence)
    if not cred.verify(vk):
        raise IntegrityError("aggregated credential does not verify; a partial was malformed")
    return cred


# --------------------------------------------------------------------------
# Showing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ShowProof:
    h: G1
    sigma: G1
    kappa: G2
    nu: G1
    zeta: G1
    proof: FiatShamirProof
    value: int | None = None

    @property
    def disclosed(self) -> bool:
        return self.value is not None

    def to_bytes(self) -> bytes:
        head = b"\x01" + _u64(self.value) if self.disclosed else b"\x00"
        return (
            head
            + self.h.to_bytes()
            + self.sigma.to_bytes()
            + self.kappa.to_bytes()
            + self.nu.to_bytes()
            + self.zeta.to_bytes()
            + self.proof.to_bytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ShowProof":
        if not data or data[0] not in (0, 1):
            raise EncodingError("show proof: bad disclosure flag")
        pos = 1
        value = None
        if data[0] == 1:
            value = int.from_bytes(data[1:9], "big")
            pos = 9
        if len(data) < pos + 48 * 4 + 96:
            raise EncodingError("truncated show proof")
        h = g1_from_bytes(data[pos : pos + 48])
        sigma = g1_from_bytes(data[pos + 48 : pos + 96])
        kappa = g2_from_bytes(data[pos + 96 : pos + 192])
        nu = g1_from_bytes(data[pos + 192 : pos + 240])
        zeta = g1_from_bytes(data[pos + 240 : pos + 288])
        proof = FiatShamirProof.from_bytes(data[pos + 288 :])
        return cls(h, sigma, kappa, nu, zeta, proof, value)


def _show_statement(vk: VerificationKey, auction_id: bytes, p: ShowProof) -> tuple[bytes, list[Equation]]:
    alpha, beta_s, beta_v = vk.tables
    g2 = group().g2_table
    if p.disclosed:
        # witnesses: 0 = s, 1 = t
        attr = Equation(p.kappa - alpha.point, (beta_s, g2), (0, 1))
        label = SHOW_DISCLOSED_LABEL
    else:
        # witnesses: 0 = s, 1 = t, 2 = v
        attr = Equation(p.kappa - alpha.point, (beta_s, g2, beta_v), (0, 1, 2))
        label = SHOW_LABEL
    return label, [
        attr,
        Equation(p.nu, (p.h,), (1,)),
        Equation(p.zeta, (auction_base(auction_id),), (0,)),
    ]


def _show_context(auction_id: bytes, context: bytes, value: int | None) -> bytes:
    disclosed = b"" if value is None else _u64(value)
    return len(auction_id).to_bytes(4, "big") + auction_id + disclosed + context


def show(
    credential: Credential,
    auction_id: bytes,
    vk: VerificationKey,
    disclose: bool = False,
    context: bytes = b"",
    rng: RandomSource | None = None,
) -> ShowProof:
    """Re-randomize the credential and prove possession bound to ``auction_id`` and ``context``."""
    alpha, beta_s, beta_v = vk.tables
    g2 = group().g2_table
    s, v = credential.sequence, credential.value
    r = random_scalar(rng)
    t = random_scalar(rng)
    h = credential.h * r
    sigma = credential.sigma * r
    if disclose:
        kappa = alpha.point + G2Table.msm([beta_s, g2], [s, t])
        witnesses = [s, t]
    else:
        kappa = alpha.point + G2Table.msm([beta_s, g2, beta_v], [s, t, v])
        witnesses = [s, t, v]
    nu = h * t
    zeta = zeta_tag(s, auction_id)
    value = v if disclose else None
    stub = ShowProof(h, sigma, kappa, nu, zeta, FiatShamirProof(b"", 0, ()), value)
    label, equations = _show_statement(vk, auction_id, stub)
    proof = prove_linear(label, equations, witnesses, _show_context(auction_id, context, value), rng)
    return ShowProof(h, sigma, kappa, nu, zeta, proof, value)


def verify_show(vk: VerificationKey, auction_id: bytes, p: ShowProof, context: bytes = b"") -> bool:
    if p.h.is_identity() or p.zeta.is_identity():
        return False
    if len(p.proof.responses) != (2 if p.disclosed else 3):
        return False
    label, equations = _show_statement(vk, auction_id, p)
    if not verify_linear(p.proof, equations, _show_context(auction_id, context, p.value), label):
        return False
    kappa = p.kappa
    if p.disclosed:
        kappa = kappa + vk.tables[2].mul(p.value)
    return pairing_check([(p.h, kappa), (-(p.sigma + p.nu), group().g2)])


def issue(
    shares: Sequence[AuthorityKeyShare],
    vk: VerificationKey,
    value: int,
    rng: RandomSource | None = None,
    sequence: int | None = None,
) -> Credential:
    """Run the full request / blind-sign / aggregate round trip in-process."""
    s = random_scalar(rng) if sequence is None else sequence
    req, secret = prepare_request(value, s, rng)
    return unblind_and_aggregate([blind_sign(sh, req) for sh in shares], secret, vk)


def threshold_subsets(n: int, size: int) -> list[tuple[int, ...]]:
    """All ``size``-subsets of authority indices 1..n."""
    return list(combinations(range(1, n + 1), size))
