"""Group setting, Pedersen commitments and Fiat-Shamir proofs.

Everything here works over BLS12-381 through :mod:`sealedbid.backend`.
Points are written additively; scalars are plain Python ints reduced
modulo :data:`ORDER`.

Byte encodings (version 1):

* G1 point: 48-byte ZCash compressed encoding; G2 point: 96 bytes.
* Scalar: 32 bytes, big-endian, must be < ORDER.
* :class:`FiatShamirProof`: ``u8 len(label) | label | scalar challenge |
  u8 count | count * scalar``.
"""
from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass
from functools import cache, lru_cache
from itertools import count
from typing import Protocol, Sequence, Union

from .backend import G1, G2, G1Table, G2Table, pairing, pairing_check  # noqa: F401

CURVE_ID = "BLS12-381"
ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
FIELD_MODULUS = int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f6241eabfffeb153ffffb9feffffffffaaab", 16
)
PROTOCOL_VERSION = b"sealedbid/v1"
SCALAR_BYTES = 32
G1_BYTES = 48
G2_BYTES = 96

Point = Union[G1, G2]
Base = Union[G1, G2, G1Table, G2Table]

_sysrand = secrets.SystemRandom()


class RandomSource(Protocol):
    def randrange(self, start: int, stop: int) -> int: ...


class EncodingError(ValueError):
    """Raised when bytes do not decode to a valid object."""


def random_scalar(rng: RandomSource | None = None) -> int:
    return (rng or _sysrand).randrange(1, ORDER)


def scalar_to_bytes(k: int) -> bytes:
    return (k % ORDER).to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise EncodingError(f"scalar: expected {SCALAR_BYTES} bytes, got {len(data)}")
    k = int.from_bytes(data, "big")
    if k >= ORDER:
        raise EncodingError("scalar is not reduced")
    return k


def g1_from_bytes(data: bytes) -> G1:
    try:
        return G1.from_bytes(bytes(data))
    except ValueError as exc:
        raise EncodingError(str(exc)) from exc


def g2_from_bytes(data: bytes) -> G2:
    try:
        return G2.from_bytes(bytes(data))
    except ValueError as exc:
        raise EncodingError(str(exc)) from exc


def _frame(*parts: bytes) -> bytes:
    return b"".join(len(p).to_bytes(4, "big") + p for p in parts)


@lru_cache(maxsize=4096)
def hash_to_group(label: bytes, payload: bytes) -> G1:
    """Deterministically map ``(label, payload)`` to a G1 element of unknown discrete log.

    Try-and-increment on the x coordinate followed by cofactor clearing.
    Both backends produce identical points because the search runs here in
    Python and only the cofactor multiplication is delegated.
    """
    if not label:
        raise ValueError("hash_to_group needs a non-empty domain label")
    p = FIELD_MODULUS
    for ctr in count():
        digest = hashlib.sha512(_frame(PROTOCOL_VERSION, b"hash-to-g1", label, payload, ctr.to_bytes(4, "big"))).digest()
        x = int.from_bytes(digest, "big") % p
        rhs = (x * x * x + 4) % p
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p != rhs:
            continue
        if digest[0] & 1:
            y = p - y
        point = G1.from_curve_point(x.to_bytes(48, "big") + y.to_bytes(48, "big"))
        if not point.is_identity():
            return point
    raise AssertionError("unreachable")


@lru_cache(maxsize=256)
def g1_table(point_bytes: bytes) -> G1Table:
    """Fixed-base table for a long-lived G1 point, cached by encoding."""
    return G1Table(G1.from_bytes(point_bytes))


@lru_cache(maxsize=256)
def g2_table(point_bytes: bytes) -> G2Table:
    return G2Table(G2.from_bytes(point_bytes))


@dataclass(frozen=True)
class GroupContext:
    """The pairing setting: generators, commitment base and order."""

    curve: str
    order: int
    g1: G1
    g2: G2
    h1: G1
    g1_table: G1Table
    g2_table: G2Table
    h1_table: G1Table


@cache
def group() -> GroupContext:
    g1 = G1.generator()
    g2 = G2.generator()
    h1 = hash_to_group(b"pedersen-h", CURVE_ID.encode())
    return GroupContext(CURVE_ID, ORDER, g1, g2, h1, G1Table(g1), G2Table(g2), G1Table(h1))


# --------------------------------------------------------------------------
# Pedersen commitments
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PedersenCommitment:
    point: G1

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PedersenCommitment":
        return cls(g1_from_bytes(data))


def pedersen_commit(value: int, blinding: int) -> PedersenCommitment:
    ctx = group()
    return PedersenCommitment(G1Table.msm([ctx.g1_table, ctx.h1_table], [value, blinding]))


def verify_open(c: PedersenCommitment, value: int, blinding: int) -> bool:
    return pedersen_commit(value, blinding).point == c.point


# --------------------------------------------------------------------------
# Fiat-Shamir proofs of knowledge for linear relations
# --------------------------------------------------------------------------


class Transcript:
    """Running SHA-512 over length-framed items; the challenge is reduced mod ORDER."""

    def __init__(self, label: bytes):
        self._h = hashlib.sha512()
        self.absorb(PROTOCOL_VERSION)
        self.absorb(label)

    def absorb(self, data: bytes) -> None:
        self._h.update(len(data).to_bytes(4, "big"))
        self._h.update(data)

    def absorb_point(self, p) -> None:
        self.absorb(_point_of(p).to_bytes())

    def challenge(self) -> int:
        return int.from_bytes(self._h.digest(), "big") % ORDER


def _point_of(base: Base) -> Point:
    return base.point if isinstance(base, (G1Table, G2Table)) else base


def _lincomb(bases: Sequence[Base], scalars: Sequence[int]):
    """Sum of bases[i] * scalars[i]; tables go through the fixed-base path."""
    tables, tk, points, pk = [], [], [], []
    for b, k in zip(bases, scalars):
        if isinstance(b, (G1Table, G2Table)):
            tables.append(b)
            tk.append(k)
        else:
            points.append(b)
            pk.append(k)
    acc = None
    if tables:
        acc = type(tables[0]).msm(tables, tk)
    if points:
        part = type(points[0]).msm(points, pk)
        acc = part if acc is None else acc + part
    return acc


@dataclass(frozen=True)
class Equation:
    """``result == sum(bases[i] * witness[indices[i]])``; all elements in one group."""

    result: Point
    bases: tuple
    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.indices) or not self.bases:
            raise ValueError("equation needs one witness index per base")


@dataclass(frozen=True)
class FiatShamirProof:
    label: bytes
    challenge: int
    responses: tuple[int, ...]

    def to_bytes(self) -> bytes:
        out = bytes([len(self.label)]) + self.label + scalar_to_bytes(self.challenge)
        out += bytes([len(self.responses)]) + b"".join(scalar_to_bytes(r) for r in self.responses)
        return out

    @classmethod
    def from_bytes(cls, data: bytes) -> "FiatShamirProof":
        proof, rest = cls.read(data)
        if rest:
            raise EncodingError("trailing bytes after proof")
        return proof

    @classmethod
    def read(cls, data: bytes) -> tuple["FiatShamirProof", bytes]:
        try:
            n = data[0]
            label = bytes(data[1 : 1 + n])
            pos = 1 + n
            c = scalar_from_bytes(data[pos : pos + 32])
            m = data[pos + 32]
            pos += 33
            rs = tuple(scalar_from_bytes(data[pos + 32 * i : pos + 32 * (i + 1)]) for i in range(m))
        except IndexError as exc:
            raise EncodingError("truncated proof") from exc
        return cls(label, c, rs), bytes(data[pos + 32 * m :])


def _transcript(label: bytes, context: bytes, equations: Sequence[Equation]) -> Transcript:
    tr = Transcript(label)
    tr.absorb(context)
    for eq in equations:
        tr.absorb(bytes(eq.indices))
        for b in eq.bases:
            tr.absorb_point(b)
    for eq in equations:
        tr.absorb_point(eq.result)
    return tr


def prove_linear(
    label: bytes,
    equations: Sequence[Equation],
    witnesses: Sequence[int],
    context: bytes = b"",
    rng: RandomSource | None = None,
) -> FiatShamirProof:
    """Prove knowledge of ``witnesses`` satisfying every equation at once.

    Responses are ``w_i - c * x_i``. A false statement still yields a proof
    object; it just does not verify.
    """
    nonces = [random_scalar(rng) for _ in witnesses]
    tr = _transcript(label, context, equations)
    for eq in equations:
        tr.absorb_point(_lincomb(eq.bases, [nonces[i] for i in eq.indices]))
    c = tr.challenge()
    responses = tuple((w - c * x) % ORDER for w, x in zip(nonces, witnesses))
    return FiatShamirProof(label, c, responses)


def verify_linear(
    proof: FiatShamirProof,
    equations: Sequence[Equation],
    context: bytes = b"",
    label: bytes | None = None,
) -> bool:
    if label is not None and proof.label != label:
        return False
    n = len(proof.responses)
    if any(i >= n for eq in equations for i in eq.indices):
        return False
    c = proof.challenge
    tr = _transcript(proof.label, context, equations)
    for eq in equations:
        bases = list(eq.bases) + [eq.result]
        scalars = [proof.responses[i] for i in eq.indices] + [c]
        tr.absorb_point(_lincomb(bases, scalars))
    return tr.challenge() == c


def prove_representation(
    bases: Sequence[Base],
    exponents: Sequence[int],
    result: Point,
    context: bytes = b"",
    label: bytes = b"representation",
    rng: RandomSource | None = None,
) -> FiatShamirProof:
    """Prove knowledge of ``exponents`` with ``result == sum(bases[i] * exponents[i])``."""
    eq = Equation(result, tuple(bases), tuple(range(len(bases))))
    return prove_linear(label, [eq], exponents, context, rng)


def verify_representation(
    proof: FiatShamirProof,
    bases: Sequence[Base],
    result: Point,
    context: bytes = b"",
) -> bool:
    if len(proof.responses) != len(bases):
        return False
    eq = Equation(result, tuple(bases), tuple(range(len(bases))))
    return verify_linear(proof, [eq], context)


# --------------------------------------------------------------------------
# Schnorr signatures (ledger addresses)
# --------------------------------------------------------------------------

SIGNATURE_LABEL = b"signature"


@dataclass(frozen=True)
class KeyPair:
    secret: int
    public: G1

    @classmethod
    def generate(cls, rng: RandomSource | None = None) -> "KeyPair":
        sk = random_scalar(rng)
        return cls(sk, group().g1_table.mul(sk))

    @property
    def address(self) -> bytes:
        return self.public.to_bytes()


def sign(key: KeyPair, message: bytes, rng: RandomSource | None = None) -> FiatShamirProof:
    return prove_representation([group().g1_table], [key.secret], key.public, message, SIGNATURE_LABEL, rng)


def verify_signature(public: G1, message: bytes, signature: FiatShamirProof) -> bool:
    if signature.label != SIGNATURE_LABEL or public.is_identity():
        return False
    return verify_representation(signature, [group().g1_table], public, message)
