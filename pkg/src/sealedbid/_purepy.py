"""Pure-Python BLS12-381 backend on top of ``py_ecc``.

Mirrors the surface of the compiled ``_native`` module exactly: additive
G1/G2/Gt types, fixed-base tables, multi-scalar multiplication and
product-of-pairings checks, with ZCash compressed encodings. It is slow
(pairings take on the order of a second) and exists so the package keeps
working where the extension could not be built.
"""
from __future__ import annotations

from py_ecc import optimized_bls12_381 as _bls
from py_ecc.bls import point_compression as _pc
from py_ecc.optimized_bls12_381 import FQ, FQ2, FQ12

NAME = "pure"

_R = _bls.curve_order
_Q = _bls.field_modulus


def _decode_coord(data: bytes) -> int:
    v = int.from_bytes(data, "big")
    if v >= _Q:
        raise ValueError("coordinate is not a field element")
    return v


class _Point:
    __slots__ = ("_pt",)
    _zero: tuple
    _gen: tuple
    _b: object
    _clen: int

    def __init__(self, pt):
        self._pt = pt

    @classmethod
    def generator(cls):
        return cls(cls._gen)

    @classmethod
    def identity(cls):
        return cls(cls._zero)

    def is_identity(self) -> bool:
        return _bls.is_inf(self._pt)

    def __add__(self, other):
        return type(self)(_bls.add(self._pt, other._pt))

    def __sub__(self, other):
        return type(self)(_bls.add(self._pt, _bls.neg(other._pt)))

    def __neg__(self):
        return type(self)(_bls.neg(self._pt))

    def __mul__(self, k: int):
        return type(self)(_bls.multiply(self._pt, k % _R))

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return _bls.eq(self._pt, other._pt)

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes()[:8].hex()}...)"

    @classmethod
    def msm(cls, points, scalars):
        if len(points) != len(scalars):
            raise ValueError("points and scalars differ in length")
        acc = cls._zero
        for p, k in zip(points, scalars):
            acc = _bls.add(acc, _bls.multiply(p._pt, k % _R))
        return cls(acc)

    def _check_subgroup(self):
        if not _bls.is_inf(_bls.multiply(self._pt, _R)):
            raise ValueError("invalid or off-subgroup point encoding")
        return self


class G1(_Point):
    __slots__ = ()
    _zero = _bls.Z1
    _gen = _bls.G1
    _b = _bls.b
    _clen = 48

    @classmethod
    def from_bytes(cls, data: bytes) -> "G1":
        if len(data) != 48:
            raise ValueError(f"compressed point: expected 48 bytes, got {len(data)}")
        try:
            pt = _pc.decompress_G1(int.from_bytes(data, "big"))
        except ValueError as exc:
            raise ValueError("invalid or off-subgroup point encoding") from exc
        return cls(pt)._check_subgroup()

    @classmethod
    def from_curve_point(cls, data: bytes) -> "G1":
        if len(data) != 96:
            raise ValueError(f"uncompressed point: expected 96 bytes, got {len(data)}")
        pt = (FQ(_decode_coord(data[:48])), FQ(_decode_coord(data[48:])), FQ.one())
        if not _bls.is_on_curve(pt, _bls.b):
            raise ValueError("point is not on the curve")
        return cls(_bls.multiply_clear_cofactor_G1(pt))

    def to_bytes(self) -> bytes:
        return _pc.compress_G1(self._pt).to_bytes(48, "big")


class G2(_Point):
    __slots__ = ()
    _zero = _bls.Z2
    _gen = _bls.G2
    _b = _bls.b2
    _clen = 96

    @classmethod
    def from_bytes(cls, data: bytes) -> "G2":
        if len(data) != 96:
            raise ValueError(f"compressed point: expected 96 bytes, got {len(data)}")
        try:
            pt = _pc.decompress_G2((int.from_bytes(data[:48], "big"), int.from_bytes(data[48:], "big")))
        except ValueError as exc:
            raise ValueError("invalid or off-subgroup point encoding") from exc
        return cls(pt)._check_subgroup()

    @classmethod
    def from_curve_point(cls, data: bytes) -> "G2":
        if len(data) != 192:
            raise ValueError(f"uncompressed point: expected 192 bytes, got {len(data)}")
        c = [_decode_coord(data[i : i + 48]) for i in range(0, 192, 48)]
        # ZCash order is c1 || c0 for each coordinate
        pt = (FQ2([c[1], c[0]]), FQ2([c[3], c[2]]), FQ2.one())
        if not _bls.is_on_curve(pt, _bls.b2):
            raise ValueError("point is not on the curve")
        return cls(_bls.multiply_clear_cofactor_G2(pt))

    def to_bytes(self) -> bytes:
        z1, z2 = _pc.compress_G2(self._pt)
        return z1.to_bytes(48, "big") + z2.to_bytes(48, "big")


class Gt:
    """Target group element, written additively to match G1/G2."""

    __slots__ = ("_v",)

    def __init__(self, v: FQ12):
        self._v = v

    @classmethod
    def identity(cls) -> "Gt":
        return cls(FQ12.one())

    def __add__(self, other):
        return Gt(self._v * other._v)

    def __sub__(self, other):
        return Gt(self._v / other._v)

    def __neg__(self):
        return Gt(FQ12.one() / self._v)

    def __mul__(self, k: int):
        return Gt(self._v ** (k % _R))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Gt):
            return NotImplemented
        return self._v == other._v

    def is_identity(self) -> bool:
        return self._v == FQ12.one()


class _Table:
    # no precomputation here; the type exists so callers can stay backend-agnostic
    __slots__ = ("_point",)

    def __init__(self, point):
        self._point = point

    @property
    def point(self):
        return self._point

    def mul(self, k: int):
        return self._point * k

    @classmethod
    def msm(cls, tables, scalars):
        return type(tables[0]._point).msm([t._point for t in tables], scalars) if tables else cls._group.identity()


class G1Table(_Table):
    __slots__ = ()
    _group = G1


class G2Table(_Table):
    __slots__ = ()
    _group = G2


def pairing(p: G1, q: G2) -> Gt:
    return Gt(_bls.pairing(q._pt, p._pt))


def pairing_check(pairs) -> bool:
    acc = FQ12.one()
    for p, q in pairs:
        acc = acc * _bls.pairing(q._pt, p._pt, final_exponentiate=False)
    return _bls.final_exponentiate(acc) == FQ12.one()
